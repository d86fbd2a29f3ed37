//! `coxgibbs fit` — run a sampler on a dataset and write the artifact set:
//! `<prefix>.report.json`, `<prefix>.samples.csv`, `<prefix>.samples.json`
//! (sidecar), and `<prefix>.manifest.json`.

use std::path::PathBuf;

use clap::Args;
use coxgibbs::export::{
    write_samples_csv, ChainSidecar, FitReport, Json, ReportConfig,
};
use coxgibbs::{
    build_pair_contrasts, correct, default_covariates, load_csv, run_mh, summarize, Chain,
    ChainSummary, CoxError, FitConfig, PriorSpec, SamplerKind, Ties,
};

use crate::manifest::{read, write_artifact, Manifest};
use crate::{threads_from_env, usage, AppError, AppResult};

/// Credible-interval miscoverage used in fit reports.
const REPORT_ALPHA: f64 = 0.05;

#[derive(Args)]
pub struct FitArgs {
    /// Sampler: 'gs4cox' or 'mh'.
    #[arg(long, default_value = "gs4cox")]
    pub method: String,
    /// Input dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    #[arg(long, default_value = "status")]
    pub status_col: String,
    /// Status value that marks an observed event.
    #[arg(long, default_value_t = 1)]
    pub event_code: i64,
    /// Covariate columns, comma-separated; default is every column other
    /// than the time and status columns.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Total sweeps M.
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Burn-in sweeps m* (must be smaller than --iters).
    #[arg(long, default_value_t = 500)]
    pub burnin: usize,
    /// Learning rate weighting the loss against the prior.
    #[arg(long, default_value_t = 1.0)]
    pub w: f64,
    /// Isotropic prior variance v in beta ~ N(0, v I).
    #[arg(long, default_value_t = 100.0)]
    pub prior_var: f64,
    /// Tie handling for partial-likelihood quantities: 'breslow' or 'efron'.
    #[arg(long, default_value = "breslow")]
    pub ties: String,
    /// Skip the finite-sample correction (gs4cox only).
    #[arg(long)]
    pub no_correction: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prefix for the output artifacts.
    #[arg(long)]
    pub out_prefix: Option<PathBuf>,
    /// Replay a previous fit from its manifest (other flags are ignored
    /// except --out-prefix, which overrides the artifact location).
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
}

pub struct ResolvedFit {
    pub method: SamplerKind,
    pub data: PathBuf,
    pub time_col: String,
    pub status_col: String,
    pub event_code: i64,
    /// Empty means "resolve from the header at load time".
    pub covariates: Vec<String>,
    pub iterations: usize,
    pub burn_in: usize,
    pub learning_rate: f64,
    pub prior_variance: f64,
    pub ties: Ties,
    pub correction: bool,
    pub seed: u64,
    pub out_prefix: PathBuf,
}

fn resolve_from_flags(args: &FitArgs) -> AppResult<ResolvedFit> {
    let method: SamplerKind = args.method.parse().map_err(|e: CoxError| usage(e.to_string()))?;
    let ties: Ties = args.ties.parse().map_err(|e: CoxError| usage(e.to_string()))?;
    let data = args
        .data
        .clone()
        .ok_or_else(|| usage("--data is required"))?;
    let out_prefix = args
        .out_prefix
        .clone()
        .ok_or_else(|| usage("--out-prefix is required"))?;
    if args.iters == 0 {
        return Err(usage("--iters must be positive"));
    }
    if args.burnin >= args.iters {
        return Err(usage(format!(
            "--burnin ({}) must be smaller than --iters ({})",
            args.burnin, args.iters
        )));
    }
    if !(args.w > 0.0) || !args.w.is_finite() {
        return Err(usage(format!(
            "--w must be positive and finite, got {}",
            args.w
        )));
    }
    if !(args.prior_var > 0.0) || !args.prior_var.is_finite() {
        return Err(usage(format!(
            "--prior-var must be positive and finite, got {}",
            args.prior_var
        )));
    }
    Ok(ResolvedFit {
        method,
        data,
        time_col: args.time_col.clone(),
        status_col: args.status_col.clone(),
        event_code: args.event_code,
        covariates: args.covariates.clone(),
        iterations: args.iters,
        burn_in: args.burnin,
        learning_rate: args.w,
        prior_variance: args.prior_var,
        ties,
        correction: !args.no_correction && method == SamplerKind::Gs4Cox,
        seed: args.seed,
        out_prefix,
    })
}

fn resolve_from_manifest(
    path: &PathBuf,
    out_prefix_override: Option<PathBuf>,
) -> AppResult<ResolvedFit> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        AppError::Runtime(CoxError::InvalidArgument(format!(
            "manifest is not valid JSON: {e}"
        )))
    })?;
    let sub = read::str_field(&v, "subcommand")?;
    if sub != "fit" {
        return Err(AppError::Runtime(CoxError::InvalidArgument(format!(
            "manifest describes a '{sub}' run, not a fit"
        ))));
    }
    let cfg = v
        .get("config")
        .ok_or_else(|| AppError::Runtime(CoxError::InvalidArgument("manifest has no config".into())))?;
    let method: SamplerKind = read::str_field(cfg, "method")?.parse()?;
    let ties: Ties = read::str_field(cfg, "ties")?.parse()?;
    let out_prefix = match out_prefix_override {
        Some(p) => p,
        None => PathBuf::from(read::str_field(
            v.get("outputs").unwrap_or(&serde_json::Value::Null),
            "prefix",
        )?),
    };
    Ok(ResolvedFit {
        method,
        data: PathBuf::from(read::str_field(cfg, "data")?),
        time_col: read::str_field(cfg, "time_col")?,
        status_col: read::str_field(cfg, "status_col")?,
        event_code: read::i64_field(cfg, "event_code")?,
        covariates: read::str_list_field(cfg, "covariates")?,
        iterations: read::u64_field(cfg, "iterations")? as usize,
        burn_in: read::u64_field(cfg, "burn_in")? as usize,
        learning_rate: read::f64_field(cfg, "learning_rate")?,
        prior_variance: read::f64_field(cfg, "prior_variance")?,
        ties,
        correction: read::bool_field(cfg, "correction")?,
        seed: read::u64_field(cfg, "seed")?,
        out_prefix,
    })
}

struct FitOutcome {
    chain: Chain,
    summary: ChainSummary,
    acceptance_rate: Option<f64>,
}

fn execute(resolved: &ResolvedFit, threads: usize) -> Result<FitOutcome, CoxError> {
    let loaded = load_csv(
        &resolved.data,
        &resolved.time_col,
        &resolved.status_col,
        &resolved.covariates,
        resolved.event_code,
    )?;
    let data = loaded.dataset;
    let cfg = FitConfig {
        iterations: resolved.iterations,
        burn_in: resolved.burn_in,
        learning_rate: resolved.learning_rate,
        seed: resolved.seed,
        prior: PriorSpec::isotropic(data.p(), resolved.prior_variance)?,
        threads,
        init: None,
    };
    let (chain, acceptance_rate) = match resolved.method {
        SamplerKind::Gs4Cox => {
            let pairs = build_pair_contrasts(&data)?;
            let chain = coxgibbs::run(&pairs, &cfg)?;
            let chain = if resolved.correction {
                correct(&chain, &data, resolved.ties)?
            } else {
                chain
            };
            (chain, None)
        }
        SamplerKind::Mh => {
            let report = run_mh(&data, &cfg, resolved.ties, None)?;
            (report.chain, Some(report.acceptance_rate))
        }
    };
    let summary = summarize(&chain, REPORT_ALPHA)?;
    Ok(FitOutcome {
        chain,
        summary,
        acceptance_rate,
    })
}

fn artifact_paths(prefix: &PathBuf) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let base = prefix.display().to_string();
    (
        PathBuf::from(format!("{base}.report.json")),
        PathBuf::from(format!("{base}.samples.csv")),
        PathBuf::from(format!("{base}.samples.json")),
        PathBuf::from(format!("{base}.manifest.json")),
    )
}

pub fn run(args: FitArgs) -> AppResult<()> {
    let resolved = match &args.from_manifest {
        Some(path) => resolve_from_manifest(path, args.out_prefix.clone())?,
        None => resolve_from_flags(&args)?,
    };
    let threads = threads_from_env()?;

    // Materialize the covariate list so the manifest records the resolved
    // configuration rather than "whatever the header says".
    let mut resolved = resolved;
    if resolved.covariates.is_empty() {
        resolved.covariates =
            default_covariates(&resolved.data, &resolved.time_col, &resolved.status_col)?;
    }

    let outcome = execute(&resolved, threads)?;
    let (report_path, samples_path, sidecar_path, manifest_path) =
        artifact_paths(&resolved.out_prefix);

    let (hash, manifest_json) = Manifest {
        subcommand: "fit",
        config: vec![
            ("method", Json::Str(resolved.method.as_str().to_string())),
            ("data", Json::Str(resolved.data.display().to_string())),
            ("time_col", Json::Str(resolved.time_col.clone())),
            ("status_col", Json::Str(resolved.status_col.clone())),
            ("event_code", Json::I64(resolved.event_code)),
            (
                "covariates",
                Json::Arr(
                    resolved
                        .covariates
                        .iter()
                        .map(|c| Json::Str(c.clone()))
                        .collect(),
                ),
            ),
            ("iterations", Json::U64(resolved.iterations as u64)),
            ("burn_in", Json::U64(resolved.burn_in as u64)),
            ("learning_rate", Json::F64(resolved.learning_rate)),
            ("prior_variance", Json::F64(resolved.prior_variance)),
            ("ties", Json::Str(resolved.ties.as_str().to_string())),
            ("correction", Json::Bool(resolved.correction)),
            ("alpha", Json::F64(REPORT_ALPHA)),
            ("seed", Json::U64(resolved.seed)),
        ],
        inputs: vec![("data", Json::Str(resolved.data.display().to_string()))],
        outputs: vec![
            (
                "prefix",
                Json::Str(resolved.out_prefix.display().to_string()),
            ),
            ("report", Json::Str(report_path.display().to_string())),
            ("samples", Json::Str(samples_path.display().to_string())),
            ("sidecar", Json::Str(sidecar_path.display().to_string())),
            ("manifest", Json::Str(manifest_path.display().to_string())),
        ],
    }
    .finalize();

    let report = FitReport {
        method: resolved.method.as_str().to_string(),
        estimates: outcome.summary.mean.clone(),
        ci_lo: outcome.summary.ci_lo.clone(),
        ci_hi: outcome.summary.ci_hi.clone(),
        ess: outcome.summary.ess.clone(),
        ess_avg: outcome.summary.ess_avg,
        esr: outcome.summary.esr,
        acceptance_rate: outcome.acceptance_rate,
        correction: outcome.chain.correction().map(|s| s.to_vec()),
        config: ReportConfig {
            iterations: resolved.iterations,
            burn_in: resolved.burn_in,
            learning_rate: resolved.learning_rate,
            prior_variance: resolved.prior_variance,
            ties: resolved.ties.as_str().to_string(),
            seed: resolved.seed,
            threads,
            corrected: outcome.chain.is_corrected(),
        },
        manifest_hash: hash.clone(),
    };

    let sidecar = ChainSidecar {
        seed: resolved.seed,
        iterations: resolved.iterations,
        burn_in: resolved.burn_in,
        learning_rate: resolved.learning_rate,
        corrected: outcome.chain.is_corrected(),
        correction: outcome.chain.correction().map(|s| s.to_vec()),
        wall_seconds: outcome.chain.wall_seconds(),
        acceptance_rate: outcome.acceptance_rate,
        manifest_hash: hash.clone(),
    };

    let mut samples = Vec::new();
    write_samples_csv(&mut samples, &outcome.chain).map_err(CoxError::Io)?;

    write_artifact(&report_path, &report.to_json())?;
    write_artifact(
        &samples_path,
        &String::from_utf8(samples).expect("ascii csv"),
    )?;
    write_artifact(&sidecar_path, &sidecar.to_json())?;
    write_artifact(&manifest_path, &manifest_json)?;

    println!(
        "fit complete: {} [manifest {}]",
        report_path.display(),
        &hash[..12]
    );
    Ok(())
}
