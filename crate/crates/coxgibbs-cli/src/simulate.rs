//! `coxgibbs simulate` — synthetic dataset generation.

use std::path::{Path, PathBuf};

use clap::Args;
use coxgibbs::export::{write_dataset_csv, Json};
use coxgibbs::{generate, SynthConfig};

use crate::manifest::{write_artifact, Manifest};
use crate::{usage, AppResult};

#[derive(Args)]
pub struct SimulateArgs {
    /// Subjects to generate (at least 2).
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// True coefficients, comma-separated; length sets the covariate count.
    #[arg(long, default_value = "1.0,0.5,-1.5,3.0")]
    pub beta: String,
    /// Round observed times to the nearest multiple of this step
    /// (0 disables rounding).
    #[arg(long, default_value_t = 0.001)]
    pub rounding: f64,
    /// Rate of the exponential censoring time.
    #[arg(long, default_value_t = 1.0)]
    pub censor_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path; the manifest lands next to it.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_f64_list(text: &str, flag: &str) -> AppResult<Vec<f64>> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    match values {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(usage(format!(
            "{flag} must be a comma-separated list of finite numbers, got '{text}'"
        ))),
    }
}

/// `foo.csv` → `foo.manifest.json`; extensionless paths get the suffix
/// appended.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn run(args: SimulateArgs) -> AppResult<()> {
    if args.n < 2 {
        return Err(usage(format!("--n must be at least 2, got {}", args.n)));
    }
    let beta = parse_f64_list(&args.beta, "--beta")?;
    if !(args.rounding >= 0.0) || !args.rounding.is_finite() {
        return Err(usage(format!(
            "--rounding must be non-negative and finite, got {}",
            args.rounding
        )));
    }
    if !(args.censor_rate > 0.0) || !args.censor_rate.is_finite() {
        return Err(usage(format!(
            "--censor-rate must be positive and finite, got {}",
            args.censor_rate
        )));
    }

    let cfg = SynthConfig {
        n: args.n,
        beta0: beta.clone(),
        rounding: args.rounding,
        censor_rate: args.censor_rate,
        seed: args.seed,
    };
    let data = generate(&cfg)?;

    let manifest_path = manifest_path_for(&args.out);
    let (hash, manifest_json) = Manifest {
        subcommand: "simulate",
        config: vec![
            ("n", Json::U64(args.n as u64)),
            ("beta", Json::from_f64_slice(&beta)),
            ("rounding", Json::F64(args.rounding)),
            ("censor_rate", Json::F64(args.censor_rate)),
            ("seed", Json::U64(args.seed)),
        ],
        inputs: vec![],
        outputs: vec![
            ("dataset", Json::Str(args.out.display().to_string())),
            ("manifest", Json::Str(manifest_path.display().to_string())),
        ],
    }
    .finalize();

    let mut csv = Vec::new();
    write_dataset_csv(&mut csv, &data).map_err(coxgibbs::CoxError::Io)?;
    write_artifact(&args.out, &String::from_utf8(csv).expect("ascii csv"))?;
    write_artifact(&manifest_path, &manifest_json)?;
    println!(
        "simulate: wrote {} ({} rows, {} events) [manifest {}]",
        args.out.display(),
        data.n(),
        data.event_count(),
        &hash[..12]
    );
    Ok(())
}
