//! Gibbs posterior calibration (GPC) of the learning rate w.
//!
//! The learning rate controls how strongly the composite loss is weighted
//! against the prior, and with it the spread of the Gibbs posterior. GPC
//! tunes w so that the posterior credible region attains its nominal
//! frequentist coverage: each round fits the sampler to B bootstrap
//! resamples of the data at the current w, measures how often the resulting
//! regions cover the original-data maximum partial-likelihood estimate, and
//! moves w by the coverage error scaled by a 1/k Robbins-Monro step.

use crate::data::{build_pair_contrasts, SurvivalDataset};
use crate::diagnostics;
use crate::error::{CoxError, Result};
use crate::gs4cox::{self, FitConfig};
use crate::mh;
use crate::partial::{self, Ties};
use crate::rng::{substream, TAG_BOOT, TAG_INNER};

/// Which sampler the calibration drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Gs4Cox,
    Mh,
}

impl SamplerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SamplerKind::Gs4Cox => "gs4cox",
            SamplerKind::Mh => "mh",
        }
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = CoxError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gs4cox" => Ok(SamplerKind::Gs4Cox),
            "mh" => Ok(SamplerKind::Mh),
            other => Err(CoxError::InvalidArgument(format!(
                "unknown method '{other}' (expected 'gs4cox' or 'mh')"
            ))),
        }
    }
}

/// Calibration settings. `inner` is the template for every bootstrap fit;
/// its `learning_rate` is the starting value of w and its seed is replaced
/// per replicate.
#[derive(Debug, Clone)]
pub struct GpcConfig {
    /// Bootstrap replicates per round (B).
    pub bootstrap_count: usize,
    /// Nominal miscoverage: the region targets 1 − alpha.
    pub alpha: f64,
    /// Stop once |coverage − (1 − alpha)| ≤ tol.
    pub tol: f64,
    /// Hard bound on calibration rounds.
    pub max_rounds: usize,
    /// Template for the inner sampler runs.
    pub inner: FitConfig,
    pub ties: Ties,
    /// Translate inner Gibbs chains by the finite-sample correction before
    /// reading intervals off them (ignored by the Metropolis sampler).
    pub apply_correction: bool,
    /// Use per-coordinate level alpha/P instead of alpha, making the
    /// rectangular region conservative at the joint level.
    pub bonferroni: bool,
    /// Seed for resampling and inner-fit seeds.
    pub seed: u64,
}

impl GpcConfig {
    /// Defaults: B = 100, alpha = 0.05, tol = 0.001, up to 1000 rounds,
    /// inner chains of 600 sweeps (200 burn-in) starting from w = 1.
    pub fn with_defaults(p: usize) -> Self {
        let mut inner = FitConfig::with_defaults(p);
        inner.iterations = 600;
        inner.burn_in = 200;
        Self {
            bootstrap_count: 100,
            alpha: 0.05,
            tol: 0.001,
            max_rounds: 1000,
            inner,
            ties: Ties::Breslow,
            apply_correction: true,
            bonferroni: false,
            seed: 0,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.bootstrap_count == 0 {
            return Err(CoxError::InvalidConfig(
                "bootstrap_count must be positive".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CoxError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(CoxError::InvalidConfig("tol must be non-negative".into()));
        }
        if self.max_rounds == 0 {
            return Err(CoxError::InvalidConfig(
                "max_rounds must be positive".into(),
            ));
        }
        self.inner.validate(p)
    }
}

/// One round of the calibration trace.
#[derive(Debug, Clone)]
pub struct GpcRound {
    /// 1-based round index.
    pub round: usize,
    /// The learning rate the round's inner fits used.
    pub w: f64,
    /// Fraction of usable replicates whose region covered the reference.
    pub coverage: f64,
    /// Replicates that produced a usable region this round.
    pub replicates_used: usize,
}

/// Final calibration result with the full trace.
#[derive(Debug, Clone)]
pub struct GpcOutcome {
    /// Calibrated learning rate (the last w actually evaluated).
    pub w: f64,
    /// Whether the stopping rule fired before `max_rounds` ran out.
    pub converged: bool,
    pub rounds: Vec<GpcRound>,
}

const W_MIN: f64 = 1e-4;
const W_MAX: f64 = 1e3;

/// Resample n subjects with replacement.
fn bootstrap_dataset(
    data: &SurvivalDataset,
    seed: u64,
    round: u64,
    replicate: u64,
) -> Result<SurvivalDataset> {
    use rand::Rng;
    let n = data.n();
    let p = data.p();
    let mut rng = substream(seed, TAG_BOOT, round, replicate);
    let mut times = Vec::with_capacity(n);
    let mut events = Vec::with_capacity(n);
    let mut covs = Vec::with_capacity(n * p);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        times.push(data.times()[i]);
        events.push(data.events()[i]);
        covs.extend_from_slice(data.x_row(i));
    }
    SurvivalDataset::new(times, events, covs, data.names().to_vec())
}

/// Calibrate the learning rate for `kind` on `data`.
///
/// Stops as soon as a round's coverage is within `tol` of 1 − alpha (the
/// update step is not applied after a converging round). A round in which
/// more than 20% of replicates fail aborts the calibration.
pub fn calibrate(data: &SurvivalDataset, kind: SamplerKind, cfg: &GpcConfig) -> Result<GpcOutcome> {
    let p = data.p();
    cfg.validate(p)?;
    // Fail fast if the reference estimate is unavailable; replicates reuse it.
    let reference = partial::mple(data, None, 1e-8, 50, cfg.ties)?.beta;
    let target = 1.0 - cfg.alpha;
    let coord_alpha = if cfg.bonferroni {
        cfg.alpha / p as f64
    } else {
        cfg.alpha
    };

    let mut w = cfg.inner.learning_rate;
    let mut rounds = Vec::new();
    for k in 1..=cfg.max_rounds {
        let mut covered = 0usize;
        let mut used = 0usize;
        for b in 0..cfg.bootstrap_count {
            let outcome = (|| -> Result<bool> {
                let boot = bootstrap_dataset(data, cfg.seed, k as u64, b as u64)?;
                let mut inner = cfg.inner.clone();
                inner.learning_rate = w;
                inner.seed = {
                    use rand::RngCore;
                    substream(cfg.seed, TAG_INNER, k as u64, b as u64).next_u64()
                };
                let summary = match kind {
                    SamplerKind::Gs4Cox => {
                        let pairs = build_pair_contrasts(&boot)?;
                        let chain = gs4cox::run(&pairs, &inner)?;
                        let chain = if cfg.apply_correction {
                            gs4cox::correct(&chain, &boot, cfg.ties)?
                        } else {
                            chain
                        };
                        diagnostics::summarize(&chain, coord_alpha)?
                    }
                    SamplerKind::Mh => {
                        let report = mh::run_mh(&boot, &inner, cfg.ties, None)?;
                        diagnostics::summarize(&report.chain, coord_alpha)?
                    }
                };
                Ok(reference
                    .iter()
                    .enumerate()
                    .all(|(j, v)| summary.ci_lo[j] <= *v && *v <= summary.ci_hi[j]))
            })();
            match outcome {
                Ok(true) => {
                    covered += 1;
                    used += 1;
                }
                Ok(false) => used += 1,
                Err(_) => {}
            }
        }
        let failures = cfg.bootstrap_count - used;
        if failures * 5 > cfg.bootstrap_count {
            return Err(CoxError::Calibration(format!(
                "round {k}: {failures} of {} bootstrap replicates failed (> 20%)",
                cfg.bootstrap_count
            )));
        }
        let coverage = covered as f64 / used as f64;
        rounds.push(GpcRound {
            round: k,
            w,
            coverage,
            replicates_used: used,
        });
        if (coverage - target).abs() <= cfg.tol {
            return Ok(GpcOutcome {
                w,
                converged: true,
                rounds,
            });
        }
        w = (w + (coverage - target) / k as f64).clamp(W_MIN, W_MAX);
    }
    Ok(GpcOutcome {
        w,
        converged: false,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};

    fn toy_data(n: usize, seed: u64) -> SurvivalDataset {
        generate(&SynthConfig {
            n,
            beta0: vec![0.7, -0.5],
            rounding: 0.0,
            censor_rate: 0.5,
            seed,
        })
        .unwrap()
    }

    fn quick_cfg(seed: u64) -> GpcConfig {
        let mut cfg = GpcConfig::with_defaults(2);
        cfg.bootstrap_count = 8;
        cfg.inner.iterations = 80;
        cfg.inner.burn_in = 40;
        cfg.max_rounds = 2;
        cfg.seed = seed;
        cfg
    }

    #[test]
    fn loose_tolerance_stops_in_round_one_without_updating() {
        let data = toy_data(50, 1);
        let mut cfg = quick_cfg(2);
        cfg.tol = 1.0;
        let out = calibrate(&data, SamplerKind::Gs4Cox, &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds.len(), 1);
        assert_eq!(out.w, cfg.inner.learning_rate, "no update after stopping");
        assert_eq!(out.rounds[0].round, 1);
        assert_eq!(out.rounds[0].w, cfg.inner.learning_rate);
    }

    #[test]
    fn calibration_is_deterministic_in_the_seed() {
        let data = toy_data(40, 3);
        let mut cfg = quick_cfg(5);
        cfg.tol = 0.0;
        cfg.max_rounds = 2;
        let a = calibrate(&data, SamplerKind::Gs4Cox, &cfg).unwrap();
        let b = calibrate(&data, SamplerKind::Gs4Cox, &cfg).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.rounds.len(), b.rounds.len());
        for (ra, rb) in a.rounds.iter().zip(&b.rounds) {
            assert_eq!(ra.w, rb.w);
            assert_eq!(ra.coverage, rb.coverage);
            assert_eq!(ra.replicates_used, rb.replicates_used);
        }
    }

    #[test]
    fn update_moves_w_in_the_direction_of_the_coverage_error() {
        let data = toy_data(40, 7);
        let mut cfg = quick_cfg(11);
        cfg.tol = 0.0; // force at least one update unless coverage is exact
        cfg.max_rounds = 2;
        let out = calibrate(&data, SamplerKind::Gs4Cox, &cfg).unwrap();
        if out.rounds.len() >= 2 {
            let r1 = &out.rounds[0];
            let r2 = &out.rounds[1];
            let err = r1.coverage - (1.0 - cfg.alpha);
            assert_eq!(r2.w, (r1.w + err / 1.0).clamp(1e-4, 1e3));
        }
    }

    #[test]
    fn larger_w_narrows_the_inner_regions() {
        let data = toy_data(60, 9);
        let pairs = build_pair_contrasts(&data).unwrap();
        let mut width = Vec::new();
        for w in [0.25, 4.0] {
            let mut inner = FitConfig::with_defaults(2);
            inner.iterations = 400;
            inner.burn_in = 100;
            inner.learning_rate = w;
            inner.seed = 13;
            let chain = gs4cox::run(&pairs, &inner).unwrap();
            let s = diagnostics::summarize(&chain, 0.05).unwrap();
            width.push((s.ci_hi[0] - s.ci_lo[0]) + (s.ci_hi[1] - s.ci_lo[1]));
        }
        assert!(
            width[1] < width[0],
            "16x larger w should shrink the intervals: {width:?}"
        );
    }

    #[test]
    fn mh_calibration_runs_and_traces() {
        let data = toy_data(50, 15);
        let mut cfg = quick_cfg(17);
        cfg.tol = 1.0;
        let out = calibrate(&data, SamplerKind::Mh, &cfg).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds.len(), 1);
        assert!(out.rounds[0].replicates_used > 0);
        assert!((0.0..=1.0).contains(&out.rounds[0].coverage));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let data = toy_data(30, 19);
        let mut cfg = quick_cfg(1);
        cfg.alpha = 1.5;
        assert!(calibrate(&data, SamplerKind::Gs4Cox, &cfg).is_err());
        let mut cfg = quick_cfg(1);
        cfg.bootstrap_count = 0;
        assert!(calibrate(&data, SamplerKind::Gs4Cox, &cfg).is_err());
        let mut cfg = quick_cfg(1);
        cfg.max_rounds = 0;
        assert!(calibrate(&data, SamplerKind::Gs4Cox, &cfg).is_err());
    }

    #[test]
    fn sampler_kind_parses_case_insensitively() {
        assert_eq!("GS4Cox".parse::<SamplerKind>().unwrap(), SamplerKind::Gs4Cox);
        assert_eq!("mh".parse::<SamplerKind>().unwrap(), SamplerKind::Mh);
        assert!("gibbs".parse::<SamplerKind>().is_err());
    }
}
