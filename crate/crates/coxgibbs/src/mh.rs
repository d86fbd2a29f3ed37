//! Random-walk Metropolis-Hastings baseline targeting the weighted
//! partial-likelihood posterior π(β) ∝ prior(β) · PL(β)^w.
//!
//! The proposal is a fixed Gaussian step β' = β + s·L⁻ᵀz where
//! LLᵀ = w·(−H_PL(β̂)) + Σ₀⁻¹ is the curvature of the log target at the
//! maximum partial-likelihood estimate β̂ (also the default starting point)
//! and s defaults to the classic 2.38/√P random-walk scaling.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::SurvivalDataset;
use crate::error::{CoxError, Result};
use crate::gs4cox::{Chain, FitConfig};
use crate::partial::{self, Ties};
use crate::rng::{substream, TAG_MH};

/// Outcome of a Metropolis-Hastings run.
#[derive(Debug, Clone)]
pub struct MhReport {
    pub chain: Chain,
    /// accepted / iterations, counted over every post-initial proposal.
    pub acceptance_rate: f64,
    /// The step multiplier s actually used.
    pub proposal_scale: f64,
    /// Set when the run is usable but suspicious (e.g. nothing accepted).
    pub warning: Option<String>,
}

fn log_prior(beta: &DVector<f64>, mean: &DVector<f64>, prec: &DMatrix<f64>) -> f64 {
    let d = beta - mean;
    -0.5 * (prec * &d).dot(&d)
}

/// Run the baseline sampler. `scale` overrides the default step multiplier
/// 2.38/√P; `scale = 0` degenerates to a chain stuck at its start (every
/// proposal equals the current state and is accepted).
///
/// The chain starts at the maximum partial-likelihood estimate unless
/// `cfg.init` is given. `wall_seconds` covers the sampling loop only.
pub fn run_mh(
    data: &SurvivalDataset,
    cfg: &FitConfig,
    ties: Ties,
    scale: Option<f64>,
) -> Result<MhReport> {
    let p = data.p();
    cfg.validate(p)?;
    let s = scale.unwrap_or(2.38 / (p as f64).sqrt());
    if !s.is_finite() || s < 0.0 {
        return Err(CoxError::InvalidConfig(format!(
            "proposal scale must be finite and non-negative, got {s}"
        )));
    }
    let w = cfg.learning_rate;

    let start_beta = match &cfg.init {
        Some(init) => init.clone(),
        None => partial::mple(data, None, 1e-8, 50, ties)?.beta,
    };

    // Fixed proposal curvature A = w(−H_PL(β̂)) + Σ₀⁻¹ at the MPLE (the
    // proposal stays anchored there even when init overrides the start).
    let curv_point = partial::mple(data, Some(&start_beta), 1e-8, 50, ties)
        .map(|fit| fit.beta)
        .unwrap_or_else(|_| start_beta.clone());
    let sh = partial::score_hessian(data, &curv_point, ties)?;
    let prior_prec = cfg.prior.precision();
    let mut a = prior_prec.clone();
    for i in 0..p {
        for j in 0..p {
            a[(i, j)] -= w * sh.hessian[i * p + j];
        }
    }
    let chol = Cholesky::new(a).ok_or_else(|| {
        CoxError::NotPositiveDefinite("proposal curvature failed Cholesky".into())
    })?;

    let prior_mean = DVector::from_column_slice(cfg.prior.mean());
    let log_target = |beta: &DVector<f64>| -> Result<f64> {
        let ll = partial::log_partial_likelihood(data, beta.as_slice(), ties)?;
        Ok(w * ll + log_prior(beta, &prior_mean, &prior_prec))
    };

    let mut rng = substream(cfg.seed, TAG_MH, 0, 0);
    let mut beta = DVector::from_column_slice(&start_beta);
    let mut lt = log_target(&beta)?;
    let mut samples = Vec::with_capacity(cfg.iterations * p);
    let mut accepted = 0usize;

    let wall_start = Instant::now();
    for _ in 0..cfg.iterations {
        let z = DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let step = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| {
                CoxError::NotPositiveDefinite("triangular solve failed in proposal".into())
            })?;
        let proposal = &beta + step * s;
        let lt_prop = log_target(&proposal)?;
        let u: f64 = rng.gen();
        if u.ln() < lt_prop - lt {
            beta = proposal;
            lt = lt_prop;
            accepted += 1;
        }
        samples.extend_from_slice(beta.as_slice());
    }
    let wall_seconds = wall_start.elapsed().as_secs_f64();

    let acceptance_rate = accepted as f64 / cfg.iterations as f64;
    let warning = if accepted == 0 && s > 0.0 {
        Some(
            "no proposals were accepted; the chain never moved from its start \
             (consider a smaller proposal scale)"
                .to_string(),
        )
    } else {
        None
    };
    let chain = Chain::from_samples(samples, p, cfg.burn_in, cfg.seed, wall_seconds)?;
    Ok(MhReport {
        chain,
        acceptance_rate,
        proposal_scale: s,
        warning,
    })
}
