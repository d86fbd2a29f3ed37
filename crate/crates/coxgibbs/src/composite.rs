//! Composite partial likelihood over (event, peer) contrasts: each pair
//! contributes a Bernoulli-style term log expit(d_qᵀβ), giving a logistic
//! log-likelihood in the contrast rows with no intercept and all responses
//! equal to one.

use crate::data::PairContrasts;
use crate::error::{CoxError, Result};
use crate::newton::{self, NewtonFit};

/// Joint evaluation of the composite log-likelihood and derivatives.
#[derive(Debug, Clone)]
pub struct CplEval {
    /// Composite log-likelihood Σ_q log expit(d_qᵀβ).
    pub loglik: f64,
    /// Score Σ_q (1 - p_q) d_q.
    pub score: Vec<f64>,
    /// Row-major Hessian -Σ_q p_q (1 - p_q) d_q d_qᵀ; negative semi-definite
    /// everywhere.
    pub hessian: Vec<f64>,
}

/// log expit(z), branch-stable for any finite z.
fn log_expit(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// expit(z) computed from the dominant side.
fn expit(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Pair win probability expit(contrastᵀbeta), clamped to the open unit
/// interval so extreme contrasts cannot round to exactly 0 or 1.
pub fn pair_prob(beta: &[f64], contrast: &[f64]) -> f64 {
    let z: f64 = beta.iter().zip(contrast).map(|(b, d)| b * d).sum();
    expit(z)
        .max(f64::MIN_POSITIVE)
        .min(1.0 - f64::EPSILON / 2.0)
}

/// Composite log-likelihood only (fast path).
pub fn cpl_loglik(pairs: &PairContrasts, beta: &[f64]) -> Result<f64> {
    check_beta(pairs, beta)?;
    let p = pairs.p();
    let mut ll = 0.0;
    for row in pairs.contrasts().chunks_exact(p) {
        let z: f64 = row.iter().zip(beta).map(|(d, b)| d * b).sum();
        ll += log_expit(z);
    }
    Ok(ll)
}

fn check_beta(pairs: &PairContrasts, beta: &[f64]) -> Result<()> {
    if beta.len() != pairs.p() {
        return Err(CoxError::InvalidConfig(format!(
            "beta has length {}, expected {}",
            beta.len(),
            pairs.p()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(CoxError::InvalidArgument("beta must be finite".into()));
    }
    Ok(())
}

/// Composite log-likelihood, score, and Hessian at `beta`.
pub fn cpl_eval(pairs: &PairContrasts, beta: &[f64]) -> Result<CplEval> {
    check_beta(pairs, beta)?;
    let p = pairs.p();
    let mut ll = 0.0;
    let mut score = vec![0.0; p];
    let mut hessian = vec![0.0; p * p];
    for row in pairs.contrasts().chunks_exact(p) {
        let z: f64 = row.iter().zip(beta).map(|(d, b)| d * b).sum();
        ll += log_expit(z);
        let pq = expit(z);
        let resid = 1.0 - pq;
        let curv = pq * resid;
        for a in 0..p {
            score[a] += resid * row[a];
            let ca = curv * row[a];
            for b in 0..=a {
                hessian[a * p + b] -= ca * row[b];
            }
        }
    }
    // Mirror the accumulated lower triangle.
    for a in 0..p {
        for b in (a + 1)..p {
            hessian[a * p + b] = hessian[b * p + a];
        }
    }
    Ok(CplEval {
        loglik: ll,
        score,
        hessian,
    })
}

/// Newton maximum composite-partial-likelihood estimate, starting from zero.
///
/// Separable pair sets (all contrasts achievable on one side, so the
/// likelihood has no finite maximizer) surface as a non-convergence error,
/// either from divergence of the iterates or from the post-check that all
/// pair probabilities have saturated at the converged point.
pub fn mcple(pairs: &PairContrasts, tol: f64, max_iter: usize) -> Result<NewtonFit> {
    let p = pairs.p();
    let fit = newton::maximize(
        |beta| {
            let e = cpl_eval(pairs, beta)?;
            Ok((e.loglik, e.score, e.hessian))
        },
        p,
        &vec![0.0; p],
        tol,
        max_iter,
        "composite-likelihood Newton",
    )?;
    let min_resid = pairs
        .contrasts()
        .chunks_exact(p)
        .map(|row| {
            let z: f64 = row.iter().zip(&fit.beta).map(|(d, b)| d * b).sum();
            1.0 - expit(z)
        })
        .fold(f64::INFINITY, f64::min);
    if min_resid <= 1e-6 {
        return Err(CoxError::NoConvergence {
            iterations: fit.iterations,
            message: "separable pairs: every contrast saturated on one side".into(),
            last: fit.beta,
        });
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_pair_contrasts, SurvivalDataset};
    use crate::synth::{generate, SynthConfig};

    fn pairs_from_synth(seed: u64, n: usize) -> PairContrasts {
        let d = generate(&SynthConfig {
            n,
            beta0: vec![0.9, -0.7],
            rounding: 0.0,
            censor_rate: 1.0,
            seed,
        })
        .unwrap();
        build_pair_contrasts(&d).unwrap()
    }

    #[test]
    fn log_expit_is_stable_at_extremes() {
        assert!((log_expit(800.0) - 0.0).abs() < 1e-300);
        assert_eq!(log_expit(-800.0), -800.0);
        assert!((log_expit(0.0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn pair_prob_stays_in_open_interval() {
        for z in [-800.0, -50.0, 0.0, 50.0, 800.0] {
            let p = pair_prob(&[z], &[1.0]);
            assert!(p > 0.0 && p < 1.0, "p={p} at z={z}");
        }
        assert!((pair_prob(&[0.0], &[1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn score_at_zero_is_half_contrast_sum() {
        let pairs = pairs_from_synth(3, 60);
        let e = cpl_eval(&pairs, &[0.0, 0.0]).unwrap();
        let sum = pairs.contrast_sum();
        for a in 0..2 {
            assert!((e.score[a] - 0.5 * sum[a]).abs() < 1e-10);
        }
        assert!((e.loglik - pairs.q() as f64 * 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pairs = pairs_from_synth(4, 40);
        let beta = [0.3, -0.2];
        let e = cpl_eval(&pairs, &beta).unwrap();
        let h = 1e-6;
        for a in 0..2 {
            let mut up = beta;
            let mut dn = beta;
            up[a] += h;
            dn[a] -= h;
            let fd = (cpl_loglik(&pairs, &up).unwrap() - cpl_loglik(&pairs, &dn).unwrap())
                / (2.0 * h);
            assert!((e.score[a] - fd).abs() / fd.abs().max(1e-8) < 1e-5);
            for b in 0..2 {
                let mut upb = beta;
                let mut dnb = beta;
                upb[b] += h;
                dnb[b] -= h;
                let fd2 = (cpl_eval(&pairs, &upb).unwrap().score[a]
                    - cpl_eval(&pairs, &dnb).unwrap().score[a])
                    / (2.0 * h);
                assert!(
                    (e.hessian[a * 2 + b] - fd2).abs() / fd2.abs().max(1e-6) < 1e-4
                );
            }
        }
    }

    #[test]
    fn hessian_is_negative_semidefinite_everywhere() {
        let pairs = pairs_from_synth(5, 30);
        let mut rng = crate::rng::substream(5, 90, 0, 0);
        use rand::Rng;
        for _ in 0..20 {
            let beta = [rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0];
            let e = cpl_eval(&pairs, &beta).unwrap();
            let m = nalgebra::DMatrix::from_row_slice(2, 2, &e.hessian);
            let eig = m.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l <= 1e-8), "eigenvalues {eig:?}");
        }
    }

    #[test]
    fn mcple_recovers_truth_direction() {
        let pairs = pairs_from_synth(6, 500);
        let fit = mcple(&pairs, 1e-8, 50).unwrap();
        assert!(fit.score_sup_norm <= 1e-8);
        assert!(fit.beta[0] > 0.4 && fit.beta[1] < -0.3, "beta {:?}", fit.beta);
    }

    #[test]
    fn separable_pairs_error() {
        // Event subjects always have the larger covariate: every contrast is
        // positive, so the likelihood increases without bound along +beta.
        let d = SurvivalDataset::new(
            vec![1.0, 2.0, 3.0],
            vec![true, true, true],
            vec![3.0, 2.0, 1.0],
            vec!["a".into()],
        )
        .unwrap();
        let pairs = build_pair_contrasts(&d).unwrap();
        assert!(matches!(
            mcple(&pairs, 1e-8, 200),
            Err(CoxError::NoConvergence { .. })
        ));
    }
}
