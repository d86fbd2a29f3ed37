//! Shared Newton ascent with step-halving, used by both likelihood
//! maximizers.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{CoxError, Result};

/// Converged maximizer output.
#[derive(Debug, Clone)]
pub struct NewtonFit {
    /// Maximizing coefficient vector.
    pub beta: Vec<f64>,
    /// Objective value at `beta`.
    pub loglik: f64,
    /// Sup-norm of the score at `beta` (below the requested tolerance).
    pub score_sup_norm: f64,
    /// Newton steps taken.
    pub iterations: usize,
    /// Row-major P x P Hessian of the objective at `beta`.
    pub hessian: Vec<f64>,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Maximize a concave objective by damped Newton steps.
///
/// `eval` returns `(value, score, hessian)` with the Hessian row-major.
/// Steps solve `(-H) dir = score` via Cholesky and halve until the objective
/// does not decrease; iterates whose sup-norm exceeds 10³ are treated as
/// divergence (in this crate's usage that signals separation or a flat
/// direction, not a legitimate optimum).
pub(crate) fn maximize<F>(
    eval: F,
    p: usize,
    init: &[f64],
    tol: f64,
    max_iter: usize,
    context: &str,
) -> Result<NewtonFit>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)>,
{
    if !(tol > 0.0) {
        return Err(CoxError::InvalidConfig(format!(
            "{context}: tolerance must be positive, got {tol}"
        )));
    }
    if init.len() != p {
        return Err(CoxError::InvalidConfig(format!(
            "{context}: init has length {}, expected {p}",
            init.len()
        )));
    }

    let mut beta = init.to_vec();
    let (mut value, mut score, mut hessian) = eval(&beta)?;

    for step in 0..=max_iter {
        let sup = sup_norm(&score);
        if sup <= tol {
            return Ok(NewtonFit {
                beta,
                loglik: value,
                score_sup_norm: sup,
                iterations: step,
                hessian,
            });
        }
        if step == max_iter {
            break;
        }

        let neg_h = DMatrix::from_row_slice(p, p, &hessian).map(|v| -v);
        let chol = Cholesky::new(neg_h).ok_or_else(|| {
            CoxError::SingularHessian(format!(
                "{context}: negated Hessian not positive definite at iteration {step}"
            ))
        })?;
        let dir = chol.solve(&DVector::from_column_slice(&score));

        let mut alpha = 1.0;
        let mut advanced = false;
        for _ in 0..40 {
            let cand: Vec<f64> = beta
                .iter()
                .zip(dir.iter())
                .map(|(b, d)| b + alpha * d)
                .collect();
            match eval(&cand) {
                // Slack scales with the objective's magnitude: near the
                // optimum the true per-step gain drops below the rounding
                // noise of summing the objective, and an absolute cutoff
                // would reject genuine Newton steps.
                Ok((v, s, h)) if v.is_finite() && v >= value - 1e-12 * (1.0 + value.abs()) => {
                    beta = cand;
                    value = v;
                    score = s;
                    hessian = h;
                    advanced = true;
                    break;
                }
                _ => alpha *= 0.5,
            }
        }
        if !advanced {
            return Err(CoxError::NoConvergence {
                iterations: step,
                message: format!("{context}: line search could not improve the objective"),
                last: beta,
            });
        }
        if sup_norm(&beta) > 1e3 {
            return Err(CoxError::NoConvergence {
                iterations: step + 1,
                message: format!(
                    "{context}: iterate diverged (sup-norm above 1e3), objective likely unbounded"
                ),
                last: beta,
            });
        }
    }

    Err(CoxError::NoConvergence {
        iterations: max_iter,
        message: format!("{context}: score tolerance {tol} not reached"),
        last: beta,
    })
}
