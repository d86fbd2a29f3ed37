//! Cox partial likelihood: log-likelihood, score, Hessian, and the Newton
//! maximum-partial-likelihood estimator, with Breslow and Efron tie handling.
//!
//! Evaluation runs over event-time groups in descending time order,
//! maintaining running risk-set sums S0 = Σ exp(η), S1 = Σ exp(η) x,
//! S2 = Σ exp(η) x xᵀ in a representation rescaled by the running maximum of
//! η, so arbitrarily large linear predictors cannot overflow: sums store
//! Σ exp(η - m) with m = max η seen so far, and every logarithm re-adds m.

use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{CoxError, Result};
use crate::newton::{self, NewtonFit};

/// Tie-handling rule for coincident event times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ties {
    /// Shared denominator for all events in a tie group.
    Breslow,
    /// Denominator discounted by the average contribution of the tied events.
    Efron,
}

impl Ties {
    pub fn as_str(self) -> &'static str {
        match self {
            Ties::Breslow => "breslow",
            Ties::Efron => "efron",
        }
    }
}

impl std::str::FromStr for Ties {
    type Err = CoxError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "breslow" => Ok(Ties::Breslow),
            "efron" => Ok(Ties::Efron),
            other => Err(CoxError::InvalidConfig(format!(
                "unknown tie method '{other}' (expected breslow or efron)"
            ))),
        }
    }
}

/// Joint evaluation of the log partial likelihood and its derivatives.
#[derive(Debug, Clone)]
pub struct ScoreHessian {
    /// Score vector S(β).
    pub score: Vec<f64>,
    /// Row-major P x P Hessian H(β); symmetric, negative semi-definite.
    pub hessian: Vec<f64>,
    /// Log partial likelihood at β.
    pub loglik: f64,
}

/// Precomputed evaluation order: subjects sorted by time ascending, grouped
/// into runs of exactly equal times.
struct TieGroups {
    order: Vec<usize>,
    /// Half-open ranges into `order`, ascending in time.
    groups: Vec<(usize, usize)>,
}

fn tie_groups(data: &SurvivalDataset) -> TieGroups {
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_by(|&a, &b| data.times()[a].partial_cmp(&data.times()[b]).unwrap());
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=order.len() {
        if k == order.len() || data.times()[order[k]] != data.times()[order[start]] {
            groups.push((start, k));
            start = k;
        }
    }
    TieGroups { order, groups }
}

/// Running risk-set sums in max-rescaled form.
struct RiskSums {
    p: usize,
    m: f64,
    s0: f64,
    s1: Vec<f64>,
    s2: Vec<f64>,
    with_derivs: bool,
}

impl RiskSums {
    fn new(p: usize, with_derivs: bool) -> Self {
        Self {
            p,
            m: f64::NEG_INFINITY,
            s0: 0.0,
            s1: vec![0.0; p],
            s2: vec![0.0; p * p],
            with_derivs,
        }
    }

    fn rescale_to(&mut self, eta: f64) {
        if eta <= self.m {
            return;
        }
        let f = if self.m.is_finite() {
            (self.m - eta).exp()
        } else {
            0.0
        };
        self.s0 *= f;
        if self.with_derivs {
            for v in &mut self.s1 {
                *v *= f;
            }
            for v in &mut self.s2 {
                *v *= f;
            }
        }
        self.m = eta;
    }

    fn add(&mut self, eta: f64, x: &[f64]) {
        self.rescale_to(eta);
        let w = (eta - self.m).exp();
        self.s0 += w;
        if self.with_derivs {
            for (s, &xi) in self.s1.iter_mut().zip(x) {
                *s += w * xi;
            }
            for i in 0..self.p {
                let wxi = w * x[i];
                for j in 0..self.p {
                    self.s2[i * self.p + j] += wxi * x[j];
                }
            }
        }
    }
}

fn linear_predictors(data: &SurvivalDataset, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != data.p() {
        return Err(CoxError::InvalidConfig(format!(
            "beta has length {}, expected {}",
            beta.len(),
            data.p()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(CoxError::InvalidArgument("beta must be finite".into()));
    }
    let mut eta = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let e: f64 = data.x_row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
        if !e.is_finite() {
            return Err(CoxError::Evaluation(format!(
                "linear predictor overflowed for subject {i}; consider centering covariates"
            )));
        }
        eta.push(e);
    }
    Ok(eta)
}

/// Log partial likelihood at `beta` (fast path: no derivatives).
pub fn log_partial_likelihood(data: &SurvivalDataset, beta: &[f64], ties: Ties) -> Result<f64> {
    let eta = linear_predictors(data, beta)?;
    let tg = tie_groups(data);
    let mut sums = RiskSums::new(data.p(), false);
    let mut ll = 0.0;

    for &(start, end) in tg.groups.iter().rev() {
        for &i in &tg.order[start..end] {
            sums.add(eta[i], data.x_row(i));
        }
        let events: Vec<usize> = tg.order[start..end]
            .iter()
            .copied()
            .filter(|&i| data.events()[i])
            .collect();
        let d = events.len();
        if d == 0 {
            continue;
        }
        let eta_sum: f64 = events.iter().map(|&i| eta[i]).sum();
        ll += eta_sum;
        match ties {
            Ties::Breslow => {
                ll -= d as f64 * (sums.m + sums.s0.ln());
            }
            Ties::Efron => {
                let g0: f64 = events.iter().map(|&i| (eta[i] - sums.m).exp()).sum();
                for k in 0..d {
                    let f = k as f64 / d as f64;
                    ll -= sums.m + (sums.s0 - f * g0).ln();
                }
            }
        }
    }
    if !ll.is_finite() {
        return Err(CoxError::Evaluation(
            "log partial likelihood is non-finite; consider centering covariates".into(),
        ));
    }
    Ok(ll)
}

/// Log partial likelihood, score, and Hessian at `beta`.
pub fn score_hessian(data: &SurvivalDataset, beta: &[f64], ties: Ties) -> Result<ScoreHessian> {
    let p = data.p();
    let eta = linear_predictors(data, beta)?;
    let tg = tie_groups(data);
    let mut sums = RiskSums::new(p, true);
    let mut ll = 0.0;
    let mut score = vec![0.0; p];
    let mut hessian = vec![0.0; p * p];
    let mut u = vec![0.0; p];

    for &(start, end) in tg.groups.iter().rev() {
        for &i in &tg.order[start..end] {
            sums.add(eta[i], data.x_row(i));
        }
        let events: Vec<usize> = tg.order[start..end]
            .iter()
            .copied()
            .filter(|&i| data.events()[i])
            .collect();
        let d = events.len();
        if d == 0 {
            continue;
        }

        for &i in &events {
            ll += eta[i];
            for (s, &xi) in score.iter_mut().zip(data.x_row(i)) {
                *s += xi;
            }
        }

        // Fractional event sums for Efron's discounting, in the same
        // rescaled representation as the running sums.
        let (g0, g1, g2) = if matches!(ties, Ties::Efron) {
            let mut g0 = 0.0;
            let mut g1 = vec![0.0; p];
            let mut g2 = vec![0.0; p * p];
            for &i in &events {
                let w = (eta[i] - sums.m).exp();
                g0 += w;
                let x = data.x_row(i);
                for (g, &xi) in g1.iter_mut().zip(x) {
                    *g += w * xi;
                }
                for a in 0..p {
                    let wxa = w * x[a];
                    for b in 0..p {
                        g2[a * p + b] += wxa * x[b];
                    }
                }
            }
            (g0, g1, g2)
        } else {
            (0.0, Vec::new(), Vec::new())
        };

        let steps = match ties {
            Ties::Breslow => 1,
            Ties::Efron => d,
        };
        for k in 0..steps {
            let (den, mult) = match ties {
                Ties::Breslow => (sums.s0, d as f64),
                Ties::Efron => (sums.s0 - (k as f64 / d as f64) * g0, 1.0),
            };
            ll -= mult * (sums.m + den.ln());
            for a in 0..p {
                let num = match ties {
                    Ties::Breslow => sums.s1[a],
                    Ties::Efron => sums.s1[a] - (k as f64 / d as f64) * g1[a],
                };
                u[a] = num / den;
                score[a] -= mult * u[a];
            }
            for a in 0..p {
                for b in 0..p {
                    let s2 = match ties {
                        Ties::Breslow => sums.s2[a * p + b],
                        Ties::Efron => sums.s2[a * p + b] - (k as f64 / d as f64) * g2[a * p + b],
                    };
                    hessian[a * p + b] -= mult * (s2 / den - u[a] * u[b]);
                }
            }
        }
    }

    if !ll.is_finite() || score.iter().any(|v| !v.is_finite()) {
        return Err(CoxError::Evaluation(
            "partial likelihood derivatives are non-finite; consider centering covariates".into(),
        ));
    }
    Ok(ScoreHessian {
        score,
        hessian,
        loglik: ll,
    })
}

/// Newton maximum-partial-likelihood estimate.
///
/// Starts at `init` (zero vector when `None`), ascends with step-halving,
/// and stops when the score sup-norm drops below `tol`.
pub fn mple(
    data: &SurvivalDataset,
    init: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
    ties: Ties,
) -> Result<NewtonFit> {
    if data.event_count() == 0 {
        return Err(CoxError::InsufficientData(
            "no events observed; the partial likelihood is constant".into(),
        ));
    }
    let p = data.p();
    let zeros = vec![0.0; p];
    let start = init.unwrap_or(&zeros);
    newton::maximize(
        |beta| {
            let sh = score_hessian(data, beta, ties)?;
            Ok((sh.loglik, sh.score, sh.hessian))
        },
        p,
        start,
        tol,
        max_iter,
        "partial-likelihood Newton",
    )
}
