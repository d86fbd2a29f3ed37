//! Chain diagnostics: FFT autocovariance, effective sample size via the
//! initial-positive-sequence estimator, posterior summaries with
//! equal-tailed credible intervals, and the effective-samples-per-second
//! rate used to compare samplers.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{CoxError, Result};
use crate::gs4cox::Chain;

/// Effective sample sizes for each coordinate of a chain.
#[derive(Debug, Clone)]
pub struct EssSummary {
    pub per_coordinate: Vec<f64>,
    pub average: f64,
}

/// Posterior summary of a chain's post-burn-in draws.
#[derive(Debug, Clone)]
pub struct ChainSummary {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// None when the chain is degenerate (a coordinate never moved).
    pub ess: Option<Vec<f64>>,
    pub ess_avg: Option<f64>,
    /// Effective samples per wall-clock second of sampling.
    pub esr: Option<f64>,
    pub alpha: f64,
}

/// Biased sample autocovariance (lags 0..N) via FFT in O(N log N).
///
/// The series is demeaned, zero-padded to the next power of two at or above
/// 2N, transformed, squared in magnitude, and transformed back; lag k then
/// holds (1/N) Σ_t (x_t − x̄)(x_{t+k} − x̄).
pub fn autocovariance_fft(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(len);
    buf.extend(x.iter().map(|&v| Complex::new(v - mean, 0.0)));
    buf.resize(len, Complex::new(0.0, 0.0));

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);

    // rustfft leaves both passes unnormalized: divide by the transform
    // length, then by N for the biased estimator.
    let scale = 1.0 / (len as f64 * n as f64);
    buf[..n].iter().map(|v| v.re * scale).collect()
}

/// Reference O(N²) autocovariance used to validate the FFT path.
pub fn autocovariance_direct(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..n)
        .map(|k| {
            centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Effective sample size of a single series by the initial-positive-sequence
/// rule: sum paired autocorrelations Γ_m = ρ_{2m} + ρ_{2m+1} while positive,
/// set τ = 2ΣΓ − 1, and return N/τ capped at 1.05·N (the cap also applies
/// if τ comes out non-positive).
///
/// A series with zero variance has no well-defined autocorrelation and is
/// reported as `DegenerateChain`.
pub fn ess_series(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 10 {
        return Err(CoxError::InsufficientData(format!(
            "effective sample size needs at least 10 draws, got {n}"
        )));
    }
    let gamma = autocovariance_fft(x);
    let g0 = gamma[0];
    if !(g0 > 0.0) {
        return Err(CoxError::DegenerateChain(
            "series has zero variance; every draw is identical".into(),
        ));
    }
    let cap = 1.05 * n as f64;
    let mut sum_gamma = 0.0;
    let mut m = 0usize;
    loop {
        let rho_even = gamma.get(2 * m).map_or(0.0, |g| g / g0);
        let rho_odd = gamma.get(2 * m + 1).map_or(0.0, |g| g / g0);
        if 2 * m >= n {
            break;
        }
        let pair = rho_even + rho_odd;
        if pair <= 0.0 {
            break;
        }
        sum_gamma += pair;
        m += 1;
    }
    let tau = 2.0 * sum_gamma - 1.0;
    if tau <= 0.0 {
        return Ok(cap);
    }
    Ok((n as f64 / tau).min(cap))
}

/// Per-coordinate effective sample size of a chain's post-burn-in draws.
pub fn ess(chain: &Chain) -> Result<EssSummary> {
    if chain.post_burn_len() < 10 {
        return Err(CoxError::InsufficientData(format!(
            "effective sample size needs at least 10 post-burn-in draws, got {}",
            chain.post_burn_len()
        )));
    }
    let p = chain.dim();
    let mut per = Vec::with_capacity(p);
    for j in 0..p {
        per.push(ess_series(&chain.post_burn_column(j))?);
    }
    let average = per.iter().sum::<f64>() / p as f64;
    Ok(EssSummary {
        per_coordinate: per,
        average,
    })
}

/// Linear-interpolation sample quantile (the common "type 7" definition)
/// on an already-sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0 && (0.0..=1.0).contains(&q));
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Effective samples per second; `None` when no sampling time was recorded.
pub fn esr(ess_avg: f64, wall_seconds: f64) -> Option<f64> {
    if wall_seconds > 0.0 {
        Some(ess_avg / wall_seconds)
    } else {
        None
    }
}

/// Summarize a chain's post-burn-in draws: means, standard deviations,
/// equal-tailed (1−α) credible intervals, and sampling-efficiency figures.
///
/// A degenerate chain still gets location and interval columns; only the
/// autocorrelation-based fields come back as `None`.
pub fn summarize(chain: &Chain, alpha: f64) -> Result<ChainSummary> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CoxError::InvalidConfig(format!(
            "interval level alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let k = chain.post_burn_len();
    if k < 20 {
        return Err(CoxError::InsufficientData(format!(
            "summaries need at least 20 post-burn-in draws, got {k}"
        )));
    }
    let p = chain.dim();
    let mut mean = Vec::with_capacity(p);
    let mut sd = Vec::with_capacity(p);
    let mut ci_lo = Vec::with_capacity(p);
    let mut ci_hi = Vec::with_capacity(p);
    for j in 0..p {
        let mut col = chain.post_burn_column(j);
        let m = col.iter().sum::<f64>() / k as f64;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (k - 1) as f64;
        mean.push(m);
        sd.push(var.sqrt());
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        ci_lo.push(quantile_sorted(&col, alpha / 2.0));
        ci_hi.push(quantile_sorted(&col, 1.0 - alpha / 2.0));
    }
    let (ess_opt, ess_avg) = match ess(chain) {
        Ok(s) => (Some(s.per_coordinate), Some(s.average)),
        Err(CoxError::DegenerateChain(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let esr_val = ess_avg.and_then(|avg| esr(avg, chain.wall_seconds()));
    Ok(ChainSummary {
        mean,
        sd,
        ci_lo,
        ci_hi,
        ess: ess_opt,
        ess_avg,
        esr: esr_val,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn iid_normal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, 71, 0, 0);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, 72, 0, 0);
        let mut x = Vec::with_capacity(n);
        let mut prev: f64 = rng.sample::<f64, _>(StandardNormal)
            / (1.0 - phi * phi).sqrt();
        for _ in 0..n {
            x.push(prev);
            prev = phi * prev + rng.sample::<f64, _>(StandardNormal);
        }
        x
    }

    #[test]
    fn fft_matches_direct_autocovariance() {
        for (n, seed) in [(3usize, 1u64), (17, 2), (128, 3), (511, 4), (512, 5)] {
            let x = iid_normal(n, seed);
            let fft = autocovariance_fft(&x);
            let direct = autocovariance_direct(&x);
            assert_eq!(fft.len(), direct.len());
            for (a, b) in fft.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn iid_series_ess_is_near_n() {
        let n = 2000;
        let x = iid_normal(n, 6);
        let e = ess_series(&x).unwrap();
        assert!(
            (e - n as f64).abs() < 0.15 * n as f64,
            "ESS {e} too far from {n}"
        );
    }

    #[test]
    fn ar1_series_ess_matches_theory() {
        // For AR(1) with φ, τ = (1+φ)/(1−φ); φ = 0.5 gives τ = 3.
        let n = 20_000;
        let x = ar1(n, 0.5, 7);
        let e = ess_series(&x).unwrap();
        let expected = n as f64 / 3.0;
        assert!(
            (e - expected).abs() < 0.10 * expected,
            "ESS {e} vs expected {expected}"
        );
    }

    #[test]
    fn ess_is_affine_invariant() {
        let x = iid_normal(1500, 8);
        let y: Vec<f64> = x.iter().map(|v| -3.5 * v + 11.0).collect();
        let ex = ess_series(&x).unwrap();
        let ey = ess_series(&y).unwrap();
        assert!((ex - ey).abs() / ex < 1e-6, "{ex} vs {ey}");
    }

    #[test]
    fn constant_series_is_degenerate_but_summaries_survive() {
        let x = vec![2.5; 200];
        match ess_series(&x) {
            Err(CoxError::DegenerateChain(_)) => {}
            other => panic!("expected DegenerateChain, got {other:?}"),
        }
        let chain = Chain::from_samples(x, 1, 50, 0, 1.0).unwrap();
        let s = summarize(&chain, 0.05).unwrap();
        assert_eq!(s.mean, vec![2.5]);
        assert_eq!(s.sd, vec![0.0]);
        assert_eq!(s.ci_lo, vec![2.5]);
        assert_eq!(s.ci_hi, vec![2.5]);
        assert!(s.ess.is_none());
        assert!(s.ess_avg.is_none());
        assert!(s.esr.is_none());
    }

    #[test]
    fn intervals_cover_the_nominal_share_of_draws() {
        let n = 10_000;
        let draws = iid_normal(n, 9);
        let chain = Chain::from_samples(draws.clone(), 1, 0, 0, 1.0).unwrap();
        let s = summarize(&chain, 0.05).unwrap();
        let inside = draws
            .iter()
            .filter(|v| **v >= s.ci_lo[0] && **v <= s.ci_hi[0])
            .count() as f64
            / n as f64;
        assert!(
            (0.94..=0.96).contains(&inside),
            "interval covered {inside} of the draws"
        );
        // And they bracket the truth for a standard normal.
        assert!((s.ci_lo[0] + 1.96).abs() < 0.12);
        assert!((s.ci_hi[0] - 1.96).abs() < 0.12);
    }

    #[test]
    fn esr_divides_by_wall_time_and_guards_zero() {
        assert_eq!(esr(500.0, 2.0), Some(250.0));
        assert_eq!(esr(500.0, 0.0), None);
    }

    #[test]
    fn short_series_and_bad_alpha_are_rejected() {
        assert!(ess_series(&[1.0, 2.0, 3.0]).is_err());
        let chain = Chain::from_samples(iid_normal(30, 10), 1, 15, 0, 1.0).unwrap();
        assert!(summarize(&chain, 0.05).is_err(), "only 15 post-burn draws");
        let chain = Chain::from_samples(iid_normal(100, 11), 1, 10, 0, 1.0).unwrap();
        assert!(summarize(&chain, 0.0).is_err());
        assert!(summarize(&chain, 1.0).is_err());
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let sorted = vec![10.0, 20.0, 30.0, 40.0];
        assert_eq!(quantile_sorted(&sorted, 0.0), 10.0);
        assert_eq!(quantile_sorted(&sorted, 1.0), 40.0);
        assert_eq!(quantile_sorted(&sorted, 0.5), 25.0);
        assert!((quantile_sorted(&sorted, 1.0 / 3.0) - 20.0).abs() < 1e-12);
    }
}
