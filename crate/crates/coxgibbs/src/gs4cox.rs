//! GS4Cox: blocked Gibbs sampling for Bayesian Cox regression through the
//! composite likelihood over (event, peer) contrasts.
//!
//! Each sweep draws one latent ω_q ~ PG(1, d_qᵀβ) per contrast row and then
//! one β from the exact Gaussian full conditional with precision
//! Λ = Σ₀⁻¹ + w Σ_q ω_q d_q d_qᵀ and mean Λ⁻¹(Σ₀⁻¹μ₀ + (w/2) Σ_q d_q),
//! where w is the learning rate weighting the composite loss against the
//! prior. The drift (w/2) Σ_q d_q is constant across sweeps and precomputed.
//!
//! After sampling, `correct` translates the whole chain by the Newton step
//! -H_PL(β̃)⁻¹ S_PL(β̃) taken at the post-burn-in mean β̃, aligning the
//! composite-likelihood posterior's location with the partial-likelihood
//! estimator while leaving its shape untouched.
//!
//! Determinism: latent draws consume one ChaCha8 substream per fixed-width
//! pair block (`rng::PG_BLOCK`) keyed by (seed, sweep, block); the Λ
//! reduction always merges block partials in block order. Results are
//! therefore bit-identical across thread counts, and single-threaded runs
//! are the reference.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{PairContrasts, SurvivalDataset};
use crate::error::{CoxError, Result};
use crate::partial::{self, Ties};
use crate::pg;
use crate::rng::{substream, PG_BLOCK, TAG_BETA, TAG_OMEGA};

/// Gaussian prior N(μ₀, Σ₀) on the coefficients.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    mean: Vec<f64>,
    covariance: Vec<f64>, // row-major p x p
}

impl PriorSpec {
    /// Build a prior from a mean vector and a symmetric positive-definite
    /// covariance (row-major). The covariance is symmetrized and its
    /// Cholesky factorization must succeed.
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let p = mean.len();
        if covariance.len() != p * p {
            return Err(CoxError::InvalidConfig(format!(
                "prior covariance has {} entries, expected {}",
                covariance.len(),
                p * p
            )));
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(CoxError::InvalidConfig(
                "prior mean and covariance must be finite".into(),
            ));
        }
        let m = DMatrix::from_row_slice(p, p, &covariance);
        let sym = (&m + m.transpose()) * 0.5;
        let max_skew = (&m - m.transpose()).abs().max();
        if max_skew > 1e-8 * sym.abs().max().max(1.0) {
            return Err(CoxError::InvalidConfig(
                "prior covariance is not symmetric".into(),
            ));
        }
        if Cholesky::new(sym.clone()).is_none() {
            return Err(CoxError::NotPositiveDefinite(
                "prior covariance failed Cholesky factorization".into(),
            ));
        }
        let covariance = sym.transpose().as_slice().to_vec(); // row-major of symmetric = same
        Ok(Self { mean, covariance })
    }

    /// Isotropic prior N(0, variance * I).
    pub fn isotropic(p: usize, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(CoxError::InvalidConfig(format!(
                "prior variance must be positive and finite, got {variance}"
            )));
        }
        let mut cov = vec![0.0; p * p];
        for j in 0..p {
            cov[j * p + j] = variance;
        }
        Ok(Self {
            mean: vec![0.0; p],
            covariance: cov,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major covariance entries.
    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    /// Σ₀⁻¹ via Cholesky.
    pub(crate) fn precision(&self) -> DMatrix<f64> {
        let p = self.dim();
        let m = DMatrix::from_row_slice(p, p, &self.covariance);
        Cholesky::new(m)
            .expect("validated at construction")
            .inverse()
    }
}

/// Sampler configuration shared by the Gibbs and Metropolis-Hastings chains.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Total sweeps M.
    pub iterations: usize,
    /// Burn-in m* (< M); diagnostics use sweeps m*..M.
    pub burn_in: usize,
    /// Learning rate w > 0 weighting the loss against the prior.
    pub learning_rate: f64,
    /// Seed for all randomness in the fit.
    pub seed: u64,
    /// Prior on the coefficients.
    pub prior: PriorSpec,
    /// Worker threads for the per-sweep latent pass; 0 or 1 = the
    /// single-threaded reference schedule (results are identical either way).
    pub threads: usize,
    /// Optional starting point (defaults to the zero vector).
    pub init: Option<Vec<f64>>,
}

impl FitConfig {
    /// Convenience constructor with the crate defaults (M = 1000, m* = 500,
    /// w = 1, N(0, 100 I) prior, single-threaded).
    pub fn with_defaults(p: usize) -> Self {
        Self {
            iterations: 1000,
            burn_in: 500,
            learning_rate: 1.0,
            seed: 0,
            prior: PriorSpec::isotropic(p, 100.0).expect("static prior"),
            threads: 0,
            init: None,
        }
    }

    pub(crate) fn validate(&self, p: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(CoxError::InvalidConfig("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(CoxError::InvalidConfig(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(CoxError::InvalidConfig(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.prior.dim() != p {
            return Err(CoxError::InvalidConfig(format!(
                "prior dimension {} does not match covariate dimension {p}",
                self.prior.dim()
            )));
        }
        if let Some(init) = &self.init {
            if init.len() != p {
                return Err(CoxError::InvalidConfig(format!(
                    "init has length {}, expected {p}",
                    init.len()
                )));
            }
            if init.iter().any(|v| !v.is_finite()) {
                return Err(CoxError::InvalidConfig("init must be finite".into()));
            }
        }
        Ok(())
    }
}

/// A stored sample path.
#[derive(Debug, Clone)]
pub struct Chain {
    samples: Vec<f64>, // row-major, iterations x p
    p: usize,
    burn_in: usize,
    seed: u64,
    wall_seconds: f64,
    correction: Option<Vec<f64>>,
}

impl Chain {
    /// Assemble a chain from raw samples (used by samplers and by tests that
    /// need synthetic chains).
    pub fn from_samples(
        samples: Vec<f64>,
        p: usize,
        burn_in: usize,
        seed: u64,
        wall_seconds: f64,
    ) -> Result<Self> {
        if p == 0 || samples.len() % p != 0 {
            return Err(CoxError::InvalidConfig(format!(
                "sample buffer of {} entries is not a multiple of p = {p}",
                samples.len()
            )));
        }
        let m = samples.len() / p;
        if burn_in >= m {
            return Err(CoxError::InvalidConfig(format!(
                "burn_in ({burn_in}) must be smaller than the chain length ({m})"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(CoxError::InvalidConfig("samples must be finite".into()));
        }
        Ok(Self {
            samples,
            p,
            burn_in,
            seed,
            wall_seconds,
            correction: None,
        })
    }

    /// Total sweeps stored.
    pub fn iterations(&self) -> usize {
        self.samples.len() / self.p
    }

    /// Coefficient dimension.
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Wall-clock seconds spent inside the sampling loop only.
    pub fn wall_seconds(&self) -> f64 {
        self.wall_seconds
    }

    /// The translation applied by `correct`, if any.
    pub fn correction(&self) -> Option<&[f64]> {
        self.correction.as_deref()
    }

    pub fn is_corrected(&self) -> bool {
        self.correction.is_some()
    }

    /// Row-major sample storage.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// One sweep's coefficient vector.
    pub fn sample(&self, m: usize) -> &[f64] {
        &self.samples[m * self.p..(m + 1) * self.p]
    }

    /// Number of post-burn-in sweeps.
    pub fn post_burn_len(&self) -> usize {
        self.iterations() - self.burn_in
    }

    /// Copy of one coordinate's post-burn-in path.
    pub fn post_burn_column(&self, j: usize) -> Vec<f64> {
        (self.burn_in..self.iterations())
            .map(|m| self.samples[m * self.p + j])
            .collect()
    }

    /// Post-burn-in mean vector.
    pub fn post_burn_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.p];
        for m in self.burn_in..self.iterations() {
            for (acc, v) in mean.iter_mut().zip(self.sample(m)) {
                *acc += v;
            }
        }
        let k = self.post_burn_len() as f64;
        for v in &mut mean {
            *v /= k;
        }
        mean
    }
}

/// Number of packed lower-triangle entries for dimension p.
fn packed_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Accumulate the latent pass for pair rows [lo, hi): draw ω_q against the
/// current β and add ω_q d_q d_qᵀ (lower triangle, packed) into `acc`.
fn block_partial(
    pairs: &PairContrasts,
    beta: &[f64],
    seed: u64,
    sweep: u64,
    block: u64,
    lo: usize,
    hi: usize,
    acc: &mut [f64],
) -> Result<()> {
    let p = pairs.p();
    let mut rng = substream(seed, TAG_OMEGA, sweep, block);
    for q in lo..hi {
        let d = pairs.contrast(q);
        let eta: f64 = d.iter().zip(beta).map(|(di, bi)| di * bi).sum();
        let omega = pg::sample_pg1(eta, &mut rng)?.value;
        let mut k = 0;
        for a in 0..p {
            let oda = omega * d[a];
            for b in 0..=a {
                acc[k] += oda * d[b];
                k += 1;
            }
        }
    }
    Ok(())
}

/// Run the latent pass for one sweep and return per-block packed partials,
/// ordered by block index regardless of the thread schedule.
fn latent_pass(
    pairs: &PairContrasts,
    beta: &[f64],
    seed: u64,
    sweep: u64,
    threads: usize,
) -> Result<Vec<Vec<f64>>> {
    let q = pairs.q();
    let nblocks = q.div_ceil(PG_BLOCK);
    let p = pairs.p();
    let mut partials: Vec<Vec<f64>> = vec![vec![0.0; packed_len(p)]; nblocks];

    if threads <= 1 || nblocks == 1 {
        for (b, acc) in partials.iter_mut().enumerate() {
            let lo = b * PG_BLOCK;
            let hi = (lo + PG_BLOCK).min(q);
            block_partial(pairs, beta, seed, sweep, b as u64, lo, hi, acc)?;
        }
        return Ok(partials);
    }

    let workers = threads.min(nblocks);
    let chunk = nblocks.div_ceil(workers);
    let mut failure: Option<CoxError> = None;
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (w, slice) in partials.chunks_mut(chunk).enumerate() {
            let first_block = w * chunk;
            handles.push(scope.spawn(move || -> Result<()> {
                for (off, acc) in slice.iter_mut().enumerate() {
                    let b = first_block + off;
                    let lo = b * PG_BLOCK;
                    let hi = (lo + PG_BLOCK).min(q);
                    block_partial(pairs, beta, seed, sweep, b as u64, lo, hi, acc)?;
                }
                Ok(())
            }));
        }
        for h in handles {
            if let Err(e) = h.join().expect("latent worker panicked") {
                failure.get_or_insert(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(partials),
    }
}

/// Fold packed block partials (in block order) into a full precision matrix
/// Λ = Σ₀⁻¹ + w Σ ω d dᵀ.
fn assemble_precision(
    prior_prec: &DMatrix<f64>,
    partials: &[Vec<f64>],
    w: f64,
    p: usize,
) -> DMatrix<f64> {
    let mut packed = vec![0.0; packed_len(p)];
    for part in partials {
        for (acc, v) in packed.iter_mut().zip(part) {
            *acc += v;
        }
    }
    let mut lambda = prior_prec.clone();
    let mut k = 0;
    for a in 0..p {
        for b in 0..=a {
            let v = w * packed[k];
            k += 1;
            lambda[(a, b)] += v;
            if a != b {
                lambda[(b, a)] += v;
            }
        }
    }
    lambda
}

/// Draw β ~ N(μ*, Λ⁻¹) given the factored precision: μ* + L⁻ᵀ z.
fn draw_beta(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    mu: &DVector<f64>,
    rng: &mut impl Rng,
) -> Result<DVector<f64>> {
    let p = mu.len();
    let z = DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let x = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| {
            CoxError::NotPositiveDefinite("triangular solve failed during sampling".into())
        })?;
    Ok(mu + x)
}

/// The Gaussian full conditional of β given fixed latents: returns
/// (μ*, Λ) with Λ row-major. Exposed so the update can be validated against
/// an independent dense solve.
pub fn conditional_given_omega(
    pairs: &PairContrasts,
    omega: &[f64],
    prior: &PriorSpec,
    w: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = pairs.p();
    if omega.len() != pairs.q() {
        return Err(CoxError::InvalidConfig(format!(
            "omega has length {}, expected {}",
            omega.len(),
            pairs.q()
        )));
    }
    if prior.dim() != p {
        return Err(CoxError::InvalidConfig(
            "prior dimension does not match contrasts".into(),
        ));
    }
    let prior_prec = prior.precision();
    let mut lambda = prior_prec.clone();
    for (q, row) in pairs.contrasts().chunks_exact(p).enumerate() {
        for a in 0..p {
            let v = w * omega[q] * row[a];
            for b in 0..p {
                lambda[(a, b)] += v * row[b];
            }
        }
    }
    let rhs = &prior_prec * DVector::from_column_slice(prior.mean())
        + DVector::from_vec(pairs.contrast_sum()) * (w / 2.0);
    let chol = Cholesky::new(lambda.clone()).ok_or_else(|| {
        CoxError::NotPositiveDefinite("conditional precision failed Cholesky".into())
    })?;
    let mu = chol.solve(&rhs);
    Ok((
        mu.as_slice().to_vec(),
        lambda.transpose().as_slice().to_vec(),
    ))
}

/// One Gibbs sweep driven by a caller-supplied stream: draws all latents
/// sequentially from `rng`, then β. Distributionally identical to the sweeps
/// inside `run`, which instead consume per-block substreams for thread-count
/// invariance.
pub fn gibbs_sweep(
    pairs: &PairContrasts,
    beta: &[f64],
    cfg: &FitConfig,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let p = pairs.p();
    cfg.validate(p)?;
    if beta.len() != p {
        return Err(CoxError::InvalidConfig(format!(
            "beta has length {}, expected {p}",
            beta.len()
        )));
    }
    let prior_prec = cfg.prior.precision();
    let w = cfg.learning_rate;
    let mut lambda = prior_prec.clone();
    for row in pairs.contrasts().chunks_exact(p) {
        let eta: f64 = row.iter().zip(beta).map(|(d, b)| d * b).sum();
        let omega = pg::sample_pg1(eta, rng)?.value;
        for a in 0..p {
            let v = w * omega * row[a];
            for b in 0..p {
                lambda[(a, b)] += v * row[b];
            }
        }
    }
    let rhs = &prior_prec * DVector::from_column_slice(cfg.prior.mean())
        + DVector::from_vec(pairs.contrast_sum()) * (w / 2.0);
    let chol = Cholesky::new(lambda).ok_or_else(|| {
        CoxError::NotPositiveDefinite(
            "sweep precision failed Cholesky (should be impossible for a valid prior)".into(),
        )
    })?;
    let mu = chol.solve(&rhs);
    Ok(draw_beta(&chol, &mu, rng)?.as_slice().to_vec())
}

/// Run M sweeps and collect the uncorrected chain.
///
/// `wall_seconds` covers the sweep loop only, excluding pair construction,
/// matching how sampling rates are reported.
pub fn run(pairs: &PairContrasts, cfg: &FitConfig) -> Result<Chain> {
    let p = pairs.p();
    cfg.validate(p)?;
    let w = cfg.learning_rate;
    let prior_prec = cfg.prior.precision();
    let rhs = &prior_prec * DVector::from_column_slice(cfg.prior.mean())
        + DVector::from_vec(pairs.contrast_sum()) * (w / 2.0);

    let mut beta: Vec<f64> = cfg.init.clone().unwrap_or_else(|| vec![0.0; p]);
    let mut samples = Vec::with_capacity(cfg.iterations * p);

    let start = Instant::now();
    for sweep in 0..cfg.iterations {
        let partials = latent_pass(pairs, &beta, cfg.seed, sweep as u64, cfg.threads)?;
        let lambda = assemble_precision(&prior_prec, &partials, w, p);
        let chol = Cholesky::new(lambda).ok_or_else(|| {
            CoxError::NotPositiveDefinite(format!(
                "sweep {sweep}: precision failed Cholesky (should be impossible)"
            ))
        })?;
        let mu = chol.solve(&rhs);
        let mut rng = substream(cfg.seed, TAG_BETA, sweep as u64, 0);
        let next = draw_beta(&chol, &mu, &mut rng)?;
        beta.copy_from_slice(next.as_slice());
        samples.extend_from_slice(&beta);
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    Chain::from_samples(samples, p, cfg.burn_in, cfg.seed, wall_seconds)
}

/// Apply the finite-sample correction: translate every sample (burn-in
/// included) by -H_PL(β̃)⁻¹ S_PL(β̃) evaluated at the post-burn-in mean β̃.
///
/// The chain's shape is untouched; only its location moves. Fails without
/// consuming the input if the partial-likelihood Hessian is singular at β̃.
pub fn correct(chain: &Chain, data: &SurvivalDataset, ties: Ties) -> Result<Chain> {
    if chain.is_corrected() {
        return Err(CoxError::InvalidConfig(
            "chain is already corrected".into(),
        ));
    }
    if data.p() != chain.dim() {
        return Err(CoxError::InvalidConfig(format!(
            "dataset has {} covariates but the chain has dimension {}",
            data.p(),
            chain.dim()
        )));
    }
    let beta_tilde = chain.post_burn_mean();
    let sh = partial::score_hessian(data, &beta_tilde, ties)?;
    let p = chain.dim();
    let neg_h = DMatrix::from_row_slice(p, p, &sh.hessian).map(|v| -v);
    let chol = Cholesky::new(neg_h).ok_or_else(|| {
        CoxError::Correction(
            "partial-likelihood Hessian is singular at the post-burn-in mean; \
             returning the chain uncorrected"
                .into(),
        )
    })?;
    let shift = chol.solve(&DVector::from_column_slice(&sh.score));

    let mut samples = chain.samples().to_vec();
    for row in samples.chunks_exact_mut(p) {
        for (v, s) in row.iter_mut().zip(shift.iter()) {
            *v += s;
        }
    }
    let mut corrected = Chain::from_samples(
        samples,
        p,
        chain.burn_in(),
        chain.seed(),
        chain.wall_seconds(),
    )?;
    corrected.correction = Some(shift.as_slice().to_vec());
    Ok(corrected)
}
