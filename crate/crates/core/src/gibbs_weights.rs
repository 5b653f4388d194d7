//! The predictive weights `V_{n,k}` of Gibbs-type priors.
//!
//! All weights are returned as natural logarithms. For the Pitman–Yor
//! prior they are a ratio of Pochhammer products; for the normalized
//! generalized gamma prior either an alternating incomplete-gamma sum
//! (small `n` only) or a one-dimensional integral; for a generic prior a
//! Monte Carlo average over polynomially tilted stable draws.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_sigma, domain, Error, Result};
use crate::quadrature::integrate_peaked;
use crate::samplers::{sample_beta, PolyTiltedStable, RngStream};
use crate::special_fn::{lgamma, ln_pochhammer, signed_log_sum, upper_incomplete_gamma_ln, SignedLog};

/// Largest `n` for which the alternating-sum form may be requested.
pub const ALTERNATING_SUM_MAX_N: u64 = 50;

/// Decimal digits the alternating sum may lose before its result is
/// rejected.
pub const MAX_LOST_DIGITS: f64 = 8.0;

/// Default number of Monte Carlo draws for generic priors.
pub const DEFAULT_MC_DRAWS: usize = 100_000;

/// Draws per independent stream in Monte Carlo evaluations.
const MC_BLOCK: usize = 4096;

/// `ln h(t)` for the weight function of a generic Gibbs-type prior.
#[derive(Clone)]
pub struct LogH(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl LogH {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        LogH(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }

    /// `ln h` reproducing the Pitman–Yor weights,
    /// `h(t) = sigma Gamma(theta) t^(-theta) / Gamma(theta/sigma)`.
    pub fn pitman_yor(sigma: f64, theta: f64) -> Self {
        let c = sigma.ln() + lgamma(theta) - lgamma(theta / sigma);
        LogH::new(move |t| c - theta * t.ln())
    }

    /// `ln h` reproducing the generalized gamma weights,
    /// `h(t) = exp(tau^sigma - tau t)`.
    pub fn generalized_gamma(sigma: f64, tau: f64) -> Self {
        let c = tau.powf(sigma);
        LogH::new(move |t| c - tau * t)
    }
}

impl fmt::Debug for LogH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LogH(..)")
    }
}

/// Monte Carlo settings carried by a generic prior so that its weights are
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { draws: DEFAULT_MC_DRAWS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    #[serde(rename = "pd")]
    PitmanYor,
    #[serde(rename = "gg")]
    GeneralizedGamma,
    Generic,
}

/// A Gibbs-type prior.
#[derive(Debug, Clone)]
pub enum PriorSpec {
    PitmanYor { sigma: f64, theta: f64 },
    GeneralizedGamma { sigma: f64, tau: f64 },
    Generic { sigma: f64, log_h: LogH, mc: McConfig },
}

impl PriorSpec {
    pub fn pitman_yor(sigma: f64, theta: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !(theta > -sigma) || !theta.is_finite() {
            return Err(domain(format!("theta must exceed -sigma, got theta={theta}, sigma={sigma}")));
        }
        Ok(PriorSpec::PitmanYor { sigma, theta })
    }

    pub fn generalized_gamma(sigma: f64, tau: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(domain(format!("tau must be positive, got {tau}")));
        }
        Ok(PriorSpec::GeneralizedGamma { sigma, tau })
    }

    pub fn generic(sigma: f64, log_h: LogH, mc: McConfig) -> Result<Self> {
        check_sigma(sigma)?;
        if mc.draws < 1000 {
            return Err(domain("Monte Carlo weights need at least 1000 draws"));
        }
        Ok(PriorSpec::Generic { sigma, log_h, mc })
    }

    pub fn sigma(&self) -> f64 {
        match self {
            PriorSpec::PitmanYor { sigma, .. }
            | PriorSpec::GeneralizedGamma { sigma, .. }
            | PriorSpec::Generic { sigma, .. } => *sigma,
        }
    }

    pub fn kind(&self) -> PriorKind {
        match self {
            PriorSpec::PitmanYor { .. } => PriorKind::PitmanYor,
            PriorSpec::GeneralizedGamma { .. } => PriorKind::GeneralizedGamma,
            PriorSpec::Generic { .. } => PriorKind::Generic,
        }
    }

    /// `ln V_{n,k}` by the default method for the prior.
    pub fn ln_weight(&self, n: u64, k: u64) -> Result<f64> {
        match self {
            PriorSpec::PitmanYor { sigma, theta } => v_pd_ln(n, k, *sigma, *theta),
            PriorSpec::GeneralizedGamma { sigma, tau } => v_gg_ln(n, k, *sigma, *tau, GgMethod::Quadrature),
            PriorSpec::Generic { mc, .. } => {
                let mut rng = RngStream::new(mc.seed, 0);
                Ok(v_mc_ln(n, k, self, mc.draws, &mut rng)?.ln_estimate)
            }
        }
    }
}

fn check_counts(n: u64, k: u64) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
    }
    Ok(())
}

/// `ln V_{n,k}` for the Pitman–Yor prior,
/// `prod_{i<k} (theta + i sigma) / (theta)_n`.
pub fn v_pd_ln(n: u64, k: u64, sigma: f64, theta: f64) -> Result<f64> {
    check_counts(n, k)?;
    check_sigma(sigma)?;
    if !(theta > -sigma) {
        return Err(domain(format!("theta must exceed -sigma, got {theta}")));
    }
    if theta == 0.0 {
        // both products start with a zero factor; cancel it
        return Ok((k - 1) as f64 * sigma.ln() + lgamma(k as f64) - lgamma(n as f64));
    }
    let num = SignedLog::from_ln(k as f64 * sigma.ln()) * ln_pochhammer(theta / sigma, k);
    let den = ln_pochhammer(theta, n);
    (num / den).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GgMethod {
    AlternatingSum,
    Quadrature,
}

/// `ln V_{n,k}` for the normalized generalized gamma prior.
pub fn v_gg_ln(n: u64, k: u64, sigma: f64, tau: f64, method: GgMethod) -> Result<f64> {
    check_counts(n, k)?;
    check_sigma(sigma)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(domain(format!("tau must be positive, got {tau}")));
    }
    match method {
        GgMethod::AlternatingSum => v_gg_alternating_ln(n, k, sigma, tau),
        GgMethod::Quadrature => v_gg_quadrature_ln(n, k, sigma, tau),
    }
}

/// `sigma^(k-1) e^(tau^sigma) / Gamma(n) sum_i C(n-1,i) (-tau)^i Gamma(k - i/sigma; tau^sigma)`.
fn v_gg_alternating_ln(n: u64, k: u64, sigma: f64, tau: f64) -> Result<f64> {
    if n > ALTERNATING_SUM_MAX_N {
        return Err(Error::Method(format!(
            "alternating sum is limited to n <= {ALTERNATING_SUM_MAX_N}, got n={n}"
        )));
    }
    let x = tau.powf(sigma);
    let ln_tau = tau.ln();
    let nm1 = (n - 1) as f64;
    let mut terms = Vec::with_capacity(n as usize);
    for i in 0..n {
        let fi = i as f64;
        let ln_binom = lgamma(nm1 + 1.0) - lgamma(fi + 1.0) - lgamma(nm1 - fi + 1.0);
        let g = upper_incomplete_gamma_ln(k as f64 - fi / sigma, x)?;
        let sign = if i % 2 == 0 { 1 } else { -1 };
        terms.push(SignedLog::new(sign, ln_binom + fi * ln_tau + g.log_abs()));
    }
    let magnitude = signed_log_sum(terms.iter().map(|t| SignedLog::from_ln(t.log_abs())));
    let sum = signed_log_sum(terms.iter().copied());
    let lost = if sum.sign() > 0 {
        (magnitude.log_abs() - sum.log_abs()) / std::f64::consts::LN_10
    } else {
        f64::INFINITY
    };
    if lost > MAX_LOST_DIGITS {
        return Err(Error::Cancellation { context: format!("alternating weight sum at n={n}, k={k}"), lost_digits: lost });
    }
    Ok((k - 1) as f64 * sigma.ln() + x - lgamma(n as f64) + sum.log_abs())
}

/// Log of the integrand of the integral form,
/// `x^(n-1) (tau+x)^(sigma k - n) exp(tau^sigma - (tau+x)^sigma)`,
/// returned as the pair (value at `mode`, function giving the value at
/// `x` minus the value at `mode`). The difference is formed from
/// `ln1p`/`expm1` of the offset so that it stays accurate when the
/// integrand is sharply peaked.
fn gg_log_integrand(n: u64, k: u64, sigma: f64, tau: f64, mode: f64) -> (f64, impl Fn(f64) -> f64) {
    let nm1 = (n - 1) as f64;
    let power = sigma * k as f64 - n as f64;
    let tau_sigma = tau.powf(sigma);
    let shifted = tau + mode;
    let shifted_sigma = shifted.powf(sigma);
    let mut peak = power * shifted.ln() - tau_sigma * (sigma * (mode / tau).ln_1p()).exp_m1();
    if nm1 > 0.0 {
        peak += nm1 * mode.ln();
    }
    let relative = move |x: f64| {
        let u = x - mode;
        let mut v = power * (u / shifted).ln_1p() - shifted_sigma * (sigma * (u / shifted).ln_1p()).exp_m1();
        if nm1 > 0.0 {
            v += nm1 * (u / mode).ln_1p();
        }
        v
    };
    (peak, relative)
}

/// Positive root of `sigma x (tau+x)^sigma = (n-1) tau + (sigma k - 1) x`,
/// the maximizer of the integrand (zero when `n = 1`).
pub(crate) fn gg_mode(n: u64, k: u64, sigma: f64, tau: f64) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let g = |x: f64| sigma * x * (tau + x).powf(sigma) - (n - 1) as f64 * tau - (sigma * k as f64 - 1.0) * x;
    let mut hi = 1.0_f64.max(tau);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Log of the peak of the integral form and the integral of
/// `exp(log integrand - peak) * weight(x / (tau + x))`.
fn gg_integral<G: Fn(f64) -> f64>(n: u64, k: u64, sigma: f64, tau: f64, weight: G) -> Result<(f64, f64)> {
    let mode = gg_mode(n, k, sigma, tau);
    let (peak, relative) = gg_log_integrand(n, k, sigma, tau, mode);
    let (nm1, kf) = ((n - 1) as f64, k as f64);
    let width = if mode > 0.0 {
        let curvature = nm1 / (mode * mode)
            + (sigma * kf - n as f64) / (tau + mode).powi(2)
            + sigma * (sigma - 1.0) * (tau + mode).powf(sigma - 2.0);
        if curvature > 0.0 {
            curvature.sqrt().recip().min(mode)
        } else {
            mode
        }
    } else {
        tau
    };
    let integrand = |x: f64| {
        if x <= 0.0 && n > 1 {
            0.0
        } else {
            relative(x).exp() * weight(x / (tau + x))
        }
    };
    Ok((peak, integrate_peaked(integrand, 0.0, mode, width, 1e-12)?))
}

fn v_gg_quadrature_ln(n: u64, k: u64, sigma: f64, tau: f64) -> Result<f64> {
    let (peak, integral) = gg_integral(n, k, sigma, tau, |_| 1.0)?;
    Ok(k as f64 * sigma.ln() - lgamma(n as f64) + peak + integral.ln())
}

/// Average of `weight(x / (tau + x))` under the normalized integrand of
/// the generalized gamma weight `V_{n,k}`. With `weight(u) = u^i` this is
/// `(n)_i V_{n+i,k} / V_{n,k}`, so linear combinations of shifted weights
/// can be formed under the integral sign.
pub(crate) fn gg_latent_average<G: Fn(f64) -> f64>(n: u64, k: u64, sigma: f64, tau: f64, weight: G) -> Result<f64> {
    let (_, base) = gg_integral(n, k, sigma, tau, |_| 1.0)?;
    let (_, weighted) = gg_integral(n, k, sigma, tau, weight)?;
    Ok(weighted / base)
}

/// Result of a Monte Carlo weight evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloWeight {
    /// Logarithm of the estimate of `V_{n,k}`.
    pub ln_estimate: f64,
    /// Standard error of the estimate divided by the estimate.
    pub rel_stderr: f64,
}

/// Monte Carlo estimate of `V_{n,k}` through
/// `V = sigma^(k-1) Gamma(k) / Gamma(n) E[h(S_{sigma,k} / B_{sigma k, n - sigma k})]`.
///
/// Draws are split into fixed blocks, each with its own stream derived
/// from one word of `rng`, so the result does not depend on the number of
/// worker threads.
pub fn v_mc_ln(n: u64, k: u64, prior: &PriorSpec, draws: usize, rng: &mut RngStream) -> Result<MonteCarloWeight> {
    check_counts(n, k)?;
    let PriorSpec::Generic { sigma, log_h, .. } = prior else {
        return Err(Error::UnsupportedPrior("Monte Carlo weights (generic priors only)"));
    };
    if draws < 1000 {
        return Err(domain(format!("at least 1000 draws required, got {draws}")));
    }
    let sigma = *sigma;
    let (a, b) = (sigma * k as f64, n as f64 - sigma * k as f64);
    let base = rng.next_u64();
    let blocks = draws.div_ceil(MC_BLOCK);
    let log_h_values: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|block| -> Result<Vec<f64>> {
            let mut stream = RngStream::new(base, block as u64);
            let mut tilted = PolyTiltedStable::new(sigma, k as f64)?;
            let count = MC_BLOCK.min(draws - block * MC_BLOCK);
            (0..count)
                .map(|_| {
                    let s = tilted.sample(&mut stream)?;
                    let beta = if b > 0.0 { sample_beta(a, b, &mut stream)? } else { 1.0 };
                    Ok(log_h.eval(s / beta))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = log_h_values.into_iter().flatten().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(domain("weight function is not finite on the Monte Carlo draws"));
    }
    let scaled: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let count = scaled.len() as f64;
    let mean = scaled.iter().sum::<f64>() / count;
    let var = scaled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let ln_prefactor = (k - 1) as f64 * sigma.ln() + lgamma(k as f64) - lgamma(n as f64);
    Ok(MonteCarloWeight { ln_estimate: ln_prefactor + max + mean.ln(), rel_stderr: (var / count).sqrt() / mean })
}

/// The two weight ratios entering the discovery estimators:
/// `g0 = V_{n+1,k+1} / V_{n,k}` (new species) and
/// `g1 = V_{n+1,k} / V_{n,k}` (per unit of tied frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightRatioPair {
    pub g0: f64,
    pub g1: f64,
}

/// Tolerance on `g0 + (n - sigma k) g1 = 1` before normalization.
const RECURSION_TOLERANCE: f64 = 1e-8;

pub fn weight_ratios(n: u64, k: u64, prior: &PriorSpec) -> Result<WeightRatioPair> {
    check_counts(n, k)?;
    let sigma = prior.sigma();
    let free = n as f64 - sigma * k as f64;
    match prior {
        PriorSpec::PitmanYor { sigma, theta } => {
            let denom = theta + n as f64;
            Ok(WeightRatioPair { g0: (theta + sigma * k as f64) / denom, g1: 1.0 / denom })
        }
        PriorSpec::GeneralizedGamma { .. } => {
            let base = prior.ln_weight(n, k)?;
            let g0 = (prior.ln_weight(n + 1, k + 1)? - base).exp();
            let g1 = (prior.ln_weight(n + 1, k)? - base).exp();
            let total = g0 + free * g1;
            if (total - 1.0).abs() > RECURSION_TOLERANCE {
                return Err(Error::Quadrature(format!(
                    "weight ratios violate the triangular recursion by {:e}",
                    total - 1.0
                )));
            }
            Ok(WeightRatioPair { g0: g0 / total, g1: g1 / total })
        }
        PriorSpec::Generic { .. } => {
            let base = prior.ln_weight(n, k)?;
            let g0 = (prior.ln_weight(n + 1, k + 1)? - base).exp().clamp(0.0, 1.0);
            Ok(WeightRatioPair { g0, g1: (1.0 - g0) / free })
        }
    }
}
