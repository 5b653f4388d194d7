//! Posterior laws of the discovery probability `Q(A_l) | X`: sampling,
//! credible intervals and density recovery from moments.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimators::{general_moment, posterior_moment, EventSpec, Interval};
use crate::gibbs_weights::PriorSpec;
use crate::quadrature::gauss_legendre;
use crate::samplers::{open01, sample_beta, sample_w, RngStream, ZgSampler};
use crate::special_fn::{beta_quantile, lgamma};
use crate::summary::SampleSummary;

/// Number of posterior draws used for empirical intervals by default.
pub const DEFAULT_DRAWS: usize = 5000;

/// Number of moments kept for priors without a closed-form posterior.
pub const DEFAULT_MOMENTS: u32 = 10;

/// Law of `Q(A_l)` given the sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosteriorLaw {
    /// Beta(a, b).
    ExactBeta { a: f64, b: f64 },
    /// `W_{n - sigma k, Z_g}` for `l = 0`, otherwise an independent Beta
    /// fraction of `1 - W_{n - sigma k, Z_g}`.
    GgComposite { sigma: f64, tau: f64, n: u64, k: u64, l: u64, m_l: u64 },
    /// Raw moments of orders `1..=R`.
    MomentSequence { moments: Vec<f64> },
}

impl PosteriorLaw {
    pub fn exact_beta(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !(a.is_finite() && b.is_finite()) {
            return Err(domain(format!("Beta parameters must be positive, got ({a}, {b})")));
        }
        Ok(PosteriorLaw::ExactBeta { a, b })
    }

    pub fn moment_sequence(moments: Vec<f64>) -> Result<Self> {
        check_moments(&moments)?;
        Ok(PosteriorLaw::MomentSequence { moments })
    }
}

/// Posterior law of `Q(A_l)` under `prior`, keeping [`DEFAULT_MOMENTS`]
/// moments for generic priors.
pub fn posterior_law(s: &SampleSummary, prior: &PriorSpec, l: u64) -> Result<PosteriorLaw> {
    posterior_law_with_moments(s, prior, l, DEFAULT_MOMENTS)
}

/// As [`posterior_law`] with `count` moments for generic priors.
///
/// Generic moments come from Monte Carlo weights, and a Legendre expansion
/// of degree `R` magnifies their relative error by roughly `C(2R, R)`.
/// With the default 10^5 draws only the first four or five moments carry
/// usable information about the shape.
pub fn posterior_law_with_moments(s: &SampleSummary, prior: &PriorSpec, l: u64, count: u32) -> Result<PosteriorLaw> {
    if l > s.n() {
        return Err(domain(format!("l = {l} exceeds the sample size {}", s.n())));
    }
    let m_l = s.m(l);
    if l > 0 && m_l == 0 {
        return Err(Error::UnobservedFrequency { l });
    }
    let sigma = prior.sigma();
    let (n, k) = (s.n() as f64, s.k() as f64);
    let tied = (l as f64 - sigma) * m_l as f64;
    match *prior {
        PriorSpec::PitmanYor { theta, .. } => {
            if l == 0 {
                PosteriorLaw::exact_beta(theta + sigma * k, n - sigma * k)
            } else {
                PosteriorLaw::exact_beta(tied, theta + n - tied)
            }
        }
        PriorSpec::GeneralizedGamma { tau, .. } => {
            Ok(PosteriorLaw::GgComposite { sigma, tau, n: s.n(), k: s.k(), l, m_l })
        }
        PriorSpec::Generic { .. } => {
            let event = if l == 0 { EventSpec::unseen() } else { EventSpec::seen_exactly(s, sigma, l) };
            if count < 2 {
                return Err(domain("at least two moments are needed"));
            }
            let moments = (1..=count)
                .map(|r| if l == 0 { general_moment(s, prior, event, r) } else { posterior_moment(s, prior, l, r) })
                .collect::<Result<Vec<_>>>()?;
            PosteriorLaw::moment_sequence(moments)
        }
    }
}

/// `count` independent draws from `law`.
pub fn sample_posterior(law: &PosteriorLaw, count: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(domain("draw count must be at least 1"));
    }
    match law {
        PosteriorLaw::ExactBeta { a, b } => (0..count).map(|_| sample_beta(*a, *b, rng)).collect(),
        &PosteriorLaw::GgComposite { sigma, tau, n, k, l, m_l } => {
            let free = n as f64 - sigma * k as f64;
            let tied = (l as f64 - sigma) * m_l as f64;
            let mut zg = ZgSampler::new(sigma, tau, n, k)?;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let z = zg.sample(rng)?;
                let w = sample_w(free, z, sigma, rng)?;
                if l == 0 {
                    out.push(w);
                } else if tied >= free {
                    // every tied observation has frequency l
                    out.push(1.0 - w);
                } else {
                    out.push(sample_beta(tied, free - tied, rng)? * (1.0 - w));
                }
            }
            Ok(out)
        }
        PosteriorLaw::MomentSequence { moments } => {
            let density = moments_to_density(moments)?;
            Ok((0..count).map(|_| density.quantile(open01(rng))).collect())
        }
    }
}

/// Equal-tailed credible interval at `level`. Beta laws use exact
/// quantiles; other laws use empirical quantiles of `count` draws.
pub fn credible_interval(law: &PosteriorLaw, level: f64, count: usize, rng: &mut RngStream) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(domain(format!("level must be in (0, 1), got {level}")));
    }
    let tail = 0.5 * (1.0 - level);
    let (lo, hi) = match law {
        PosteriorLaw::ExactBeta { a, b } => (beta_quantile(*a, *b, tail)?, beta_quantile(*a, *b, 1.0 - tail)?),
        PosteriorLaw::MomentSequence { moments } => {
            let density = moments_to_density(moments)?;
            (density.quantile(tail), density.quantile(1.0 - tail))
        }
        PosteriorLaw::GgComposite { .. } => {
            let mut draws = sample_posterior(law, count, rng)?;
            draws.sort_by(f64::total_cmp);
            (empirical_quantile(&draws, tail), empirical_quantile(&draws, 1.0 - tail))
        }
    };
    Ok(Interval { lo, hi, level })
}

/// Credible interval for `Q(A_l)`, reporting `(0, 0)` for a frequency
/// that does not occur in the sample.
pub fn discovery_interval(
    s: &SampleSummary,
    prior: &PriorSpec,
    l: u64,
    level: f64,
    count: usize,
    rng: &mut RngStream,
) -> Result<Interval> {
    match posterior_law(s, prior, l) {
        Err(Error::UnobservedFrequency { .. }) => Ok(Interval { lo: 0.0, hi: 0.0, level }),
        Err(e) => Err(e),
        Ok(law) => credible_interval(&law, level, count, rng),
    }
}

/// Linear-interpolation quantile of sorted data (type 7).
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    match sorted.get(i + 1) {
        Some(&next) => sorted[i] + (h - i as f64) * (next - sorted[i]),
        None => sorted[i],
    }
}

const HANKEL_TOLERANCE: f64 = -1e-8;

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let size = a.len();
    let mut det = 1.0;
    for col in 0..size {
        let pivot = (col..size).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..size {
            let factor = a[row][col] / a[col][col];
            for j in col..size {
                a[row][j] -= factor * a[col][j];
            }
        }
    }
    det
}

/// Checks the Hankel conditions for a moment sequence on `[0, 1]`:
/// the matrices built from `m_{i+j}` and from `m_{i+j+1} - m_{i+j+2}`
/// must have nonnegative leading determinants.
fn check_moments(moments: &[f64]) -> Result<()> {
    if moments.is_empty() {
        return Err(Error::InfeasibleMoments("empty moment sequence".into()));
    }
    if let Some(m) = moments.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::InfeasibleMoments(format!("moment {m} outside [0, 1]")));
    }
    let mut all = vec![1.0];
    all.extend_from_slice(moments);
    let r = moments.len();
    for size in 1..=r / 2 + 1 {
        if 2 * (size - 1) <= r {
            let h: Vec<Vec<f64>> = (0..size).map(|i| (0..size).map(|j| all[i + j]).collect()).collect();
            let d = determinant(h);
            if d < HANKEL_TOLERANCE {
                return Err(Error::InfeasibleMoments(format!("Hankel determinant of size {size} is {d:e}")));
            }
        }
        if 2 * size <= r {
            let h: Vec<Vec<f64>> =
                (0..size).map(|i| (0..size).map(|j| all[i + j + 1] - all[i + j + 2]).collect()).collect();
            let d = determinant(h);
            if d < HANKEL_TOLERANCE {
                return Err(Error::InfeasibleMoments(format!("shifted Hankel determinant of size {size} is {d:e}")));
            }
        }
    }
    Ok(())
}

/// Coefficients of the shifted Legendre polynomial of degree `j` on
/// `[0, 1]`, lowest power first.
fn shifted_legendre(j: usize) -> Vec<f64> {
    let ln_choose = |a: usize, b: usize| lgamma(a as f64 + 1.0) - lgamma(b as f64 + 1.0) - lgamma((a - b) as f64 + 1.0);
    (0..=j)
        .map(|i| {
            let sign = if (j + i).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * (ln_choose(j, i) + ln_choose(j + i, i)).exp().round()
        })
        .collect()
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const GRID_CELLS: usize = 1024;

/// Density on `[0, 1]` recovered from its first `R` moments.
#[derive(Debug, Clone)]
pub struct MomentDensity {
    /// Unclipped expansion as power-series coefficients.
    poly: Vec<f64>,
    norm: f64,
    /// CDF of the clipped, renormalized density at the cell edges.
    cdf: Vec<f64>,
}

/// Shifted-Legendre expansion matching the given moments of orders
/// `1..=R`, clipped at zero and renormalized.
pub fn moments_to_density(moments: &[f64]) -> Result<MomentDensity> {
    if moments.len() < 2 {
        return Err(domain("at least two moments are needed"));
    }
    check_moments(moments)?;
    let mut all = vec![1.0];
    all.extend_from_slice(moments);
    let r = moments.len();
    let mut poly = vec![0.0; r + 1];
    for j in 0..=r {
        let p = shifted_legendre(j);
        let expectation: f64 = p.iter().zip(&all).map(|(c, m)| c * m).sum();
        let coeff = (2 * j + 1) as f64 * expectation;
        for (i, c) in p.iter().enumerate() {
            poly[i] += coeff * c;
        }
    }
    let mut density = MomentDensity { poly, norm: 1.0, cdf: Vec::new() };
    let (nodes, weights) = gauss_legendre(8);
    let h = 1.0 / GRID_CELLS as f64;
    let mut cdf = Vec::with_capacity(GRID_CELLS + 1);
    cdf.push(0.0);
    for cell in 0..GRID_CELLS {
        let a = cell as f64 * h;
        let mass: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| 0.5 * h * w * density.unnormalized(a + 0.5 * h * (x + 1.0)))
            .sum();
        cdf.push(cdf[cell] + mass);
    }
    let total = cdf[GRID_CELLS];
    if !(total > 0.0) {
        return Err(Error::InfeasibleMoments("expansion is nowhere positive".into()));
    }
    density.norm = total;
    density.cdf = cdf.into_iter().map(|c| c / total).collect();
    Ok(density)
}

impl MomentDensity {
    fn unnormalized(&self, x: f64) -> f64 {
        eval_poly(&self.poly, x).max(0.0)
    }

    /// Value of the expansion before clipping.
    pub fn raw(&self, x: f64) -> f64 {
        eval_poly(&self.poly, x)
    }

    /// `int_0^1 x^r p(x) dx` for the unclipped expansion `p`.
    pub fn raw_moment(&self, r: u32) -> f64 {
        // exact for polynomials: sum_i c_i / (i + r + 1)
        self.poly.iter().enumerate().map(|(i, c)| c / (i as f64 + r as f64 + 1.0)).sum()
    }

    /// Clipped and renormalized density, zero outside `[0, 1]`.
    pub fn density(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.unnormalized(x) / self.norm
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let scaled = x * GRID_CELLS as f64;
        let cell = (scaled.floor() as usize).min(GRID_CELLS - 1);
        let a = cell as f64 / GRID_CELLS as f64;
        self.cdf[cell] + self.partial(a, x)
    }

    /// Mass of the normalized density on `[a, b]` within one cell.
    fn partial(&self, a: f64, b: f64) -> f64 {
        let (nodes, weights) = gauss_legendre(8);
        let h = b - a;
        nodes.iter().zip(&weights).map(|(x, w)| 0.5 * h * w * self.density(a + 0.5 * h * (x + 1.0))).sum()
    }

    /// Smallest `x` with `cdf(x) >= p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let cell = self.cdf.partition_point(|&c| c < p).clamp(1, GRID_CELLS) - 1;
        let (mut lo, mut hi) = (cell as f64 / GRID_CELLS as f64, (cell + 1) as f64 / GRID_CELLS as f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_coefficients() {
        assert_eq!(shifted_legendre(0), vec![1.0]);
        assert_eq!(shifted_legendre(1), vec![-1.0, 2.0]);
        assert_eq!(shifted_legendre(2), vec![1.0, -6.0, 6.0]);
        assert_eq!(shifted_legendre(3), vec![-1.0, 12.0, -30.0, 20.0]);
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(vec![vec![2.0, 1.0], vec![1.0, 3.0]]), 5.0);
        assert_eq!(determinant(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }

    #[test]
    fn type7_quantile() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(empirical_quantile(&xs, 0.0), 1.0);
        assert_eq!(empirical_quantile(&xs, 0.5), 2.5);
        assert_eq!(empirical_quantile(&xs, 1.0), 4.0);
    }

    #[test]
    fn infeasible_moments_rejected() {
        // mean 0.5 with second moment above the mean is impossible on [0, 1]
        assert!(matches!(check_moments(&[0.5, 0.6]), Err(Error::InfeasibleMoments(_))));
        // variance below zero
        assert!(matches!(check_moments(&[0.5, 0.2]), Err(Error::InfeasibleMoments(_))));
        assert!(check_moments(&[0.5, 0.3, 0.2]).is_ok());
    }
}
