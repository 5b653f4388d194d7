//! Zeta (discrete power law) populations with exact species masses.

use std::sync::Arc;

use rand::Rng;

use crate::error::{domain, Result};
use crate::samplers::open01;

/// Bernoulli numbers `B_2, B_4, ..., B_20` for the Euler–Maclaurin tail.
const BERNOULLI: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta function for `s > 1`: a direct sum over `j < 20` and an
/// Euler–Maclaurin correction for the rest.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(domain(format!("zeta needs s > 1, got {s}")));
    }
    const CUT: f64 = 20.0;
    let head: f64 = (1..20).map(|j| (j as f64).powf(-s)).sum();
    let mut tail = CUT.powf(1.0 - s) / (s - 1.0) + 0.5 * CUT.powf(-s);
    // rising product s (s+1) ... (s+2j-2) divided by (2j)!
    let mut factor = s / 2.0;
    let mut power = CUT.powf(-s - 1.0);
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = b * factor * power;
        tail += term;
        if term.abs() < 1e-17 * (head + tail) {
            break;
        }
        let next = 2.0 * j as f64 + 2.0;
        factor *= (s + next - 1.0) * (s + next) / ((next + 1.0) * (next + 2.0));
        power /= CUT * CUT;
    }
    Ok(head + tail)
}

/// Species covered by the inversion table.
const TABLE_SIZE: usize = 1 << 20;

/// The Zeta distribution `P[Z = z] = z^(-s) / zeta(s)`, `z = 1, 2, ...`.
///
/// Draws use CDF inversion over a table of the first 2^20 species and
/// exact rejection from a continuous envelope beyond it. The tail cannot
/// be tabulated for `s` near one: at `s = 1.1` the mass above 2^20 is
/// about 0.24. Species are returned as integer-valued `f64` because the
/// tail reaches far past `u64::MAX` with non-negligible probability.
#[derive(Debug, Clone)]
pub struct ZetaPopulation {
    s: f64,
    normalizer: f64,
    cdf: Arc<Vec<f64>>,
}

impl ZetaPopulation {
    pub fn new(s: f64) -> Result<Self> {
        let normalizer = riemann_zeta(s)?;
        let mut cdf = Vec::with_capacity(TABLE_SIZE);
        let mut acc = 0.0;
        for z in 1..=TABLE_SIZE {
            acc += (z as f64).powf(-s) / normalizer;
            cdf.push(acc);
        }
        Ok(ZetaPopulation { s, normalizer, cdf: Arc::new(cdf) })
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    /// `zeta(s)`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Probability of species `z`.
    pub fn mass(&self, z: f64) -> f64 {
        z.powf(-self.s) / self.normalizer
    }

    /// Probability of a species beyond the table.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.cdf[TABLE_SIZE - 1]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        if idx < TABLE_SIZE {
            return (idx + 1) as f64;
        }
        self.sample_tail(rng)
    }

    /// Draw conditioned on exceeding the table. The envelope puts mass
    /// `int_{z-1}^z x^(-s) dx >= z^(-s)` on `z`; a continuous Pareto draw
    /// on `[TABLE_SIZE, inf)` rounded up realizes it.
    fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let start = TABLE_SIZE as f64;
        let s = self.s;
        loop {
            let x = start * open01(rng).powf(-1.0 / (s - 1.0));
            if !x.is_finite() {
                continue;
            }
            let z = x.ceil().max(start + 1.0);
            // z^(-s) / int_{z-1}^z x^(-s) dx, computed relative to z
            let envelope = ((1.0 - s) * (-1.0 / z).ln_1p()).exp_m1() / (s - 1.0) * z;
            let ratio = if envelope > 0.0 { (1.0 / envelope).min(1.0) } else { 1.0 };
            if open01(rng) <= ratio {
                return z;
            }
        }
    }

    /// `count` independent draws.
    pub fn sample_n<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }
}
