//! Positive stable laws and their exponential and polynomial tilts.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use super::ars::{open01, AdaptiveRejectionSampler, LogConcaveTarget};
use crate::error::{check_sigma, domain, Result};

/// `ln A(u)` for Zolotarev's function
/// `A(u) = [sin(su)^s sin((1-s)u)^(1-s) / sin(u)]^(1/(1-s))` on `(0, pi)`.
pub fn zolotarev_ln(sigma: f64, u: f64) -> f64 {
    let num = sigma * (sigma * u).sin().ln() + (1.0 - sigma) * ((1.0 - sigma) * u).sin().ln();
    (num - u.sin().ln()) / (1.0 - sigma)
}

/// Derivative of [`zolotarev_ln`] in `u`.
fn zolotarev_ln_derivative(sigma: f64, u: f64) -> f64 {
    let cot = |x: f64| x.cos() / x.sin();
    let s1 = 1.0 - sigma;
    (sigma * sigma * cot(sigma * u) + s1 * s1 * cot(s1 * u) - cot(u)) / s1
}

fn stable_from_parts(sigma: f64, ln_a: f64, ln_e: f64) -> f64 {
    ((1.0 - sigma) / sigma * (ln_a - ln_e)).exp()
}

/// Positive sigma-stable draw with `E[exp(-tS)] = exp(-t^sigma)`, by
/// Kanter's representation `S = (A(U)/E)^((1-sigma)/sigma)`.
pub fn sample_positive_stable<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(positive_stable(sigma, rng))
}

pub(crate) fn positive_stable<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> f64 {
    let u = PI * open01(rng);
    let e: f64 = Exp1.sample(rng);
    stable_from_parts(sigma, zolotarev_ln(sigma, u), e.ln())
}

/// Exponentially tilted stable law with density `exp(b^sigma - b x) f_sigma(x)`.
///
/// For `b^sigma <= 1` a stable proposal is accepted with probability
/// `exp(-b x)`. Larger tilts use the convolution identity
/// `R_{sigma,b} = m^(-1/sigma) (R_1 + ... + R_m)` with `R_j` drawn at tilt
/// `b m^(-1/sigma)`, `m = ceil(b^sigma)`, so every sub-draw is accepted
/// with probability at least `exp(-1)`.
#[derive(Debug, Clone, Copy)]
pub struct ExpTiltedStable {
    sigma: f64,
    b: f64,
    copies: u64,
    sub_tilt: f64,
}

impl ExpTiltedStable {
    pub fn new(sigma: f64, b: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(domain(format!("tilt must be positive and finite, got {b}")));
        }
        let b_sigma = b.powf(sigma);
        let copies = if b_sigma <= 1.0 { 1 } else { b_sigma.ceil() as u64 };
        let sub_tilt = b * (copies as f64).powf(-1.0 / sigma);
        Ok(ExpTiltedStable { sigma, b, copies, sub_tilt })
    }

    pub fn tilt(&self) -> f64 {
        self.b
    }

    /// Number of independent sub-draws combined per variate.
    pub fn copies(&self) -> u64 {
        self.copies
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_counting(rng).0
    }

    /// A draw together with the number of stable proposals it consumed.
    pub fn sample_counting<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let mut proposals = 0;
        let mut sum = 0.0;
        for _ in 0..self.copies {
            loop {
                proposals += 1;
                let s = positive_stable(self.sigma, rng);
                if open01(rng).ln() <= -self.sub_tilt * s {
                    sum += s;
                    break;
                }
            }
        }
        let scale = if self.copies == 1 { 1.0 } else { (self.copies as f64).powf(-1.0 / self.sigma) };
        (scale * sum, proposals)
    }
}

pub fn sample_exp_tilted_stable<R: Rng + ?Sized>(sigma: f64, b: f64, rng: &mut R) -> Result<f64> {
    Ok(ExpTiltedStable::new(sigma, b)?.sample(rng))
}

#[derive(Debug, Clone)]
enum AngleSampler {
    Uniform,
    LogConcave(AdaptiveRejectionSampler),
    /// Envelope proportional to `(pi - u)^(-power)`.
    Singular { power: f64, ln_bound: f64 },
}

/// Polynomially tilted stable law with density proportional to
/// `x^(-c sigma) f_sigma(x)`, `c > -1`.
///
/// Tilting Kanter's representation gives
/// `S = (A(U)/G)^((1-sigma)/sigma)` with `G ~ Gamma(1 + c(1-sigma))` and
/// `U` on `(0, pi)` with density proportional to `A(u)^(-c(1-sigma))`.
/// The angle is log-concave for `c > 0` (since `ln A` is convex) and
/// drawn by adaptive rejection; for `c < 0` it is drawn against a
/// `(pi - u)^c` envelope.
#[derive(Debug, Clone)]
pub struct PolyTiltedStable {
    sigma: f64,
    c: f64,
    gamma: Gamma<f64>,
    angle: AngleSampler,
}

impl PolyTiltedStable {
    pub fn new(sigma: f64, c: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if !(c > -1.0) || !c.is_finite() {
            return Err(domain(format!("polynomial tilt must exceed -1, got {c}")));
        }
        let shape = 1.0 + c * (1.0 - sigma);
        let gamma = Gamma::new(shape, 1.0).map_err(|e| domain(e.to_string()))?;
        let angle = if c == 0.0 {
            AngleSampler::Uniform
        } else if c > 0.0 {
            let w = c * (1.0 - sigma);
            let target = LogConcaveTarget::new(
                move |u| -w * zolotarev_ln(sigma, u),
                move |u| -w * zolotarev_ln_derivative(sigma, u),
                0.0,
                PI,
            )?
            .with_hint((PI / (1.0 + c)).min(1.0));
            AngleSampler::LogConcave(AdaptiveRejectionSampler::new(target)?)
        } else {
            // (pi - u) A(u)^(1-sigma) decreases from its value at 0.
            let ln_bound = PI.ln() + sigma * sigma.ln() + (1.0 - sigma) * (1.0 - sigma).ln();
            AngleSampler::Singular { power: -c, ln_bound }
        };
        Ok(PolyTiltedStable { sigma, c, gamma, angle })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tilt(&self) -> f64 {
        self.c
    }

    fn sample_angle<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let sigma = self.sigma;
        match &mut self.angle {
            AngleSampler::Uniform => Ok(PI * open01(rng)),
            AngleSampler::LogConcave(ars) => ars.sample(rng),
            AngleSampler::Singular { power, ln_bound } => loop {
                let w = PI * open01(rng).powf(1.0 / (1.0 - *power));
                let u = PI - w;
                if u <= 0.0 {
                    continue;
                }
                let ln_ratio = (1.0 - sigma) * zolotarev_ln(sigma, u) + w.ln() - *ln_bound;
                if open01(rng).ln() <= *power * ln_ratio.min(0.0) {
                    return Ok(u);
                }
            },
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let u = self.sample_angle(rng)?;
        let g = self.gamma.sample(rng);
        Ok(stable_from_parts(self.sigma, zolotarev_ln(self.sigma, u), g.ln()))
    }
}

pub fn sample_poly_tilted_stable<R: Rng + ?Sized>(sigma: f64, c: f64, rng: &mut R) -> Result<f64> {
    PolyTiltedStable::new(sigma, c)?.sample(rng)
}
