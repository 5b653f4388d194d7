//! Latent variables of the posterior representations: `Z_p`, `Z_g` and
//! `W_{a,b}`.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::ars::{AdaptiveRejectionSampler, LogConcaveTarget};
use super::stable::ExpTiltedStable;
use crate::error::{check_sigma, domain, Result};

/// `Z_p` with density proportional to `x^(theta + sigma k - 1) exp(-x^sigma)`,
/// drawn as `G^(1/sigma)` with `G ~ Gamma(theta/sigma + k, 1)`.
pub fn sample_zp<R: Rng + ?Sized>(sigma: f64, theta: f64, k: u64, rng: &mut R) -> Result<f64> {
    check_sigma(sigma)?;
    if !(theta > -sigma) {
        return Err(domain(format!("theta must exceed -sigma, got {theta}")));
    }
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    let gamma = Gamma::new(theta / sigma + k as f64, 1.0).map_err(|e| domain(e.to_string()))?;
    Ok(gamma.sample(rng).powf(1.0 / sigma))
}

/// Sampler for `Z_g` with density proportional to
/// `x^(sigma k - n) (x - tau)^(n - 1) exp(-x^sigma)` on `(tau, inf)`.
///
/// Works on `Y = Z_g^sigma`, whose log density
/// `(k-1) ln y + (n-1) ln(1 - tau y^(-1/sigma)) - y` is concave on
/// `(tau^sigma, inf)`. The adaptive hull is kept between draws.
#[derive(Debug, Clone)]
pub struct ZgSampler {
    sigma: f64,
    tau: f64,
    ars: AdaptiveRejectionSampler,
}

impl ZgSampler {
    pub fn new(sigma: f64, tau: f64, n: u64, k: u64) -> Result<Self> {
        check_sigma(sigma)?;
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(domain(format!("tau must be positive, got {tau}")));
        }
        if k == 0 || k > n {
            return Err(domain(format!("need 1 <= k <= n, got k={k}, n={n}")));
        }
        let km1 = (k - 1) as f64;
        let nm1 = (n - 1) as f64;
        let ln_tau = tau.ln();
        // ln(1 - v) with v = tau y^(-1/sigma), kept accurate as v -> 1
        let ln_gap = move |y: f64| (-(ln_tau - y.ln() / sigma).exp_m1()).ln();
        let log_density = move |y: f64| {
            let mut h = -y;
            if km1 > 0.0 {
                h += km1 * y.ln();
            }
            if nm1 > 0.0 {
                h += nm1 * ln_gap(y);
            }
            h
        };
        let derivative = move |y: f64| {
            let mut d = -1.0;
            if km1 > 0.0 {
                d += km1 / y;
            }
            if nm1 > 0.0 {
                let v = (ln_tau - y.ln() / sigma).exp();
                let gap = -(ln_tau - y.ln() / sigma).exp_m1();
                d += nm1 * v / (sigma * y * gap);
            }
            d
        };
        let lower = tau.powf(sigma);
        // Rough location: the gamma part peaks near k - 1, shifted by the floor.
        let hint = lower + km1.max(1.0) + nm1.sqrt();
        let target = LogConcaveTarget::new(log_density, derivative, lower, f64::INFINITY)?.with_hint(hint);
        Ok(ZgSampler { sigma, tau, ars: AdaptiveRejectionSampler::new(target)? })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// A draw of `Z_g^sigma`.
    pub fn sample_transformed<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        self.ars.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let y = self.sample_transformed(rng)?;
        Ok(y.powf(1.0 / self.sigma).max(self.tau.next_up()))
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.ars.acceptance_rate()
    }
}

pub fn sample_zg<R: Rng + ?Sized>(sigma: f64, tau: f64, n: u64, k: u64, rng: &mut R) -> Result<f64> {
    ZgSampler::new(sigma, tau, n, k)?.sample(rng)
}

/// `W_{a,b} = b R / (b R + G)` with `R` exponentially tilted stable at
/// tilt `b` and `G ~ Gamma(a, 1)` independent.
pub fn sample_w<R: Rng + ?Sized>(a: f64, b: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    if !(a > 0.0) {
        return Err(domain(format!("shape must be positive, got {a}")));
    }
    let tilted = ExpTiltedStable::new(sigma, b)?;
    let gamma = Gamma::new(a, 1.0).map_err(|e| domain(e.to_string()))?;
    let br = b * tilted.sample(rng);
    let g = gamma.sample(rng);
    Ok(br / (br + g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RngStream;

    #[test]
    fn zg_support_and_reproducibility() {
        let mut a = ZgSampler::new(0.5, 1.0, 10, 4).unwrap();
        let mut b = ZgSampler::new(0.5, 1.0, 10, 4).unwrap();
        let mut ra = RngStream::new(5, 1);
        let mut rb = RngStream::new(5, 1);
        for _ in 0..2000 {
            let x = a.sample(&mut ra).unwrap();
            assert!(x > 1.0);
            assert_eq!(x, b.sample(&mut rb).unwrap());
        }
    }

    #[test]
    fn zg_large_sample() {
        // aerobic-scale parameters must still build an envelope
        let mut s = ZgSampler::new(0.684, 334.334, 959, 473).unwrap();
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert!(s.sample(&mut rng).unwrap() > 334.334);
        }
        assert!(s.acceptance_rate() > 0.5);
    }

    #[test]
    fn w_in_unit_interval() {
        let mut rng = RngStream::new(9, 0);
        for &b in &[1e-3, 1.0, 50.0] {
            for _ in 0..500 {
                let w = sample_w(3.0, b, 0.4, &mut rng).unwrap();
                assert!(w > 0.0 && w < 1.0);
            }
        }
        assert!(sample_w(0.0, 1.0, 0.5, &mut rng).is_err());
    }
}
