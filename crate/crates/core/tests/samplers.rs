mod common;

use common::{assert_within_3se, quadrature_moments};
use gibbs_discovery::diagnostics::{ks_one_sample, ks_two_sample, mean_and_stderr};
use gibbs_discovery::quadrature::integrate;
use gibbs_discovery::samplers::*;
use gibbs_discovery::special_fn::{ln_gamma, regularized_incomplete_beta, upper_incomplete_gamma_ln};
use libm::tgamma;
use rand_distr::{Distribution, Gamma};

fn gamma_cdf(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let upper = upper_incomplete_gamma_ln(shape, x).unwrap().log_abs();
    1.0 - (upper - ln_gamma(shape).unwrap()).exp()
}

fn draws<F: FnMut(&mut RngStream) -> f64>(n: usize, seed: u64, mut f: F) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| f(&mut rng)).collect()
}

#[test]
fn stable_laplace_transform_at_one() {
    let xs = draws(1_000_000, 1, |r| (-sample_positive_stable(0.5, r).unwrap()).exp());
    let (m, se) = mean_and_stderr(&xs);
    assert_within_3se(m, se, (-1f64).exp(), "E[exp(-S)]");
}

#[test]
fn stable_negative_moment() {
    // E[S^-1] = (1/Gamma(1)) * int_0^inf exp(-t^sigma) dt, evaluated by quadrature
    let sigma = 0.5;
    let oracle = integrate(|u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let t = u / (1.0 - u);
        (-t.powf(sigma)).exp() / ((1.0 - u) * (1.0 - u))
    }, 0.0, 1.0, 1e-12, 0.0)
    .unwrap();
    assert!((oracle - 2.0).abs() < 1e-8, "quadrature {oracle}");
    let xs = draws(1_000_000, 2, |r| 1.0 / sample_positive_stable(sigma, r).unwrap());
    let (m, se) = mean_and_stderr(&xs);
    assert_within_3se(m, se, oracle, "E[1/S]");
}

#[test]
fn stable_rejects_bad_sigma_and_repeats() {
    let mut rng = RngStream::new(0, 0);
    assert!(sample_positive_stable(0.0, &mut rng).is_err());
    assert!(sample_positive_stable(1.0, &mut rng).is_err());
    let a = draws(100, 3, |r| sample_positive_stable(0.3, r).unwrap());
    let b = draws(100, 3, |r| sample_positive_stable(0.3, r).unwrap());
    assert_eq!(a, b);
}

#[test]
fn exp_tilted_laplace_transform() {
    let (sigma, b) = (0.5_f64, 1.0_f64);
    let xs = draws(1_000_000, 4, |r| (-sample_exp_tilted_stable(sigma, b, r).unwrap()).exp());
    let (m, se) = mean_and_stderr(&xs);
    let expected = (b.powf(sigma) - (b + 1.0).powf(sigma)).exp();
    assert_within_3se(m, se, expected, "E[exp(-R)]");
}

#[test]
fn exp_tilted_large_tilt_laplace_transform() {
    // exercises the convolution branch (b^sigma = 10)
    let (sigma, b, t) = (0.5_f64, 100.0_f64, 5.0_f64);
    let xs = draws(200_000, 5, |r| (-t * sample_exp_tilted_stable(sigma, b, r).unwrap()).exp());
    let (m, se) = mean_and_stderr(&xs);
    let expected = (b.powf(sigma) - (b + t).powf(sigma)).exp();
    assert_within_3se(m, se, expected, "E[exp(-tR)] at b=100");
}

#[test]
fn exp_tilted_vanishing_tilt_matches_stable() {
    let a = draws(100_000, 6, |r| sample_exp_tilted_stable(0.5, 1e-8, r).unwrap());
    let b = draws(100_000, 7, |r| sample_positive_stable(0.5, r).unwrap());
    let ks = ks_two_sample(&a, &b);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn exp_tilted_acceptance_bounded_away_from_zero() {
    let mut rng = RngStream::new(8, 0);
    for &sigma in &[0.25, 0.5, 0.75] {
        for &b in &[1e-3, 1e-1, 1.0, 10.0, 1e3] {
            let t = ExpTiltedStable::new(sigma, b).unwrap();
            let mut proposals = 0;
            let reps = 2000;
            for _ in 0..reps {
                proposals += t.sample_counting(&mut rng).1;
            }
            let rate = (reps * t.copies()) as f64 / proposals as f64;
            assert!(rate > 0.3, "sigma={sigma} b={b} acceptance {rate}");
        }
    }
}

#[test]
fn poly_tilted_negative_moment() {
    let (sigma, c, p) = (0.5_f64, 2.0_f64, 1.0_f64);
    // ratio of untilted moments E[S^-(c sigma + p)] / E[S^-(c sigma)]
    let untilted = |q: f64| tgamma(q / sigma + 1.0) / tgamma(q + 1.0);
    let expected = untilted(c * sigma + p) / untilted(c * sigma);
    assert!((expected - 6.0).abs() < 1e-12);
    let mut s = PolyTiltedStable::new(sigma, c).unwrap();
    let xs = draws(1_000_000, 9, |r| s.sample(r).unwrap().powf(-p));
    let (m, se) = mean_and_stderr(&xs);
    assert_within_3se(m, se, expected, "E[S_c^-1]");
}

#[test]
fn poly_tilted_other_settings() {
    for (sigma, c, p) in [(0.25_f64, 0.5_f64, 0.5_f64), (0.75, 6.0, 1.0), (0.6, -0.4, 0.5)] {
        let untilted = |q: f64| tgamma(q / sigma + 1.0) / tgamma(q + 1.0);
        let expected = untilted(c * sigma + p) / untilted(c * sigma);
        let mut s = PolyTiltedStable::new(sigma, c).unwrap();
        let xs = draws(300_000, 10, |r| s.sample(r).unwrap().powf(-p));
        let (m, se) = mean_and_stderr(&xs);
        assert_within_3se(m, se, expected, &format!("sigma={sigma} c={c}"));
    }
}

#[test]
fn poly_tilted_zero_tilt_matches_stable() {
    let mut s = PolyTiltedStable::new(0.4, 0.0).unwrap();
    let a = draws(100_000, 11, |r| s.sample(r).unwrap());
    let b = draws(100_000, 12, |r| sample_positive_stable(0.4, r).unwrap());
    assert!(ks_two_sample(&a, &b).p_value > 0.01);
    let mut s1 = PolyTiltedStable::new(0.4, 3.0).unwrap();
    let mut s2 = PolyTiltedStable::new(0.4, 3.0).unwrap();
    assert_eq!(draws(50, 13, |r| s1.sample(r).unwrap()), draws(50, 13, |r| s2.sample(r).unwrap()));
}

#[test]
fn log_concave_gamma_target() {
    let t = LogConcaveTarget::new(|x: f64| 2.0 * x.ln() - x, |x| 2.0 / x - 1.0, 0.0, f64::INFINITY).unwrap();
    let mut ars = AdaptiveRejectionSampler::new(t).unwrap();
    let a = draws(100_000, 14, |r| ars.sample(r).unwrap());
    let reference = Gamma::new(3.0, 1.0).unwrap();
    let b = draws(100_000, 15, |r| reference.sample(r));
    assert!(ks_two_sample(&a, &b).p_value > 0.01);
    assert!(ks_one_sample(&a, |x| gamma_cdf(3.0, x)).p_value > 0.01);
}

#[test]
fn log_concave_single_draw_api() {
    let t = LogConcaveTarget::new(|x: f64| -0.5 * x * x, |x| -x, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let mut rng = RngStream::new(16, 0);
    assert!(sample_log_concave(t, &mut rng).unwrap().is_finite());
}

#[test]
fn zp_power_is_gamma() {
    let (sigma, theta, k) = (0.5, 0.5, 2);
    let xs = draws(100_000, 17, |r| sample_zp(sigma, theta, k, r).unwrap());
    let shape = theta / sigma + k as f64;
    let ys: Vec<f64> = xs.iter().map(|x| x.powf(sigma)).collect();
    assert!(ks_one_sample(&ys, |y| gamma_cdf(shape, y)).p_value > 0.01);
    let (m, se) = mean_and_stderr(&xs);
    assert_within_3se(m, se, 12.0, "E[Z_p]");
    assert!(sample_zp(0.5, -0.5, 2, &mut RngStream::new(0, 0)).is_err());
}

fn zg_log_density(sigma: f64, tau: f64, n: u64, k: u64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let tied = if n > 1 { (n as f64 - 1.0) * (x - tau).ln() } else { 0.0 };
        (sigma * k as f64 - n as f64) * x.ln() + tied - x.powf(sigma)
    }
}

fn check_zg(sigma: f64, tau: f64, n: u64, k: u64, seed: u64, draws_n: usize) {
    let moments = quadrature_moments(zg_log_density(sigma, tau, n, k), tau, tau + 1e4, 4);
    let mut s = ZgSampler::new(sigma, tau, n, k).unwrap();
    let xs = draws(draws_n, seed, |r| s.sample(r).unwrap());
    assert!(xs.iter().all(|&x| x > tau));
    let (m, se) = mean_and_stderr(&xs);
    assert_within_3se(m, se, moments[1], "E[Z_g]");
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    let (m2, se2) = mean_and_stderr(&sq);
    assert_within_3se(m2, se2, moments[2], "E[Z_g^2]");
}

#[test]
fn zg_single_observation() {
    check_zg(0.5, 1.0, 1, 1, 18, 200_000);
}

#[test]
fn zg_moments_match_quadrature() {
    check_zg(0.5, 1.0, 10, 4, 19, 200_000);
    check_zg(0.7, 3.0, 40, 25, 22, 100_000);
}

#[test]
fn w_mixture_over_zp_is_beta() {
    for (sigma, theta, n, k) in [(0.5, 1.0, 20u64, 6u64), (0.3, 5.0, 50, 12), (0.8, 0.2, 30, 20)] {
        let a = n as f64 - sigma * k as f64;
        let xs = draws(100_000, 21 + n, |r| {
            let z = sample_zp(sigma, theta, k, r).unwrap();
            sample_w(a, z, sigma, r).unwrap()
        });
        assert!(xs.iter().all(|&w| w > 0.0 && w < 1.0));
        let (p, q) = (theta + sigma * k as f64, a);
        let ks = ks_one_sample(&xs, |x| regularized_incomplete_beta(p, q, x.clamp(0.0, 1.0)).unwrap());
        assert!(ks.p_value > 0.01, "({sigma}, {theta}, {n}, {k}): {ks:?}");
    }
}

#[test]
fn w_is_reproducible() {
    let a = draws(100, 30, |r| sample_w(2.0, 3.0, 0.5, r).unwrap());
    let b = draws(100, 30, |r| sample_w(2.0, 3.0, 0.5, r).unwrap());
    assert_eq!(a, b);
}
