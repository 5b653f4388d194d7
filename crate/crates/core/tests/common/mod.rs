#![allow(dead_code)]

use gibbs_discovery::quadrature::integrate_peaked;

/// `|estimate - expected| <= 3 * stderr`, with a readable failure message.
pub fn assert_within_3se(estimate: f64, stderr: f64, expected: f64, what: &str) {
    assert!(
        (estimate - expected).abs() <= 3.0 * stderr,
        "{what}: estimate {estimate} (se {stderr}) vs expected {expected}"
    );
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Maximizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..300 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

/// Raw moments `E[X^j]`, `j = 0..=order`, of the unnormalized density
/// `exp(log_f)` on `(lower, inf)`, normalized by the zeroth moment.
pub fn quadrature_moments<F: Fn(f64) -> f64>(log_f: F, lower: f64, upper_guess: f64, order: usize) -> Vec<f64> {
    let mode = golden_max(&log_f, lower, upper_guess);
    let peak = log_f(mode);
    let width = 0.1 * (mode - lower).max(1e-3) + 0.5;
    (0..=order)
        .map(|j| {
            integrate_peaked(|x| if x <= lower { 0.0 } else { x.powi(j as i32) * (log_f(x) - peak).exp() }, lower, mode, width, 1e-11)
                .unwrap()
        })
        .collect::<Vec<_>>()
        .iter()
        .scan(None, |z, &m| {
            let z0 = *z.get_or_insert(m);
            Some(m / z0)
        })
        .collect()
}
