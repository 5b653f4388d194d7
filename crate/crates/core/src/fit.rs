//! Empirical Bayes estimation of the prior parameters by maximizing the
//! marginal likelihood of the observed partition.

use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{check_sigma, domain, Result};
use crate::gibbs_weights::{v_gg_ln, v_pd_ln, GgMethod, PriorKind, PriorSpec};
use crate::special_fn::ln_pochhammer;
use crate::summary::SampleSummary;

/// `sum_l m_l ln (1 - sigma)_{l-1}`, the part of the likelihood shared by
/// every Gibbs-type prior.
fn ln_species_factor(s: &SampleSummary, sigma: f64) -> f64 {
    s.counts().iter().map(|(&l, &m)| m as f64 * ln_pochhammer(1.0 - sigma, l - 1).log_abs()).sum()
}

/// Log probability of the observed partition under the Pitman–Yor prior.
pub fn log_likelihood_pd(s: &SampleSummary, sigma: f64, theta: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(v_pd_ln(s.n(), s.k(), sigma, theta)? + ln_species_factor(s, sigma))
}

/// Log probability of the observed partition under the generalized gamma
/// prior, with the weight evaluated by quadrature.
pub fn log_likelihood_gg(s: &SampleSummary, sigma: f64, tau: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(v_gg_ln(s.n(), s.k(), sigma, tau, GgMethod::Quadrature)? + ln_species_factor(s, sigma))
}

/// Outcome of a maximum likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub prior: PriorSpec,
    pub log_likelihood: f64,
    /// Whether the best start met the simplex-size criterion.
    pub converged: bool,
    /// Objective evaluations summed over all starts.
    pub evaluations: usize,
    /// Largest distance, in optimizer coordinates, between the optima of
    /// the three best starts.
    pub multi_start_spread: f64,
}

const SIGMA_LO: f64 = 0.01;
const SIGMA_HI: f64 = 0.99;
const START_SIGMAS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
const START_LOCATIONS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const MAX_EVALUATIONS: usize = 2000;
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

fn to_sigma(x: f64) -> f64 {
    SIGMA_LO + (SIGMA_HI - SIGMA_LO) / (1.0 + (-x).exp())
}

fn from_sigma(sigma: f64) -> f64 {
    let p = (sigma - SIGMA_LO) / (SIGMA_HI - SIGMA_LO);
    (p / (1.0 - p)).ln()
}

/// Maps optimizer coordinates to `(sigma, theta)` or `(sigma, tau)`.
fn decode(kind: PriorKind, x: [f64; 2]) -> (f64, f64) {
    let sigma = to_sigma(x[0]);
    match kind {
        PriorKind::PitmanYor => (sigma, x[1].exp() - sigma),
        _ => (sigma, x[1].exp()),
    }
}

fn objective(s: &SampleSummary, kind: PriorKind, x: [f64; 2]) -> f64 {
    let (sigma, second) = decode(kind, x);
    let value = match kind {
        PriorKind::PitmanYor => log_likelihood_pd(s, sigma, second),
        _ => log_likelihood_gg(s, sigma, second),
    };
    match value {
        Ok(v) if v.is_finite() => -v,
        _ => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Copy)]
struct Minimum {
    x: [f64; 2],
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Nelder–Mead minimization in two dimensions, stopping when the simplex
/// diameter falls below `tolerance` or after `max_evaluations`.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: f64, tolerance: f64, max_evaluations: usize) -> Minimum {
    let evaluations = Cell::new(0usize);
    let eval = |x: [f64; 2]| {
        evaluations.set(evaluations.get() + 1);
        f(x)
    };
    let mut simplex: Vec<([f64; 2], f64)> = [start, [start[0] + step, start[1]], [start[0], start[1] + step]]
        .into_iter()
        .map(|x| (x, eval(x)))
        .collect();
    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let dist = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = dist(simplex[0].0, simplex[1].0).max(dist(simplex[0].0, simplex[2].0)).max(dist(simplex[1].0, simplex[2].0));
        let converged = diameter < tolerance;
        if converged || evaluations.get() >= max_evaluations {
            return Minimum { x: simplex[0].0, value: simplex[0].1, evaluations: evaluations.get(), converged };
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let (worst, f_worst) = simplex[2];
        let reflected = lerp(worst, centroid, 2.0);
        let f_reflected = eval(reflected);
        if f_reflected < simplex[0].1 {
            let expanded = lerp(worst, centroid, 3.0);
            let f_expanded = eval(expanded);
            simplex[2] = if f_expanded < f_reflected { (expanded, f_expanded) } else { (reflected, f_reflected) };
        } else if f_reflected < simplex[1].1 {
            simplex[2] = (reflected, f_reflected);
        } else {
            let (contracted, f_contracted) = if f_reflected < f_worst {
                let c = lerp(worst, centroid, 1.5);
                (c, eval(c))
            } else {
                let c = lerp(worst, centroid, 0.5);
                (c, eval(c))
            };
            if f_contracted < f_worst.min(f_reflected) {
                simplex[2] = (contracted, f_contracted);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(best, vertex.0, 0.5);
                    *vertex = (x, eval(x));
                }
            }
        }
    }
}

/// Maximum likelihood fit of a Pitman–Yor or generalized gamma prior,
/// started from a 4 x 4 grid of `sigma` and location (`theta + sigma` or
/// `tau`) values.
pub fn fit(s: &SampleSummary, kind: PriorKind) -> Result<FitResult> {
    if kind == PriorKind::Generic {
        return Err(crate::Error::UnsupportedPrior("maximum likelihood fitting"));
    }
    if s.n() < 2 || s.k() < 2 {
        return Err(domain(format!("fitting needs n >= 2 and k >= 2, got n={}, k={}", s.n(), s.k())));
    }
    if s.k() == s.n() {
        return Err(domain("every species is a singleton; the likelihood has no interior maximum"));
    }
    let starts: Vec<[f64; 2]> = START_SIGMAS
        .iter()
        .flat_map(|&sigma| START_LOCATIONS.iter().map(move |&loc| [from_sigma(sigma), f64::ln(loc)]))
        .collect();
    let mut results: Vec<Minimum> = starts
        .par_iter()
        .map(|&start| nelder_mead(|x| objective(s, kind, x), start, 0.5, SIMPLEX_TOLERANCE, MAX_EVALUATIONS))
        .collect();
    let evaluations = results.iter().map(|m| m.evaluations).sum();
    results.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then(a.x[0].total_cmp(&b.x[0])).then(a.x[1].total_cmp(&b.x[1]))
    });
    let best = results[0];
    if !best.value.is_finite() {
        return Err(domain("likelihood could not be evaluated at any start"));
    }
    let top: Vec<[f64; 2]> = results.iter().take(3).map(|m| m.x).collect();
    let mut spread = 0.0f64;
    for i in 0..top.len() {
        for j in i + 1..top.len() {
            spread = spread.max(((top[i][0] - top[j][0]).powi(2) + (top[i][1] - top[j][1]).powi(2)).sqrt());
        }
    }
    let (sigma, second) = decode(kind, best.x);
    let prior = match kind {
        PriorKind::PitmanYor => PriorSpec::pitman_yor(sigma, second)?,
        _ => PriorSpec::generalized_gamma(sigma, second)?,
    };
    Ok(FitResult { prior, log_likelihood: -best.value, converged: best.converged, evaluations, multi_start_spread: spread })
}
