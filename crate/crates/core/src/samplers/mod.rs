//! Random variate generation for the laws behind the posterior
//! representations and the Monte Carlo weight evaluation.
//!
//! Every sampler takes any [`rand::Rng`]; [`RngStream`] is the
//! reproducible stream used throughout the crate.

mod ars;
mod latent;
mod rng;
mod stable;

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{domain, Result};

pub use ars::{sample_log_concave, AdaptiveRejectionSampler, LogConcaveTarget, MAX_HULL_POINTS};
pub use latent::{sample_w, sample_zg, sample_zp, ZgSampler};
pub use rng::RngStream;
pub use stable::{
    sample_exp_tilted_stable, sample_poly_tilted_stable, sample_positive_stable, zolotarev_ln, ExpTiltedStable,
    PolyTiltedStable,
};

pub(crate) use ars::open01;

/// Gamma(shape, 1) draw.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0).map_err(|e| domain(format!("gamma shape {shape}: {e}")))?;
    Ok(g.sample(rng))
}

/// Beta(a, b) draw.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let d = Beta::new(a, b).map_err(|e| domain(format!("beta({a}, {b}): {e}")))?;
    Ok(d.sample(rng))
}
