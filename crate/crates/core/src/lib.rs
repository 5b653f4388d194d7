//! Bayesian nonparametric estimation of discovery probabilities under
//! Gibbs-type priors.
//!
//! ```
//! use gibbs_discovery::estimators::bnp_discovery;
//! use gibbs_discovery::{fit, PriorKind, SampleSummary};
//!
//! let s = SampleSummary::from_counts([(1, 40), (2, 9), (3, 4), (6, 2), (11, 1)])?;
//! let prior = fit(&s, PriorKind::PitmanYor)?.prior;
//! let new = bnp_discovery(&s, &prior, 0)?;
//! assert!(new.value > 0.0 && new.value < 1.0);
//! # Ok::<(), gibbs_discovery::Error>(())
//! ```
//!
//! The guide in `book/` covers each module in turn.

pub mod data_sim;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod fit;
pub mod gibbs_weights;
pub mod posterior;
pub mod quadrature;
pub mod samplers;
pub mod special_fn;
pub mod summary;

pub use error::{Error, Result};
pub use fit::{fit, FitResult};
pub use estimators::{DiscoveryEstimate, EstimateMethod, EventSpec, Interval};
pub use gibbs_weights::{PriorKind, PriorSpec, WeightRatioPair};
pub use posterior::PosteriorLaw;
pub use summary::SampleSummary;

// Compiles the guide's snippets as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/data.md")]
    struct Data;
    #[doc = include_str!("../../../book/src/priors.md")]
    struct Priors;
    #[doc = include_str!("../../../book/src/estimators.md")]
    struct Estimators;
    #[doc = include_str!("../../../book/src/intervals.md")]
    struct Intervals;
    #[doc = include_str!("../../../book/src/fitting.md")]
    struct Fitting;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct CommandLine;
}
