//! Replicated simulation studies on Zeta populations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{approx_ratio, group_by_k, sse, summarize_draws, true_discovery, ZetaPopulation};
use crate::error::{domain, Result};
use crate::estimators::{bnp_discovery, first_order, good_turing, second_order, smoothed_good_turing};
use crate::fit::fit;
use crate::gibbs_weights::{PriorKind, PriorSpec};
use crate::samplers::RngStream;
use crate::summary::SampleSummary;

pub const DEFAULT_GROUPS: usize = 5;

/// Estimators compared in a simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BnpPd,
    BnpGg,
    GoodTuring,
    SmoothedGoodTuring,
    FirstOrder,
    SecondOrderPd,
    SecondOrderGg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Zeta exponent.
    pub s: f64,
    /// Sample size per replicate.
    pub n: usize,
    pub replicates: usize,
    pub groups: usize,
    pub seed: u64,
    /// Also fit the generalized gamma prior and score its estimators.
    pub include_gg: bool,
}

impl SimulationConfig {
    pub fn new(s: f64, n: usize, replicates: usize, seed: u64) -> Self {
        SimulationConfig { s, n, replicates, groups: DEFAULT_GROUPS, seed, include_gg: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub n: u64,
    pub k: u64,
    pub sigma_pd: f64,
    pub theta_pd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_gg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_gg: Option<f64>,
    /// True probability of a new species.
    pub true_new: f64,
    pub sse: BTreeMap<Method, f64>,
    /// Squared error of the first order approximation over that of the
    /// second, both measured against the exact PD estimator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r12: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub k_min: u64,
    pub k_max: u64,
    pub replicates: usize,
    pub mean_sse: BTreeMap<Method, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_r12: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub replicates: Vec<ReplicateResult>,
    pub groups: Vec<GroupSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_r12: Option<f64>,
}

/// Estimates at `l = 0` and at every observed frequency; zero elsewhere.
fn at_support<F: Fn(u64) -> Result<f64>>(s: &SampleSummary, f: F) -> Result<BTreeMap<u64, f64>> {
    std::iter::once(0).chain(s.observed_frequencies()).map(|l| Ok((l, f(l)?))).collect()
}

fn params(prior: &PriorSpec) -> (f64, f64) {
    match *prior {
        PriorSpec::PitmanYor { sigma, theta } => (sigma, theta),
        PriorSpec::GeneralizedGamma { sigma, tau } => (sigma, tau),
        PriorSpec::Generic { sigma, .. } => (sigma, f64::NAN),
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn run_replicate(config: &SimulationConfig, pop: &ZetaPopulation, replicate: usize) -> Result<(SampleSummary, ReplicateResult)> {
    let mut rng = RngStream::new(config.seed, replicate as u64);
    let draws = pop.sample_n(config.n, &mut rng);
    let s = summarize_draws(&draws)?;
    let truth = true_discovery(&draws, pop);

    let pd = fit(&s, PriorKind::PitmanYor)?.prior;
    let (sigma_pd, theta_pd) = params(&pd);
    let exact = at_support(&s, |l| Ok(bnp_discovery(&s, &pd, l)?.value))?;
    let first = at_support(&s, |l| Ok(first_order(&s, sigma_pd, l)?.value))?;
    let second = at_support(&s, |l| Ok(second_order(&s, &pd, l)?.value))?;
    // Good–Turing is nonzero where l + 1 is observed
    let gt: BTreeMap<u64, f64> = std::iter::once(0)
        .chain(s.observed_frequencies().filter(|&l| l > 1).map(|l| l - 1))
        .map(|l| Ok((l, good_turing(&s, l)?.value)))
        .collect::<Result<_>>()?;
    let smoothed = at_support(&s, |l| Ok(smoothed_good_turing(&s, sigma_pd, l)?.value))?;

    let mut errors = BTreeMap::new();
    errors.insert(Method::BnpPd, sse(&exact, &truth));
    errors.insert(Method::GoodTuring, sse(&gt, &truth));
    errors.insert(Method::SmoothedGoodTuring, sse(&smoothed, &truth));
    errors.insert(Method::FirstOrder, sse(&first, &truth));
    errors.insert(Method::SecondOrderPd, sse(&second, &truth));

    let (mut sigma_gg, mut tau_gg) = (None, None);
    if config.include_gg {
        let gg = fit(&s, PriorKind::GeneralizedGamma)?.prior;
        let (sg, tg) = params(&gg);
        sigma_gg = Some(sg);
        tau_gg = Some(tg);
        let exact_gg = at_support(&s, |l| Ok(bnp_discovery(&s, &gg, l)?.value))?;
        let second_gg = at_support(&s, |l| Ok(second_order(&s, &gg, l)?.value))?;
        errors.insert(Method::BnpGg, sse(&exact_gg, &truth));
        errors.insert(Method::SecondOrderGg, sse(&second_gg, &truth));
    }

    let result = ReplicateResult {
        replicate,
        n: s.n(),
        k: s.k(),
        sigma_pd,
        theta_pd,
        sigma_gg,
        tau_gg,
        true_new: truth[&0],
        sse: errors,
        r12: approx_ratio(&exact, &first, &second).ok(),
    };
    Ok((s, result))
}

/// Draws `replicates` samples of size `n` from Zeta(`s`), fits the priors
/// to each, and scores every estimator against the true discovery
/// probabilities. Replicate `i` uses stream `i` of the configured seed,
/// so the report does not depend on the number of worker threads.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.n == 0 || config.replicates == 0 {
        return Err(domain("need at least one replicate of at least one observation"));
    }
    if config.groups == 0 || config.groups > config.replicates {
        return Err(domain(format!("groups must be between 1 and {}", config.replicates)));
    }
    let pop = ZetaPopulation::new(config.s)?;
    let runs: Vec<(SampleSummary, ReplicateResult)> =
        (0..config.replicates).into_par_iter().map(|i| run_replicate(config, &pop, i)).collect::<Result<_>>()?;
    let (samples, replicates): (Vec<_>, Vec<_>) = runs.into_iter().unzip();

    let assignment = group_by_k(&samples, config.groups)?;
    let groups = (0..config.groups)
        .map(|g| {
            let members: Vec<&ReplicateResult> =
                replicates.iter().zip(&assignment).filter(|(_, &a)| a == g).map(|(r, _)| r).collect();
            let methods: Vec<Method> = members[0].sse.keys().copied().collect();
            let mean_sse = methods
                .into_iter()
                .map(|m| (m, mean(members.iter().map(|r| r.sse[&m])).unwrap_or(f64::NAN)))
                .collect();
            GroupSummary {
                group: g,
                k_min: members.iter().map(|r| r.k).min().unwrap_or(0),
                k_max: members.iter().map(|r| r.k).max().unwrap_or(0),
                replicates: members.len(),
                mean_sse,
                mean_r12: mean(members.iter().filter_map(|r| r.r12)),
            }
        })
        .collect();
    let mean_r12 = mean(replicates.iter().filter_map(|r| r.r12));
    Ok(SimulationReport { config: config.clone(), replicates, groups, mean_r12 })
}
