//! Data handling and simulation studies: count files, validation, Zeta
//! populations with known discovery probabilities, and error metrics.

mod io;
mod simulate;
mod zeta;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summary::SampleSummary;

pub use io::{read_counts, read_raw, summarize, synthesize, write_counts, RawSample};
pub use simulate::{
    simulate, GroupSummary, Method, ReplicateResult, SimulationConfig, SimulationReport, DEFAULT_GROUPS,
};
pub use zeta::{riemann_zeta, ZetaPopulation};

/// Outcome of checking a summary's declared totals against its counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub declared_n: u64,
    pub declared_k: u64,
    /// `sum_l l m_l`
    pub counted_n: u64,
    /// `sum_l m_l`
    pub counted_k: u64,
    pub passed: bool,
}

impl ValidationReport {
    /// Declared minus counted, as `(k, n)`.
    pub fn residuals(&self) -> (i64, i64) {
        (self.declared_k as i64 - self.counted_k as i64, self.declared_n as i64 - self.counted_n as i64)
    }
}

/// Checks that `sum_l m_l = k` and `sum_l l m_l = n`.
pub fn validate(s: &SampleSummary) -> ValidationReport {
    let (counted_k, counted_n) = s.count_totals();
    ValidationReport {
        declared_n: s.n(),
        declared_k: s.k(),
        counted_n,
        counted_k,
        passed: counted_n == s.n() && counted_k == s.k(),
    }
}

/// Summary of draws from a [`ZetaPopulation`].
pub fn summarize_draws(draws: &[f64]) -> Result<SampleSummary> {
    let bits: Vec<u64> = draws.iter().map(|z| z.to_bits()).collect();
    summarize(&bits)
}

/// True discovery probabilities `D_n(l)` of a sample drawn from `pop`,
/// keyed by `l`. Only `l = 0` and observed frequencies appear; every
/// other `l` has probability zero.
pub fn true_discovery(draws: &[f64], pop: &ZetaPopulation) -> BTreeMap<u64, f64> {
    let mut freq: HashMap<u64, u64> = HashMap::new();
    for z in draws {
        *freq.entry(z.to_bits()).or_insert(0) += 1;
    }
    // sum in a fixed order so results do not depend on hashing
    let mut species: Vec<(u64, f64)> = freq.into_iter().map(|(bits, count)| (count, f64::from_bits(bits))).collect();
    species.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = BTreeMap::new();
    let mut seen = 0.0;
    for (count, z) in species.into_iter().rev() {
        let q = pop.mass(z);
        seen += q;
        *out.entry(count).or_insert(0.0) += q;
    }
    out.insert(0, 1.0 - seen);
    out
}

/// True discovery probability for a single `l`.
pub fn true_discovery_at(draws: &[f64], pop: &ZetaPopulation, l: u64) -> f64 {
    true_discovery(draws, pop).get(&l).copied().unwrap_or(0.0)
}

/// Assigns each sample to one of `groups` groups of (nearly) equal size by
/// rank of its `k`, ties broken by position.
pub fn group_by_k(samples: &[SampleSummary], groups: usize) -> Result<Vec<usize>> {
    if groups == 0 {
        return Err(crate::error::domain("need at least one group"));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&i| (samples[i].k(), i));
    let mut assignment = vec![0; samples.len()];
    for (rank, &i) in order.iter().enumerate() {
        assignment[i] = rank * groups / samples.len();
    }
    Ok(assignment)
}

/// `sum_l (estimate_l - truth_l)^2` over the union of keys, missing
/// entries read as zero.
pub fn sse(estimates: &BTreeMap<u64, f64>, truths: &BTreeMap<u64, f64>) -> f64 {
    let mut total = 0.0;
    for (l, e) in estimates {
        let t = truths.get(l).copied().unwrap_or(0.0);
        total += (e - t).powi(2);
    }
    for (l, t) in truths {
        if !estimates.contains_key(l) {
            total += t * t;
        }
    }
    total
}

/// Ratio of the squared distances of the first and of the second
/// approximation from the exact estimator.
pub fn approx_ratio(
    exact: &BTreeMap<u64, f64>,
    first: &BTreeMap<u64, f64>,
    second: &BTreeMap<u64, f64>,
) -> Result<f64> {
    let num = sse(first, exact);
    let den = sse(second, exact);
    if den == 0.0 {
        return Err(Error::DivisionByZero("second order approximation equals the exact estimator"));
    }
    Ok(num / den)
}

/// Estimates against truths for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sse: f64,
    /// `l -> (estimate, truth)`
    pub per_l: BTreeMap<u64, (f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_r12: Option<f64>,
}

impl MetricsReport {
    pub fn new(estimates: &BTreeMap<u64, f64>, truths: &BTreeMap<u64, f64>) -> Self {
        let mut per_l = BTreeMap::new();
        for l in estimates.keys().chain(truths.keys()) {
            per_l.insert(*l, (estimates.get(l).copied().unwrap_or(0.0), truths.get(l).copied().unwrap_or(0.0)));
        }
        MetricsReport { sse: sse(estimates, truths), per_l, ratio_r12: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(u64, f64)]) -> BTreeMap<u64, f64> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn sse_examples() {
        let a = map(&[(0, 0.5), (1, 0.2)]);
        assert_eq!(sse(&a, &a), 0.0);
        assert!((sse(&map(&[(0, 0.5)]), &map(&[(0, 0.3)])) - 0.04).abs() < 1e-15);
        assert!((sse(&map(&[(2, 0.1)]), &map(&[(3, 0.2)])) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn ratio_examples() {
        let exact = map(&[(0, 0.5)]);
        let first = map(&[(0, 0.4)]);
        assert!(matches!(approx_ratio(&exact, &first, &exact), Err(Error::DivisionByZero(_))));
        assert_eq!(approx_ratio(&exact, &first, &first).unwrap(), 1.0);
    }

    #[test]
    fn grouping() {
        let samples: Vec<_> = (1..=10).map(|k| SampleSummary::with_totals(20, k, [(1, k)]).unwrap()).collect();
        assert_eq!(group_by_k(&samples, 2).unwrap(), vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        assert_eq!(group_by_k(&samples, 1).unwrap(), vec![0; 10]);
        assert!(group_by_k(&samples, 0).is_err());
    }

    #[test]
    fn validation_residuals() {
        let ok = SampleSummary::with_totals(2, 2, [(1, 2)]).unwrap();
        assert!(validate(&ok).passed);
        let bad = SampleSummary::with_totals(10, 4, [(1, 2), (2, 1)]).unwrap();
        let report = validate(&bad);
        assert!(!report.passed);
        assert_eq!(report.residuals(), (1, 6));
    }
}
