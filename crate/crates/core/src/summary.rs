use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Sufficient statistics of a sample: size `n`, number of distinct
/// species `k` and the frequency counts `m_l` (species seen exactly `l`
/// times).
///
/// Counts built with [`SampleSummary::from_counts`] are consistent by
/// construction. [`SampleSummary::with_totals`] keeps declared totals
/// as given, so a published table whose counts do not add up can still
/// be loaded and reported on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    n: u64,
    k: u64,
    counts: BTreeMap<u64, u64>,
}

fn clean_counts<I: IntoIterator<Item = (u64, u64)>>(counts: I) -> Result<BTreeMap<u64, u64>> {
    let mut map = BTreeMap::new();
    for (l, m) in counts {
        if l == 0 {
            return Err(domain("frequency 0 cannot carry a count"));
        }
        if m > 0 {
            *map.entry(l).or_insert(0) += m;
        }
    }
    Ok(map)
}

impl SampleSummary {
    /// Builds a summary from `(l, m_l)` pairs, deriving `n` and `k`.
    pub fn from_counts<I: IntoIterator<Item = (u64, u64)>>(counts: I) -> Result<Self> {
        let counts = clean_counts(counts)?;
        let k = counts.values().sum();
        let n = counts.iter().map(|(l, m)| l * m).sum();
        if k == 0 {
            return Err(domain("a sample needs at least one observation"));
        }
        Ok(SampleSummary { n, k, counts })
    }

    /// Builds a summary with declared totals, which need not match the
    /// counts (see [`crate::data_sim::validate`]).
    pub fn with_totals<I: IntoIterator<Item = (u64, u64)>>(n: u64, k: u64, counts: I) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(domain(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        Ok(SampleSummary { n, k, counts: clean_counts(counts)? })
    }

    /// Builds a summary from per-species frequencies `n_i`.
    pub fn from_frequencies<I: IntoIterator<Item = u64>>(frequencies: I) -> Result<Self> {
        Self::from_counts(frequencies.into_iter().filter(|&f| f > 0).map(|f| (f, 1)))
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// `m_l`, zero for frequencies not present.
    pub fn m(&self, l: u64) -> u64 {
        self.counts.get(&l).copied().unwrap_or(0)
    }

    /// Nonzero counts keyed by frequency.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Frequencies `l` with `m_l > 0`, ascending.
    pub fn observed_frequencies(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.keys().copied()
    }

    /// `sum_l m_l` and `sum_l l m_l` as implied by the counts.
    pub fn count_totals(&self) -> (u64, u64) {
        (self.counts.values().sum(), self.counts.iter().map(|(l, m)| l * m).sum())
    }
}
