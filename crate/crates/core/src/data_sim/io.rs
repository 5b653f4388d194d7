//! Frequency-count and raw-sample files.
//!
//! A count file is CSV with header `l,m_l`. Lines starting with `#` are
//! comments, except that `# n=...` and `# k=...` declare the sample totals.
//! Declared totals are kept even when the counts disagree with them, so
//! that [`super::validate`] can report the discrepancy.

use std::collections::HashMap;
use std::hash::Hash;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::summary::SampleSummary;

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn metadata(line: &str) -> Option<(&str, &str)> {
    let body = line.strip_prefix('#')?.trim();
    let (key, value) = body.split_once('=')?;
    let key = key.trim();
    matches!(key, "n" | "k").then(|| (key, value.trim()))
}

/// Reads a frequency-count file.
pub fn read_counts<R: Read>(reader: R) -> Result<SampleSummary> {
    let mut text = String::new();
    std::io::BufReader::new(reader).read_to_string(&mut text)?;
    let (mut n, mut k) = (None, None);
    for (i, line) in text.lines().enumerate() {
        if let Some((key, value)) = metadata(line) {
            let v: u64 = value.parse().map_err(|_| parse_error(i + 1, format!("bad value for {key}: {value:?}")))?;
            if key == "n" {
                n = Some(v);
            } else {
                k = Some(v);
            }
        }
    }

    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = csv.headers().map_err(|e| parse_error(1, e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != "l" || &header[1] != "m_l" {
        return Err(parse_error(1, format!("expected header l,m_l, found {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut counts = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |j: usize| -> Result<u64> {
            record[j].parse().map_err(|_| parse_error(line, format!("not a nonnegative integer: {:?}", &record[j])))
        };
        let (l, m) = (field(0)?, field(1)?);
        if l == 0 {
            return Err(parse_error(line, "frequencies start at 1"));
        }
        counts.push((l, m));
    }
    let derived = SampleSummary::from_counts(counts.iter().copied())?;
    match (n, k) {
        (None, None) => Ok(derived),
        _ => SampleSummary::with_totals(n.unwrap_or(derived.n()), k.unwrap_or(derived.k()), counts),
    }
}

/// Writes a count file with its totals as metadata.
pub fn write_counts<W: Write>(s: &SampleSummary, mut writer: W) -> Result<()> {
    writeln!(writer, "# n={}", s.n())?;
    writeln!(writer, "# k={}", s.k())?;
    writeln!(writer, "l,m_l")?;
    for (l, m) in s.counts() {
        writeln!(writer, "{l},{m}")?;
    }
    Ok(())
}

/// Species labels, one per observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSample {
    pub labels: Vec<String>,
}

/// Reads one label per line, ignoring blank lines.
pub fn read_raw<R: Read>(reader: R) -> Result<RawSample> {
    let mut labels = Vec::new();
    for line in std::io::BufReader::new(reader).lines() {
        let line = line?;
        let label = line.trim();
        if !label.is_empty() {
            labels.push(label.to_string());
        }
    }
    if labels.is_empty() {
        return Err(parse_error(1, "no labels in raw sample"));
    }
    Ok(RawSample { labels })
}

/// Frequency counts of a sequence of labels.
pub fn summarize<T: Hash + Eq>(labels: &[T]) -> Result<SampleSummary> {
    let mut freq: HashMap<&T, u64> = HashMap::new();
    for label in labels {
        *freq.entry(label).or_insert(0) += 1;
    }
    SampleSummary::from_frequencies(freq.into_values())
}

/// A label sequence realizing the given counts: species `1..=k` in order,
/// each repeated its frequency times.
pub fn synthesize(s: &SampleSummary) -> Vec<u64> {
    let mut labels = Vec::with_capacity(s.count_totals().1 as usize);
    let mut species = 0u64;
    for (&l, &m) in s.counts() {
        for _ in 0..m {
            species += 1;
            labels.extend(std::iter::repeat_n(species, l as usize));
        }
    }
    labels
}
