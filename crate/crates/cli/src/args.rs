use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gibbs-discovery", version, about = "Discovery probabilities under Gibbs-type priors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format. CSV applies to tabular reports only.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum likelihood fit of a prior to a count file.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum)]
        prior: Prior,
    },
    /// Exact estimates of the discovery probabilities.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0")]
        l: String,
    },
    /// Estimates with posterior credible intervals.
    Ci {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0")]
        l: String,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Posterior draws for priors without closed-form quantiles.
        #[arg(long, default_value_t = gibbs_discovery::posterior::DEFAULT_DRAWS)]
        draws: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Large-sample approximations of the discovery probabilities.
    Approx {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "0")]
        l: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
    },
    /// Check the declared totals of a count file against its counts.
    Validate {
        data: PathBuf,
    },
    /// Replicated simulation study on a Zeta population.
    Simulate {
        #[arg(long, value_enum, default_value_t = Dist::Zeta)]
        dist: Dist,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        replicates: usize,
        #[arg(long, default_value_t = gibbs_discovery::data_sim::DEFAULT_GROUPS)]
        groups: usize,
        #[arg(long)]
        seed: u64,
        /// Also fit the generalized gamma prior in every replicate.
        #[arg(long)]
        with_gg: bool,
    },
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Count file with header `l,m_l`.
    pub data: PathBuf,
    /// Proceed even if the declared totals disagree with the counts.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, value_enum)]
    pub prior: Prior,
    /// Fit the parameters by maximum likelihood.
    #[arg(long)]
    pub fit: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Prior {
    Pd,
    Gg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    Zeta,
}

/// Parses `a..b` (inclusive) or a comma-separated list.
pub fn parse_frequencies(spec: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("invalid --l {spec:?}: expected a..b or a comma-separated list");
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_lists() {
        assert_eq!(parse_frequencies("0").unwrap(), vec![0]);
        assert_eq!(parse_frequencies("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_frequencies("10,0,1,5").unwrap(), vec![0, 1, 5, 10]);
        assert_eq!(parse_frequencies("0..2,2,7").unwrap(), vec![0, 1, 2, 7]);
        assert!(parse_frequencies("3..1").is_err());
        assert!(parse_frequencies("a").is_err());
        assert!(parse_frequencies("").is_err());
    }

    #[test]
    fn command_line_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
