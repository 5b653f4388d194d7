mod args;
mod report;

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use gibbs_discovery::data_sim::{read_counts, simulate, validate, SimulationConfig};
use gibbs_discovery::estimators::{bnp_discovery, first_order, second_order};
use gibbs_discovery::posterior::discovery_interval;
use gibbs_discovery::samplers::RngStream;
use gibbs_discovery::{fit, PriorKind, PriorSpec, SampleSummary};

use args::{parse_frequencies, Cli, Command, DataArgs, Format, ParamArgs, Prior};
use report::{EstimateReport, FitReport, PriorReport, Tabular, ValidateReport};

const THREADS_VAR: &str = "GIBBS_DISCOVERY_THREADS";

/// Failure classes, each with its own exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numeric(gibbs_discovery::Error),
    Output(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
            Failure::Output(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Data(msg) | Failure::Output(msg) => f.write_str(msg),
            Failure::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl From<gibbs_discovery::Error> for Failure {
    fn from(e: gibbs_discovery::Error) -> Self {
        Failure::Numeric(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = match value.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => return Err(Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Fit { data, prior } => {
            let s = load(data)?;
            let result = fit(&s, kind(*prior))?;
            emit(cli, &FitReport::new(s.n(), s.k(), &result))
        }
        Command::Estimate { data, params, l } => {
            let ls = frequencies(l)?;
            let s = load(data)?;
            let (prior, fitted) = resolve(params, &s)?;
            let estimates = ls.iter().map(|&l| bnp_discovery(&s, &prior, l)).collect::<Result<_, _>>()?;
            emit(cli, &estimate_report(&s, &prior, fitted, estimates))
        }
        Command::Ci { data, params, l, level, draws, seed } => {
            let ls = frequencies(l)?;
            if !(*level > 0.0 && *level < 1.0) {
                return Err(Failure::Usage(format!("--level must lie in (0, 1), got {level}")));
            }
            if *draws < 2 {
                return Err(Failure::Usage("--draws must be at least 2".into()));
            }
            let s = load(data)?;
            let (prior, fitted) = resolve(params, &s)?;
            let mut estimates = Vec::with_capacity(ls.len());
            for &l in &ls {
                // one stream per frequency, so each interval is independent of the others requested
                let mut rng = RngStream::new(*seed, l);
                let interval = discovery_interval(&s, &prior, l, *level, *draws, &mut rng)?;
                estimates.push(bnp_discovery(&s, &prior, l)?.with_interval(interval));
            }
            let mut report = estimate_report(&s, &prior, fitted, estimates);
            report.seed = Some(*seed);
            report.draws = Some(*draws);
            emit(cli, &report)
        }
        Command::Approx { data, params, l, order } => {
            let ls = frequencies(l)?;
            let s = load(data)?;
            let (prior, fitted) = resolve(params, &s)?;
            let estimates = ls
                .iter()
                .map(|&l| match order {
                    1 => first_order(&s, prior.sigma(), l),
                    _ => second_order(&s, &prior, l),
                })
                .collect::<Result<_, _>>()?;
            emit(cli, &estimate_report(&s, &prior, fitted, estimates))
        }
        Command::Validate { data } => {
            let s = read(data)?;
            let report = validate(&s);
            emit(cli, &ValidateReport::new(report))?;
            if report.passed {
                Ok(())
            } else {
                let (k, n) = report.residuals();
                Err(Failure::Data(format!("declared totals disagree with the counts: residuals k={k}, n={n}")))
            }
        }
        Command::Simulate { dist: _, s, n, replicates, groups, seed, with_gg } => {
            if !(*s > 1.0) || !s.is_finite() {
                return Err(Failure::Usage(format!("--s must exceed 1, got {s}")));
            }
            if *n == 0 || *replicates == 0 {
                return Err(Failure::Usage("--n and --replicates must be positive".into()));
            }
            if *groups == 0 || groups > replicates {
                return Err(Failure::Usage(format!("--groups must be between 1 and {replicates}")));
            }
            let mut config = SimulationConfig::new(*s, *n, *replicates, *seed);
            config.groups = *groups;
            config.include_gg = *with_gg;
            emit(cli, &simulate(&config)?)
        }
    }
}

fn kind(prior: Prior) -> PriorKind {
    match prior {
        Prior::Pd => PriorKind::PitmanYor,
        Prior::Gg => PriorKind::GeneralizedGamma,
    }
}

fn frequencies(spec: &str) -> Result<Vec<u64>, Failure> {
    parse_frequencies(spec).map_err(Failure::Usage)
}

fn read(path: &Path) -> Result<SampleSummary, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(format!("cannot open {}: {e}", path.display())))?;
    read_counts(file).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Reads and validates a count file.
fn load(data: &DataArgs) -> Result<SampleSummary, Failure> {
    let s = read(&data.data)?;
    let report = validate(&s);
    if !report.passed {
        let (k, n) = report.residuals();
        let msg = format!(
            "{}: declared totals disagree with the counts (residuals k={k}, n={n})",
            data.data.display()
        );
        if !data.force {
            return Err(Failure::Data(format!("{msg}; pass --force to use the declared totals")));
        }
        eprintln!("warning: {msg}");
    }
    Ok(s)
}

/// The prior named by the flags, and whether it was fitted.
fn resolve(params: &ParamArgs, s: &SampleSummary) -> Result<(PriorSpec, bool), Failure> {
    let given = [params.sigma.is_some(), params.theta.is_some(), params.tau.is_some()];
    if params.fit {
        if given.iter().any(|&g| g) {
            return Err(Failure::Usage("--fit excludes --sigma, --theta and --tau".into()));
        }
        return Ok((fit(s, kind(params.prior))?.prior, true));
    }
    let sigma = params.sigma.ok_or_else(|| Failure::Usage("give --fit or --sigma with its partner".into()))?;
    let prior = match (params.prior, params.theta, params.tau) {
        (Prior::Pd, Some(theta), None) => PriorSpec::pitman_yor(sigma, theta),
        (Prior::Gg, None, Some(tau)) => PriorSpec::generalized_gamma(sigma, tau),
        (Prior::Pd, _, _) => return Err(Failure::Usage("--prior pd takes --sigma and --theta".into())),
        (Prior::Gg, _, _) => return Err(Failure::Usage("--prior gg takes --sigma and --tau".into())),
    };
    prior.map(|p| (p, false)).map_err(|e| Failure::Usage(e.to_string()))
}

fn estimate_report(
    s: &SampleSummary,
    prior: &PriorSpec,
    fitted: bool,
    estimates: Vec<gibbs_discovery::DiscoveryEstimate>,
) -> EstimateReport {
    EstimateReport { n: s.n(), k: s.k(), prior: PriorReport::new(prior), fitted, seed: None, draws: None, estimates }
}

fn emit<T: Tabular>(cli: &Cli, report: &T) -> Outcome {
    let mut text = match cli.format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| Failure::Output(e.to_string()))?,
        Format::Csv => {
            let (header, rows) = report.rows();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).map_err(|e| Failure::Output(e.to_string()))?;
            for row in rows {
                w.write_record(&row).map_err(|e| Failure::Output(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Output(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure::Output(e.to_string()))?
        }
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    written.map_err(|e| Failure::Output(format!("cannot write report: {e}")))
}
