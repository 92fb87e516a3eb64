use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adsb_coexist::geometry::RangeBucket;
use adsb_coexist::harness::properties::{Fault, SuiteOptions};
use adsb_coexist::harness::{
    analytic_value, figures::GridDensity, load_experiment, replication_report, reproduce_figure,
    run_property_suite, run_sweep, write_csv, Engines, Experiment, FigureOptions, Preset, Series,
    SweepRow, SweepSpec, SweepVar,
};
use adsb_coexist::montecarlo::{init_thread_pool, run_protocol, TrialProtocol, DEFAULT_TRIALS};
use adsb_coexist::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Received probability of UAV ADS-B transmissions at a ground station.
///
/// Worker threads default to the number of cores; set ADSB_COEXIST_THREADS to override.
#[derive(Parser)]
#[command(name = "adsb-coexist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic engine for one configuration.
    Analytic(AnalyticArgs),
    /// Run the Monte Carlo engine for one configuration.
    Simulate(SimulateArgs),
    /// Sweep one parameter and write CSV rows.
    Sweep(SweepArgs),
    /// Reproduce one of the four reference experiments.
    Fig(FigArgs),
    /// Run the property suite and write the replication report.
    Validate(ValidateArgs),
}

#[derive(Args)]
#[group(id = "target", required = true, multiple = false)]
struct Target {
    /// Condition on a target at this distance from the ground station (km).
    #[arg(long, value_name = "KM", group = "target")]
    at_distance: Option<f64>,
    /// Target is the UAV nearest to the ground station.
    #[arg(long, group = "target")]
    nearest: bool,
    /// Average over UAVs placed in a range bucket.
    #[arg(long, value_name = "short|long", group = "target")]
    bucket: Option<RangeBucket>,
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[command(flatten)]
    target: Target,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Fixed,
    Nearest,
    Population,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[arg(long, value_enum)]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Target distance for the fixed protocol (km).
    #[arg(long, value_name = "KM")]
    at_distance: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Swept parameter: pu, pc, lambda1, alpha or theta.
    #[arg(long)]
    var: SweepVar,
    /// Comma-separated, strictly increasing values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    grid: Vec<f64>,
    /// Second parameter with its values, e.g. theta=7,10,11,13,14.
    #[arg(long, value_name = "VAR=V1,V2,...")]
    series: Option<String>,
    /// analytic, mc or both.
    #[arg(long, default_value = "both")]
    engine: Engines,
    #[arg(long, value_enum, default_value = "population")]
    protocol: ProtocolArg,
    /// Target distance for the fixed protocol (km).
    #[arg(long, value_name = "KM")]
    at_distance: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigArgs {
    /// Figure number: 4, 5, 6 or 7.
    #[arg(long)]
    id: u8,
    #[arg(long, default_value = "self-consistent")]
    preset: Preset,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    /// Five grid points per curve instead of the dense plotting grid.
    #[arg(long)]
    coarse: bool,
    /// analytic, mc or both; defaults to both for self-consistent, analytic for paper-literal.
    #[arg(long)]
    engine: Option<Engines>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlippedThreshold,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Break one ingredient on purpose to check that the suite notices.
    #[arg(long, value_enum)]
    inject_fault: Option<FaultArg>,
}

enum Failure {
    Core(Error),
    Properties(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match init_thread_pool()
        .map_err(Failure::from)
        .and_then(|_| run(cli.command))
    {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
        Err(Failure::Properties(n)) => {
            eprintln!("{n} properties failed");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analytic(a) => analytic(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Fig(a) => fig(a),
        Command::Validate(a) => validate(a),
    }
}

fn protocol(arg: ProtocolArg, at_distance: Option<f64>) -> Result<TrialProtocol, Error> {
    match (arg, at_distance) {
        (ProtocolArg::Fixed, Some(d)) => Ok(TrialProtocol::FixedDistance(d)),
        (ProtocolArg::Fixed, None) => Err(Error::Validation {
            field: "at-distance".into(),
            constraint: "required by the fixed protocol".into(),
        }),
        (_, Some(_)) => Err(Error::Validation {
            field: "at-distance".into(),
            constraint: "only meaningful with the fixed protocol".into(),
        }),
        (ProtocolArg::Nearest, None) => Ok(TrialProtocol::NearestTarget),
        (ProtocolArg::Population, None) => Ok(TrialProtocol::Population),
    }
}

fn row(id: &str, exp: &Experiment, x: (&str, f64), bucket: Option<RangeBucket>) -> SweepRow {
    let mut warnings = exp.scenario.warnings();
    if let Some(note) = exp.preset.provenance() {
        warnings.push(note.into());
    }
    SweepRow {
        figure: id.into(),
        x_name: x.0.into(),
        x_value: x.1,
        series_name: String::new(),
        series_value: None,
        bucket,
        p_analytic: None,
        p_mc: None,
        ci_low: None,
        ci_high: None,
        trials: None,
        seed: None,
        preset: exp.preset,
        warnings: warnings.join("; "),
    }
}

fn x_of(exp: &Experiment, protocol: TrialProtocol) -> (&'static str, f64) {
    match protocol {
        TrialProtocol::FixedDistance(d) => ("distance_km", d),
        _ => ("theta", exp.scenario.theta_db),
    }
}

fn emit(rows: &[SweepRow], out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_csv(rows, std::fs::File::create(path)?)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_csv(rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn analytic(a: AnalyticArgs) -> Result<(), Failure> {
    let exp = load_experiment(&a.config)?;
    let (protocol, bucket) = match (a.target.at_distance, a.target.nearest, a.target.bucket) {
        (Some(d), _, _) => (TrialProtocol::FixedDistance(d), None),
        (_, true, _) => (TrialProtocol::NearestTarget, None),
        (_, _, b) => (TrialProtocol::Population, b),
    };
    let mut r = row("analytic", &exp, x_of(&exp, protocol), bucket);
    r.p_analytic = Some(analytic_value(
        exp.preset,
        &exp.scenario,
        protocol,
        bucket,
        &exp.quadrature,
    )?);
    emit(&[r], None)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let exp = load_experiment(&a.config)?;
    let protocol = protocol(a.protocol, a.at_distance)?;
    let estimates = run_protocol(
        protocol,
        &exp.scenario,
        &[exp.scenario.theta_db],
        a.trials,
        a.seed,
    )?;
    let rows: Vec<SweepRow> = estimates[0]
        .iter()
        .map(|(&bucket, e)| {
            let mut r = row("simulate", &exp, x_of(&exp, protocol), bucket);
            r.trials = Some(e.trials);
            r.seed = Some(a.seed);
            if e.is_empty() {
                r.warnings = [r.warnings.as_str(), "no monte carlo targets in bucket"]
                    .iter()
                    .filter(|s| !s.is_empty())
                    .copied()
                    .collect::<Vec<_>>()
                    .join("; ");
            } else {
                r.p_mc = Some(e.p_hat);
                r.ci_low = Some(e.ci_low);
                r.ci_high = Some(e.ci_high);
            }
            r
        })
        .collect();
    emit(&rows, None)
}

fn parse_series(text: &str) -> Result<Series, Error> {
    let bad = |constraint: &str| Error::Parse {
        field: "series".into(),
        message: constraint.into(),
    };
    let (var, values) = text
        .split_once('=')
        .ok_or_else(|| bad("expected VAR=V1,V2,..."))?;
    let variable: SweepVar = var.trim().parse().map_err(|_| bad("unknown variable"))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| bad("values must be numbers"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Series { variable, values })
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let exp = load_experiment(&a.config)?;
    let mut spec = SweepSpec::new("sweep", a.var, a.grid, exp.scenario, exp.preset);
    spec.series = a.series.as_deref().map(parse_series).transpose()?;
    spec.quadrature = exp.quadrature;
    spec.engines = a.engine;
    spec.protocol = protocol(a.protocol, a.at_distance)?;
    spec.trials = a.trials;
    let rows = run_sweep(&spec, a.seed)?;
    emit(&rows, a.out.as_deref())
}

fn fig(a: FigArgs) -> Result<(), Failure> {
    let options = FigureOptions {
        grid: if a.coarse {
            GridDensity::Coarse
        } else {
            GridDensity::Full
        },
        trials: a.trials,
        engines: a.engine,
        ..FigureOptions::default()
    };
    let summary = reproduce_figure(a.id, a.preset, &a.out, a.seed, &options)?;
    println!("{}", summary.csv.display());
    for f in &summary.plot_files {
        println!("{}", f.display());
    }
    println!("{}", summary.metadata.display());
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let options = SuiteOptions {
        seed: a.seed,
        fault: a
            .inject_fault
            .map(|FaultArg::FlippedThreshold| Fault::FlippedThreshold),
    };
    let report = run_property_suite(&a.out, &options)?;
    for r in &report.results {
        println!(
            "{} {}::{} ({:.0} ms) {}",
            if r.passed { "ok  " } else { "FAIL" },
            r.module,
            r.name,
            r.runtime_ms,
            r.detail
        );
    }
    let replication = replication_report(&Default::default())?;
    replication.write(&a.out)?;
    print!("{}", replication.to_text());
    match report.failures().count() {
        0 => Ok(()),
        n => Err(Failure::Properties(n)),
    }
}
