use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carpetlab::carpet::Evaluator;
use carpetlab::harness::{self, output, RunConfig, SliceAxis, DEFAULT_TRACE_THRESHOLD};
use carpetlab::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(
    name = "carpetlab",
    version,
    about = "Quantum carpets of a particle in a box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured evaluator: direct, gaussian-lines, factorized.
    #[arg(long)]
    evaluator: Option<Evaluator>,
    /// Output path; stdout for reports when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Render W(x,t) on the configured grid.
    Carpet(Common),
    /// Cross-check all evaluation routes; exit 3 on any failure.
    Validate(Common),
    /// List the visible trace families as JSON.
    Traces {
        #[command(flatten)]
        common: Common,
        /// Relative weight below which traces are dropped.
        #[arg(long, default_value_t = DEFAULT_TRACE_THRESHOLD)]
        threshold: f64,
    },
    /// W along a cut from both the eigenmode and the line sums, as CSV.
    Slice {
        #[command(flatten)]
        common: Common,
        /// fixed-t or fixed-x.
        #[arg(long, default_value = "fixed-t")]
        axis: SliceAxis,
        /// t/T for fixed-t, x/L for fixed-x.
        #[arg(long)]
        value: f64,
    },
}

enum Failure {
    Error(Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut config = RunConfig::load(&common.config)?;
    if let Some(e) = common.evaluator {
        config.evaluator = e;
        config.check()?;
    }
    Ok(config)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Carpet(common) => {
            let config = load(&common)?;
            let run = harness::cmd_carpet(&config, common.out.as_deref())?;
            for w in &run.metadata.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", run.path.display());
            println!("{}", run.sidecar.display());
        }
        Command::Validate(common) => {
            let config = load(&common)?;
            let report = harness::cmd_validate(&config)?;
            println!("{report}");
            if let Some(path) = &common.out {
                output::write_json_file(path, &report)?;
            }
            if !report.passed {
                return Err(Failure::Validation);
            }
        }
        Command::Traces { common, threshold } => {
            let config = load(&common)?;
            let events = harness::cmd_traces(&config, threshold)?;
            output::write_traces(&events, sink(common.out.as_deref())?)?;
        }
        Command::Slice {
            common,
            axis,
            value,
        } => {
            let config = load(&common)?;
            let rows = harness::cmd_slice(&config, axis, value)?;
            output::write_slice_csv(&rows, sink(common.out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
                Error::Io(_) => EXIT_IO,
                _ => EXIT_OTHER,
            })
        }
    }
}
