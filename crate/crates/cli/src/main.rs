//! `pp-borrow`: normalized power prior analyses from the command line.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{LimitKind, StudyRow};
use config::{parse_prior, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
    /// The reader went away; not an error for a filter-style tool.
    #[error("broken pipe")]
    BrokenPipe,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::BrokenPipe => 0,
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<pp_borrow::Error> for CliError {
    fn from(e: pp_borrow::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            CliError::BrokenPipe
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            other => CliError::Io(format!("{other:?}")),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "pp-borrow",
    version,
    about = "Normalized power prior posteriors for borrowing historical data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Marginal posterior of the power parameter for one model.
    Fit(FitArgs),
    /// Closed-form limiting posteriors of the normal model.
    Limit(LimitArgs),
    /// Write the curves behind a figure of the case study, one CSV per curve.
    Figures(FigureArgs),
    /// Log risk ratio summaries from two-arm counts.
    Ingest(IngestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Model {
    Normal,
    Binomial,
    Linear,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct FitArgs {
    /// Model; may instead come from `model=` in the config file.
    model: Option<Model>,
    #[arg(long)]
    theta_hat: Option<String>,
    /// Current standard error (normal) or known error sd (linear).
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    theta0_hat: Option<String>,
    #[arg(long)]
    sigma0: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    x0: Option<String>,
    #[arg(long)]
    n0: Option<String>,
    /// Current design CSV with header x1,..,xk,y.
    #[arg(long)]
    data: Option<String>,
    /// Historical design CSV.
    #[arg(long)]
    data0: Option<String>,
    /// Beta prior on alpha as p,q (default 1,1).
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    /// Relative quadrature tolerance (else PP_BORROW_TOL, else 1e-10).
    #[arg(long)]
    tol: Option<String>,
    /// Write the density CSV here; the summary then goes to stdout.
    #[arg(long)]
    output: Option<String>,
    /// Flat key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl FitArgs {
    fn settings(self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path, commands::FIT_KEYS)?,
            None => Settings::default(),
        };
        let model = self.model.map(|m| format!("{m:?}").to_ascii_lowercase());
        for (key, value) in [
            ("model", model),
            ("theta-hat", self.theta_hat),
            ("sigma", self.sigma),
            ("theta0-hat", self.theta0_hat),
            ("sigma0", self.sigma0),
            ("x", self.x),
            ("n", self.n),
            ("x0", self.x0),
            ("n0", self.n0),
            ("data", self.data),
            ("data0", self.data0),
            ("prior", self.prior),
            ("grid-points", self.grid_points),
            ("tol", self.tol),
            ("output", self.output),
        ] {
            s.set(key, value);
        }
        Ok(s)
    }
}

#[derive(Args, Debug)]
struct LimitArgs {
    #[command(subcommand)]
    kind: LimitCommand,
}

#[derive(Subcommand, Debug)]
enum LimitCommand {
    /// Equal current and historical estimates with relative variance c.
    EqualEstimates {
        /// One or more comma-separated values of c.
        #[arg(long)]
        c: String,
        #[command(flatten)]
        common: LimitCommon,
    },
    /// Infinitely precise current data at standardized difference d.
    PreciseCurrent {
        /// One or more comma-separated values of d.
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[command(flatten)]
        common: LimitCommon,
    },
}

#[derive(Args, Debug)]
struct LimitCommon {
    #[arg(long, default_value = "1,1")]
    prior: String,
    #[arg(long, default_value_t = 512)]
    grid_points: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// Figure number: 1, 2 or 3.
    which: u8,
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
    #[arg(long, default_value = "1,1")]
    prior: String,
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// `study,events_a,n_a,events_b,n_b`; may be repeated.
    #[arg(long)]
    row: Vec<String>,
    /// File of rows in the same format, optional header.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Built-in counts: cornely or louie.
    #[arg(long)]
    preset: Vec<String>,
    #[arg(long)]
    study: Option<String>,
    #[arg(long)]
    events_a: Option<u64>,
    #[arg(long)]
    n_a: Option<u64>,
    #[arg(long)]
    events_b: Option<u64>,
    #[arg(long)]
    n_b: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

impl IngestArgs {
    fn rows(&self) -> Result<Vec<StudyRow>, CliError> {
        let mut rows = Vec::new();
        for r in &self.row {
            rows.push(commands::parse_row(&r.split(',').collect::<Vec<_>>())?);
        }
        if let Some(path) = &self.csv {
            rows.extend(commands::read_rows(path)?);
        }
        match (self.events_a, self.n_a, self.events_b, self.n_b) {
            (Some(ea), Some(na), Some(eb), Some(nb)) => rows.push(StudyRow {
                study: self.study.clone().unwrap_or_default(),
                counts: pp_borrow::TwoArmCounts::new(ea, na, eb, nb)?,
            }),
            (None, None, None, None) => {}
            _ => {
                return Err(CliError::Invalid(
                    "--events-a, --n-a, --events-b and --n-b must be given together".into(),
                ))
            }
        }
        for name in &self.preset {
            rows.push(commands::preset_row(name)?);
        }
        if rows.is_empty() {
            return Err(CliError::Invalid(
                "no counts given (use --row, --csv, --preset or the count flags)".into(),
            ));
        }
        Ok(rows)
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(args) => commands::fit(&args.settings()?, out),
        Command::Limit(args) => {
            let (kind, values, common) = match args.kind {
                LimitCommand::EqualEstimates { c, common } => (LimitKind::EqualEstimates, c, common),
                LimitCommand::PreciseCurrent { d, common } => (LimitKind::PreciseCurrent, d, common),
            };
            let prior = parse_prior(&common.prior)?;
            commands::limit(kind, &values, prior, common.grid_points, common.output.as_deref(), out)
        }
        Command::Figures(args) => {
            let mut s = Settings::default();
            s.set("tol", args.tol);
            commands::figures(args.which, &args.outdir, parse_prior(&args.prior)?, s.tol()?, out)
        }
        Command::Ingest(args) => {
            if !(args.level > 0.0 && args.level < 1.0) {
                return Err(CliError::Invalid("--level must lie in (0, 1)".into()));
            }
            commands::ingest(&args.rows()?, args.level, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            drop(out);
            let kind = match e {
                CliError::Numerical(_) => "numerical failure",
                CliError::Invalid(_) => "invalid input",
                CliError::Io(_) | CliError::BrokenPipe => "i/o error",
            };
            eprintln!("error ({kind}): {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
