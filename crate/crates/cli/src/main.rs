use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod problem;

use problem::InputError;

/// Exterior forms, evolutionary relations and characteristics.
#[derive(Parser, Debug)]
#[command(name = "skewforms", version, about)]
pub struct Cli {
    /// Human-readable report instead of canonical JSON.
    #[arg(long, global = true)]
    pub text: bool,
    /// Seed for randomized zero tests.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Tolerance for randomized zero tests [default: 1e-9].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for trajectory fans.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Integration step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Number of integration steps.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// JSON file of default settings.
    #[arg(long, global = true, env = "SKEWFORMS_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Input {
    /// Problem file (JSON).
    pub file: Option<PathBuf>,
    /// Coordinates for inline input, e.g. `--chart x,y`.
    #[arg(long, value_delimiter = ',')]
    pub chart: Vec<String>,
    /// Opaque function with its dependencies, e.g. `--function 'h(x,y)'`.
    #[arg(long = "function", value_name = "NAME(ARGS)")]
    pub functions: Vec<String>,
    /// Form name from the problem file, or a form literal.
    #[arg(long)]
    pub form: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum AnsatzArg {
    Auto,
    First,
    Second,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CaseId {
    Thermodynamics,
    GasDynamics,
    Electromagnetic,
    HamiltonJacobi,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exterior derivative.
    D(Input),
    /// Wedge product of two forms.
    Wedge {
        #[command(flatten)]
        input: Input,
        /// Right factor: form name or literal.
        #[arg(long)]
        with: String,
    },
    /// Zero test of the exterior derivative.
    Closed(Input),
    /// Commutator table of a 1-form.
    Commutator {
        #[command(flatten)]
        input: Input,
        /// Connection name from the problem file.
        #[arg(long)]
        connection: Option<String>,
    },
    /// Identical or nonidentical relation, with sources.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// Relation name from the problem file.
        #[arg(long)]
        relation: Option<String>,
    },
    /// Single-variable integrating factor of a 1-form in two coordinates.
    Factor {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "auto")]
        ansatz: AnsatzArg,
    },
    /// Restrict a relation to pseudostructures and integrate step by step.
    Restrict {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        relation: Option<String>,
        /// Pseudostructure names, applied in order.
        #[arg(long = "pseudostructure", required = true)]
        pseudostructures: Vec<String>,
    },
    /// Integrate a characteristic fan and look for degenerate transforms.
    Characteristics {
        #[command(flatten)]
        input: Input,
        /// Write samples as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Keep every N-th sample in the CSV.
        #[arg(long, default_value_t = 1)]
        thin: usize,
        /// Tolerance for closure residual and energy drift [default: 1e-6].
        #[arg(long)]
        closure_tol: Option<f64>,
    },
    /// Run a worked case study.
    Case {
        #[command(flatten)]
        input: Input,
        /// Built-in case when no file is given.
        #[arg(long, value_enum)]
        id: Option<CaseId>,
    },
    /// Check that a problem file parses and every reference resolves.
    Validate(Input),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            let text = if cli.text { report.text } else { output::canonical(&report.json) };
            print!("{text}");
            ExitCode::from(if report.negative { 1 } else { 0 })
        }
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
