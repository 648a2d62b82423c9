//! `scars` command-line front end. JSON goes to stdout (and to `--out` when
//! given); CSV series are written into the output directory.

mod reproduce;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "scars", version, about = "Exact MPS scars in constrained spin chains")]
struct Cli {
    /// Directory for files written by the command.
    #[arg(long, env = "SCARS_OUT_DIR", default_value = ".", global = true)]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Enumerate a constrained basis.
    Basis(BasisArgs),
    /// Build H^alpha; JSON summary or Matrix Market.
    Hamiltonian(HamArgs),
    /// List or dump catalog states.
    Catalog(CatalogArgs),
    /// Solve for a certificate X and check direct residuals.
    Certify(CertifyArgs),
    /// Asymptotic and finite-size entanglement data of a catalog state.
    Entanglement(EntArgs),
    /// Nullspace distillation campaign.
    Distill(DistillArgs),
    /// Sector dynamics and overlap profiles.
    Dynamics(DynArgs),
    /// Regenerate a table or figure dataset.
    Reproduce(ReproduceArgs),
    /// Run a saved configuration (JSON written by any command).
    Run(RunArgs),
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemArgs {
    #[arg(short = 'L', long = "length")]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(long, default_value_t = 1)]
    pub alpha: usize,
    #[arg(long, default_value = "pbc")]
    pub bc: String,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Include the configurations.
    #[arg(long)]
    pub states: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatFormat {
    Json,
    Mtx,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: MatFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogArgs {
    #[command(subcommand)]
    pub action: CatalogAction,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum CatalogAction {
    List,
    Dump {
        name: String,
        /// Blockade radius for frozen-motif and PSP states.
        #[arg(long)]
        alpha: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub state: String,
    /// Override the state's condition scheme.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub alpha: Option<usize>,
    /// System sizes for the direct residual check.
    #[arg(long, value_delimiter = ',', default_values_t = [12usize, 18])]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntArgs {
    #[arg(long)]
    pub state: String,
    /// Finite sizes (spin sites) for the half-chain spectrum.
    #[arg(short = 'L', long = "length", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillArgs {
    #[arg(short = 'L', long = "length", default_value_t = 20)]
    #[serde(rename = "L")]
    pub l: usize,
    #[arg(short = 'p', long, default_value_t = 2)]
    pub p: usize,
    /// Nullspace sector (I, C) as "++" or "--".
    #[arg(long, default_value = "++")]
    pub sector: String,
    /// Row and column symmetry groups of the block, e.g. "+-".
    #[arg(long = "row-group", default_value = "++")]
    pub row_group: String,
    #[arg(long = "col-group", default_value = "++")]
    pub col_group: String,
    #[arg(short = 't', long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitState {
    Z2plus,
    SmaTheta,
    SmaPhi,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynArgs {
    #[command(subcommand)]
    pub action: DynAction,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
pub enum DynAction {
    /// |<Z2+|psi(t)>|^2 from the chosen initial state, as CSV (t, overlap).
    Revivals {
        #[arg(long, default_value = "pxp")]
        model: String,
        #[arg(short = 'L', long = "length", default_value_t = 24)]
        #[serde(rename = "L")]
        l: usize,
        #[arg(long, value_enum, default_value = "z2plus")]
        init: InitState,
        #[arg(long, default_value_t = 40.0)]
        tmax: f64,
        #[arg(long, default_value_t = 0.05)]
        dt: f64,
        #[arg(long, default_value = "revivals.csv")]
        out: PathBuf,
    },
    /// Per-eigenstate overlaps with an SMA manifold or Z2+, as CSV (E, overlap).
    Profile {
        #[arg(short = 'L', long = "length", default_value_t = 24)]
        #[serde(rename = "L")]
        l: usize,
        #[arg(long, value_enum, default_value = "sma-theta")]
        target: InitState,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Table1,
    Table2,
    Fig2,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    #[value(name = "appD")]
    #[serde(rename = "appD")]
    AppD,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    /// Runs per campaign for fig6/fig7 (the t = 6 campaign uses a fifth).
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArgs {
    pub config: PathBuf,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// A numerical check did not pass (exit 1).
    Check(serde_json::Value),
    /// Bad input (exit 2).
    Usage(String, String),
}

impl From<scars::Error> for Failure {
    fn from(e: scars::Error) -> Self {
        let kind = match &e {
            scars::Error::Invalid(_) => "invalid-input",
            scars::Error::Dimension { .. } => "dimension-mismatch",
            scars::Error::Constraint(_) => "constraint-violated",
            scars::Error::NoSolution(_) => "no-solution",
            scars::Error::Unknown(_) => "unknown-name",
            scars::Error::Split(_) => "split-invariant",
        };
        Failure::Usage(kind.into(), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage("io".into(), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage("config".into(), e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = serde_json::json!({"error": {"kind": "usage", "message": e.to_string()}});
            println!("{}", serde_json::to_string_pretty(&err).unwrap());
            return ExitCode::from(2);
        }
    };
    match run::execute(&cli.cmd, &cli.out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(report)) => {
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::from(1)
        }
        Err(Failure::Usage(kind, message)) => {
            let err = serde_json::json!({"error": {"kind": kind, "message": message}});
            println!("{}", serde_json::to_string_pretty(&err).unwrap());
            ExitCode::from(2)
        }
    }
}
