use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gibbs_trotter::pipeline::TraceMode;
use gibbs_trotter_cli::{run_command, CliError, Command};

#[derive(Parser, Debug)]
#[command(name = "gibbs-trotter", version, about = "Partition-function experiments by Trotter interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Fourier and Taylor approximation error against order.
    LwfConvergence(Common),
    /// Selection-register qubits avoided per SYK size.
    QubitsSaved(Common),
    /// Full estimate of Z(beta)/N with node diagnostics.
    Pipeline {
        #[command(flatten)]
        common: Common,
        /// Overrides the config's trace mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Trotter error norms and fitted orders.
    TrotterOrder(Common),
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON config document.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Gqsp,
    IdealW,
    Sampled,
}

impl From<ModeArg> for TraceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => TraceMode::Exact,
            ModeArg::Gqsp => TraceMode::Gqsp,
            ModeArg::IdealW => TraceMode::IdealW,
            ModeArg::Sampled => TraceMode::Sampled,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, mode) = match cli.command {
        Sub::LwfConvergence(c) => (Command::LwfConvergence, c, None),
        Sub::QubitsSaved(c) => (Command::QubitsSaved, c, None),
        Sub::Pipeline { common, mode } => (Command::Pipeline, common, mode.map(TraceMode::from)),
        Sub::TrotterOrder(c) => (Command::TrotterOrder, c, None),
    };
    let result = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))
        .and_then(|text| run_command(cmd, &text, &common.out, common.seed, mode));
    match result {
        Ok(outcome) => {
            println!(
                "{}: wrote {} file(s) and manifest.json to {}",
                cmd.name(),
                outcome.manifest.outputs.len(),
                common.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
