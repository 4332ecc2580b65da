use std::path::PathBuf;

use ca_backtrack_core::backtrack::Mode;
use ca_backtrack_core::statevec::DEFAULT_QUBIT_CAP;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ca-backtrack",
    version,
    about = "Preimage search for elementary cellular automata on a simulated quantum register"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a configuration and draw the space-time diagram.
    Evolve(EvolveArgs),
    /// List every preimage of a target by exhaustive search.
    Preimage(PreimageArgs),
    /// Run the simulated quantum pipeline on a problem instance.
    Backtrack(BacktrackArgs),
    /// Multiplicative order of a base, optionally with simulated extraction.
    Order(OrderArgs),
    /// Run every acceptance check and report pass/fail.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    MarkPostselect,
    FullPaper,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::MarkPostselect => Mode::MarkPostselect,
            ModeArg::FullPaper => Mode::FullPaper,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// Wolfram rule number (0-255).
    #[arg(long)]
    pub rule: u32,
    /// Initial configuration as a 0/1 string, leftmost cell first.
    #[arg(long)]
    pub initial: String,
    #[arg(long)]
    pub steps: u32,
    /// Expected width; checked against the length of --initial.
    #[arg(long)]
    pub width: Option<u32>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PreimageArgs {
    #[arg(long)]
    pub rule: u32,
    /// Target configuration as a 0/1 string.
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub steps: u32,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BacktrackArgs {
    #[arg(long)]
    pub rule: u32,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub steps: u32,
    #[arg(long)]
    pub width: Option<u32>,
    /// Base A of the modular exponentiation (full_paper mode).
    #[arg(long)]
    pub base: Option<u64>,
    /// Modulus N; the width must equal ceil(log2(N^2)) in full_paper mode.
    #[arg(long)]
    pub modulus: Option<u64>,
    #[arg(long, value_enum, default_value_t = ModeArg::MarkPostselect)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1024)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    pub max_qubits: u32,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    #[arg(long)]
    pub base: u64,
    #[arg(long)]
    pub modulus: u64,
    /// Index-register width for the simulated extraction probability.
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    pub max_qubits: u32,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Also run the mark stage at this index width (must fit --max-qubits).
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    pub max_qubits: u32,
    /// Test hook: add this amplitude error during the normalization check.
    #[arg(long, hide = true)]
    pub perturb: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn backtrack_defaults() {
        let cli = Cli::try_parse_from([
            "ca-backtrack",
            "backtrack",
            "--rule",
            "254",
            "--target",
            "0110",
            "--steps",
            "2",
        ])
        .unwrap();
        let Command::Backtrack(args) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(args.shots, 1024);
        assert_eq!(args.seed, 0);
        assert_eq!(args.mode, ModeArg::MarkPostselect);
        assert_eq!(args.max_qubits, 26);
    }

    #[test]
    fn mode_values_are_snake_case() {
        let cli = Cli::try_parse_from([
            "ca-backtrack",
            "backtrack",
            "--rule",
            "1",
            "--target",
            "0",
            "--steps",
            "1",
            "--mode",
            "full_paper",
        ])
        .unwrap();
        let Command::Backtrack(args) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(Mode::from(args.mode), Mode::FullPaper);
    }
}
