//! `pulsemu`: OpenQASM → native gates → pulses → Lindblad dynamics.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pulsemu::pulse::SchedulerPolicy;
use pulsemu::transpiler::Placement;

#[derive(Parser, Debug)]
#[command(name = "pulsemu", version, about = "Pulse-level emulation of transmon processors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower an OpenQASM 2.0 file to the native gate set
    Transpile {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        transpile: TranspileArgs,
    },
    /// Turn a native circuit (native.json) into a timed pulse schedule
    Compile {
        native: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PolicyArg::Sequential)]
        policy: PolicyArg,
    },
    /// Integrate the master equation for a schedule and sample shots
    Simulate {
        schedule: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Full pipeline from OpenQASM to counts
    Run {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        transpile: TranspileArgs,
        #[arg(long, value_enum, default_value_t = PolicyArg::Sequential)]
        policy: PolicyArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Also run every validator stage and write validation.json
        #[arg(long)]
        validate: bool,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Check previously written artifacts against their source circuit
    Validate {
        input: PathBuf,
        #[arg(long)]
        native: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Readout-onset state from `simulate`; enables the fidelity stage
        #[arg(long)]
        state: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Platform JSON file, or the name of a bundled platform (anyon_2q, anyon_4q)
    #[arg(long, default_value = "anyon_2q")]
    platform: String,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct TranspileArgs {
    #[arg(long, value_enum, default_value_t = PlacementArg::Trivial)]
    placement: PlacementArg,
    /// Seed for random placement and shot sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep Z/RZ as explicit gates
    #[arg(long)]
    no_fold: bool,
}

#[derive(Args, Debug, Clone)]
struct SimArgs {
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    #[arg(long = "sample-seed", default_value_t = 0)]
    sample_seed: u64,
    /// Disable T1/T2 dissipators
    #[arg(long)]
    no_noise: bool,
    /// Population sampling interval (ns)
    #[arg(long, default_value_t = 0.01)]
    output_dt: f64,
    #[arg(long, default_value_t = 1e-11)]
    atol: f64,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
}

#[derive(Args, Debug, Clone, Default)]
struct ThresholdArgs {
    /// Fixed minimum fidelity for the fidelity stage
    #[arg(long)]
    min_fidelity: Option<f64>,
    /// Fixed maximum noise-free infidelity for the evolution stage
    #[arg(long)]
    evolution_tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PlacementArg {
    Trivial,
    Random,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PolicyArg {
    Sequential,
    Asap,
}

impl From<PolicyArg> for SchedulerPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Sequential => SchedulerPolicy::Sequential,
            PolicyArg::Asap => SchedulerPolicy::Asap,
        }
    }
}

impl TranspileArgs {
    fn placement(&self) -> Placement {
        match self.placement {
            PlacementArg::Trivial => Placement::Trivial,
            PlacementArg::Random => Placement::Random { seed: self.seed },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if e.exit_code() == artifacts::EXIT_PARSE {
                eprintln!("{e}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
