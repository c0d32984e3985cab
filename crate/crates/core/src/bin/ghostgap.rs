use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ghostgap::harness::{load_config, run_experiment, write_outputs, Command, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "ghostgap", version, about = "Ghost-gap symmetrization laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// VC dimension of the configured class.
    Vcdim(Args),
    /// Growth function over the configured sample sizes.
    Growth(Args),
    /// Growth function checked against the Sauer-Shelah sum.
    SauerCheck(Args),
    /// Exact bad-event probability by enumeration.
    ProbExact(Args),
    /// Monte Carlo bad-event estimate with a Hoeffding interval.
    ProbMc(Args),
    /// Bad-event probability checked against the symmetrization bound.
    BoundCheck(Args),
    /// Bad-event probability under coordinate swaps.
    ExchangeCheck(Args),
    /// Structure of the singleton witness class bad event.
    SeparationCheck(Args),
    /// Realizable PAC sample size.
    PacM(Args),
    /// Fully materialized class table.
    ConstructDump(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Cmd {
    fn split(self) -> (Command, Args) {
        match self {
            Cmd::Vcdim(a) => (Command::Vcdim, a),
            Cmd::Growth(a) => (Command::Growth, a),
            Cmd::SauerCheck(a) => (Command::SauerCheck, a),
            Cmd::ProbExact(a) => (Command::ProbExact, a),
            Cmd::ProbMc(a) => (Command::ProbMc, a),
            Cmd::BoundCheck(a) => (Command::BoundCheck, a),
            Cmd::ExchangeCheck(a) => (Command::ExchangeCheck, a),
            Cmd::SeparationCheck(a) => (Command::SeparationCheck, a),
            Cmd::PacM(a) => (Command::PacM, a),
            Cmd::ConstructDump(a) => (Command::ConstructDump, a),
        }
    }
}

fn execute(command: Command, args: Args) -> Result<i32, HarnessError> {
    let cfg = load_config(&args.config)?;
    let opts = RunOptions {
        seed: args.seed,
        trials: args.trials,
        threads: args.threads,
        ..RunOptions::from_env()
    };
    let outcome = run_experiment(command, &cfg, &opts)?;
    if let Some(line) = write_outputs(&outcome, args.out.as_deref(), args.csv.as_deref())? {
        println!("{line}");
    }
    if let Some(v) = &outcome.manifest.violation {
        eprintln!("{}", HarnessError::Invariant(v.clone()).to_json());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let (command, args) = Cli::parse().command.split();
    let code = match execute(command, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
