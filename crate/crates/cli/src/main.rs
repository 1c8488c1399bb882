use clap::{Args, Parser, Subcommand};
use datacompat::SolverKind;
use datacompat_cli::{batch_command, run_command, verify_command, CliError, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Data-compatible solutions of constrained convex minimization.
#[derive(Parser)]
#[command(name = "datacompat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a solver to its OUT point or budget and write the trace.
    Run {
        #[arg(long, env = "DATACOMPAT_CONFIG")]
        config: PathBuf,
        #[arg(long, env = "DATACOMPAT_SOLVER", default_value = "hsm")]
        solver: SolverKind,
        #[arg(long, env = "DATACOMPAT_TRACE")]
        trace: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Replay a trace and confirm its recorded OUT index.
    Verify {
        #[arg(long, env = "DATACOMPAT_TRACE")]
        trace: PathBuf,
        #[arg(long, env = "DATACOMPAT_CONFIG")]
        config: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Run many configs concurrently, one trace per config.
    Batch {
        #[arg(long, env = "DATACOMPAT_SOLVER", default_value = "hsm")]
        solver: SolverKind,
        #[arg(long, env = "DATACOMPAT_OUT_DIR")]
        out_dir: PathBuf,
        #[command(flatten)]
        shared: Shared,
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Shared {
    #[arg(long, env = "DATACOMPAT_MAX_ITER")]
    max_iter: Option<usize>,
    #[arg(long, env = "DATACOMPAT_TAU")]
    tau: Option<f64>,
    #[arg(long, env = "DATACOMPAT_GAMMA")]
    gamma: Option<f64>,
    #[arg(long, env = "DATACOMPAT_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "DATACOMPAT_ORACLE_CACHE")]
    oracle_cache: Option<PathBuf>,
}

impl Shared {
    fn overrides(&self) -> Overrides {
        Overrides { max_iter: self.max_iter, tau: self.tau, gamma: self.gamma, seed: self.seed }
    }
}

fn fail(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config, solver, trace, shared } => {
            match run_command(&config, solver, &trace, &shared.overrides(), shared.oracle_cache.as_deref()) {
                Ok(outcome) => {
                    println!("{}", outcome.summary());
                    outcome.exit_code()
                }
                Err(e) => fail(&e),
            }
        }
        Command::Verify { trace, config, shared } => {
            match verify_command(&trace, &config, &shared.overrides(), shared.oracle_cache.as_deref()) {
                Ok(rows) => {
                    println!("ok: {rows} rows verified");
                    0
                }
                Err(e) => fail(&e),
            }
        }
        Command::Batch { solver, out_dir, shared, configs } => {
            match batch_command(&configs, solver, &out_dir, &shared.overrides(), shared.oracle_cache.as_deref()) {
                Ok(items) => {
                    for item in &items {
                        match &item.result {
                            Ok(o) => println!("{}: {}", item.config.display(), o.summary()),
                            Err(e) => println!("{}: error: {e}", item.config.display()),
                        }
                    }
                    items.iter().map(|i| i.exit_code()).max().unwrap_or(0)
                }
                Err(e) => fail(&e),
            }
        }
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
    ExitCode::from(dispatch(cli) as u8)
}
