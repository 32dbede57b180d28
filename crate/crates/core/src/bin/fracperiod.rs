use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracperiod::commands::{self, error_exit_code, Context, Status};

/// Fractional operator on the torus: spectrum, extension and critical points.
#[derive(Parser)]
#[command(name = "fracperiod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where reports and field files are written.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Also write CSV tables of spectra and profiles.
    #[arg(long, global = true)]
    emit_csv: bool,
    /// Exit nonzero on hypothesis violations and solver nonconvergence.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the operator and the resonance check.
    Spectrum,
    /// Hypothesis report for the configured problem.
    Check,
    /// Critical points of the energy.
    Solve,
    /// Sample the cylinder extension of a trace.
    Extend,
    /// Run the invariant suite.
    Verify,
    /// Finite-difference check of gradient and Hessian.
    Gradcheck,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("FRACPERIOD_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring FRACPERIOD_THREADS={v}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let config = match commands::load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    let ctx = Context::new(config, cli.output_dir, cli.seed, cli.emit_csv, cli.strict);
    let result = match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&ctx),
        Command::Check => commands::cmd_check(&ctx),
        Command::Solve => commands::cmd_solve(&ctx),
        Command::Extend => commands::cmd_extend(&ctx),
        Command::Verify => commands::cmd_verify(&ctx),
        Command::Gradcheck => commands::cmd_gradcheck(&ctx),
    };
    match result {
        Ok(status) => {
            match &status {
                Status::Ok => {}
                Status::HypothesisViolation(m) => eprintln!("hypothesis violation: {m}"),
                Status::NonConvergence(m) => eprintln!("solver did not converge: {m}"),
                Status::VerificationFailure(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(status.exit_code(ctx.strict) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
