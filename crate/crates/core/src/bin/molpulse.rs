use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use molpulse::cli::{
    cmd_invert_laplace, cmd_mc_validate, cmd_response, cmd_shape, cmd_simulate, load_config,
    RunContext,
};
use molpulse::Error;

/// Diffusion-channel pulse shaping toolkit.
#[derive(Parser)]
#[command(name = "molpulse", version, about)]
struct Args {
    /// Path to the TOML run configuration.
    #[arg(long, global = true, default_value = "molpulse.toml")]
    config: PathBuf,

    /// Output directory (overrides the config's output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides both stochastic seeds (walk and link).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress run-varying fields (wall clock) in the manifest.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the channel's closed forms over time and Laplace grids.
    Response,
    /// Dump the shaped emission schedules and the received responses.
    Shape,
    /// Run the OOK link over the noise ladder (raw vs shaped).
    Simulate,
    /// Validate the channel law with first-passage Monte Carlo.
    McValidate,
    /// Cross-check a named Laplace transform numerically.
    InvertLaplace {
        /// One of: channel_H, poison_Pd.
        #[arg(long)]
        transform: String,
    },
}

fn run(args: Args) -> molpulse::Result<()> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }
    let ctx = RunContext::new(config, args.out, args.deterministic);
    let manifest = match &args.command {
        Command::Response => cmd_response(&ctx)?,
        Command::Shape => cmd_shape(&ctx)?,
        Command::Simulate => cmd_simulate(&ctx)?,
        Command::McValidate => cmd_mc_validate(&ctx)?,
        Command::InvertLaplace { transform } => cmd_invert_laplace(&ctx, transform)?,
    };
    for check in &manifest.checks {
        eprintln!(
            "[{}] {}: {}",
            if check.pass { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    eprintln!("wrote {}", ctx.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Domain(_) | Error::Config(_) => 2,
                Error::Numerical { .. } | Error::AtIndex { .. } => 3,
                Error::Io { .. } => 4,
            };
            ExitCode::from(code)
        }
    }
}
