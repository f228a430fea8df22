use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use threebody::fem::BoundaryCondition;
use threebody::Error;
use threebody_cli::config::RunConfig;
use threebody_cli::pipeline::{self, Stage};

/// Three-body scattering field: ray construction, finite element correction and diagnostics.
#[derive(Parser)]
#[command(name = "threebody", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Stage to run when no subcommand is given.
    #[arg(long, global = true)]
    stage: Option<String>,

    /// Configuration file (`key = value` lines). Defaults apply when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output` from the config.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    /// Boundary condition, `plain` or `corrected`.
    #[arg(long, global = true)]
    bc: Option<String>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Pair scattering table and pair solutions.
    Pair,
    /// Ray field, ψ₁ and discrepancy on a grid.
    Field,
    /// Build the mesh.
    Mesh,
    /// Assemble and solve for the correction ξ.
    Solve,
    /// Boundary norms, angular profile and symmetry check.
    Diagnose,
    /// Every stage in order.
    All,
    /// Print the derived geometry and pair data without writing files.
    Describe,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_config() => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Stage { source, .. } => exit_code(source),
        _ => EXIT_NUMERICAL,
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    if let Some(bc) = &cli.bc {
        config.bc = BoundaryCondition::parse(bc)
            .ok_or_else(|| Error::ConfigInvalid(format!("unknown boundary condition `{bc}`")))?;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::ConfigInvalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    }
    let config = load(cli)?;
    let stage = match (cli.command, &cli.stage) {
        (Some(_), Some(_)) => {
            return Err(Error::ConfigInvalid("give either a subcommand or --stage, not both".into()))
        }
        (Some(Command::Describe), None) => {
            print!("{}", pipeline::describe(&config)?);
            return Ok(());
        }
        (Some(c), None) => match c {
            Command::Pair => Stage::Pair,
            Command::Field => Stage::Field,
            Command::Mesh => Stage::Mesh,
            Command::Solve => Stage::Solve,
            Command::Diagnose => Stage::Diagnose,
            Command::All | Command::Describe => Stage::All,
        },
        (None, Some(s)) => Stage::parse(s).ok_or_else(|| Error::ConfigInvalid(format!("unknown stage `{s}`")))?,
        (None, None) => Stage::All,
    };
    let summary = pipeline::run(&config, stage)?;
    for (name, t) in &summary.timings {
        eprintln!("{name}: {t:.2} s");
    }
    if let Some(r) = &summary.solve {
        eprintln!("solver {:?}, relative residual {:.2e}", r.kind, r.residual);
    }
    if let Some(d) = &summary.diagnostics {
        eprintln!(
            "N variation {:.3}, max M/(E N) {:.2e}, peaks in windows: {}",
            d.n_variation(),
            d.m_ratio(),
            d.dominant_peaks_in_windows()
        );
    }
    println!("{}", config.output.join("summary.txt").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
