//! `nbu`: exact and first-principles Nielsen-Borsuk-Ulam numbers for torus
//! self-maps under free involutions.
//!
//! Exit codes: 0 success/agreement, 1 invalid input or unsupported case,
//! 2 verification mismatch.

use clap::{Args, Parser, Subcommand};
use nbu_cli::{cmd_batch, cmd_compute, cmd_realize, cmd_verify, OutputFormat, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "nbu", version, about = "Nielsen-Borsuk-Ulam numbers on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Torus dimension (checked against the matrix when both are given)
    #[arg(long)]
    dim: Option<usize>,
    /// Induced matrix: "1,0,0;0,1,0;1,1,2" or JSON [[...],[...]]
    #[arg(long)]
    matrix: Option<String>,
    /// Involution: catalog name (antipodal, tau1..tau4, h1..h4) or
    /// custom:<linear>@<translation>
    #[arg(long)]
    involution: Option<String>,
    /// Grid resolution per axis for the numeric oracle
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Residual tolerance for refined coincidences
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for batch matrix generation
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of random matrices in batch mode
    #[arg(long, default_value_t = 200)]
    count: usize,
    /// Entries are drawn uniformly from [-range, range]
    #[arg(long, default_value_t = 3)]
    range: i64,
    /// Output format: json, csv or text
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form NBU from the induced matrix
    Compute(CommonArgs),
    /// Cross-check the closed form against the first-principles oracle
    Verify(CommonArgs),
    /// Emit the perturbation recipe and its coincidence inventory
    Realize(CommonArgs),
    /// Seeded random verification batch
    Batch(CommonArgs),
}

fn to_config(a: &CommonArgs) -> Result<RunConfig, anyhow::Error> {
    Ok(RunConfig {
        dim: a.dim,
        matrix: a.matrix.clone(),
        involution: a.involution.clone(),
        grid: a.grid,
        tol: a.tol,
        seed: a.seed,
        count: a.count,
        range: a.range,
        format: a.format.parse::<OutputFormat>()?,
    })
}

fn emit(args: &CommonArgs, text: &str) -> Result<(), anyhow::Error> {
    match &args.out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, anyhow::Error> {
    match &cli.command {
        Command::Compute(a) => {
            let text = cmd_compute(&to_config(a)?)?;
            emit(a, &text)?;
            Ok(0)
        }
        Command::Realize(a) => {
            let text = cmd_realize(&to_config(a)?)?;
            emit(a, &text)?;
            Ok(0)
        }
        Command::Verify(a) => {
            let (text, agree) = cmd_verify(&to_config(a)?)?;
            emit(a, &text)?;
            Ok(if agree { 0 } else { 2 })
        }
        Command::Batch(a) => {
            let (text, summary) = cmd_batch(&to_config(a)?)?;
            emit(a, &text)?;
            Ok(if summary.disagreements.is_empty() { 0 } else { 2 })
        }
    }
}
