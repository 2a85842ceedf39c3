use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cqtraj::scenario::{parse_raw, run_scenario, RawConfig, SpanValue};
use cqtraj::Error;

/// Complex quantum trajectories and extended densities.
///
/// Tasks: trajectory, path, born, field-closed, field-trajectory, compare,
/// poirier, figures. Flags override the matching fields of --config.
#[derive(Parser, Debug)]
#[command(name = "cqtraj", version)]
struct Cli {
    /// what to compute
    task: String,
    /// TOML or JSON scenario file
    #[arg(long)]
    config: Option<PathBuf>,
    /// state, e.g. `ho:n=1`, `well:n=1,a=pi`, `step:k=1,r=0.7071067811865476`, `wave:k=1`
    #[arg(long)]
    state: Option<String>,
    /// seed position `a+bi` (repeatable)
    #[arg(long = "seed", allow_hyphen_values = true)]
    seeds: Vec<String>,
    /// time span `t0:t1` (default: one loop)
    #[arg(long, allow_hyphen_values = true)]
    t_span: Option<String>,
    /// arc length for the path task (default: one loop)
    #[arg(long)]
    arc_length: Option<f64>,
    /// `xr0:xr1:n` or `xr0:xr1:n,xi0:xi1:m`
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// relative and absolute integrator tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// output file (directory for figures); stdout when omitted
    #[arg(long)]
    out: Option<String>,
    /// zero the field where paths never reach the real axis
    #[arg(long)]
    masked: bool,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            parse_raw(&text)?
        }
        None => RawConfig::default(),
    };
    let flags = RawConfig {
        state: cli.state,
        task: Some(cli.task),
        seeds: (!cli.seeds.is_empty()).then_some(cli.seeds),
        t_span: cli.t_span.map(SpanValue::Text),
        arc_length: cli.arc_length,
        grid: cli.grid,
        tol: cli.tol,
        integrator: None,
        output: cli.out,
        masked: cli.masked.then_some(true),
    };
    let config = file.overlay(flags).validate()?;
    run_scenario(&config)
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
    match run(cli) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
