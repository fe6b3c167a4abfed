use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csmac::config::{Scheme, SystemConfig};
use csmac::error::Result;
use csmac::scenario_io::{
    emit_design_table, parse_config, run_simulation, run_sweep, write_design_table, DesignTableSpec, Format,
    SweepParameter, SweepSpec,
};

#[derive(Parser)]
#[command(name = "csmac", version, about = "Compressive-sensing multiple access: design, simulation and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    /// Schemes to run, comma separated; defaults to the configured scheme.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<Scheme>,
    #[arg(long, default_value_t = 10_000)]
    frames: usize,
    #[arg(long, default_value_t = 1)]
    seeds: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Request probability, sparsity level and measurement counts per alpha.
    Design {
        #[command(flatten)]
        common: Common,
        /// Comma-separated request probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.04,0.06,0.08,0.1,0.12,0.14")]
        alphas: Vec<f64>,
        /// Overrides `n_users` from the configuration.
        #[arg(long)]
        n_users: Option<usize>,
        /// Monte Carlo trials per measurement count.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Per-element recovery failure target.
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
    },
    /// One configuration, summarized per seed.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Vary one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// arrival_rate, frame_duration, request_prob, n_slots or bandwidth.
        #[arg(long)]
        param: SweepParameter,
        /// Comma-separated, strictly monotone.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
}

fn load(common: &Common) -> Result<SystemConfig> {
    match &common.config {
        Some(path) => parse_config(path),
        None => Ok(SystemConfig::default()),
    }
}

fn output(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Design { common, alphas, n_users, trials, target } => {
            let cfg = load(&common)?;
            let spec = DesignTableSpec {
                ratio_c: cfg.ratio_c,
                target_fail: target,
                trials,
                constellation_max: cfg.buffer_capacity,
                seed: cfg.seed,
                ..DesignTableSpec::new(n_users.unwrap_or(cfg.n_users), cfg.epsilon)
            };
            let rows = emit_design_table(&spec, &alphas)?;
            let mut out = output(&common)?;
            write_design_table(&rows, common.format, &mut out)?;
            out.flush()?;
        }
        Command::Simulate { common, run } => {
            let cfg = load(&common)?;
            let table = run_simulation(&cfg, &run.scheme, run.frames, run.seeds)?;
            let mut out = output(&common)?;
            table.write(common.format, &mut out)?;
            out.flush()?;
        }
        Command::Sweep { common, run, param, values } => {
            let spec = SweepSpec {
                parameter: param,
                values,
                base: load(&common)?,
                schemes: run.scheme,
                n_frames: run.frames,
                n_seeds: run.seeds,
            };
            let table = run_sweep(&spec)?;
            let mut out = output(&common)?;
            table.write(common.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("csmac: {e}");
            ExitCode::FAILURE
        }
    }
}
