//! Command-line front end for the device sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;
use ssl_channel::harness::{holdout_path, run_experiment, write_results, ExperimentConfig, Method};
use ssl_channel::par::Execution;

#[derive(Parser)]
#[command(
    name = "ssl-channel-lab",
    version,
    about = "Semi-supervised decoder comparison on simulated 16-QAM devices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a device sweep and write the SER table.
    Run(Box<RunArgs>),
    /// Print the default configuration file.
    DefaultConfig,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    /// Block lengths, pilots included.
    #[arg(long = "n", value_delimiter = ',')]
    n_symbols: Option<Vec<usize>>,
    #[arg(long)]
    n_pilots: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Devices per cell.
    #[arg(long)]
    devices: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also evaluate on a fresh block per device, written next to the
    /// main output as `<stem>_holdout.csv`.
    #[arg(long)]
    holdout: bool,
    /// Training updates per device.
    #[arg(long)]
    updates: Option<usize>,
    /// Run devices one after another.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn config(self) -> anyhow::Result<(ExperimentConfig, Execution)> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(snr_db, n_symbols, n_pilots, methods, devices, seed, out);
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if self.holdout {
            cfg.holdout = true;
        }
        if let Some(u) = self.updates {
            cfg.train.updates = u;
        }
        cfg.validate()?;
        let exec = if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        };
        Ok((cfg, exec))
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let (cfg, exec) = args.config()?;
    let out = run_experiment(&cfg, exec)?;
    write_results(&out.records, &cfg.out)
        .with_context(|| format!("writing {}", cfg.out.display()))?;
    info!("wrote {}", cfg.out.display());
    if cfg.holdout {
        let path = holdout_path(&cfg.out);
        write_results(&out.holdout, &path)?;
        info!("wrote {}", path.display());
    }
    for r in &out.records {
        println!(
            "{:<11} {:>5} dB  N={:<5} ser={:.5} ± {:.5}  ({} devices)",
            r.method.to_string(),
            r.snr_db,
            r.n_symbols,
            r.ser,
            r.stderr,
            r.devices
        );
    }
    if out.total_excluded() > 0 {
        eprintln!(
            "warning: {} diverged devices were excluded",
            out.total_excluded()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(*args),
        Command::DefaultConfig => ExperimentConfig::default()
            .to_toml()
            .map(|t| print!("{t}"))
            .map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
