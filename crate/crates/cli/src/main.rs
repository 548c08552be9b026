//! Command-line front end for the millimeter-wave PHY simulator.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mmw_phy::harness::{run_experiment, Coding, ExperimentConfig, Mode, Receiver};

#[derive(Parser, Debug)]
#[command(name = "mmw-sim", version, about = "60 GHz DBPSK link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Antenna preset on both ends: horn or patch.
    #[arg(long, global = true)]
    antennas: Option<String>,
    /// Channel preset (los-only, two-ray, corridor-like) or a channel TOML file.
    #[arg(long, global = true)]
    channel: Option<String>,
    /// RS(255,239) decoding: on or off.
    #[arg(long, global = true)]
    coding: Option<Coding>,
    #[arg(long, global = true)]
    min_errors: Option<u64>,
    #[arg(long, global = true)]
    max_bits: Option<u64>,
    /// matched or hardware.
    #[arg(long, global = true)]
    receiver: Option<Receiver>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BER against Eb/N0.
    BerEbn0 {
        /// Comma-separated Eb/N0 points, dB.
        #[arg(long, value_delimiter = ',')]
        ebn0: Option<Vec<f64>>,
    },
    /// BER against link distance through the link budget.
    BerDistance {
        /// Comma-separated distances, meters.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
    },
    /// Eye diagram traces of the demodulated signal.
    Eye {
        #[arg(long)]
        ebn0: Option<f64>,
        #[arg(long)]
        traces: Option<usize>,
    },
    /// Frequency and impulse response of the filter and channel cascade.
    Response,
    /// Frames through the full chain, one CSV row per delivered frame.
    FrameRoundtrip {
        #[arg(long)]
        frames: Option<usize>,
        #[arg(long)]
        ebn0: Option<f64>,
    },
    /// Dual-clock FIFO occupancy summaries.
    FifoSim {
        /// Comma-separated capacities, in frames.
        #[arg(long, value_delimiter = ',')]
        capacities: Option<Vec<u64>>,
        #[arg(long)]
        events: Option<usize>,
    },
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::BerEbn0 { .. } => Mode::BerEbn0,
            Command::BerDistance { .. } => Mode::BerDistance,
            Command::Eye { .. } => Mode::Eye,
            Command::Response => Mode::Response,
            Command::FrameRoundtrip { .. } => Mode::FrameRoundtrip,
            Command::FifoSim { .. } => Mode::FifoSim,
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn build_config(cli: Cli) -> Result<(ExperimentConfig, Mode)> {
    let mode = cli.command.mode();
    let mut cfg = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = cfg.mode {
        if m != mode {
            bail!("config file is for mode {m}, but the {mode} subcommand was given");
        }
    }
    cfg.mode = Some(mode);
    let c = cli.common;
    set(&mut cfg.seed, c.seed);
    if c.out.is_some() {
        cfg.out = c.out;
    }
    set(&mut cfg.antennas, c.antennas);
    set(&mut cfg.channel, c.channel);
    set(&mut cfg.coding, c.coding);
    set(&mut cfg.min_errors, c.min_errors);
    set(&mut cfg.max_bits, c.max_bits);
    if c.receiver.is_some() {
        cfg.receiver = c.receiver;
    }
    match cli.command {
        Command::BerEbn0 { ebn0 } => set(&mut cfg.ebn0_db, ebn0),
        Command::BerDistance { distances } => set(&mut cfg.distances_m, distances),
        Command::Eye { ebn0, traces } => {
            set(&mut cfg.eye_ebn0_db, ebn0);
            set(&mut cfg.eye_traces, traces);
        }
        Command::Response => {}
        Command::FrameRoundtrip { frames, ebn0 } => {
            set(&mut cfg.roundtrip_frames, frames);
            set(&mut cfg.roundtrip_ebn0_db, ebn0);
        }
        Command::FifoSim { capacities, events } => {
            set(&mut cfg.fifo_capacities_frames, capacities);
            set(&mut cfg.fifo_events, events);
        }
    }
    cfg.validate()?;
    Ok((cfg, mode))
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, mode) = build_config(cli)?;
    let csv = run_experiment(&cfg, mode)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
