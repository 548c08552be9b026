//! Experiment configuration, loadable from TOML. Every CLI flag has a key
//! of the same name here (dashes become underscores).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{AntennaModel, ChannelProfile, LinkBudget};
use crate::error::{Error, Result};
use crate::modem::ModemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    BerEbn0,
    BerDistance,
    Eye,
    Response,
    FrameRoundtrip,
    FifoSim,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::BerEbn0 => "ber-ebn0",
            Mode::BerDistance => "ber-distance",
            Mode::Eye => "eye",
            Mode::Response => "response",
            Mode::FrameRoundtrip => "frame-roundtrip",
            Mode::FifoSim => "fifo-sim",
        }
    }

    fn is_ber(self) -> bool {
        matches!(self, Mode::BerEbn0 | Mode::BerDistance | Mode::FrameRoundtrip)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coding {
    On,
    #[default]
    Off,
}

impl Coding {
    pub fn enabled(self) -> bool {
        self == Coding::On
    }
}

impl FromStr for Coding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(Coding::On),
            "off" => Ok(Coding::Off),
            _ => Err(Error::Config(format!("coding must be on or off, got {s:?}"))),
        }
    }
}

/// Receiver filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Receiver {
    /// Symbol-integrating receiver on NRZ pulses.
    Matched,
    /// Band-limited transmitter, IF filter and 1 GHz post-detection low-pass.
    Hardware,
}

impl Receiver {
    pub fn modem(self) -> ModemConfig {
        match self {
            Receiver::Matched => ModemConfig::matched(),
            Receiver::Hardware => ModemConfig::default(),
        }
    }
}

impl FromStr for Receiver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" => Ok(Receiver::Matched),
            "hardware" => Ok(Receiver::Hardware),
            _ => Err(Error::Config(format!("receiver must be matched or hardware, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Antenna preset used on both ends.
    pub antennas: String,
    /// Channel preset name or path to a channel TOML file.
    pub channel: String,
    pub coding: Coding,
    pub min_errors: u64,
    pub max_bits: u64,
    /// `None` picks matched for BER modes and hardware for eye/response.
    pub receiver: Option<Receiver>,
    pub ebn0_db: Vec<f64>,
    pub distances_m: Vec<f64>,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub implementation_loss_db: f64,
    /// Frames per independently seeded burst.
    pub frames_per_shard: usize,
    /// Bursts run between stop-rule checks.
    pub shards_per_batch: usize,
    pub eye_ebn0_db: f64,
    pub eye_traces: usize,
    pub roundtrip_frames: usize,
    pub roundtrip_ebn0_db: f64,
    pub fifo_capacities_frames: Vec<u64>,
    pub fifo_events: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let link = LinkBudget::symmetric(AntennaModel::horn());
        ExperimentConfig {
            mode: None,
            seed: 1,
            out: None,
            antennas: "horn".into(),
            channel: "los-only".into(),
            coding: Coding::Off,
            min_errors: 100,
            max_bits: 10_000_000,
            receiver: None,
            ebn0_db: vec![4.0, 6.0, 8.0, 10.0, 12.0],
            distances_m: vec![1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0],
            tx_power_dbm: link.tx_power_dbm,
            noise_figure_db: link.noise_figure_db,
            implementation_loss_db: link.implementation_loss_db,
            frames_per_shard: 64,
            shards_per_batch: 4,
            eye_ebn0_db: 20.0,
            eye_traces: 2000,
            roundtrip_frames: 100,
            roundtrip_ebn0_db: f64::INFINITY,
            fifo_capacities_frames: vec![2, 4, 8],
            fifo_events: 1_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.min_errors == 0 {
            return bad("min_errors must be positive".into());
        }
        if self.max_bits == 0 {
            return bad("max_bits must be positive".into());
        }
        if self.frames_per_shard < 2 {
            return bad("frames_per_shard must be at least 2 for sync acquisition".into());
        }
        if self.shards_per_batch == 0 {
            return bad("shards_per_batch must be positive".into());
        }
        if self.ebn0_db.iter().any(|v| v.is_nan()) || self.eye_ebn0_db.is_nan() || self.roundtrip_ebn0_db.is_nan() {
            return bad("Eb/N0 values must not be NaN".into());
        }
        if self.distances_m.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return bad("distances must be positive".into());
        }
        if self.eye_traces == 0 || self.roundtrip_frames < 2 || self.fifo_events == 0 {
            return bad("eye_traces, fifo_events must be positive and roundtrip_frames at least 2".into());
        }
        if self.fifo_capacities_frames.contains(&0) {
            return bad("FIFO capacities must be positive".into());
        }
        self.antenna()?;
        Ok(())
    }

    pub fn antenna(&self) -> Result<AntennaModel> {
        AntennaModel::preset(&self.antennas)
            .ok_or_else(|| Error::Config(format!("unknown antenna preset {:?}", self.antennas)))
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        let mut link = LinkBudget::symmetric(self.antenna()?);
        link.tx_power_dbm = self.tx_power_dbm;
        link.noise_figure_db = self.noise_figure_db;
        link.implementation_loss_db = self.implementation_loss_db;
        link.validate()?;
        Ok(link)
    }

    pub fn channel_profile(&self) -> Result<ChannelProfile> {
        ChannelProfile::resolve(&self.channel)
    }

    /// Receiver for `mode`, applying the per-mode default.
    pub fn receiver_for(&self, mode: Mode) -> Receiver {
        self.receiver.unwrap_or(if mode.is_ber() {
            Receiver::Matched
        } else {
            Receiver::Hardware
        })
    }
}
