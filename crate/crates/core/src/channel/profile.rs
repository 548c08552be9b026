//! Tapped-delay-line channel profiles.
//!
//! Text schema (TOML):
//!
//! ```toml
//! phase_noise_rate = 0.0   # optional, rad^2 per sample
//!
//! [[taps]]
//! delay_ns = 0.0
//! gain_db = 0.0
//! phase_deg = 0.0
//!
//! [[taps]]
//! delay_ns = 2.2857
//! gain_db = -3.0
//! phase_deg = 0.0
//! ```
//!
//! The built-in multipath presets are illustrative, not measured.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::SYMBOL_RATE_HZ;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    /// Linear amplitude gain.
    pub gain: f64,
    pub phase_rad: f64,
}

impl Tap {
    pub fn new(delay_s: f64, gain: f64, phase_rad: f64) -> Self {
        Tap {
            delay_s,
            gain,
            phase_rad,
        }
    }

    pub fn from_db(delay_ns: f64, gain_db: f64, phase_deg: f64) -> Self {
        Tap {
            delay_s: delay_ns * 1e-9,
            gain: 10f64.powf(gain_db / 20.0),
            phase_rad: phase_deg.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    pub taps: Vec<Tap>,
    /// Wiener phase-noise increment variance per sample; 0 disables it.
    pub phase_noise_rate: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileFile {
    #[serde(default)]
    phase_noise_rate: f64,
    taps: Vec<TapFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TapFile {
    delay_ns: f64,
    gain_db: f64,
    #[serde(default)]
    phase_deg: f64,
}

impl ChannelProfile {
    /// Validates: at least one tap, finite values, nonnegative delays, and
    /// the first tap is the line-of-sight reference at delay 0.
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        let p = ChannelProfile {
            taps,
            phase_noise_rate: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .taps
            .first()
            .ok_or_else(|| Error::invalid("channel profile needs at least one tap"))?;
        if first.delay_s != 0.0 {
            return Err(Error::invalid("first tap must be the LOS reference at delay 0"));
        }
        for t in &self.taps {
            if !(t.delay_s.is_finite() && t.gain.is_finite() && t.phase_rad.is_finite()) {
                return Err(Error::invalid("tap values must be finite"));
            }
            if t.delay_s < 0.0 {
                return Err(Error::invalid("tap delays must be nonnegative"));
            }
        }
        if !(self.phase_noise_rate >= 0.0 && self.phase_noise_rate.is_finite()) {
            return Err(Error::invalid("phase noise rate must be finite and nonnegative"));
        }
        Ok(())
    }

    pub fn los_only() -> Self {
        ChannelProfile {
            taps: vec![Tap::new(0.0, 1.0, 0.0)],
            phase_noise_rate: 0.0,
        }
    }

    /// LOS plus one echo.
    pub fn echo(delay_s: f64, gain_db: f64) -> Self {
        ChannelProfile {
            taps: vec![Tap::new(0.0, 1.0, 0.0), Tap::from_db(delay_s * 1e9, gain_db, 0.0)],
            phase_noise_rate: 0.0,
        }
    }

    /// Echo at -3 dB, two symbols late.
    pub fn two_ray() -> Self {
        Self::echo(2.0 / SYMBOL_RATE_HZ, -3.0)
    }

    /// Four exponentially decaying rays.
    pub fn corridor_like() -> Self {
        ChannelProfile {
            taps: vec![
                Tap::from_db(0.0, 0.0, 0.0),
                Tap::from_db(0.8, -7.0, 120.0),
                Tap::from_db(1.9, -12.0, 250.0),
                Tap::from_db(3.1, -18.0, 40.0),
            ],
            phase_noise_rate: 0.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "los-only" => Some(Self::los_only()),
            "two-ray" => Some(Self::two_ray()),
            "corridor-like" => Some(Self::corridor_like()),
            _ => None,
        }
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["los-only", "two-ray", "corridor-like"]
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ProfileFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("channel profile: {e}")))?;
        let p = ChannelProfile {
            taps: file
                .taps
                .iter()
                .map(|t| Tap::from_db(t.delay_ns, t.gain_db, t.phase_deg))
                .collect(),
            phase_noise_rate: file.phase_noise_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ProfileFile {
            phase_noise_rate: self.phase_noise_rate,
            taps: self
                .taps
                .iter()
                .map(|t| TapFile {
                    delay_ns: t.delay_s * 1e9,
                    gain_db: 20.0 * t.gain.log10(),
                    phase_deg: t.phase_rad.to_degrees(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("profile serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// A preset name or a path to a profile file.
    pub fn resolve(spec: &str) -> Result<Self> {
        match Self::preset(spec) {
            Some(p) => Ok(p),
            None => Self::load(Path::new(spec)),
        }
    }
}
