//! Friis free-space link budget.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Thermal noise density at 290 K, dBm/Hz.
const KT_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaModel {
    pub name: String,
    pub gain_dbi: f64,
    /// Half-power beamwidth; informational only.
    pub hpbw_deg: f64,
}

impl AntennaModel {
    pub fn horn() -> Self {
        AntennaModel {
            name: "horn".into(),
            gain_dbi: 22.4,
            hpbw_deg: 12.0,
        }
    }

    pub fn patch() -> Self {
        AntennaModel {
            name: "patch".into(),
            gain_dbi: 8.0,
            hpbw_deg: 30.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "horn" => Some(Self::horn()),
            "patch" => Some(Self::patch()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_antenna: AntennaModel,
    pub rx_antenna: AntennaModel,
    pub carrier_hz: f64,
    pub noise_figure_db: f64,
    pub noise_bandwidth_hz: f64,
    pub implementation_loss_db: f64,
}

impl Default for LinkBudget {
    /// 0 dBm into horns at 60 GHz, 2 GHz noise bandwidth. The 10 dB noise
    /// figure and 5 dB implementation loss are calibration knobs.
    fn default() -> Self {
        Self::symmetric(AntennaModel::horn())
    }
}

impl LinkBudget {
    pub fn symmetric(antenna: AntennaModel) -> Self {
        LinkBudget {
            tx_power_dbm: 0.0,
            tx_antenna: antenna.clone(),
            rx_antenna: antenna,
            carrier_hz: 60e9,
            noise_figure_db: 10.0,
            noise_bandwidth_hz: 2e9,
            implementation_loss_db: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.tx_power_dbm,
            self.tx_antenna.gain_dbi,
            self.rx_antenna.gain_dbi,
            self.carrier_hz,
            self.noise_figure_db,
            self.noise_bandwidth_hz,
            self.implementation_loss_db,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("link budget values must be finite"));
        }
        if self.noise_bandwidth_hz <= 0.0 || self.carrier_hz <= 0.0 {
            return Err(Error::invalid("bandwidth and carrier must be positive"));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn noise_floor_dbm(&self) -> f64 {
        KT_DBM_PER_HZ + 10.0 * self.noise_bandwidth_hz.log10() + self.noise_figure_db
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPoint {
    pub distance_m: f64,
    pub fspl_db: f64,
    pub rx_power_dbm: f64,
    pub noise_dbm: f64,
    pub snr_db: f64,
}

impl LinkPoint {
    pub fn ebn0_db(&self, bandwidth_hz: f64, bit_rate: f64) -> f64 {
        ebn0_from_snr(self.snr_db, bandwidth_hz, bit_rate)
    }
}

/// 20 log10(4 pi d / lambda)
pub fn fspl_db(distance_m: f64, wavelength_m: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m / wavelength_m).log10()
}

/// Eb/N0 = SNR * B / Rb
pub fn ebn0_from_snr(snr_db: f64, bandwidth_hz: f64, bit_rate: f64) -> f64 {
    snr_db + 10.0 * (bandwidth_hz / bit_rate).log10()
}

pub fn friis_snr(budget: &LinkBudget, distance_m: f64) -> Result<LinkPoint> {
    budget.validate()?;
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(Error::invalid(format!("distance must be positive, got {distance_m}")));
    }
    let fspl = fspl_db(distance_m, budget.wavelength_m());
    let rx = budget.tx_power_dbm + budget.tx_antenna.gain_dbi + budget.rx_antenna.gain_dbi - fspl;
    let noise = budget.noise_floor_dbm();
    Ok(LinkPoint {
        distance_m,
        fspl_db: fspl,
        rx_power_dbm: rx,
        noise_dbm: noise,
        snr_db: rx - noise - budget.implementation_loss_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fspl_at_ten_metres() {
        let p = friis_snr(&LinkBudget::default(), 10.0).unwrap();
        let oracle = 20.0 * (4.0 * PI * 10.0 / 0.005f64).log10();
        assert!((oracle - 88.0).abs() < 0.05);
        // exact c gives lambda slightly under 5 mm
        assert!((p.fspl_db - oracle).abs() < 0.01, "{}", p.fspl_db);
    }

    #[test]
    fn six_db_per_octave() {
        let b = LinkBudget::default();
        for d in [0.5, 1.0, 3.0, 10.0] {
            let a = friis_snr(&b, d).unwrap();
            let c = friis_snr(&b, 2.0 * d).unwrap();
            assert!((c.fspl_db - a.fspl_db - 20.0 * 2f64.log10()).abs() < 1e-9);
        }
    }

    #[test]
    fn antenna_swap_costs_28_8_db() {
        let horn = friis_snr(&LinkBudget::symmetric(AntennaModel::horn()), 7.0).unwrap();
        let patch = friis_snr(&LinkBudget::symmetric(AntennaModel::patch()), 7.0).unwrap();
        assert!((horn.snr_db - patch.snr_db - 28.8).abs() < 1e-9);
    }

    #[test]
    fn snr_decreases_with_distance() {
        let b = LinkBudget::default();
        let snrs: Vec<f64> = (1..40).map(|d| friis_snr(&b, d as f64 * 0.5).unwrap().snr_db).collect();
        assert!(snrs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn bad_distance() {
        assert!(friis_snr(&LinkBudget::default(), 0.0).is_err());
        assert!(friis_snr(&LinkBudget::default(), -3.0).is_err());
    }

    #[test]
    fn noise_floor() {
        // -174 + 93.01 + 10
        assert!((LinkBudget::default().noise_floor_dbm() + 70.99).abs() < 0.01);
    }
}
