use num_complex::Complex64;

use super::ChannelProfile;
use crate::error::{Error, Result};
use crate::modem::{SampleStream, Stage};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TdlReport {
    /// Tap delays after rounding, in samples.
    pub delays_samples: Vec<usize>,
    /// Largest |rounded - requested| delay, seconds.
    pub max_rounding_s: f64,
}

/// `y[n] = sum_i g_i exp(j phi_i) x[n - d_i]`, with each delay rounded to
/// the nearest sample. The output keeps the input length.
pub fn tdl_apply(stream: SampleStream, profile: &ChannelProfile) -> Result<(SampleStream, TdlReport)> {
    if profile.taps.is_empty() {
        return Err(Error::invalid("channel profile has no taps"));
    }
    let fs = stream.sample_rate_hz;
    let mut report = TdlReport::default();
    let mut taps = Vec::with_capacity(profile.taps.len());
    for tap in &profile.taps {
        if tap.delay_s.is_nan() || tap.delay_s < 0.0 {
            return Err(Error::invalid("tap delays must be nonnegative"));
        }
        let d = (tap.delay_s * fs).round() as usize;
        report.max_rounding_s = report.max_rounding_s.max((d as f64 / fs - tap.delay_s).abs());
        report.delays_samples.push(d);
        taps.push((d, Complex64::from_polar(tap.gain, tap.phase_rad)));
    }
    let x = &stream.samples;
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for &(d, g) in &taps {
        for n in d..x.len() {
            y[n] += g * x[n - d];
        }
    }
    Ok((stream.advance(y, Stage::Channel), report))
}
