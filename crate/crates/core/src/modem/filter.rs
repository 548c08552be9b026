//! Linear-phase FIR low-pass filters (Hamming-windowed sinc).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric FIR filter applied with its group delay removed, so output
/// sample `n` lines up with input sample `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fir {
    taps: Vec<f64>,
}

impl Fir {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() || taps.len().is_multiple_of(2) {
            return Err(Error::invalid("FIR length must be odd and nonzero"));
        }
        Ok(Fir { taps })
    }

    /// Low-pass whose magnitude is exactly -3 dB at `cutoff_hz`.
    ///
    /// The windowed-sinc corner is searched by bisection until the
    /// realized response crosses 1/sqrt(2) at the requested frequency.
    pub fn lowpass(cutoff_hz: f64, sample_rate_hz: f64, n_taps: usize) -> Result<Self> {
        let nyquist = sample_rate_hz / 2.0;
        if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
            return Err(Error::invalid(format!(
                "cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
            )));
        }
        if n_taps < 3 || n_taps.is_multiple_of(2) {
            return Err(Error::invalid("FIR length must be odd and at least 3"));
        }
        let target = std::f64::consts::FRAC_1_SQRT_2;
        let (mut lo, mut hi) = (cutoff_hz * 0.5, (cutoff_hz * 2.0).min(nyquist * 0.999));
        let mut best = windowed_sinc(cutoff_hz, sample_rate_hz, n_taps);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            best = windowed_sinc(mid, sample_rate_hz, n_taps);
            if best.magnitude_at(cutoff_hz, sample_rate_hz) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(best)
    }

    pub fn scaled(&self, gain: f64) -> Fir {
        Fir {
            taps: self.taps.iter().map(|t| t * gain).collect(),
        }
    }

    /// Expected output power for i.i.d. equiprobable +/-1 NRZ input with
    /// `sps` samples per symbol, averaged over the sample phase.
    pub fn nrz_power(&self, sps: usize) -> f64 {
        let n = self.taps.len();
        let mut total = 0.0;
        for phase in 0..sps {
            // taps grouped by the symbol they multiply
            let mut groups = std::collections::BTreeMap::<isize, f64>::new();
            for (k, &h) in self.taps.iter().enumerate() {
                let sample = phase as isize - k as isize;
                *groups.entry(sample.div_euclid(sps as isize)).or_default() += h;
            }
            total += groups.values().map(|g| g * g).sum::<f64>();
        }
        debug_assert!(n > 0);
        total / sps as f64
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn group_delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    pub fn response_at(&self, freq_hz: f64, sample_rate_hz: f64) -> Complex64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        self.taps
            .iter()
            .enumerate()
            .map(|(k, &h)| h * Complex64::from_polar(1.0, -w * k as f64))
            .sum()
    }

    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        self.response_at(freq_hz, sample_rate_hz).norm()
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        convolve_same(&self.taps, self.group_delay(), x, Complex64::new(0.0, 0.0))
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        convolve_same(&self.taps, self.group_delay(), x, 0.0)
    }
}

/// `y[i] = sum_k h[k] x[i + d - k]`, zero outside `x`.
fn convolve_same<T>(h: &[f64], d: usize, x: &[T], zero: T) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let n = x.len();
    let m = h.len();
    let tap = |i: usize| {
        let mut acc = zero;
        for (k, &hk) in h.iter().enumerate() {
            if let Some(j) = (i + d).checked_sub(k) {
                if j < n {
                    acc = acc + x[j] * hk;
                }
            }
        }
        acc
    };
    // interior: every x index i + d - k in range for all k
    let lo = (m - 1).saturating_sub(d).min(n);
    let hi = n.saturating_sub(d).max(lo);
    let mut y = Vec::with_capacity(n);
    y.extend((0..lo).map(tap));
    y.extend((lo..hi).map(|i| {
        let window = &x[i + d + 1 - m..=i + d];
        let mut acc = zero;
        for (xv, &hk) in window.iter().rev().zip(h) {
            acc = acc + *xv * hk;
        }
        acc
    }));
    y.extend((hi..n).map(tap));
    y
}

fn windowed_sinc(corner_hz: f64, sample_rate_hz: f64, n_taps: usize) -> Fir {
    let fc = corner_hz / sample_rate_hz;
    let m = (n_taps - 1) as f64;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|k| {
            let t = k as f64 - m / 2.0;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * k as f64 / m).cos();
            sinc * window
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= dc;
    }
    Fir { taps }
}
