//! Frequency and impulse response of the linear Tx filter -> channel -> Rx
//! filter cascade, measured by pushing a unit impulse through it.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::ChannelProfile;
use crate::error::{Error, Result};
use crate::modem::{Fir, ModemConfig};

#[derive(Debug, Clone)]
pub struct ProbeChain {
    pub sample_rate_hz: f64,
    pub tx: Option<Fir>,
    pub channel: ChannelProfile,
    pub rx: Option<Fir>,
    pub fft_len: usize,
}

impl ProbeChain {
    pub fn identity(sample_rate_hz: f64) -> Self {
        ProbeChain {
            sample_rate_hz,
            tx: None,
            channel: ChannelProfile::los_only(),
            rx: None,
            fft_len: 4096,
        }
    }

    /// The modem's transmit band limit and IF filter around `channel`.
    pub fn from_modem(cfg: &ModemConfig, channel: ChannelProfile) -> Result<Self> {
        cfg.validate()?;
        Ok(ProbeChain {
            sample_rate_hz: cfg.sample_rate_hz(),
            tx: cfg.tx_filter()?,
            channel,
            rx: cfg.rx_band_filter()?,
            fft_len: 4096,
        })
    }

    /// Total FIR group delay, samples.
    fn filter_delay(&self) -> usize {
        self.tx.iter().chain(&self.rx).map(|f| f.group_delay()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    /// Ascending, from -fs/2 to just under fs/2.
    pub freqs_hz: Vec<f64>,
    pub magnitude_db: Vec<f64>,
    /// Phase with the filters' bulk delay removed.
    pub phase_rad: Vec<f64>,
    /// Time axis of the impulse response; 0 is the LOS ray after filter delay.
    pub times_s: Vec<f64>,
    pub impulse: Vec<Complex64>,
    /// Two-sided -3 dB width relative to the DC gain (passband equivalent).
    pub bandwidth_3db_hz: f64,
}

pub fn probe_response(chain: &ProbeChain) -> Result<Response> {
    chain.channel.validate()?;
    let fs = chain.sample_rate_hz;
    let mut h = vec![Complex64::new(1.0, 0.0)];
    if let Some(tx) = &chain.tx {
        h = convolve(&h, tx.taps());
    }
    let max_delay = chain
        .channel
        .taps
        .iter()
        .map(|t| (t.delay_s * fs).round() as usize)
        .max()
        .unwrap_or(0);
    let mut ch = vec![Complex64::new(0.0, 0.0); max_delay + 1];
    for t in &chain.channel.taps {
        ch[(t.delay_s * fs).round() as usize] += Complex64::from_polar(t.gain, t.phase_rad);
    }
    h = convolve_complex(&h, &ch);
    if let Some(rx) = &chain.rx {
        h = convolve(&h, rx.taps());
    }

    let n = chain.fft_len.max(h.len()).next_power_of_two();
    if h.len() > n {
        return Err(Error::invalid("impulse response longer than FFT"));
    }
    let delay = chain.filter_delay();
    let mut buf = h.clone();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // reorder to ascending frequency, removing the bulk filter delay from phase
    let mut freqs = Vec::with_capacity(n);
    let mut mags = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + n / 2) % n;
        let f = (k as f64 - if k >= n / 2 { n as f64 } else { 0.0 }) * fs / n as f64;
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let v = buf[k] * Complex64::from_polar(1.0, w * delay as f64);
        freqs.push(f);
        mags.push(20.0 * v.norm().max(1e-300).log10());
        phases.push(v.arg());
    }

    let bandwidth = bandwidth_3db(&freqs, &mags);
    let times = (0..h.len())
        .map(|i| (i as f64 - delay as f64) / fs)
        .collect();
    Ok(Response {
        freqs_hz: freqs,
        magnitude_db: mags,
        phase_rad: phases,
        times_s: times,
        impulse: h,
        bandwidth_3db_hz: bandwidth,
    })
}

fn convolve(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let taps: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    convolve_complex(x, &taps)
}

fn convolve_complex(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Walks outward from DC to the first -3 dB crossing on each side,
/// interpolating linearly in dB. Returns the full span between them, or
/// the whole band when the response never drops 3 dB.
fn bandwidth_3db(freqs: &[f64], mags_db: &[f64]) -> f64 {
    let n = freqs.len();
    let dc = n / 2;
    let level = mags_db[dc] - 10.0 * 2f64.log10();
    let crossing = |step: isize| -> f64 {
        let mut i = dc as isize;
        loop {
            let next = i + step;
            if next < 0 || next >= n as isize {
                return freqs[i as usize];
            }
            let (a, b) = (mags_db[i as usize], mags_db[next as usize]);
            if b < level {
                let frac = (a - level) / (a - b);
                let (fa, fb) = (freqs[i as usize], freqs[next as usize]);
                return fa + frac * (fb - fa);
            }
            i = next;
        }
    };
    crossing(1) - crossing(-1)
}

/// CSV with columns `bin,freq_hz,magnitude_db,phase_rad,time_s,impulse_re,impulse_im`.
/// Row `i` holds frequency bin `i` and impulse sample `i`; whichever series
/// is shorter leaves its columns empty.
pub fn write_response_csv<W: Write>(resp: &Response, mut w: W) -> std::io::Result<()> {
    writeln!(w, "bin,freq_hz,magnitude_db,phase_rad,time_s,impulse_re,impulse_im")?;
    for i in 0..resp.freqs_hz.len().max(resp.impulse.len()) {
        write!(w, "{i}")?;
        match resp.freqs_hz.get(i) {
            Some(f) => write!(
                w,
                ",{f:.6e},{:.6e},{:.6e}",
                resp.magnitude_db[i], resp.phase_rad[i]
            )?,
            None => write!(w, ",,,")?,
        }
        match resp.impulse.get(i) {
            Some(h) => writeln!(w, ",{:.6e},{:.9e},{:.9e}", resp.times_s[i], h.re, h.im)?,
            None => writeln!(w, ",,,")?,
        }
    }
    Ok(())
}

impl Response {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_response_csv(self, std::io::BufWriter::new(f)).map_err(|e| Error::io(path, e))
    }

    /// Index of the largest impulse sample at or after `from_s`.
    pub fn peak_after(&self, from_s: f64) -> Option<usize> {
        (0..self.impulse.len())
            .filter(|&i| self.times_s[i] >= from_s)
            .max_by(|&a, &b| self.impulse[a].norm().total_cmp(&self.impulse[b].norm()))
    }
}
