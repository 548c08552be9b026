//! Eye diagrams of the demodulated soft signal.
//!
//! Each trace spans two symbols starting at a mid-symbol instant, so the
//! decision instant of the following symbol sits at index
//! `samples_per_symbol`. Consecutive traces advance by one symbol.
//!
//! Heights are normalized by the mean absolute soft value at the decision
//! instant, so a noiseless unfiltered stream (all values +/-1) has height 2.

use std::io::Write;
use std::path::Path;

use super::{ModemConfig, SoftStream};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EyeRecord {
    pub traces: Vec<Vec<f64>>,
    pub samples_per_symbol: usize,
    /// Inner opening at the decision instant: lowest upper-rail value minus
    /// highest lower-rail value, normalized.
    pub height: f64,
    /// Statistical opening, `(mu_up - 3 sigma_up) - (mu_lo + 3 sigma_lo)`, normalized.
    pub height_3sigma: f64,
    /// Contiguous open span around the decision instant, in symbol periods.
    pub width_ui: f64,
}

pub fn eye_capture(soft: &SoftStream, cfg: &ModemConfig, n_traces: usize) -> Result<EyeRecord> {
    let sps = soft.samples_per_symbol;
    let len = 2 * sps + 1;
    let first = (sps / 2) as isize + cfg.timing_offset;
    let needed = first + ((n_traces + 1) * sps) as isize + 1;
    if n_traces == 0 || first < 0 || (soft.values.len() as isize) < needed {
        return Err(Error::invalid(format!(
            "{} soft samples cannot hold {n_traces} eye traces ({needed} needed)",
            soft.values.len()
        )));
    }
    let traces: Vec<Vec<f64>> = (0..n_traces)
        .map(|t| {
            let start = first as usize + t * sps;
            soft.values[start..start + len].to_vec()
        })
        .collect();

    let center = sps;
    let decisions: Vec<f64> = traces.iter().map(|t| t[center]).collect();
    let scale = decisions.iter().map(|v| v.abs()).sum::<f64>() / decisions.len() as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };

    // rails are split by the slicer decision at the center instant
    let upper = |t: &Vec<f64>| t[center] >= 0.0;
    let opening = |i: usize| {
        let up = traces.iter().filter(|t| upper(t)).map(|t| t[i]).fold(f64::INFINITY, f64::min);
        let lo = traces
            .iter()
            .filter(|t| !upper(t))
            .map(|t| t[i])
            .fold(f64::NEG_INFINITY, f64::max);
        match (up.is_finite(), lo.is_finite()) {
            (true, true) => up - lo,
            (true, false) => 2.0 * up,
            (false, true) => -2.0 * lo,
            (false, false) => 0.0,
        }
    };

    let height = opening(center) / scale;

    let stats = |vals: Vec<f64>| {
        let n = vals.len() as f64;
        if vals.is_empty() {
            return None;
        }
        let mu = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
        Some((mu, var.sqrt()))
    };
    let up = stats(decisions.iter().copied().filter(|v| *v >= 0.0).collect());
    let lo = stats(decisions.iter().copied().filter(|v| *v < 0.0).collect());
    let height_3sigma = match (up, lo) {
        (Some((mu, s)), Some((ml, sl))) => ((mu - 3.0 * s) - (ml + 3.0 * sl)) / scale,
        (Some((mu, s)), None) => 2.0 * (mu - 3.0 * s) / scale,
        (None, Some((ml, sl))) => -2.0 * (ml + 3.0 * sl) / scale,
        (None, None) => 0.0,
    };

    let mut open = 0usize;
    if opening(center) > 0.0 {
        open = 1;
        let mut i = center;
        while i > 0 && opening(i - 1) > 0.0 {
            open += 1;
            i -= 1;
        }
        let mut i = center;
        while i + 1 < len && opening(i + 1) > 0.0 {
            open += 1;
            i += 1;
        }
    }

    Ok(EyeRecord {
        traces,
        samples_per_symbol: sps,
        height,
        height_3sigma,
        width_ui: open as f64 / sps as f64,
    })
}

/// CSV with columns `trace_id,sample_index,value`.
pub fn write_eye_csv<W: Write>(record: &EyeRecord, mut w: W) -> std::io::Result<()> {
    writeln!(w, "trace_id,sample_index,value")?;
    for (id, trace) in record.traces.iter().enumerate() {
        for (i, v) in trace.iter().enumerate() {
            writeln!(w, "{id},{i},{v:.9e}")?;
        }
    }
    Ok(())
}

impl EyeRecord {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write_eye_csv(self, std::io::BufWriter::new(f)).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modem::{dbpsk_modulate, delay_line_demod, differential_burst, rx_front};

    fn soft_for(cfg: &ModemConfig, n: usize) -> SoftStream {
        let bits: Vec<u8> = (0..n).map(|i| ((i * 11 + 5) % 7 < 3) as u8).collect();
        let tx = dbpsk_modulate(&differential_burst(&bits, 0), cfg).unwrap();
        delay_line_demod(&rx_front(tx, cfg).unwrap(), cfg).unwrap()
    }

    #[test]
    fn unfiltered_eye_is_rail_to_rail() {
        let cfg = ModemConfig::unfiltered();
        let eye = eye_capture(&soft_for(&cfg, 300), &cfg, 200).unwrap();
        assert!((eye.height - 2.0).abs() < 1e-12);
        assert!((eye.height_3sigma - 2.0).abs() < 1e-12);
        assert_eq!(eye.traces.len(), 200);
        assert_eq!(eye.traces[0].len(), 17);
    }

    #[test]
    fn filtered_eye_is_open_but_smaller() {
        let cfg = ModemConfig::default();
        let eye = eye_capture(&soft_for(&cfg, 600), &cfg, 500).unwrap();
        assert!(eye.height > 0.5 && eye.height < 2.0, "{}", eye.height);
        assert!(eye.width_ui > 0.3 && eye.width_ui <= 1.0, "{}", eye.width_ui);
    }

    #[test]
    fn too_short_is_rejected() {
        let cfg = ModemConfig::unfiltered();
        assert!(eye_capture(&soft_for(&cfg, 10), &cfg, 50).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = ModemConfig::unfiltered();
        let eye = eye_capture(&soft_for(&cfg, 10), &cfg, 2).unwrap();
        let mut buf = Vec::new();
        write_eye_csv(&eye, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "trace_id,sample_index,value");
        assert_eq!(lines.len(), 1 + 2 * 17);
        assert!(lines[1].starts_with("0,0,"));
    }
}
