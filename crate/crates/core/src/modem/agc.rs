use super::{SampleStream, Stage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcConfig {
    pub target_power: f64,
    /// Total gain range; the gain is clamped to +/- half of it around 0 dB.
    pub dynamic_range_db: f64,
    pub block_len: usize,
}

impl Default for AgcConfig {
    fn default() -> Self {
        AgcConfig {
            target_power: 1.0,
            dynamic_range_db: 20.0,
            block_len: 4096,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgcReport {
    /// Applied power gain per block, dB.
    pub gains_db: Vec<f64>,
    /// Blocks with zero input power (gain pinned at the upper clamp).
    pub degenerate_blocks: usize,
}

/// Block-wise AGC toward `target_power`.
pub fn agc(rx: SampleStream, cfg: &AgcConfig) -> (SampleStream, AgcReport) {
    let half_range = cfg.dynamic_range_db / 2.0;
    let block = cfg.block_len.max(1);
    let mut report = AgcReport::default();
    let mut samples = rx.samples.clone();
    for chunk in samples.chunks_mut(block) {
        let power = chunk.iter().map(|s| s.norm_sqr()).sum::<f64>() / chunk.len() as f64;
        let gain_db = if power > 0.0 {
            (10.0 * (cfg.target_power / power).log10()).clamp(-half_range, half_range)
        } else {
            report.degenerate_blocks += 1;
            half_range
        };
        let amp = 10f64.powf(gain_db / 20.0);
        for s in chunk.iter_mut() {
            *s *= amp;
        }
        report.gains_db.push(gain_db);
    }
    (rx.advance(samples, Stage::Agc), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn constant(power: f64, n: usize) -> SampleStream {
        SampleStream::new(
            vec![Complex64::new(power.sqrt(), 0.0); n],
            7e9,
            Stage::RxFront,
        )
        .unwrap()
    }

    #[test]
    fn unity_at_target() {
        let (out, rep) = agc(constant(1.0, 100), &AgcConfig::default());
        assert!(rep.gains_db.iter().all(|g| g.abs() < 1e-12));
        assert!((out.mean_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn six_db_low_is_lifted() {
        let p = 10f64.powf(-0.6);
        let (out, rep) = agc(constant(p, 100), &AgcConfig::default());
        assert!((rep.gains_db[0] - 6.0).abs() < 1e-9);
        assert!((out.mean_power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thirty_db_low_is_clamped() {
        let (out, rep) = agc(constant(1e-3, 100), &AgcConfig::default());
        assert!((rep.gains_db[0] - 10.0).abs() < 1e-12);
        let level_db = 10.0 * out.mean_power().log10();
        assert!((level_db + 20.0).abs() < 1e-9);
    }

    #[test]
    fn zero_input_is_degenerate() {
        let (out, rep) = agc(constant(0.0, 10), &AgcConfig::default());
        assert_eq!(rep.degenerate_blocks, 1);
        assert_eq!(rep.gains_db, vec![10.0]);
        assert_eq!(out.mean_power(), 0.0);
        assert_eq!(out.stage, Stage::Agc);
    }
}
