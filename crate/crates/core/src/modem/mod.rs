//! Complex-baseband DBPSK transmitter and delay-line differential receiver.
//!
//! The hardware modulates a 3.5 GHz IF carrier; with exactly four carrier
//! cycles per symbol the delayed-carrier term of the delay-line mixer
//! cancels, so the baseband model below is exact. Symbol convention: bit
//! `0` is `+1`, bit `1` is `-1`.

mod agc;
mod eye;
mod filter;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use agc::{agc, AgcConfig, AgcReport};
pub use eye::{eye_capture, write_eye_csv, EyeRecord};
pub use filter::Fir;

pub const SYMBOL_RATE_HZ: f64 = 875e6;

/// Filter ahead of the delay-line mixer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RxFilter {
    Bypass,
    /// IF band-pass modeled as a low-pass of the given one-sided corner.
    BandLimit { cutoff_hz: f64 },
    /// Integrate over one symbol (matched to the rectangular pulse).
    Matched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModemConfig {
    pub symbol_rate_hz: f64,
    pub samples_per_symbol: usize,
    /// One-sided corner of the transmit band limit; `None` sends bare NRZ.
    pub tx_band_limit_hz: Option<f64>,
    pub rx_filter: RxFilter,
    /// Post-detection low-pass corner.
    pub lpf_cutoff_hz: Option<f64>,
    pub fir_taps: usize,
    /// Sampling instant offset from mid-symbol, in samples.
    pub timing_offset: isize,
}

impl Default for ModemConfig {
    /// Hardware-like chain: +/-1 GHz transmit and IF filters, 1 GHz
    /// post-detection low-pass.
    fn default() -> Self {
        ModemConfig {
            symbol_rate_hz: SYMBOL_RATE_HZ,
            samples_per_symbol: 8,
            tx_band_limit_hz: Some(1e9),
            rx_filter: RxFilter::BandLimit { cutoff_hz: 1e9 },
            lpf_cutoff_hz: Some(1e9),
            fir_taps: 63,
            timing_offset: 0,
        }
    }
}

impl ModemConfig {
    /// Optimum differentially coherent receiver: NRZ pulses, integrate over
    /// each symbol, no post-detection filter. Its AWGN bit error rate is
    /// `exp(-Eb/N0) / 2`.
    pub fn matched() -> Self {
        ModemConfig {
            tx_band_limit_hz: None,
            rx_filter: RxFilter::Matched,
            lpf_cutoff_hz: None,
            ..Default::default()
        }
    }

    /// No filtering anywhere.
    pub fn unfiltered() -> Self {
        ModemConfig {
            tx_band_limit_hz: None,
            rx_filter: RxFilter::Bypass,
            lpf_cutoff_hz: None,
            ..Default::default()
        }
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.symbol_rate_hz * self.samples_per_symbol as f64
    }

    /// Ts, also the delay-line length.
    pub fn symbol_period_s(&self) -> f64 {
        1.0 / self.symbol_rate_hz
    }

    /// Delay line length in samples.
    pub fn delay_samples(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_symbol < 4 {
            return Err(Error::invalid("samples_per_symbol must be at least 4"));
        }
        if !(self.symbol_rate_hz.is_finite() && self.symbol_rate_hz > 0.0) {
            return Err(Error::invalid("symbol rate must be positive"));
        }
        let nyquist = self.sample_rate_hz() / 2.0;
        let cutoffs = [
            self.tx_band_limit_hz,
            self.lpf_cutoff_hz,
            match self.rx_filter {
                RxFilter::BandLimit { cutoff_hz } => Some(cutoff_hz),
                _ => None,
            },
        ];
        for c in cutoffs.into_iter().flatten() {
            if !(c > 0.0 && c < nyquist) {
                return Err(Error::invalid(format!(
                    "cutoff {c} Hz outside (0, {nyquist}) Hz"
                )));
            }
        }
        if self.fir_taps < 3 || self.fir_taps.is_multiple_of(2) {
            return Err(Error::invalid("fir_taps must be odd and at least 3"));
        }
        if self.timing_offset.unsigned_abs() >= self.samples_per_symbol / 2 {
            return Err(Error::invalid("timing offset must stay inside the symbol"));
        }
        Ok(())
    }

    /// Transmit band limit, scaled so a random NRZ stream leaves it at
    /// unit mean power.
    pub fn tx_filter(&self) -> Result<Option<Fir>> {
        let Some(cutoff) = self.tx_band_limit_hz else {
            return Ok(None);
        };
        let fir = Fir::lowpass(cutoff, self.sample_rate_hz(), self.fir_taps)?;
        let gain = 1.0 / fir.nrz_power(self.samples_per_symbol).sqrt();
        Ok(Some(fir.scaled(gain)))
    }

    /// The linear part of the receive front end, when it is an FIR.
    pub fn rx_band_filter(&self) -> Result<Option<Fir>> {
        match self.rx_filter {
            RxFilter::BandLimit { cutoff_hz } => {
                Fir::lowpass(cutoff_hz, self.sample_rate_hz(), self.fir_taps).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn post_lpf(&self) -> Result<Option<Fir>> {
        self.lpf_cutoff_hz
            .map(|c| Fir::lowpass(c, self.sample_rate_hz(), self.fir_taps))
            .transpose()
    }

    /// Index of symbol `k`'s sampling instant.
    pub fn sample_index(&self, k: usize) -> isize {
        (k * self.samples_per_symbol + self.samples_per_symbol / 2) as isize + self.timing_offset
    }
}

/// Where in the chain a stream was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Modulated,
    Channel,
    RxFront,
    Agc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream {
    pub samples: Vec<Complex64>,
    pub sample_rate_hz: f64,
    pub stage: Stage,
}

impl SampleStream {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64, stage: Stage) -> Result<Self> {
        if samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::invalid("sample stream contains non-finite values"));
        }
        Ok(SampleStream {
            samples,
            sample_rate_hz,
            stage,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Replaces the samples, moving the stage tag forward.
    pub(crate) fn advance(mut self, samples: Vec<Complex64>, stage: Stage) -> Self {
        debug_assert!(stage >= self.stage, "{stage:?} after {:?}", self.stage);
        self.samples = samples;
        self.stage = stage;
        self
    }
}

/// Real demodulator output. Sample `m` corresponds to input sample
/// `m + samples_per_symbol`, so symbol `j` here is transmitted symbol `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftStream {
    pub values: Vec<f64>,
    pub samples_per_symbol: usize,
    pub sample_rate_hz: f64,
}

impl SoftStream {
    pub fn symbols(&self) -> usize {
        self.values.len() / self.samples_per_symbol
    }

    /// Little-endian f32 dump.
    pub fn to_f32_le_bytes(&self) -> Vec<u8> {
        self.values
            .iter()
            .flat_map(|&v| (v as f32).to_le_bytes())
            .collect()
    }
}

/// `d[k] = b[k] ^ d[k-1]`, with `d[-1] = init`.
pub fn diff_encode(bits: &[u8], init: u8) -> Vec<u8> {
    let mut prev = init & 1;
    bits.iter()
        .map(|&b| {
            prev ^= b & 1;
            prev
        })
        .collect()
}

/// The line bits for a burst: the reference symbol `init` followed by the
/// differentially encoded data. The receiver consumes the reference.
pub fn differential_burst(bits: &[u8], init: u8) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    out.push(init & 1);
    out.extend(diff_encode(bits, init));
    out
}

pub fn dbpsk_modulate(encoded_bits: &[u8], cfg: &ModemConfig) -> Result<SampleStream> {
    cfg.validate()?;
    let sps = cfg.samples_per_symbol;
    let mut samples = Vec::with_capacity(encoded_bits.len() * sps);
    for &b in encoded_bits {
        let level = if b & 1 == 0 { 1.0 } else { -1.0 };
        samples.extend(std::iter::repeat_n(Complex64::new(level, 0.0), sps));
    }
    if let Some(fir) = cfg.tx_filter()? {
        samples = fir.apply_complex(&samples);
    }
    SampleStream::new(samples, cfg.sample_rate_hz(), Stage::Modulated)
}

/// Receive filtering ahead of the AGC and mixer.
pub fn rx_front(rx: SampleStream, cfg: &ModemConfig) -> Result<SampleStream> {
    check_rate(&rx, cfg)?;
    let samples = match cfg.rx_filter {
        RxFilter::Bypass => return Ok(rx.advance_stage(Stage::RxFront)),
        RxFilter::BandLimit { .. } => cfg.rx_band_filter()?.unwrap().apply_complex(&rx.samples),
        RxFilter::Matched => integrate_symbol(&rx.samples, cfg.samples_per_symbol),
    };
    Ok(rx.advance(samples, Stage::RxFront))
}

impl SampleStream {
    fn advance_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }
}

// Centered moving average: output n averages [n - sps/2, n - sps/2 + sps),
// which is exactly symbol k's span when n is its mid-sample.
fn integrate_symbol(x: &[Complex64], sps: usize) -> Vec<Complex64> {
    let n = x.len();
    let half = sps / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    prefix.push(acc);
    for &s in x {
        acc += s;
        prefix.push(acc);
    }
    let scale = 1.0 / sps as f64;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + sps - half).min(n);
            (prefix[hi] - prefix[lo]) * scale
        })
        .collect()
}

fn check_rate(rx: &SampleStream, cfg: &ModemConfig) -> Result<()> {
    let expected = cfg.sample_rate_hz();
    if (rx.sample_rate_hz - expected).abs() > 1e-6 * expected {
        return Err(Error::invalid(format!(
            "stream rate {} Hz does not match modem rate {expected} Hz",
            rx.sample_rate_hz
        )));
    }
    Ok(())
}

/// Mixes the stream with itself delayed by one symbol, keeps the real part
/// and low-pass filters it. The first symbol has no reference and is dropped.
pub fn delay_line_demod(rx: &SampleStream, cfg: &ModemConfig) -> Result<SoftStream> {
    cfg.validate()?;
    check_rate(rx, cfg)?;
    let d = cfg.delay_samples();
    if rx.len() < d {
        return Err(Error::invalid(format!(
            "stream of {} samples is shorter than one symbol ({d})",
            rx.len()
        )));
    }
    let s = &rx.samples;
    let mut values: Vec<f64> = (d..s.len()).map(|n| (s[n] * s[n - d].conj()).re).collect();
    if let Some(lpf) = cfg.post_lpf()? {
        values = lpf.apply_real(&values);
    }
    Ok(SoftStream {
        values,
        samples_per_symbol: cfg.samples_per_symbol,
        sample_rate_hz: cfg.sample_rate_hz(),
    })
}

/// Mid-symbol decisions: `1` when the soft value is negative, else `0`.
pub fn slice(soft: &SoftStream, cfg: &ModemConfig) -> Vec<u8> {
    (0..soft.symbols())
        .map(|k| {
            let idx = cfg.sample_index(k).clamp(0, soft.values.len() as isize - 1) as usize;
            slice_value(soft.values[idx])
        })
        .collect()
}

#[inline]
pub fn slice_value(v: f64) -> u8 {
    (v < 0.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(bits: &[u8], cfg: &ModemConfig) -> Vec<u8> {
        let tx = dbpsk_modulate(&differential_burst(bits, 0), cfg).unwrap();
        let rx = rx_front(tx, cfg).unwrap();
        slice(&delay_line_demod(&rx, cfg).unwrap(), cfg)
    }

    #[test]
    fn diff_encode_examples() {
        assert_eq!(diff_encode(&[0; 6], 0), vec![0; 6]);
        assert_eq!(diff_encode(&[1; 6], 0), vec![1, 0, 1, 0, 1, 0]);
        assert_eq!(diff_encode(&[1, 0, 1, 1], 0), vec![1, 1, 0, 1]);
        assert!(diff_encode(&[], 1).is_empty());
    }

    #[test]
    fn diff_encode_matches_prefix_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<u8> = (0..300).map(|_| rng.random_range(0..2)).collect();
        let d = diff_encode(&bits, 1);
        for k in 0..bits.len() {
            let prefix = bits[..=k].iter().fold(1u8, |a, b| a ^ b);
            assert_eq!(d[k], prefix);
        }
    }

    #[test]
    fn modulation_levels() {
        let cfg = ModemConfig::unfiltered();
        let s = dbpsk_modulate(&[0], &cfg).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.samples.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        let s = dbpsk_modulate(&[0, 1], &cfg).unwrap();
        assert_eq!(s.samples[7].re, 1.0);
        assert_eq!(s.samples[8].re, -1.0);
    }

    #[test]
    fn band_limited_run_settles_at_filter_dc_gain() {
        let cfg = ModemConfig::default();
        let fir = cfg.tx_filter().unwrap().unwrap();
        let dc: f64 = fir.taps().iter().sum();
        // normalization lifts the level by only a few percent
        assert!(dc > 1.0 && dc < 1.1, "{dc}");
        let s = dbpsk_modulate(&[0; 20], &cfg).unwrap();
        assert!((s.samples[80].re - dc).abs() < 1e-3);
        assert!(s.samples[80].im == 0.0);
    }

    #[test]
    fn random_stream_has_unit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let bits: Vec<u8> = (0..100_000).map(|_| rng.random_range(0..2)).collect();
        let p = dbpsk_modulate(&bits, &ModemConfig::default()).unwrap().mean_power();
        assert!((p - 1.0).abs() < 0.02, "{p}");
    }

    #[test]
    fn config_validation() {
        let mut cfg = ModemConfig::default();
        cfg.samples_per_symbol = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = ModemConfig::default();
        cfg.samples_per_symbol = 4;
        assert!(cfg.validate().is_ok());
        cfg.lpf_cutoff_hz = Some(2e9);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn short_stream_is_rejected() {
        let cfg = ModemConfig::default();
        let s = SampleStream::new(vec![Complex64::new(1.0, 0.0); 3], cfg.sample_rate_hz(), Stage::Channel)
            .unwrap();
        assert!(matches!(delay_line_demod(&s, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rate_mismatch_is_rejected() {
        let cfg = ModemConfig::default();
        let s = SampleStream::new(vec![Complex64::new(1.0, 0.0); 64], 1e9, Stage::Channel).unwrap();
        assert!(delay_line_demod(&s, &cfg).is_err());
    }

    #[test]
    fn slicer_examples() {
        assert_eq!(slice_value(1.0), 0);
        assert_eq!(slice_value(-0.3), 1);
        assert_eq!(slice_value(0.0), 0);
    }

    #[test]
    fn common_phase_rotation_does_not_change_soft_output() {
        let cfg = ModemConfig::default();
        let bits: Vec<u8> = (0..200).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let tx = dbpsk_modulate(&differential_burst(&bits, 0), &cfg).unwrap();
        let rot = Complex64::from_polar(1.0, 1.234);
        let rotated = SampleStream::new(
            tx.samples.iter().map(|s| s * rot).collect(),
            tx.sample_rate_hz,
            Stage::Channel,
        )
        .unwrap();
        let a = delay_line_demod(&rx_front(tx, &cfg).unwrap(), &cfg).unwrap();
        let b = delay_line_demod(&rx_front(rotated, &cfg).unwrap(), &cfg).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn frequency_offset_scales_by_cosine() {
        let cfg = ModemConfig {
            lpf_cutoff_hz: Some(1e9),
            ..ModemConfig::unfiltered()
        };
        let bits: Vec<u8> = (0..300).map(|i| ((i * 13 + 1) % 7 < 3) as u8).collect();
        let tx = dbpsk_modulate(&differential_burst(&bits, 0), &cfg).unwrap();
        let reference = delay_line_demod(&tx, &cfg).unwrap();
        for df in [0.0, 20e6, 150e6] {
            let w = 2.0 * std::f64::consts::PI * df / cfg.sample_rate_hz();
            let shifted = SampleStream::new(
                tx.samples
                    .iter()
                    .enumerate()
                    .map(|(n, s)| s * Complex64::from_polar(1.0, w * n as f64))
                    .collect(),
                tx.sample_rate_hz,
                Stage::Channel,
            )
            .unwrap();
            let out = delay_line_demod(&shifted, &cfg).unwrap();
            let scale = (2.0 * std::f64::consts::PI * df * cfg.symbol_period_s()).cos();
            for (x, y) in out.values.iter().zip(&reference.values) {
                assert!((x - scale * y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn matched_and_hardware_receivers_invert_the_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<u8> = (0..2000).map(|_| rng.random_range(0..2)).collect();
        for cfg in [ModemConfig::default(), ModemConfig::matched(), ModemConfig::unfiltered()] {
            assert_eq!(roundtrip(&bits, &cfg), bits);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ideal_channel_identity(bits in proptest::collection::vec(0u8..2, 1..400), init in 0u8..2) {
            let cfg = ModemConfig::default();
            let tx = dbpsk_modulate(&differential_burst(&bits, init), &cfg).unwrap();
            let rx = rx_front(tx, &cfg).unwrap();
            prop_assert_eq!(slice(&delay_line_demod(&rx, &cfg).unwrap(), &cfg), bits);
        }
    }
}
