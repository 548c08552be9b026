use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::modem::{SampleStream, Stage};

/// Complex noise variance per sample for a stream of mean power
/// `signal_power` at the requested Eb/N0. The sample spacing is the unit of
/// time, so Es = signal_power * samples_per_symbol.
pub fn noise_variance(
    signal_power: f64,
    ebn0_db: f64,
    bits_per_symbol: u32,
    samples_per_symbol: usize,
) -> f64 {
    let eb = signal_power * samples_per_symbol as f64 / bits_per_symbol as f64;
    eb / 10f64.powf(ebn0_db / 10.0)
}

/// Adds circular complex Gaussian noise scaled from the stream's measured
/// power. `ebn0_db = +inf` leaves the stream untouched.
pub fn awgn_apply<R: Rng + ?Sized>(
    stream: SampleStream,
    ebn0_db: f64,
    bits_per_symbol: u32,
    samples_per_symbol: usize,
    rng: &mut R,
) -> SampleStream {
    if ebn0_db == f64::INFINITY {
        return stream;
    }
    let var = noise_variance(stream.mean_power(), ebn0_db, bits_per_symbol, samples_per_symbol);
    let sigma = (var / 2.0).sqrt();
    let samples = stream
        .samples
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re * sigma, im * sigma)
        })
        .collect();
    stream.advance(samples, Stage::Channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_stream(n: usize) -> SampleStream {
        let samples = (0..n)
            .map(|i| if (i / 8) % 3 == 0 { Complex64::new(-1.0, 0.0) } else { Complex64::new(1.0, 0.0) })
            .collect();
        SampleStream::new(samples, 7e9, Stage::Modulated).unwrap()
    }

    #[test]
    fn infinite_ebn0_is_identity() {
        let s = unit_stream(100);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(awgn_apply(s.clone(), f64::INFINITY, 1, 8, &mut rng), s);
    }

    #[test]
    fn measured_snr_matches_request() {
        let s = unit_stream(1_000_000);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ebn0_db = 7.0;
        let out = awgn_apply(s.clone(), ebn0_db, 1, 8, &mut rng);
        let noise: f64 = out
            .samples
            .iter()
            .zip(&s.samples)
            .map(|(y, x)| (y - x).norm_sqr())
            .sum::<f64>()
            / s.len() as f64;
        // per-sample SNR = Eb/N0 * bits_per_symbol / samples_per_symbol
        let measured_db = 10.0 * (s.mean_power() / noise).log10();
        let requested_db = ebn0_db - 10.0 * 8f64.log10();
        assert!((measured_db - requested_db).abs() < 0.1, "{measured_db} vs {requested_db}");
    }

    #[test]
    fn seeds_give_different_noise_same_statistics() {
        let s = unit_stream(200_000);
        let a = awgn_apply(s.clone(), 5.0, 1, 8, &mut ChaCha8Rng::seed_from_u64(2));
        let b = awgn_apply(s.clone(), 5.0, 1, 8, &mut ChaCha8Rng::seed_from_u64(3));
        assert_ne!(a.samples, b.samples);
        let pa = a.mean_power();
        let pb = b.mean_power();
        assert!((pa - pb).abs() / pa < 0.01);
    }
}
