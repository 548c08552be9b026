use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::modem::{SampleStream, Stage};

/// Multiplies by `exp(j theta[n])` where theta is a Wiener process starting
/// at 0 with per-sample increment variance `rate` (rad^2).
pub fn phase_noise_apply<R: Rng + ?Sized>(stream: SampleStream, rate: f64, rng: &mut R) -> SampleStream {
    if rate <= 0.0 {
        return stream;
    }
    let step = rate.sqrt();
    let mut theta = 0.0f64;
    let samples = stream
        .samples
        .iter()
        .enumerate()
        .map(|(n, s)| {
            if n > 0 {
                let z: f64 = rng.sample(StandardNormal);
                theta += step * z;
            }
            s * Complex64::from_polar(1.0, theta)
        })
        .collect();
    stream.advance(samples, Stage::Channel)
}
