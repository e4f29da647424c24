//! Additive Gaussian noise scaled to the RMS of the data.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, VltError};
use crate::fields::ScalarField;

/// Stream id for a noise level and a per-dataset tag, so every
/// `(seed, percent, tag)` triple draws from its own sequence.
fn stream_id(percent: f64, tag: u64) -> u64 {
    percent.to_bits().rotate_left(17) ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `data + eps`, `eps ~ N(0, (percent/100 * rms(data))^2)` i.i.d.
pub fn add_noise(data: &ScalarField, percent: f64, seed: u64) -> Result<ScalarField> {
    add_noise_tagged(data, percent, seed, 0)
}

/// As [`add_noise`], drawing from the stream selected by `tag`.
pub fn add_noise_tagged(data: &ScalarField, percent: f64, seed: u64, tag: u64) -> Result<ScalarField> {
    if !percent.is_finite() || percent < 0.0 {
        return Err(VltError::Argument(format!("noise percent must be >= 0, got {percent}")));
    }
    let sigma = percent / 100.0 * data.rms();
    if sigma == 0.0 {
        return Ok(data.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(percent, tag));
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    let values = data.values().iter().map(|v| v + normal.sample(&mut rng)).collect();
    Ok(ScalarField::from_raw(data.grid(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;

    fn sample(n: usize) -> ScalarField {
        ScalarField::from_fn(Grid::new(n).unwrap(), |x, y| (3.0 * x).sin() + y * y)
    }

    #[test]
    fn zero_percent_is_identity() {
        let d = sample(32);
        assert_eq!(add_noise(&d, 0.0, 1).unwrap(), d);
    }

    #[test]
    fn negative_percent_rejected() {
        assert!(matches!(add_noise(&sample(16), -1.0, 1), Err(VltError::Argument(_))));
    }

    #[test]
    fn empirical_std_matches_level() {
        let d = sample(512);
        let noisy = add_noise(&d, 20.0, 7).unwrap();
        let ratio = (&noisy - &d).rms() / d.rms();
        assert!((0.19..=0.21).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn deterministic_and_tag_separated() {
        let d = sample(32);
        let a = add_noise_tagged(&d, 5.0, 3, 1).unwrap();
        assert_eq!(a, add_noise_tagged(&d, 5.0, 3, 1).unwrap());
        assert_ne!(a, add_noise_tagged(&d, 5.0, 3, 2).unwrap());
        assert_ne!(a, add_noise_tagged(&d, 5.0, 4, 1).unwrap());
    }
}
