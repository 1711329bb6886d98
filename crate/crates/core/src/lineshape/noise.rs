use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::trace::SpectrumTrace;
use crate::error::{Error, Result};

/// Multiplicative Gaussian noise: v → v·(1 + σ·N(0,1)), reproducible for a seed.
pub fn add_noise(trace: &SpectrumTrace, relative_sigma: f64, seed: u64) -> Result<SpectrumTrace> {
    let mut out = trace.clone();
    apply_noise(&mut out.value, relative_sigma, seed)?;
    Ok(out)
}

/// In-place form of [`add_noise`] for any sample buffer.
pub fn apply_noise(values: &mut [f64], relative_sigma: f64, seed: u64) -> Result<()> {
    if !(relative_sigma >= 0.0 && relative_sigma.is_finite()) {
        return Err(Error::Domain(format!("noise level must be ≥ 0, got {relative_sigma}")));
    }
    if relative_sigma == 0.0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, relative_sigma).expect("finite sigma");
    for v in values {
        *v *= 1.0 + normal.sample(&mut rng);
    }
    Ok(())
}
