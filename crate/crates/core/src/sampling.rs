//! Seeded random smooth data for randomized property suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::spectral::{w1_inf_norm, PeriodicGridFunction};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomials with geometrically decaying amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothSampler {
    /// Highest Fourier mode drawn.
    pub max_mode: usize,
    /// Amplitude of mode `k` is drawn from `[-q^k, q^k]`.
    pub decay: f64,
    pub with_mean: bool,
}

impl Default for SmoothSampler {
    fn default() -> Self {
        Self {
            max_mode: 8,
            decay: 0.6,
            with_mean: false,
        }
    }
}

impl SmoothSampler {
    pub fn sample<R: Real>(&self, n: usize, rng: &mut impl Rng) -> Result<PeriodicGridFunction<R>> {
        if 2 * self.max_mode >= n {
            return Err(Error::InvalidArgument(format!(
                "mode {} is not resolved on {n} points",
                self.max_mode
            )));
        }
        let mean = if self.with_mean { rng.gen_range(-1.0..1.0) } else { 0.0 };
        let terms: Vec<(f64, f64, f64)> = (1..=self.max_mode)
            .map(|k| {
                let amp = self.decay.powi(k as i32);
                (k as f64, rng.gen_range(-amp..=amp), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        PeriodicGridFunction::from_fn(n, |s: R| {
            let s = s.to_f64().unwrap_or(f64::NAN);
            R::lit(mean + terms.iter().map(|(k, a, p)| a * (k * s + p).cos()).sum::<f64>())
        })
    }

    /// A sample rescaled so that `|h|_{W^{1,∞}}` equals `target`.
    pub fn sample_scaled<R: Real>(
        &self,
        n: usize,
        target: R,
        rng: &mut impl Rng,
    ) -> Result<PeriodicGridFunction<R>> {
        loop {
            let h = self.sample::<R>(n, rng)?;
            let norm = w1_inf_norm(&h);
            if norm > R::lit(1e-8) {
                return Ok(&h * (target / norm));
            }
        }
    }
}

/// Nonnegative weight `b = g²` for a random trigonometric polynomial `g`
/// with a random offset, so zeros of `b` occur for some draws.
pub fn random_weight<R: Real>(
    n: usize,
    max_mode: usize,
    rng: &mut impl Rng,
) -> Result<PeriodicGridFunction<R>> {
    let sampler = SmoothSampler {
        max_mode,
        decay: 0.7,
        with_mean: true,
    };
    Ok(sampler.sample::<R>(n, rng)?.map(|v| v * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::band_energy_fraction;

    #[test]
    fn same_seed_same_data() {
        let s = SmoothSampler::default();
        let a = s.sample::<f64>(64, &mut seeded_rng(3)).unwrap();
        let b = s.sample::<f64>(64, &mut seeded_rng(3)).unwrap();
        let c = s.sample::<f64>(64, &mut seeded_rng(4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scaled_samples_hit_the_target_norm() {
        let mut rng = seeded_rng(11);
        for _ in 0..10 {
            let h: PeriodicGridFunction<f64> = SmoothSampler::default().sample_scaled(128, 0.05, &mut rng).unwrap();
            assert!((w1_inf_norm(&h) - 0.05).abs() < 1e-14);
            assert!(h.mean().abs() < 1e-15);
            assert!(band_energy_fraction(&h) < 1e-20);
        }
    }

    #[test]
    fn weights_are_nonnegative() {
        let mut rng = seeded_rng(5);
        for _ in 0..20 {
            let b = random_weight::<f64>(64, 4, &mut rng).unwrap();
            assert!(b.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn unresolved_modes_are_rejected() {
        let s = SmoothSampler {
            max_mode: 8,
            ..SmoothSampler::default()
        };
        assert!(s.sample::<f64>(16, &mut seeded_rng(0)).is_err());
    }
}
