//! Stochastic state detection: per-shot projection and Poisson photon
//! counting with threshold classification.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon-count model of the fluorescence detection window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    /// Mean counts for the bright state, per ion.
    pub bright: f64,
    /// Mean counts for the dark state, per ion.
    pub dark: f64,
    /// Mean stray-light counts.
    pub stray: f64,
    /// Classification threshold: counts ≥ threshold read as bright.
    pub threshold: u32,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            bright: 11.0,
            dark: 0.2,
            stray: 0.1,
            threshold: 4,
        }
    }
}

impl DetectionModel {
    pub fn validate(&self) -> Result<()> {
        if self.bright < 0.0 || self.dark < 0.0 || self.stray < 0.0 {
            return Err(Error::Config("count means must be >= 0".into()));
        }
        Ok(())
    }

    pub fn mean_bright(&self) -> f64 {
        self.bright + self.stray
    }

    pub fn mean_dark(&self) -> f64 {
        self.dark + self.stray
    }

    /// One detection shot per ion: project onto bright with probability
    /// `p_bright`, then draw Poisson counts and classify.
    pub fn detect<R: Rng>(&self, p_bright: &[f64], rng: &mut R) -> Result<Vec<DetectionShot>> {
        self.validate()?;
        p_bright
            .iter()
            .map(|&p| {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("population {p} outside [0, 1]")));
                }
                let bright = rng.random_bool(p);
                let mean = if bright {
                    self.mean_bright()
                } else {
                    self.mean_dark()
                };
                let counts = if mean > 0.0 {
                    Poisson::new(mean)
                        .map_err(|e| Error::Config(format!("poisson: {e}")))?
                        .sample(rng) as u32
                } else {
                    0
                };
                Ok(DetectionShot {
                    counts,
                    projected_bright: bright,
                    classified_bright: counts >= self.threshold,
                })
            })
            .collect()
    }

    /// Analytic misclassification probabilities (dark→bright, bright→dark)
    /// from the Poisson tail sums at the threshold.
    pub fn error_rates(&self) -> (f64, f64) {
        let dark_as_bright = 1.0 - poisson_cdf(self.mean_dark(), self.threshold as i64 - 1);
        let bright_as_dark = poisson_cdf(self.mean_bright(), self.threshold as i64 - 1);
        (dark_as_bright, bright_as_dark)
    }
}

/// One detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionShot {
    pub counts: u32,
    pub projected_bright: bool,
    pub classified_bright: bool,
}

/// P(X ≤ k) for X ~ Poisson(mean).
pub fn poisson_cdf(mean: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut term = (-mean).exp();
    let mut sum = term;
    for n in 1..=k {
        term *= mean / n as f64;
        sum += term;
    }
    sum.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn count_means_match_model() {
        let model = DetectionModel::default();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 20_000;
        let bright: Vec<f64> = vec![1.0; n];
        let shots = model.detect(&bright, &mut rng).unwrap();
        let mean: f64 = shots.iter().map(|s| s.counts as f64).sum::<f64>() / n as f64;
        assert!((mean - 11.1).abs() < 0.1, "bright mean {mean}");
        let dark: Vec<f64> = vec![0.0; n];
        let shots = model.detect(&dark, &mut rng).unwrap();
        let mean: f64 = shots.iter().map(|s| s.counts as f64).sum::<f64>() / n as f64;
        assert!((mean - 0.3).abs() < 0.02, "dark mean {mean}");
    }

    #[test]
    fn classification_errors_match_poisson_tails() {
        let model = DetectionModel::default();
        let (dark_err, bright_err) = model.error_rates();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        let n = 200_000;
        let shots = model.detect(&vec![0.0; n], &mut rng).unwrap();
        let measured_dark_err =
            shots.iter().filter(|s| s.classified_bright).count() as f64 / n as f64;
        let tol = 4.0 * (dark_err / n as f64).sqrt().max(1e-6);
        assert!(
            (measured_dark_err - dark_err).abs() < tol,
            "dark->bright {measured_dark_err} vs {dark_err}"
        );
        let shots = model.detect(&vec![1.0; n], &mut rng).unwrap();
        let measured_bright_err =
            shots.iter().filter(|s| !s.classified_bright).count() as f64 / n as f64;
        let tol = 4.0 * (bright_err / n as f64).sqrt().max(1e-6);
        assert!(
            (measured_bright_err - bright_err).abs() < tol,
            "bright->dark {measured_bright_err} vs {bright_err}"
        );
    }

    #[test]
    fn deterministic_under_fixed_seed() {
        let model = DetectionModel::default();
        let run = |seed: u64| {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            model
                .detect(&[0.3, 0.7, 0.5, 0.9], &mut rng)
                .unwrap()
                .iter()
                .map(|s| s.counts)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }
}
