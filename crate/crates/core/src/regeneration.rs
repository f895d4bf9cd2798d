//! Regeneration distributions: anything with a log-density and a sampler.

use std::f64::consts::PI;
use std::fmt::Debug;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

pub trait RegenerationDistribution: Send + Sync + Debug {
    fn dim(&self) -> usize;
    /// Normalized log-density.
    fn log_density(&self, x: &[f64]) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;
}

/// Gaussian with independent coordinates, `N(mean, diag(sd²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian {
    mean: Vec<f64>,
    sd: Vec<f64>,
    log_norm: f64,
}

impl DiagonalGaussian {
    pub fn new(mean: Vec<f64>, sd: Vec<f64>) -> Result<Self> {
        if mean.len() != sd.len() || mean.is_empty() {
            return Err(invalid("sd", "mean and sd must be nonempty and equally long"));
        }
        if sd.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(invalid("sd", "standard deviations must be positive and finite"));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(invalid("mean", "must be finite"));
        }
        let log_norm = -sd.iter().map(|s| s.ln()).sum::<f64>() - 0.5 * mean.len() as f64 * (2.0 * PI).ln();
        Ok(Self { mean, sd, log_norm })
    }

    /// `N(mean·1, sd²·I)` in `dim` dimensions.
    pub fn isotropic(dim: usize, mean: f64, sd: f64) -> Result<Self> {
        Self::new(vec![mean; dim], vec![sd; dim])
    }

    pub fn standard(dim: usize) -> Self {
        Self::isotropic(dim, 0.0, 1.0).expect("unit Gaussian is valid")
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sd(&self) -> &[f64] {
        &self.sd
    }
}

impl RegenerationDistribution for DiagonalGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let quad: f64 = x
            .iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(xi, (m, s))| {
                let z = (xi - m) / s;
                z * z
            })
            .sum();
        self.log_norm - 0.5 * quad
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.sd)
            .map(|(m, s)| {
                let z: f64 = rng.sample(StandardNormal);
                m + s * z
            })
            .collect()
    }
}

/// Minimal regeneration distribution of the one-dimensional standard Gaussian:
/// density proportional to `(1 - x²) exp(-x²/2)` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimalGaussian1d;

impl MinimalGaussian1d {
    /// `∫_{-1}^{1} (1 - x²) exp(-x²/2) dx = 2 exp(-1/2)`.
    pub const NORMALIZER: f64 = 2.0 * 0.606_530_659_712_633_4;
}

impl RegenerationDistribution for MinimalGaussian1d {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let x = x[0];
        if x.abs() >= 1.0 {
            return f64::NEG_INFINITY;
        }
        (1.0 - x * x).ln() - 0.5 * x * x - Self::NORMALIZER.ln()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        loop {
            let x: f64 = rng.random_range(-1.0..=1.0);
            let u: f64 = rng.random();
            if u < (1.0 - x * x) * (-0.5 * x * x).exp() {
                return vec![x];
            }
        }
    }
}
