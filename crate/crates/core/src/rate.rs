//! Regeneration-rate algebra for Brownian local dynamics.
//!
//! The partial rate is `κ̃ = ½(‖∇U‖² - ΔU)`. With regeneration distribution `μ`
//! and constant `C̃` (normalizing constant absorbed) the full rate is
//! `κ = κ̃ + C̃ μ/π̃`, and the minimal rate is `κ⁺ = max(κ̃, 0)`. Density ratios
//! are formed in log space with one exponential at the end.

use std::io::Write;

use crate::error::{check_dim, invalid, Error, Result};
use crate::regeneration::RegenerationDistribution;
use crate::special::chi_squared_quantile;
use crate::target::TargetModel;

/// `κ̃` with its positive and negative parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBundle {
    pub kappa_tilde: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

impl RateBundle {
    pub fn from_partial(kappa_tilde: f64) -> Self {
        let (kappa_plus, kappa_minus) = if kappa_tilde > 0.0 {
            (kappa_tilde, 0.0)
        } else if kappa_tilde < 0.0 {
            (0.0, -kappa_tilde)
        } else {
            (0.0, 0.0)
        };
        Self {
            kappa_tilde,
            kappa_plus,
            kappa_minus,
        }
    }
}

pub(crate) fn partial_rate_unchecked(target: &dyn TargetModel, x: &[f64]) -> f64 {
    let (g, lap) = target.grad_and_laplacian(x);
    0.5 * (g.iter().map(|v| v * v).sum::<f64>() - lap)
}

pub fn partial_rate(target: &dyn TargetModel, x: &[f64]) -> Result<RateBundle> {
    check_dim(target.dim(), x)?;
    Ok(RateBundle::from_partial(partial_rate_unchecked(target, x)))
}

/// `κ̃(x) + exp(log C̃ + log μ(x) - log π̃(x))`, untruncated.
pub(crate) fn full_rate_untruncated(
    target: &dyn TargetModel,
    mu: &dyn RegenerationDistribution,
    log_c_tilde: f64,
    x: &[f64],
) -> f64 {
    let kappa_tilde = partial_rate_unchecked(target, x);
    let log_ratio = log_c_tilde + mu.log_density(x) - target.log_density(x);
    let ratio = if log_ratio == f64::NEG_INFINITY {
        0.0
    } else {
        log_ratio.exp()
    };
    kappa_tilde + ratio
}

/// `min(κ̃(x) + C̃ μ(x)/π̃(x), K̂)`.
pub fn full_rate(
    target: &dyn TargetModel,
    mu: &dyn RegenerationDistribution,
    c_tilde: f64,
    x: &[f64],
    k_hat: f64,
) -> Result<f64> {
    if !(c_tilde > 0.0 && c_tilde.is_finite()) {
        return Err(invalid("c_tilde", "must be positive and finite"));
    }
    if !(k_hat > 0.0) {
        return Err(invalid("k_hat", "must be positive"));
    }
    check_dim(target.dim(), x)?;
    let k = full_rate_untruncated(target, mu, c_tilde.ln(), x);
    if k.is_nan() {
        return Err(Error::NonFiniteRate {
            time: f64::NAN,
            state: x.to_vec(),
        });
    }
    Ok(k.min(k_hat))
}

/// Smallest `C̃` making `κ ≥ 0` on the given states:
/// `max_i -κ̃(x_i) π̃(x_i) / μ(x_i)` over states with `κ̃ < 0`.
pub fn estimate_regen_constant(
    samples: &[Vec<f64>],
    target: &dyn TargetModel,
    mu: &dyn RegenerationDistribution,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut best = f64::NEG_INFINITY;
    for x in samples {
        check_dim(target.dim(), x)?;
        let k = partial_rate_unchecked(target, x);
        if k < 0.0 {
            let log_c = (-k).ln() + target.log_density(x) - mu.log_density(x);
            best = best.max(log_c);
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::NonNegativePartialRate);
    }
    Ok(best.exp())
}

/// Truncation level `K̄` with `P[κ⁺(X) < K̄] = 1 - ε` for `X ~ N(0, I_d)`,
/// i.e. `(q - d)/2` for `q` the `(1-ε)`-quantile of `χ²_d`.
pub fn gaussian_truncation_level(d: usize, eps: f64) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "dimension must be positive"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", "must lie in (0, 1)"));
    }
    let q = chi_squared_quantile(1.0 - eps, d as f64);
    Ok(0.5 * (q - d as f64))
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.5, 0.9, 0.99, 0.999, 0.9999];

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub rows: Vec<(f64, f64)>,
    pub mean: f64,
}

impl QuantileTable {
    pub fn value_at(&self, p: f64) -> Option<f64> {
        self.rows.iter().find(|(q, _)| *q == p).map(|(_, v)| *v)
    }

    /// `p,value` CSV.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "p,value")?;
        for (p, v) in &self.rows {
            writeln!(out, "{p},{v}")?;
        }
        Ok(())
    }
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn rate_quantiles(samples: &[Vec<f64>], rate: impl Fn(&[f64]) -> f64) -> Result<QuantileTable> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut values: Vec<f64> = samples.iter().map(|x| rate(x)).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.sort_by(f64::total_cmp);
    Ok(QuantileTable {
        rows: QUANTILE_LEVELS
            .iter()
            .map(|&p| (p, empirical_quantile(&values, p)))
            .collect(),
        mean,
    })
}
