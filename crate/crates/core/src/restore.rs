//! Standard Restore: Brownian motion regenerating from a fixed distribution.
//!
//! Regenerations are simulated by Poisson thinning against a constant
//! dominating rate `K̂`: potential events arrive at rate `K̂` and are accepted
//! with probability `min(κ(X), K̂)/K̂`. Outputs arrive either as an independent
//! rate-`Λ₀` Poisson process or on a fixed mesh.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::rate::{full_rate_untruncated, partial_rate_unchecked};
use crate::regeneration::{MinimalGaussian1d, RegenerationDistribution};
use crate::run::{EventKind, Process, RestoreRun};
use crate::target::{StdGaussian, TargetModel};

/// Exceedance fraction above which a run warns that `K̂` truncates the rate.
pub const EXCEEDANCE_WARN_FRAC: f64 = 1e-3;

/// Dominating rate used by the one-dimensional minimal demo.
pub const MINIMAL_DEMO_TRUNCATION: f64 = 12.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// `κ = κ̃ + C̃ μ/π̃`.
    Full { c_tilde: f64 },
    /// `κ = max(κ̃, 0)`; only correct when `μ` is the minimal distribution.
    Minimal,
    /// A constant rate, independent of the state.
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputSchedule {
    Poisson { rate: f64 },
    Mesh { spacing: f64 },
}

impl OutputSchedule {
    pub fn weight(&self) -> f64 {
        match *self {
            OutputSchedule::Poisson { rate } => 1.0 / rate,
            OutputSchedule::Mesh { spacing } => spacing,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            OutputSchedule::Poisson { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(invalid("lambda0", "output rate must be positive"))
            }
            OutputSchedule::Mesh { spacing } if !(spacing > 0.0 && spacing.is_finite()) => {
                Err(invalid("mesh", "mesh spacing must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    Tours(u64),
    Time(f64),
}

impl Horizon {
    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            Horizon::Tours(0) => Err(invalid("tours", "must be positive")),
            Horizon::Time(t) if !(t > 0.0 && t.is_finite()) => {
                Err(invalid("time", "must be positive and finite"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestoreConfig {
    pub mu: Arc<dyn RegenerationDistribution>,
    pub rate: RateMode,
    /// Dominating (and truncation) rate `K̂`.
    pub k_hat: f64,
    pub output: OutputSchedule,
    pub horizon: Horizon,
    pub seed: u64,
    pub record_events: bool,
}

impl RestoreConfig {
    pub fn new(
        mu: Arc<dyn RegenerationDistribution>,
        rate: RateMode,
        k_hat: f64,
        output: OutputSchedule,
        horizon: Horizon,
        seed: u64,
    ) -> Self {
        Self {
            mu,
            rate,
            k_hat,
            output,
            horizon,
            seed,
            record_events: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_hat > 0.0 && self.k_hat.is_finite()) {
            return Err(invalid("k_hat", "must be positive and finite"));
        }
        match self.rate {
            RateMode::Full { c_tilde } if !(c_tilde > 0.0 && c_tilde.is_finite()) => {
                return Err(invalid("c_tilde", "must be positive and finite"))
            }
            RateMode::Constant(c) if !(c >= 0.0 && c.is_finite()) => {
                return Err(invalid("rate", "constant rate must be nonnegative"))
            }
            _ => {}
        }
        self.output.validate()?;
        self.horizon.validate()
    }
}

/// Simulate a Standard Restore process.
pub fn simulate_standard(config: &RestoreConfig, target: &dyn TargetModel) -> Result<RestoreRun> {
    config.validate()?;
    let dim = target.dim();
    if config.mu.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: config.mu.dim(),
        });
    }
    let log_c = match config.rate {
        RateMode::Full { c_tilde } => c_tilde.ln(),
        _ => 0.0,
    };
    let mut regen_rng = crate::rng::stream_rng(config.seed, crate::rng::Stream::Regeneration);
    let x0 = config.mu.sample(&mut regen_rng);
    let mut p = Process::new(x0, config.seed, config.output.weight(), config.record_events);
    p.regen = regen_rng;

    let k_hat = config.k_hat;
    let mut mesh_index: u64 = 1;
    loop {
        let tau = p.exp_clock(k_hat);
        let (is_output, dt) = match config.output {
            OutputSchedule::Poisson { rate } => {
                let s = p.exp_clock(rate);
                if s <= tau {
                    (true, s)
                } else {
                    (false, tau)
                }
            }
            OutputSchedule::Mesh { spacing } => {
                let s = (mesh_index as f64 * spacing - p.t).max(0.0);
                if s <= tau {
                    (true, s)
                } else {
                    (false, tau)
                }
            }
        };
        if let Horizon::Time(end) = config.horizon {
            if p.t + dt > end {
                let rest = end - p.t;
                p.idle(rest);
                break;
            }
        }
        p.advance(dt);

        if is_output {
            if let OutputSchedule::Mesh { spacing } = config.output {
                p.t = mesh_index as f64 * spacing;
                mesh_index += 1;
            }
            p.record_output();
            continue;
        }

        let untruncated = match config.rate {
            RateMode::Full { .. } => full_rate_untruncated(target, config.mu.as_ref(), log_c, &p.x),
            RateMode::Minimal => partial_rate_unchecked(target, &p.x).max(0.0),
            RateMode::Constant(c) => c,
        };
        if untruncated.is_nan() {
            return Err(Error::NonFiniteRate {
                time: p.t,
                state: p.x.clone(),
            });
        }
        p.run.stats.rate_evaluations += 1;
        if untruncated > k_hat {
            p.run.stats.truncation_exceedances += 1;
        }
        let u = p.uniform();
        if u < untruncated.min(k_hat) / k_hat {
            let dest = config.mu.sample(&mut p.regen);
            p.regenerate(dest);
            if let Horizon::Tours(n) = config.horizon {
                if p.tour >= n {
                    break;
                }
            }
        } else {
            p.log(EventKind::RegenReject);
        }
    }
    let run = p.finish();
    if run.truncation_exceedance_frac() > EXCEEDANCE_WARN_FRAC {
        log::warn!(
            "regeneration rate exceeded K̂ = {} in {:.3}% of evaluations",
            k_hat,
            100.0 * run.truncation_exceedance_frac()
        );
    }
    Ok(run)
}

/// Minimal Restore for `π = N(0, 1)`: regenerations from `μ* ∝ (1 - x²) e^{-x²/2}`
/// on `[-1, 1]` at rate `κ⁺ = max(½(x² - 1), 0)`, dominated by [`MINIMAL_DEMO_TRUNCATION`].
pub fn simulate_minimal_gaussian_demo(lambda0: f64, horizon: Horizon, seed: u64) -> Result<RestoreRun> {
    let mut config = RestoreConfig::new(
        Arc::new(MinimalGaussian1d),
        RateMode::Minimal,
        MINIMAL_DEMO_TRUNCATION,
        OutputSchedule::Poisson { rate: lambda0 },
        horizon,
        seed,
    );
    config.record_events = true;
    simulate_standard(&config, &StdGaussian::new(1))
}

/// `Ẑ = C̃ T / n` from a Standard Restore run with constant `C̃`.
pub fn estimate_normalizing_constant(run: &RestoreRun, c_tilde: f64) -> Result<f64> {
    if !(c_tilde > 0.0) {
        return Err(invalid("c_tilde", "must be positive"));
    }
    let n = run.n_tours();
    if n == 0 {
        return Err(Error::NotEnoughTours { needed: 1, got: 0 });
    }
    if run.truncation_exceedance_frac() > EXCEEDANCE_WARN_FRAC {
        log::warn!(
            "normalizing-constant estimate is biased: rate truncated in {:.3}% of evaluations",
            100.0 * run.truncation_exceedance_frac()
        );
    }
    Ok(c_tilde * run.total_time / n as f64)
}

/// Mean of `f` over the recorded output states.
pub fn ergodic_average(run: &RestoreRun, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let n = run.n_samples();
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(run.states().map(f).sum::<f64>() / n as f64)
}

/// Regenerative CLT variance estimate
/// `σ̂²_f = mean_i[(Z_i - τ_i f̄)²] / (mean_i τ_i)²` over completed tours, where
/// `Z_i` is the output sum of `f` in tour `i` times the output weight.
pub fn tour_clt_variance(run: &RestoreRun, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let completed: Vec<usize> = (0..run.tours.len()).filter(|&i| run.tours[i].complete).collect();
    if completed.len() < 2 {
        return Err(Error::NotEnoughTours {
            needed: 2,
            got: completed.len(),
        });
    }
    let fbar = ergodic_average(run, &f)?;
    let mut integrals = vec![0.0; run.tours.len()];
    for s in run.samples() {
        integrals[s.tour as usize] += f(s.state) * run.output_weight;
    }
    let n = completed.len() as f64;
    let mean_tau = completed.iter().map(|&i| run.tours[i].length).sum::<f64>() / n;
    let num = completed
        .iter()
        .map(|&i| (integrals[i] - run.tours[i].length * fbar).powi(2))
        .sum::<f64>()
        / n;
    Ok(num / (mean_tau * mean_tau))
}
