//! Random Walk Metropolis with an isotropic Gaussian proposal.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, invalid, Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::target::TargetModel;

/// Acceptance band targeted by [`tune_scale`].
pub const ACCEPTANCE_BAND: (f64, f64) = (0.2, 0.3);

const PILOT_STEPS: usize = 2000;
const MAX_TUNING_ROUNDS: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct RwmConfig {
    pub scale: f64,
    pub steps: usize,
    pub thin: usize,
    pub burn_in_steps: usize,
    pub seed: u64,
    /// Starting state; the origin when `None`.
    pub init: Option<Vec<f64>>,
}

impl RwmConfig {
    pub fn new(scale: f64, steps: usize, seed: u64) -> Self {
        Self {
            scale,
            steps,
            thin: 1,
            burn_in_steps: 0,
            seed,
            init: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(invalid("scale", "must be positive and finite"));
        }
        if self.thin == 0 {
            return Err(invalid("thin", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwmOutput {
    pub samples: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    /// State after the final step.
    pub last: Vec<f64>,
}

impl RwmOutput {
    /// CSV in the samples schema `time,tour,x1..xd`, with time the step index and tour 0.
    pub fn write_csv(&self, mut out: impl std::io::Write, thin: usize, burn_in: usize) -> Result<()> {
        let d = self.last.len();
        let mut header = String::from("time,tour");
        for j in 1..=d {
            header.push_str(&format!(",x{j}"));
        }
        writeln!(out, "{header}")?;
        for (i, x) in self.samples.iter().enumerate() {
            write!(out, "{},0", burn_in + (i + 1) * thin)?;
            for v in x {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Run a Metropolis chain; keeps every `thin`-th state after `burn_in_steps`.
/// The acceptance rate covers all steps.
pub fn rwm_run(target: &dyn TargetModel, config: &RwmConfig) -> Result<RwmOutput> {
    config.validate()?;
    let d = target.dim();
    let mut x = config.init.clone().unwrap_or_else(|| vec![0.0; d]);
    check_dim(d, &x)?;
    let mut log_p = target.log_density(&x);
    if !log_p.is_finite() {
        return Err(invalid("init", "target density is zero or undefined at the starting state"));
    }
    let mut proposal_rng = stream_rng(config.seed, Stream::Proposal);
    let mut accept_rng = stream_rng(config.seed, Stream::Accept);
    let mut y = vec![0.0; d];
    let mut accepted = 0usize;
    let mut samples = Vec::with_capacity(config.steps.saturating_sub(config.burn_in_steps) / config.thin);
    for step in 1..=config.steps {
        for (yi, xi) in y.iter_mut().zip(&x) {
            let z: f64 = proposal_rng.sample(StandardNormal);
            *yi = xi + config.scale * z;
        }
        let log_q = target.log_density(&y);
        let u: f64 = accept_rng.random();
        if log_q.is_finite() && u.ln() < log_q - log_p {
            x.copy_from_slice(&y);
            log_p = log_q;
            accepted += 1;
        }
        if step > config.burn_in_steps && (step - config.burn_in_steps).is_multiple_of(config.thin) {
            samples.push(x.clone());
        }
    }
    let acceptance_rate = if config.steps == 0 {
        0.0
    } else {
        accepted as f64 / config.steps as f64
    };
    Ok(RwmOutput {
        samples,
        acceptance_rate,
        last: x,
    })
}

/// Search for a proposal scale with pilot acceptance in [`ACCEPTANCE_BAND`].
///
/// Doubles or halves from `2.4/√d` until the band is bracketed, then bisects
/// geometrically. Each pilot starts where the previous one ended.
pub fn tune_scale(target: &dyn TargetModel, init: Option<Vec<f64>>, seed: u64) -> Result<f64> {
    let (lo_band, hi_band) = ACCEPTANCE_BAND;
    let d = target.dim();
    let mut scale = 2.4 / (d as f64).sqrt();
    let mut state = init;
    let mut too_small: Option<f64> = None;
    let mut too_large: Option<f64> = None;
    let mut acceptance = f64::NAN;
    for round in 0..MAX_TUNING_ROUNDS {
        let mut pilot = RwmConfig::new(scale, PILOT_STEPS, seed.wrapping_add(round as u64));
        pilot.init = state.clone();
        pilot.thin = PILOT_STEPS;
        let out = rwm_run(target, &pilot)?;
        acceptance = out.acceptance_rate;
        state = Some(out.last);
        if (lo_band..=hi_band).contains(&acceptance) {
            return Ok(scale);
        }
        if acceptance > hi_band {
            too_small = Some(scale);
        } else {
            too_large = Some(scale);
        }
        scale = match (too_small, too_large) {
            (Some(a), Some(b)) => (a * b).sqrt(),
            (Some(a), None) => a * 2.0,
            (None, Some(b)) => b / 2.0,
            (None, None) => unreachable!(),
        };
    }
    Err(Error::TuningFailed { scale, acceptance })
}
