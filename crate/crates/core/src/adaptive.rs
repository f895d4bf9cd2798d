//! Adaptive Restore: learns the minimal regeneration distribution online.
//!
//! Alongside the regeneration clock (rate `K̄⁺`, thinned by `κ⁺`) and the
//! output clock (rate `Λ₀`), an addition clock at rate `n̄K` is thinned by
//! `κ⁻`; accepted additions append the current state to a point-mass store.
//! Regenerations draw from `μ_t = t/(a+t)·(uniform on store) + a/(a+t)·μ₀`.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::rate::{gaussian_truncation_level, partial_rate_unchecked, RateBundle};
use crate::regeneration::RegenerationDistribution;
use crate::restore::Horizon;
use crate::rng::{stream_rng, Stream};
use crate::run::{EventKind, Process, RestoreRun};
use crate::target::TargetModel;

/// Append-only store of states, each weighted equally.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMassStore {
    dim: usize,
    points: Vec<f64>,
    times: Vec<f64>,
}

impl PointMassStore {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            points: Vec::new(),
            times: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, time: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.points.extend_from_slice(x);
        self.times.push(time);
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim.max(1))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Uniformly chosen stored point; `None` when empty.
    pub fn draw(&self, rng: &mut dyn RngCore) -> Option<&[f64]> {
        if self.is_empty() {
            return None;
        }
        let i = rng.random_range(0..self.len());
        Some(self.point(i))
    }

    pub fn map_points(&mut self, f: impl Fn(&[f64]) -> Vec<f64>) {
        let mapped: Vec<f64> = self.points().flat_map(f).collect();
        self.points = mapped;
    }

    /// CSV with header `time_added,x1,...,xd`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let mut header = String::from("time_added");
        for j in 1..=self.dim {
            header.push_str(&format!(",x{j}"));
        }
        writeln!(out, "{header}")?;
        for (t, x) in self.times.iter().zip(self.points()) {
            write!(out, "{t}")?;
            for v in x {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Draw from `μ_t`: a uniform store point with probability `t/(a+t)`,
/// otherwise (or when the store is empty) a draw from `μ₀`.
pub fn draw_regeneration(
    store: &PointMassStore,
    mu0: &dyn RegenerationDistribution,
    t: f64,
    a: f64,
    rng: &mut dyn RngCore,
) -> Vec<f64> {
    if store.is_empty() {
        return mu0.sample(rng);
    }
    let u: f64 = rng.random();
    if u < t / (a + t) {
        store.draw(rng).expect("store is nonempty").to_vec()
    } else {
        mu0.sample(rng)
    }
}

/// Thinned addition event: appends `x` with probability `min(κ⁻, n̄K)/n̄K`.
pub fn maybe_add_point(
    store: &mut PointMassStore,
    x: &[f64],
    kappa_minus: f64,
    n_bar: f64,
    time: f64,
    rng: &mut dyn RngCore,
) -> bool {
    let u: f64 = rng.random();
    let accept = u < kappa_minus.min(n_bar) / n_bar;
    if accept {
        store.push(time, x);
    }
    accept
}

#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    pub mu0: Arc<dyn RegenerationDistribution>,
    /// Dominance time `a`.
    pub a: f64,
    pub k_plus_bar: f64,
    pub n_bar: f64,
    pub lambda0: f64,
    pub burn_in: f64,
    /// Counted after burn-in: `Time(T)` ends at `burn_in + T`.
    pub horizon: Horizon,
    pub seed: u64,
    /// Stop adding points at this time and freeze the mixture weight.
    pub freeze_after: Option<f64>,
    pub record_events: bool,
}

impl AdaptiveConfig {
    /// Defaults: `n̄K = d/2`, `K̄⁺ = gaussian_truncation_level(d, 1e-4)`, `a = 1000`, `Λ₀ = 10`.
    pub fn with_defaults(mu0: Arc<dyn RegenerationDistribution>, horizon: Horizon, seed: u64) -> Result<Self> {
        let d = mu0.dim();
        Ok(Self {
            k_plus_bar: gaussian_truncation_level(d, 1e-4)?,
            n_bar: d as f64 / 2.0,
            a: 1000.0,
            lambda0: 10.0,
            burn_in: 0.0,
            horizon,
            seed,
            freeze_after: None,
            record_events: false,
            mu0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, "must be positive and finite"))
            }
        };
        positive("a", self.a)?;
        positive("k_plus_bar", self.k_plus_bar)?;
        positive("n_bar", self.n_bar)?;
        positive("lambda0", self.lambda0)?;
        if !(self.burn_in >= 0.0 && self.burn_in.is_finite()) {
            return Err(invalid("burn_in", "must be nonnegative and finite"));
        }
        if let Some(f) = self.freeze_after {
            if !(f >= 0.0) {
                return Err(invalid("freeze_after", "must be nonnegative"));
            }
        }
        self.horizon.validate()
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    /// Outputs after burn-in; tours starting before burn-in are marked incomplete.
    pub run: RestoreRun,
    pub store: PointMassStore,
}

impl AdaptiveRun {
    pub fn bound_violation_count(&self) -> u64 {
        self.run.stats.bound_violations
    }
}

/// Simulate an Adaptive Restore process.
pub fn simulate_adaptive(config: &AdaptiveConfig, target: &dyn TargetModel) -> Result<AdaptiveRun> {
    config.validate()?;
    let dim = target.dim();
    if config.mu0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: config.mu0.dim(),
        });
    }
    let mut regen_rng = stream_rng(config.seed, Stream::Regeneration);
    let x0 = config.mu0.sample(&mut regen_rng);
    let mut p = Process::new(x0, config.seed, 1.0 / config.lambda0, config.record_events);
    p.regen = regen_rng;
    let mut adapt = stream_rng(config.seed, Stream::Adaptation);
    let mut store = PointMassStore::new(dim);

    let end = match config.horizon {
        Horizon::Time(t) => Some(config.burn_in + t),
        Horizon::Tours(_) => None,
    };
    let freeze = config.freeze_after.unwrap_or(f64::INFINITY);
    let mut post_tours: u64 = 0;

    loop {
        let frozen = p.t >= freeze;
        let tau = p.exp_clock(config.k_plus_bar);
        let s = p.exp_clock(config.lambda0);
        let zeta = if frozen {
            f64::INFINITY
        } else {
            p.exp_clock(config.n_bar)
        };
        let dt = tau.min(s).min(zeta);
        if let Some(end) = end {
            if p.t + dt > end {
                let rest = end - p.t;
                p.idle(rest);
                break;
            }
        }
        p.advance(dt);

        if s <= tau && s <= zeta {
            if p.t >= config.burn_in {
                p.record_output();
            }
            continue;
        }

        let kappa_tilde = partial_rate_unchecked(target, &p.x);
        if kappa_tilde.is_nan() {
            return Err(Error::NonFiniteRate {
                time: p.t,
                state: p.x.clone(),
            });
        }
        p.run.stats.rate_evaluations += 1;
        let rates = RateBundle::from_partial(kappa_tilde);

        if tau <= zeta {
            if rates.kappa_plus > config.k_plus_bar {
                p.run.stats.truncation_exceedances += 1;
            }
            let u = p.uniform();
            if u < rates.kappa_plus.min(config.k_plus_bar) / config.k_plus_bar {
                let weight_time = p.t.min(freeze);
                let dest = draw_regeneration(&store, config.mu0.as_ref(), weight_time, config.a, &mut p.regen);
                let counts = p.tour_start() >= config.burn_in;
                p.regenerate(dest);
                if counts {
                    post_tours += 1;
                }
                if let Horizon::Tours(n) = config.horizon {
                    if post_tours >= n {
                        break;
                    }
                }
            } else {
                p.log(EventKind::RegenReject);
            }
        } else {
            p.run.stats.addition_proposals += 1;
            if rates.kappa_minus > config.n_bar {
                p.run.stats.bound_violations += 1;
            }
            if maybe_add_point(&mut store, &p.x, rates.kappa_minus, config.n_bar, p.t, &mut adapt) {
                p.run.stats.additions += 1;
                p.log(EventKind::AddAccept);
            } else {
                p.log(EventKind::AddReject);
            }
        }
    }
    let mut run = p.finish();
    for tour in run.tours.iter_mut() {
        if tour.start_time < config.burn_in {
            tour.complete = false;
        }
    }
    if run.stats.bound_violations > 0 {
        log::warn!(
            "κ⁻ exceeded n̄K = {} at {} of {} addition proposals; additions are biased",
            config.n_bar,
            run.stats.bound_violations,
            run.stats.addition_proposals
        );
    }
    Ok(AdaptiveRun { run, store })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regeneration::DiagonalGaussian;
    use crate::rng::stream_rng;
    use crate::target::StdGaussian;

    fn three_sigma_binomial(hits: usize, n: usize, p: f64) -> bool {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        ((hits as f64 / n as f64) - p).abs() <= 3.0 * se
    }

    #[test]
    fn empty_store_always_uses_mu0() {
        let store = PointMassStore::new(1);
        let mu0 = DiagonalGaussian::isotropic(1, 100.0, 1e-9).unwrap();
        let mut rng = stream_rng(1, Stream::Regeneration);
        for t in [0.0, 1.0, 1e9] {
            let x = draw_regeneration(&store, &mu0, t, 1.0, &mut rng);
            assert!((x[0] - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn mixture_weight_is_half_at_t_equals_a() {
        let mut store = PointMassStore::new(1);
        store.push(0.0, &[-5.0]);
        let mu0 = DiagonalGaussian::isotropic(1, 5.0, 1e-9).unwrap();
        let mut rng = stream_rng(2, Stream::Regeneration);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| draw_regeneration(&store, &mu0, 7.0, 7.0, &mut rng)[0] < 0.0)
            .count();
        assert!(three_sigma_binomial(hits, n, 0.5), "{hits}");
        let late = (0..1000)
            .filter(|_| draw_regeneration(&store, &mu0, 1e12, 7.0, &mut rng)[0] < 0.0)
            .count();
        assert_eq!(late, 1000);
    }

    #[test]
    fn addition_acceptance_frequencies() {
        let mut rng = stream_rng(3, Stream::Adaptation);
        let mut store = PointMassStore::new(1);
        assert!(!(0..1000).any(|_| maybe_add_point(&mut store, &[0.0], 0.0, 2.0, 0.0, &mut rng)));
        assert!((0..1000).all(|_| maybe_add_point(&mut store, &[0.0], 2.0, 2.0, 0.0, &mut rng)));
        assert_eq!(store.len(), 1000);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| maybe_add_point(&mut store, &[0.0], 0.5, 2.0, 0.0, &mut rng))
            .count();
        assert!(three_sigma_binomial(hits, n, 0.25), "{hits}");
        assert_eq!(store.len(), 1000 + hits);
    }

    #[test]
    fn uniform_store_draws() {
        let mut store = PointMassStore::new(1);
        for i in 0..4 {
            store.push(i as f64, &[i as f64]);
        }
        let mut rng = stream_rng(4, Stream::Regeneration);
        let mut counts = [0usize; 4];
        let n = 20_000;
        for _ in 0..n {
            counts[store.draw(&mut rng).unwrap()[0] as usize] += 1;
        }
        for c in counts {
            assert!(three_sigma_binomial(c, n, 0.25), "{counts:?}");
        }
    }

    #[test]
    fn stored_points_lie_in_negative_region() {
        let mu0 = Arc::new(DiagonalGaussian::isotropic(1, 0.0, 2.0).unwrap());
        let mut config = AdaptiveConfig::with_defaults(mu0, Horizon::Time(200.0), 11).unwrap();
        config.a = 10.0;
        let out = simulate_adaptive(&config, &StdGaussian::new(1)).unwrap();
        assert!(out.store.len() > 10);
        assert!(out.store.points().all(|x| x[0].abs() <= 1.0 + 1e-9));
        assert!((out.run.total_time - 200.0).abs() < 1e-9);
    }

    #[test]
    fn burn_in_suppresses_outputs_and_tours() {
        let mu0 = Arc::new(DiagonalGaussian::standard(1));
        let mut config = AdaptiveConfig::with_defaults(mu0, Horizon::Tours(20), 5).unwrap();
        config.burn_in = 50.0;
        let out = simulate_adaptive(&config, &StdGaussian::new(1)).unwrap();
        assert!(out.run.samples().all(|s| s.time >= 50.0));
        assert_eq!(out.run.n_tours(), 20);
        assert!(out.run.tours.iter().filter(|t| t.complete).all(|t| t.start_time >= 50.0));
    }

    #[test]
    fn freezing_stops_additions() {
        let mu0 = Arc::new(DiagonalGaussian::isotropic(1, 0.0, 2.0).unwrap());
        let mut config = AdaptiveConfig::with_defaults(mu0, Horizon::Time(300.0), 6).unwrap();
        config.freeze_after = Some(30.0);
        let out = simulate_adaptive(&config, &StdGaussian::new(1)).unwrap();
        assert!(out.store.times().iter().all(|&t| t <= 30.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mu0 = Arc::new(DiagonalGaussian::standard(1));
        let base = AdaptiveConfig::with_defaults(mu0, Horizon::Tours(1), 0).unwrap();
        for edit in [
            |c: &mut AdaptiveConfig| c.a = 0.0,
            |c: &mut AdaptiveConfig| c.k_plus_bar = -1.0,
            |c: &mut AdaptiveConfig| c.n_bar = 0.0,
            |c: &mut AdaptiveConfig| c.burn_in = -1.0,
        ] {
            let mut c = base.clone();
            edit(&mut c);
            assert!(c.validate().is_err());
        }
    }
}
