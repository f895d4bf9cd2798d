//! Executes a parsed [`RunSpec`]: builds the target, applies the optional
//! Laplace pre-transformation, runs the engine and writes artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use super::config::{Command, RateKind, RunSpec, TargetName, TargetSection};
use crate::adaptive::{simulate_adaptive, AdaptiveConfig};
use crate::error::{Error, Result};
use crate::estimators::moment_report;
use crate::rate::{
    estimate_regen_constant, full_rate, gaussian_truncation_level, partial_rate, rate_quantiles, QUANTILE_LEVELS,
};
use crate::regeneration::DiagonalGaussian;
use crate::restore::{
    estimate_normalizing_constant, simulate_minimal_gaussian_demo, simulate_standard, tour_clt_variance, Horizon,
    OutputSchedule, RateMode, RestoreConfig,
};
use crate::rng::replica_seed;
use crate::run::RestoreRun;
use crate::rwm::{rwm_run, tune_scale, RwmConfig};
use crate::target::{
    load_logistic_dataset, logistic_posterior, synthetic_breast_cancer, Gaussian, GaussianMixture2,
    LogGaussianCox, MultivariateT, PumpHierarchical, ScaledTarget, SharedTarget, StdGaussian, TransformedBeta,
    DEFAULT_PRIOR_VARIANCE,
};
use crate::transform::{laplace_approximate, transform_target, AffineMap};

const DEFAULT_OUTPUT_DIR: &str = "restore-out";
const DEFAULT_LAMBDA0: f64 = 10.0;
const DEFAULT_RWM_STEPS: usize = 100_000;
const DEFAULT_GUIDANCE_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Command-line options layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct DispatchOptions {
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Result of one replica.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub summary: Value,
    /// Human-readable lines for the terminal.
    pub report: Vec<String>,
}

pub fn dispatch(command: Command, spec: &RunSpec, options: &DispatchOptions) -> Result<Vec<Outcome>> {
    if let Some(c) = spec.run.command {
        if c != command {
            return Err(Error::Config {
                key: "run.command".to_string(),
                line: None,
                message: format!("config is for `{c}`, invoked as `{command}`"),
            });
        }
    }
    let seed = options.seed.unwrap_or(spec.run.seed);
    let out_dir = options
        .out
        .clone()
        .or_else(|| spec.run.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let replicas = options.replicas.unwrap_or(1);
    if replicas == 0 {
        return Err(Error::Config {
            key: "--replicas".to_string(),
            line: None,
            message: "must be at least 1".to_string(),
        });
    }
    fs::create_dir_all(&out_dir)?;

    if command == Command::Guidance {
        return Ok(vec![run_guidance(spec, &out_dir)?]);
    }

    let prepared = if command == Command::RunMinimalDemo {
        None
    } else {
        Some(prepare_target(spec, &out_dir)?)
    };

    let seeds: Vec<(u64, PathBuf)> = if replicas == 1 {
        vec![(seed, out_dir.clone())]
    } else {
        (0..replicas)
            .map(|r| (replica_seed(seed, r as u64), out_dir.join(format!("replica-{r}"))))
            .collect()
    };
    let results: Vec<Result<Outcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|(s, dir)| {
                let prepared = prepared.as_ref();
                scope.spawn(move || {
                    fs::create_dir_all(dir)?;
                    run_one(command, spec, prepared, *s, dir)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Io(std::io::Error::other("replica panicked")))))
            .collect()
    });
    results.into_iter().collect()
}

/// Target in sampling coordinates plus the map back to original coordinates.
struct Prepared {
    target: SharedTarget,
    map: Option<AffineMap>,
}

fn prepare_target(spec: &RunSpec, out_dir: &Path) -> Result<Prepared> {
    let section = spec
        .target
        .as_ref()
        .ok_or_else(|| spec.key_error("target", "name", "a [target] table is required for this command"))?;
    let target = build_target(spec, section)?;
    let tr = &spec.transform;
    let map = if let Some(path) = &tr.map {
        Some(AffineMap::load(spec.resolve(path))?)
    } else if tr.laplace {
        let init = tr.init.as_ref().map(|v| v.expand(target.dim())).unwrap_or_else(|| vec![0.0; target.dim()]);
        if init.len() != target.dim() {
            return Err(spec.key_error("transform", "init", "length differs from the target dimension"));
        }
        Some(laplace_approximate(target.as_ref(), &init)?)
    } else {
        None
    };
    match map {
        Some(map) => {
            map.save(out_dir.join("transform.json"))?;
            Ok(Prepared {
                target: transform_target(target, map.clone())?,
                map: Some(map),
            })
        }
        None => Ok(Prepared { target, map: None }),
    }
}

/// Construct the target named in `[target]`.
pub fn build_target(spec: &RunSpec, t: &TargetSection) -> Result<SharedTarget> {
    let dim = t.dim.unwrap_or(1);
    let matrix = |rows: &Vec<Vec<f64>>| -> Result<DMatrix<f64>> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(spec.key_error("target", "cov", "must be a square matrix"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    };
    let attribute = |e: Error| spec.attribute("target", e);
    let target: SharedTarget = match t.name {
        TargetName::StdGaussian => Arc::new(StdGaussian::new(dim)),
        TargetName::Gaussian => {
            let cov = t
                .cov
                .as_ref()
                .map(matrix)
                .transpose()?
                .unwrap_or_else(|| DMatrix::identity(dim, dim));
            let mean = t.mean.as_ref().map(|m| m.expand(cov.nrows())).unwrap_or_else(|| vec![0.0; cov.nrows()]);
            Arc::new(Gaussian::new(mean, cov).map_err(attribute)?)
        }
        TargetName::TransformedBeta => Arc::new(TransformedBeta),
        TargetName::MultivariateT => {
            let nu = t.nu.ok_or_else(|| spec.key_error("target", "nu", "required for multivariate-t"))?;
            let scale = t
                .cov
                .as_ref()
                .map(matrix)
                .transpose()?
                .unwrap_or_else(|| DMatrix::identity(dim, dim));
            let mean = t.mean.as_ref().map(|m| m.expand(scale.nrows())).unwrap_or_else(|| vec![0.0; scale.nrows()]);
            Arc::new(MultivariateT::new(nu, mean, scale).map_err(attribute)?)
        }
        TargetName::GaussianMixture => Arc::new(GaussianMixture2::bimodal()),
        TargetName::Pump => Arc::new(PumpHierarchical::standard()),
        TargetName::Lgcp => {
            let grid = t.grid.unwrap_or(5);
            let seed = t.data_seed.unwrap_or(LogGaussianCox::DEFAULT_SEED);
            Arc::new(LogGaussianCox::simulate(grid, seed).map_err(attribute)?.0)
        }
        TargetName::Logistic => {
            let data = match (&t.data, t.synthetic_rows) {
                (Some(path), _) => load_logistic_dataset(spec.resolve(path))?,
                (None, Some(rows)) => synthetic_breast_cancer(rows, t.data_seed.unwrap_or(1)),
                (None, None) => {
                    return Err(spec.key_error("target", "data", "logistic needs `data` or `synthetic_rows`"))
                }
            };
            let prior = t.prior_variance.unwrap_or(DEFAULT_PRIOR_VARIANCE);
            Arc::new(logistic_posterior(&data, prior).map_err(attribute)?)
        }
    };
    match t.scale {
        Some(s) => Ok(ScaledTarget::new(target, s).map_err(attribute)?.shared()),
        None => Ok(target),
    }
}

fn regeneration(spec: &RunSpec, dim: usize) -> Result<DiagonalGaussian> {
    let r = &spec.regeneration;
    let (mean, sd) = (r.mean.expand(dim), r.sd.expand(dim));
    if mean.len() != dim {
        return Err(spec.key_error("regeneration", "mean", format!("expected {dim} values")));
    }
    if sd.len() != dim {
        return Err(spec.key_error("regeneration", "sd", format!("expected {dim} values")));
    }
    DiagonalGaussian::new(mean, sd).map_err(|e| spec.attribute("regeneration", e))
}

fn horizon(spec: &RunSpec, section: &str, tours: Option<u64>, time: Option<f64>) -> Result<Horizon> {
    match (tours, time) {
        (Some(n), None) => Ok(Horizon::Tours(n)),
        (None, Some(t)) => Ok(Horizon::Time(t)),
        _ => Err(spec.key_error(section, "tours", "exactly one of `tours` or `time` is required")),
    }
}

fn events_enabled(spec: &RunSpec) -> bool {
    spec.run.events.unwrap_or(true)
}

fn run_one(command: Command, spec: &RunSpec, prepared: Option<&Prepared>, seed: u64, dir: &Path) -> Result<Outcome> {
    match command {
        Command::RunStandard | Command::EstimateZ => {
            let p = prepared.expect("target prepared");
            let mut run = run_standard(command, spec, p, seed)?;
            let c_tilde = match spec.standard.as_ref().map(|s| (s.rate, s.c_tilde)) {
                Some((RateKind::Full, Some(c))) => Some(c),
                _ => None,
            };
            let z = match c_tilde {
                Some(c) => Some(estimate_normalizing_constant(&run, c)?),
                None => None,
            };
            back_transform(&mut run, p.map.as_ref());
            let mut summary = run_summary(&run, seed)?;
            summary["z_estimate"] = json!(z);
            write_run(&run, spec, dir)?;
            finish(command, summary, dir)
        }
        Command::RunMinimalDemo => {
            let s = spec.standard.clone().unwrap_or_default();
            let lambda0 = s.lambda0.unwrap_or(DEFAULT_LAMBDA0);
            let h = match (s.tours, s.time) {
                (None, None) => Horizon::Tours(1000),
                (n, t) => horizon(spec, "standard", n, t)?,
            };
            let run = simulate_minimal_gaussian_demo(lambda0, h, seed).map_err(|e| spec.attribute("standard", e))?;
            let mut summary = run_summary(&run, seed)?;
            summary["z_estimate"] = Value::Null;
            let destinations: Vec<f64> = run.tours.iter().skip(1).map(|t| t.start_state[0]).collect();
            summary["regeneration_count"] = json!(destinations.len());
            summary["regeneration_second_moment"] = if destinations.is_empty() {
                Value::Null
            } else {
                json!(destinations.iter().map(|x| x * x).sum::<f64>() / destinations.len() as f64)
            };
            write_run(&run, spec, dir)?;
            finish(command, summary, dir)
        }
        Command::RunAdaptive => {
            let p = prepared.expect("target prepared");
            let a = spec.adaptive.clone().unwrap_or_default();
            let dim = p.target.dim();
            let mu0 = Arc::new(regeneration(spec, dim)?);
            let h = horizon(spec, "adaptive", a.tours, a.time)?;
            let mut config = AdaptiveConfig::with_defaults(mu0, h, seed)?;
            if let Some(v) = a.a {
                config.a = v;
            }
            if let Some(v) = a.k_plus_bar {
                config.k_plus_bar = v;
            }
            if let Some(v) = a.n_bar {
                config.n_bar = v;
            }
            if let Some(v) = a.lambda0 {
                config.lambda0 = v;
            }
            config.burn_in = a.burn_in.unwrap_or(0.0);
            config.freeze_after = a.freeze_after;
            config.record_events = events_enabled(spec);
            config.validate().map_err(|e| spec.attribute("adaptive", e))?;
            let mut out = simulate_adaptive(&config, p.target.as_ref())?;
            back_transform(&mut out.run, p.map.as_ref());
            if let Some(map) = &p.map {
                out.store.map_points(|x| map.forward(x));
            }
            let mut summary = run_summary(&out.run, seed)?;
            summary["z_estimate"] = Value::Null;
            summary["n_points"] = json!(out.store.len());
            summary["bound_violation_count"] = json!(out.bound_violation_count());
            summary["k_plus_bar"] = json!(config.k_plus_bar);
            summary["n_bar"] = json!(config.n_bar);
            write_run(&out.run, spec, dir)?;
            out.store.write_csv(BufWriter::new(File::create(dir.join("points.csv"))?))?;
            finish(command, summary, dir)
        }
        Command::RunRwm => {
            let p = prepared.expect("target prepared");
            let (config, samples, acceptance) = rwm_samples(spec, p, seed)?;
            let original: Vec<Vec<f64>> = match &p.map {
                Some(map) => samples.iter().map(|x| map.forward(x)).collect(),
                None => samples,
            };
            let report = moment_report(original.iter().map(|x| &x[..]))?;
            let out = crate::rwm::RwmOutput {
                last: original.last().cloned().unwrap_or_else(|| vec![0.0; p.target.dim()]),
                samples: original,
                acceptance_rate: acceptance,
            };
            out.write_csv(
                BufWriter::new(File::create(dir.join("samples.csv"))?),
                config.thin,
                config.burn_in_steps,
            )?;
            let summary = json!({
                "seed": seed,
                "n_samples": report.n,
                "scale": config.scale,
                "acceptance_rate": acceptance,
                "means": report.means,
                "variances": report.variances,
                "std_errors": report.std_errors,
            });
            finish(command, summary, dir)
        }
        Command::RateQuantiles => {
            let p = prepared.expect("target prepared");
            let (_, samples, _) = rwm_samples(spec, p, seed)?;
            let target = p.target.as_ref();
            let mu = regeneration(spec, target.dim())?;
            let factor = spec.quantiles.as_ref().and_then(|q| q.safety_factor).unwrap_or(1.0);
            let c_tilde = factor * estimate_regen_constant(&samples, target, &mu)?;
            let partial = rate_quantiles(&samples, |x| partial_rate(target, x).map(|r| r.kappa_tilde).unwrap_or(f64::NAN))?;
            let plus = rate_quantiles(&samples, |x| partial_rate(target, x).map(|r| r.kappa_plus).unwrap_or(f64::NAN))?;
            let full = rate_quantiles(&samples, |x| full_rate(target, &mu, c_tilde, x, f64::INFINITY).unwrap_or(f64::NAN))?;
            let mut out = BufWriter::new(File::create(dir.join("quantiles.csv"))?);
            writeln!(out, "p,kappa_tilde,kappa_plus,kappa")?;
            for (i, p) in QUANTILE_LEVELS.iter().enumerate() {
                writeln!(out, "{p},{},{},{}", partial.rows[i].1, plus.rows[i].1, full.rows[i].1)?;
            }
            out.flush()?;
            let summary = json!({
                "seed": seed,
                "n_samples": samples.len(),
                "c_tilde": c_tilde,
                "mean_kappa_tilde": partial.mean,
                "mean_kappa_plus": plus.mean,
                "mean_kappa": full.mean,
                "levels": QUANTILE_LEVELS,
                "kappa_tilde": partial.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                "kappa_plus": plus.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                "kappa": full.rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            });
            finish(command, summary, dir)
        }
        Command::Guidance => unreachable!("handled before replicas"),
    }
}

fn run_standard(command: Command, spec: &RunSpec, p: &Prepared, seed: u64) -> Result<RestoreRun> {
    let s = spec
        .standard
        .as_ref()
        .ok_or_else(|| spec.key_error("standard", "k_hat", format!("a [standard] table is required for `{command}`")))?;
    let dim = p.target.dim();
    let mu = Arc::new(regeneration(spec, dim)?);
    let rate = match s.rate {
        RateKind::Full => RateMode::Full {
            c_tilde: s.c_tilde.ok_or_else(|| spec.key_error("standard", "c_tilde", "required for the full rate"))?,
        },
        RateKind::Minimal => RateMode::Minimal,
    };
    let k_hat = s.k_hat.ok_or_else(|| spec.key_error("standard", "k_hat", "required"))?;
    let output = match s.mesh {
        Some(spacing) => OutputSchedule::Mesh { spacing },
        None => OutputSchedule::Poisson {
            rate: s.lambda0.unwrap_or(DEFAULT_LAMBDA0),
        },
    };
    let h = match (command, s.tours, s.time) {
        (Command::EstimateZ, None, None) => Horizon::Tours(20_000),
        (_, n, t) => horizon(spec, "standard", n, t)?,
    };
    let mut config = RestoreConfig::new(mu, rate, k_hat, output, h, seed);
    config.record_events = events_enabled(spec);
    config.validate().map_err(|e| spec.attribute("standard", e))?;
    simulate_standard(&config, p.target.as_ref())
}

fn rwm_samples(spec: &RunSpec, p: &Prepared, seed: u64) -> Result<(RwmConfig, Vec<Vec<f64>>, f64)> {
    let r = spec.rwm.clone().unwrap_or_default();
    let target = p.target.as_ref();
    let scale = match r.scale {
        Some(s) => s,
        None => tune_scale(target, None, seed)?,
    };
    let mut config = RwmConfig::new(scale, r.steps.unwrap_or(DEFAULT_RWM_STEPS), seed);
    config.thin = r.thin.unwrap_or(1);
    config.burn_in_steps = r.burn_in_steps.unwrap_or(0);
    config.validate().map_err(|e| spec.attribute("rwm", e))?;
    let out = rwm_run(target, &config)?;
    Ok((config, out.samples, out.acceptance_rate))
}

fn back_transform(run: &mut RestoreRun, map: Option<&AffineMap>) {
    if let Some(map) = map {
        run.map_states(|x| map.forward(x));
    }
}

/// Summary fields shared by the Restore engines.
fn run_summary(run: &RestoreRun, seed: u64) -> Result<Value> {
    let (means, variances, std_errors) = if run.n_samples() > 0 {
        let r = moment_report(run.states())?;
        (json!(r.means), json!(r.variances), json!(r.std_errors))
    } else {
        (Value::Null, Value::Null, Value::Null)
    };
    let sigma2: Option<Vec<f64>> = (0..run.dim)
        .map(|j| tour_clt_variance(run, |x| x[j]).ok())
        .collect();
    Ok(json!({
        "seed": seed,
        "n_tours": run.n_tours(),
        "n_samples": run.n_samples(),
        "total_time": run.total_time,
        "means": means,
        "variances": variances,
        "std_errors": std_errors,
        "sigma2_f": sigma2,
        "truncation_exceedance_frac": run.truncation_exceedance_frac(),
        "rate_evaluations": run.stats.rate_evaluations,
        "regenerations": run.stats.regenerations,
    }))
}

fn write_run(run: &RestoreRun, spec: &RunSpec, dir: &Path) -> Result<()> {
    let mut samples = BufWriter::new(File::create(dir.join("samples.csv"))?);
    run.write_samples_csv(&mut samples)?;
    samples.flush()?;
    let mut tours = BufWriter::new(File::create(dir.join("tours.csv"))?);
    run.write_tours_csv(&mut tours)?;
    tours.flush()?;
    if events_enabled(spec) {
        let mut events = BufWriter::new(File::create(dir.join("events.csv"))?);
        run.write_events_csv(&mut events)?;
        events.flush()?;
    }
    Ok(())
}

fn finish(command: Command, mut summary: Value, dir: &Path) -> Result<Outcome> {
    summary["command"] = json!(command.as_str());
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(dir.join("summary.json"), format!("{text}\n"))?;
    let mut report = vec![format!("{command}: wrote {}", dir.display())];
    for key in ["n_tours", "n_samples", "z_estimate", "means", "n_points", "acceptance_rate", "c_tilde"] {
        if let Some(v) = summary.get(key) {
            if !v.is_null() {
                report.push(format!("  {key} = {v}"));
            }
        }
    }
    Ok(Outcome {
        out_dir: dir.to_path_buf(),
        summary,
        report,
    })
}

fn run_guidance(spec: &RunSpec, dir: &Path) -> Result<Outcome> {
    let g = spec.guidance.clone().unwrap_or_default();
    let dims = g.d.unwrap_or_else(|| (1..=100).collect());
    let eps = g.eps.unwrap_or_else(|| DEFAULT_GUIDANCE_EPS.to_vec());
    let mut out = BufWriter::new(File::create(dir.join("guidance.csv"))?);
    writeln!(out, "d,eps,k_bar")?;
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for &d in &dims {
        for &e in &eps {
            let k = gaussian_truncation_level(d, e)?;
            writeln!(out, "{d},{e},{k}")?;
            report.push(format!("d = {d}, eps = {e:e}: K̄ = {k:.4}"));
            rows.push(json!({"d": d, "eps": e, "k_bar": k}));
        }
    }
    out.flush()?;
    let summary = json!({"command": Command::Guidance.as_str(), "levels": rows});
    fs::write(dir.join("summary.json"), format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(Outcome {
        out_dir: dir.to_path_buf(),
        summary,
        report,
    })
}
