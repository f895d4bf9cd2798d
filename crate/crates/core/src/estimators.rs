//! Moment summaries, error measures, one-dimensional μ* quadrature, and
//! goodness-of-fit helpers shared by tests and the command line.

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rate::partial_rate_unchecked;
use crate::rng::{stream_rng, Stream};
use crate::target::TargetModel;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub second_moments: Vec<f64>,
    /// Batch-means standard errors of the means; absent when `n < 20`.
    pub std_errors: Option<Vec<f64>>,
    pub second_moment_std_errors: Option<Vec<f64>>,
    pub variance_std_errors: Option<Vec<f64>>,
}

/// Per-coordinate moments of a set of states.
pub fn moment_report<'a>(states: impl IntoIterator<Item = &'a [f64]>) -> Result<MomentReport> {
    let mut flat = Vec::new();
    let mut dim = None;
    for x in states {
        match dim {
            None => dim = Some(x.len()),
            Some(d) if d != x.len() => return Err(Error::DimensionMismatch { expected: d, got: x.len() }),
            _ => {}
        }
        flat.extend_from_slice(x);
    }
    let d = dim.ok_or(Error::EmptySamples)?;
    moment_report_flat(&flat, d)
}

/// As [`moment_report`] for row-major states of dimension `dim`.
pub fn moment_report_flat(flat: &[f64], dim: usize) -> Result<MomentReport> {
    if dim == 0 || flat.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !flat.len().is_multiple_of(dim) {
        return Err(invalid("samples", "length is not a multiple of the dimension"));
    }
    let n = flat.len() / dim;
    let column = |j: usize| flat.iter().skip(j).step_by(dim).copied();
    let mut report = MomentReport {
        n,
        means: Vec::with_capacity(dim),
        variances: Vec::with_capacity(dim),
        second_moments: Vec::with_capacity(dim),
        std_errors: None,
        second_moment_std_errors: None,
        variance_std_errors: None,
    };
    let batched = n >= BATCHES;
    let (mut se_m, mut se_s, mut se_v) = (Vec::new(), Vec::new(), Vec::new());
    for j in 0..dim {
        let mean = column(j).sum::<f64>() / n as f64;
        let second = column(j).map(|v| v * v).sum::<f64>() / n as f64;
        let var = column(j).map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        report.means.push(mean);
        report.second_moments.push(second);
        report.variances.push(var);
        if batched {
            let values: Vec<f64> = column(j).collect();
            se_m.push(batch_means_se(&values, |v| v));
            se_s.push(batch_means_se(&values, |v| v * v));
            se_v.push(batch_means_se(&values, |v| (v - mean).powi(2)));
        }
    }
    if batched {
        report.std_errors = Some(se_m);
        report.second_moment_std_errors = Some(se_s);
        report.variance_std_errors = Some(se_v);
    }
    Ok(report)
}

/// Batch-means standard error of the mean of `f(values)` with [`BATCHES`]
/// contiguous batches; a trailing remainder is dropped from the batches.
pub fn batch_means_se(values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let size = values.len() / BATCHES;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| c.iter().map(|&v| f(v)).sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (var / BATCHES as f64).sqrt()
}

/// Bootstrap standard error of `stat` over resamples of `values`.
pub fn bootstrap_se(values: &[f64], stat: impl Fn(&[f64]) -> f64, resamples: usize, seed: u64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    if resamples < 2 {
        return Err(invalid("resamples", "need at least 2"));
    }
    let mut rng = stream_rng(seed, Stream::Bootstrap);
    let mut buf = vec![0.0; values.len()];
    let stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = values[rng.random_range(0..values.len())];
            }
            stat(&buf)
        })
        .collect();
    let mean = stats.iter().sum::<f64>() / resamples as f64;
    let var = stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(var.sqrt())
}

/// Root mean squared componentwise error.
pub fn rmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: estimate.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptySamples);
    }
    let sq = estimate.iter().zip(truth).map(|(e, t)| (e - t).powi(2)).sum::<f64>();
    Ok((sq / truth.len() as f64).sqrt())
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}

/// Moments of the minimal regeneration distribution of a one-dimensional target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuStarMoments {
    pub m1: f64,
    pub m2: f64,
    /// `∫ max(-κ̃, 0) π̃ dx` with π̃ the target's (possibly unnormalized) density.
    pub c_min: f64,
    /// Intervals where `κ̃ < 0`.
    pub support: Vec<(f64, f64)>,
    /// The same three integrals by a fine trapezoid rule: `[m1, m2, c_min]`.
    pub trapezoid: [f64; 3],
}

const SIGN_SCAN_POINTS: usize = 4000;
const TRAPEZOID_POINTS: usize = 200_000;

/// Quadrature of `x^k max(-κ̃(x), 0) π̃(x)` for `k = 0, 1, 2` over the
/// negative-rate region inside `bracket`, found by a sign scan and bisection.
pub fn mu_star_moments_1d(target: &dyn TargetModel, bracket: (f64, f64), tol: f64) -> Result<MuStarMoments> {
    if target.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: target.dim() });
    }
    let (lo, hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(invalid("bracket", "need lo < hi and tol > 0"));
    }
    let kappa = |x: f64| partial_rate_unchecked(target, &[x]);
    let weight = |x: f64| (-kappa(x)).max(0.0) * target.log_density(&[x]).exp();

    let step = (hi - lo) / SIGN_SCAN_POINTS as f64;
    let mut support = Vec::new();
    let mut start: Option<f64> = None;
    let mut prev_x = lo;
    let mut prev_neg = kappa(lo) < 0.0;
    if prev_neg {
        start = Some(lo);
    }
    for i in 1..=SIGN_SCAN_POINTS {
        let x = lo + i as f64 * step;
        let neg = kappa(x) < 0.0;
        if neg != prev_neg {
            let root = bisect(&kappa, prev_x, x);
            if neg {
                start = Some(root);
            } else if let Some(s) = start.take() {
                support.push((s, root));
            }
        }
        prev_x = x;
        prev_neg = neg;
    }
    if let Some(s) = start {
        support.push((s, hi));
    }
    if support.is_empty() {
        return Err(Error::NoNegativeRegion { lo, hi });
    }

    let mut simpson = [0.0; 3];
    let mut trap = [0.0; 3];
    for &(a, b) in &support {
        for k in 0..3 {
            let f = |x: f64| x.powi(k as i32) * weight(x);
            simpson[k] += adaptive_simpson(&f, a, b, tol / support.len() as f64);
            trap[k] += trapezoid(&f, a, b, TRAPEZOID_POINTS);
        }
    }
    Ok(MuStarMoments {
        m1: simpson[1] / simpson[0],
        m2: simpson[2] / simpson[0],
        c_min: simpson[0],
        support,
        trapezoid: [trap[1] / trap[0], trap[2] / trap[0], trap[0]],
    })
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa_neg = f(a) < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) < 0.0) == fa_neg {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

pub fn trapezoid(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

/// One-sample Kolmogorov–Smirnov test against `Exp(rate)`; returns `(D, p)`.
pub fn ks_exponential(values: &[f64], rate: f64) -> Result<(f64, f64)> {
    ks_test(values, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-rate * x).exp() })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF; returns `(D, p)`
/// with the asymptotic p-value (Stephens' small-sample correction).
pub fn ks_test(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    Ok((d, kolmogorov_sf(lambda)))
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = 2.0 * (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
