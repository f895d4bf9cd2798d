#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use restore_kit::prelude::*;

/// Named targets covering every built-in model.
pub fn all_targets() -> Vec<(&'static str, SharedTarget)> {
    let gaussian = Gaussian::new(
        vec![0.5, -1.0],
        DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 0.5]),
    )
    .unwrap();
    let mvt_scale = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, 2.0, -0.4, 0.0, -0.4, 0.7]);
    let data = synthetic_breast_cancer(120, 3);
    vec![
        ("std-gaussian", Arc::new(StdGaussian::new(3)) as SharedTarget),
        ("gaussian", Arc::new(gaussian)),
        ("transformed-beta", Arc::new(TransformedBeta)),
        ("mvt-standard", Arc::new(MultivariateT::standard(10.0, 2).unwrap())),
        ("mvt-general", Arc::new(MultivariateT::new(4.0, vec![0.2, -0.1, 1.0], mvt_scale).unwrap())),
        ("mixture", Arc::new(GaussianMixture2::bimodal())),
        ("pump", Arc::new(PumpHierarchical::standard())),
        ("lgcp", Arc::new(LogGaussianCox::simulate(3, 5).unwrap().0)),
        ("logistic", Arc::new(logistic_posterior(&data, DEFAULT_PRIOR_VARIANCE).unwrap())),
        ("scaled", ScaledTarget::new(Arc::new(StdGaussian::new(2)), 10.0).unwrap().shared()),
    ]
}

pub fn energy(t: &dyn TargetModel, x: &[f64]) -> f64 {
    -t.log_density(x)
}

fn step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

/// Central-difference gradient of `U = -log π̃`.
pub fn fd_gradient(t: &dyn TargetModel, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = step(x[i]);
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (energy(t, &up) - energy(t, &down)) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian of `U` from the analytic gradient, symmetrized.
pub fn fd_hessian(t: &dyn TargetModel, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let s = step(x[j]);
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[j] += s;
        down[j] -= s;
        let gu = t.grad_energy(&up);
        let gd = t.grad_energy(&down);
        for i in 0..d {
            h[(i, j)] = (gu[i] - gd[i]) / (2.0 * s);
        }
    }
    (&h + h.transpose()) * 0.5
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// `|estimate - truth| <= k * se`.
pub fn within_se(estimate: f64, truth: f64, se: f64, k: f64) -> bool {
    (estimate - truth).abs() <= k * se
}
