//! Laplace pre-transformation.
//!
//! Finds the mode `m` of a target and the covariance `Σ = H(m)⁻¹`, then
//! rewrites the target in coordinates `x' = L⁻¹ (x - m)` with `L = V Λ^{1/2}`
//! from the eigendecomposition `Σ = V Λ Vᵀ`. In those coordinates a roughly
//! Gaussian target is roughly standard normal.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::jacobi_eigen;
use crate::target::{SharedTarget, TargetModel};

const JACOBI_TOL: f64 = 1e-12;

/// `x = L x' + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    mode: Vec<f64>,
    factor: DMatrix<f64>,
    inverse_factor: DMatrix<f64>,
    log_abs_det: f64,
}

#[derive(Serialize, Deserialize)]
struct AffineMapFile {
    mode: Vec<f64>,
    /// rows of `L`
    factor: Vec<Vec<f64>>,
    log_abs_det: f64,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        Self {
            mode: vec![0.0; dim],
            factor: DMatrix::identity(dim, dim),
            inverse_factor: DMatrix::identity(dim, dim),
            log_abs_det: 0.0,
        }
    }

    pub fn new(mode: Vec<f64>, factor: DMatrix<f64>) -> Result<Self> {
        let d = mode.len();
        if factor.nrows() != d || factor.ncols() != d {
            return Err(invalid("factor", "must be square and match the mode"));
        }
        let lu = factor.clone().lu();
        let det = lu.determinant();
        let inverse_factor = lu
            .try_inverse()
            .filter(|_| det != 0.0 && det.is_finite())
            .ok_or_else(|| invalid("factor", "singular"))?;
        Ok(Self {
            mode,
            factor,
            inverse_factor,
            log_abs_det: det.abs().ln(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mode.len()
    }

    pub fn mode(&self) -> &[f64] {
        &self.mode
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn inverse_factor(&self) -> &DMatrix<f64> {
        &self.inverse_factor
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// `Σ = L Lᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.factor * self.factor.transpose()
    }

    /// Transformed to original coordinates: `L x' + m`.
    pub fn forward(&self, transformed: &[f64]) -> Vec<f64> {
        let y = &self.factor * DVector::from_column_slice(transformed);
        y.iter().zip(&self.mode).map(|(a, b)| a + b).collect()
    }

    /// Original to transformed coordinates: `L⁻¹ (x - m)`.
    pub fn inverse(&self, original: &[f64]) -> Vec<f64> {
        let r = DVector::from_iterator(
            original.len(),
            original.iter().zip(&self.mode).map(|(a, b)| a - b),
        );
        (&self.inverse_factor * r).as_slice().to_vec()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = AffineMapFile {
            mode: self.mode.clone(),
            factor: self
                .factor
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            log_abs_det: self.log_abs_det,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AffineMapFile = serde_json::from_str(text)?;
        let d = file.mode.len();
        if file.factor.len() != d || file.factor.iter().any(|r| r.len() != d) {
            return Err(invalid("factor", "must be a square matrix matching the mode"));
        }
        let flat: Vec<f64> = file.factor.into_iter().flatten().collect();
        let map = Self::new(file.mode, DMatrix::from_row_slice(d, d, &flat))?;
        if (map.log_abs_det - file.log_abs_det).abs() > 1e-8 * (1.0 + file.log_abs_det.abs()) {
            return Err(invalid("log_abs_det", "does not match the factor"));
        }
        Ok(map)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ModeSearch {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for ModeSearch {
    fn default() -> Self {
        Self {
            grad_tol: 1e-8,
            max_iter: 500,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton on `U = -log π̃` with backtracking; steepest descent whenever
/// the Hessian at the iterate is not positive definite.
pub fn find_mode(target: &dyn TargetModel, init: &[f64], opts: ModeSearch) -> Result<Vec<f64>> {
    check_dim(target.dim(), init)?;
    if init.iter().any(|v| !v.is_finite()) {
        return Err(invalid("init", "must be finite"));
    }
    let mut x = init.to_vec();
    let mut energy = -target.log_density(&x);
    let mut grad = target.grad_energy(&x);
    for iter in 0..opts.max_iter {
        let gnorm = norm(&grad);
        if gnorm < opts.grad_tol {
            return Ok(x);
        }
        let g = DVector::from_column_slice(&grad);
        let newton = target
            .hessian_energy(&x)
            .cholesky()
            .map(|c| -c.solve(&g))
            .filter(|p| p.dot(&g) < 0.0);
        let direction = newton.unwrap_or_else(|| -&g);
        let slope = direction.dot(&g);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(direction.iter()).map(|(a, p)| a + step * p).collect();
            let e = -target.log_density(&trial);
            if e.is_finite() && e <= energy + 1e-4 * step * slope {
                moved = trial != x;
                x = trial;
                energy = e;
                break;
            }
            step *= 0.5;
        }
        grad = target.grad_energy(&x);
        if !moved {
            let gnorm = norm(&grad);
            if gnorm < opts.grad_tol {
                return Ok(x);
            }
            return Err(Error::NotConverged {
                iterations: iter + 1,
                grad_norm: gnorm,
                last: x,
            });
        }
    }
    let gnorm = norm(&grad);
    if gnorm < opts.grad_tol {
        return Ok(x);
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        grad_norm: gnorm,
        last: x,
    })
}

/// Build the affine map from the Hessian of `U` at `mode`.
///
/// Eigenpairs are ordered by decreasing covariance eigenvalue, and each
/// eigenvector is signed so its largest-magnitude entry is positive.
pub fn map_at_mode(target: &dyn TargetModel, mode: Vec<f64>) -> Result<AffineMap> {
    check_dim(target.dim(), &mode)?;
    let d = mode.len();
    let (values, vectors) = jacobi_eigen(&target.hessian_energy(&mode), JACOBI_TOL);
    if let Some(&bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::LaplaceInvalid { eigenvalue: bad });
    }
    let mut order: Vec<usize> = (0..d).collect();
    // smallest precision eigenvalue = largest covariance eigenvalue
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut factor = DMatrix::zeros(d, d);
    let mut inverse_factor = DMatrix::zeros(d, d);
    let mut log_abs_det = 0.0;
    for (col, &k) in order.iter().enumerate() {
        let mut v = vectors.column(k).into_owned();
        let lead = v.iter().copied().fold(0.0_f64, |acc, e| if e.abs() > acc.abs() { e } else { acc });
        if lead < 0.0 {
            v = -v;
        }
        let h = values[k];
        factor.set_column(col, &(&v / h.sqrt()));
        inverse_factor.set_row(col, &(v.transpose() * h.sqrt()));
        log_abs_det -= 0.5 * h.ln();
    }
    Ok(AffineMap {
        mode,
        factor,
        inverse_factor,
        log_abs_det,
    })
}

/// Mode search followed by [`map_at_mode`].
pub fn laplace_approximate(target: &dyn TargetModel, init: &[f64]) -> Result<AffineMap> {
    let mode = find_mode(target, init, ModeSearch::default())?;
    map_at_mode(target, mode)
}

/// A target seen through `x = L x' + m`:
/// `U'(x') = U(L x' + m) - log|det L|`, `∇U' = Lᵀ ∇U`, `H' = Lᵀ H L`.
#[derive(Clone)]
pub struct TransformedTarget {
    inner: SharedTarget,
    map: AffineMap,
    covariance: DMatrix<f64>,
}

impl TransformedTarget {
    pub fn new(inner: SharedTarget, map: AffineMap) -> Result<Self> {
        if inner.dim() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: inner.dim(),
                got: map.dim(),
            });
        }
        let covariance = map.covariance();
        Ok(Self {
            inner,
            map,
            covariance,
        })
    }

    pub fn map(&self) -> &AffineMap {
        &self.map
    }
}

impl TargetModel for TransformedTarget {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.inner.log_density(&self.map.forward(x)) + self.map.log_abs_det
    }

    fn grad_energy(&self, x: &[f64]) -> Vec<f64> {
        let g = self.inner.grad_energy(&self.map.forward(x));
        (self.map.factor.transpose() * DVector::from_vec(g)).as_slice().to_vec()
    }

    fn hessian_energy(&self, x: &[f64]) -> DMatrix<f64> {
        let h = self.inner.hessian_energy(&self.map.forward(x));
        self.map.factor.transpose() * h * &self.map.factor
    }

    fn laplacian_energy(&self, x: &[f64]) -> f64 {
        // tr(Lᵀ H L) = <H, L Lᵀ>_F
        self.inner.hessian_energy(&self.map.forward(x)).component_mul(&self.covariance).sum()
    }

    fn grad_and_laplacian(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let y = self.map.forward(x);
        let g = self.inner.grad_energy(&y);
        let lap = self.inner.hessian_energy(&y).component_mul(&self.covariance).sum();
        (
            (self.map.factor.transpose() * DVector::from_vec(g)).as_slice().to_vec(),
            lap,
        )
    }
}

/// Rewrite `target` in the coordinates of `map`, using the target's own closed
/// form when it has one.
pub fn transform_target(target: SharedTarget, map: AffineMap) -> Result<SharedTarget> {
    if target.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            got: map.dim(),
        });
    }
    if let Some(fast) = target.reparameterize(&map) {
        return Ok(fast);
    }
    Ok(Arc::new(TransformedTarget::new(target, map)?))
}
