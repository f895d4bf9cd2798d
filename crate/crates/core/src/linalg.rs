//! Small dense helpers.

use nalgebra::{DMatrix, DVector};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues and the matrix whose columns are the matching unit
/// eigenvectors. Iterates until the off-diagonal Frobenius norm drops below
/// `tol` times the Frobenius norm of the input.
pub fn jacobi_eigen(matrix: &DMatrix<f64>, tol: f64) -> (DVector<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_symmetric_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, 5.0]);
        let (vals, vecs) = jacobi_eigen(&m, 1e-14);
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!((rebuilt - &m).norm() < 1e-12);
        assert!((vecs.transpose() * &vecs - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_input_is_untouched() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 7.0]));
        let (vals, vecs) = jacobi_eigen(&m, 1e-14);
        assert_eq!(vals.as_slice(), &[2.0, 7.0]);
        assert_eq!(vecs, DMatrix::identity(2, 2));
    }
}
