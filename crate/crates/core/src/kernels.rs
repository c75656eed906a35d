//! Kernel evaluation, Gram matrices and label-signed kernel matrices.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// Gaussian kernel `exp(-||x - z||^2 / (2 sigma^2))`.
    Rbf { bandwidth: f64 },
    /// Plain dot product.
    Linear,
}

impl KernelSpec {
    /// RBF kernel with bandwidth `sigma`; the bandwidth must be finite and
    /// strictly positive.
    pub fn rbf(bandwidth: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { bandwidth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn linear() -> Self {
        KernelSpec::Linear
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { bandwidth } => {
                if !bandwidth.is_finite() || bandwidth <= 0.0 {
                    return Err(Error::param(
                        "bandwidth",
                        bandwidth,
                        "rbf bandwidth must be finite and > 0",
                    ));
                }
                Ok(())
            }
            KernelSpec::Linear => Ok(()),
        }
    }

    /// Kernel value for two points given as plain slices. Assumes the inputs
    /// were already validated (equal length, finite).
    #[inline]
    fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { bandwidth } => {
                let mut d2 = 0.0;
                for (a, b) in x.iter().zip(z.iter()) {
                    let d = a - b;
                    d2 += d * d;
                }
                (-d2 / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::Linear => x.iter().zip(z.iter()).map(|(a, b)| a * b).sum(),
        }
    }
}

/// Dense matrix of kernel evaluations between two sample sets.
///
/// When both sample sets are the same, the matrix is symmetric; for RBF
/// kernels its diagonal is exactly 1 because every entry is computed from
/// explicit coordinate differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    values: DMatrix<f64>,
}

impl GramMatrix {
    /// Wrap precomputed kernel evaluations.
    pub fn from_values(values: DMatrix<f64>) -> Self {
        GramMatrix { values }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn row_count(&self) -> usize {
        self.values.nrows()
    }

    pub fn col_count(&self) -> usize {
        self.values.ncols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// Single kernel evaluation `K(x, z)`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.len() != z.len() {
        return Err(Error::shape(
            "kernel_eval",
            format!("vectors of equal length {}", x.len()),
            format!("{} vs {}", x.len(), z.len()),
        ));
    }
    if !x.iter().all(|v| v.is_finite()) || !z.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("kernel_eval input"));
    }
    Ok(spec.eval_unchecked(x, z))
}

/// Gram matrix with entries `K(a_i, b_j)` for row samples of `a` and `b`.
pub fn gram_matrix(spec: &KernelSpec, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GramMatrix> {
    spec.validate()?;
    if a.ncols() != b.ncols() {
        return Err(Error::shape(
            "gram_matrix",
            format!("feature dimension {}", a.ncols()),
            format!("{} vs {}", a.ncols(), b.ncols()),
        ));
    }
    if !a.iter().all(|v| v.is_finite()) || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::non_finite("gram_matrix input"));
    }

    // Contiguous per-sample rows; DMatrix storage is column-major.
    let a_rows = row_copies(a);
    let b_rows = row_copies(b);
    let (n, m) = (a.nrows(), b.nrows());

    let mut values = DMatrix::zeros(n, m);
    let cols: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            a_rows
                .iter()
                .map(|ai| spec.eval_unchecked(ai, &b_rows[j]))
                .collect()
        })
        .collect();
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            values[(i, j)] = *v;
        }
    }
    Ok(GramMatrix { values })
}

/// Label-signed kernel matrix with entries `y_i * y_j * K_ij`.
///
/// Positive semidefinite whenever `K` is, and applying the same sign
/// pattern twice restores `K`.
pub fn labeled_kernel(k: &GramMatrix, y: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = k.row_count();
    if k.col_count() != n {
        return Err(Error::shape(
            "labeled_kernel",
            "square kernel matrix".to_string(),
            format!("{}x{}", n, k.col_count()),
        ));
    }
    if y.len() != n {
        return Err(Error::shape(
            "labeled_kernel",
            format!("label vector of length {n}"),
            format!("{}", y.len()),
        ));
    }
    let mut omega = k.values.clone();
    for j in 0..n {
        for i in 0..n {
            omega[(i, j)] *= y[i] * y[j];
        }
    }
    Ok(omega)
}

fn row_copies(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn rbf_identical_inputs_is_one() {
        let spec = KernelSpec::rbf(1.0).unwrap();
        let v = [0.3, -0.7];
        assert_eq!(kernel_eval(&spec, &v, &v).unwrap(), 1.0);
    }

    #[test]
    fn linear_is_dot_product() {
        let spec = KernelSpec::linear();
        assert_eq!(kernel_eval(&spec, &[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn rbf_hand_value() {
        // sigma^2 = 12.5, ||x - z||^2 = 25 -> exp(-25/25) = e^-1
        let spec = KernelSpec::rbf(12.5f64.sqrt()).unwrap();
        let k = kernel_eval(&spec, &[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(k, (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn kernel_eval_rejects_bad_inputs() {
        let spec = KernelSpec::linear();
        assert!(matches!(
            kernel_eval(&spec, &[1.0], &[1.0, 2.0]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            kernel_eval(&spec, &[f64::NAN], &[1.0]),
            Err(Error::NonFiniteInput { .. })
        ));
        assert!(matches!(
            KernelSpec::rbf(0.0),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            KernelSpec::rbf(f64::INFINITY),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn rbf_self_gram_has_unit_diagonal() {
        let spec = KernelSpec::rbf(1.0).unwrap();
        let a = mat(3, 2, &[0.0, 0.0, 1.0, 2.0, -1.0, 0.5]);
        let g = gram_matrix(&spec, &a, &a).unwrap();
        for i in 0..3 {
            assert_eq!(g.get(i, i), 1.0);
        }
    }

    #[test]
    fn linear_gram_identity_rows() {
        let spec = KernelSpec::linear();
        let a = mat(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let g = gram_matrix(&spec, &a, &a).unwrap();
        assert_eq!(g.values(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn gram_matches_double_loop_oracle_and_transpose() {
        // Independent double-loop oracle on fixed pseudo-random inputs.
        let a = mat(
            5,
            4,
            &[
                0.77, -0.31, 0.04, 1.52, -0.93, 0.66, 0.25, -1.11, 0.12, 0.58, -0.77, 0.31, 1.05,
                -0.44, 0.93, 0.21, -0.66, 0.08, -1.29, 0.47,
            ],
        );
        let b = mat(
            6,
            4,
            &[
                0.35, 0.91, -0.53, 0.17, -0.22, -0.68, 1.31, 0.74, 0.49, -1.05, 0.27, -0.39, 1.13,
                0.02, -0.84, 0.56, -0.71, 0.63, 0.18, -0.95, 0.29, -0.12, 0.88, 1.07,
            ],
        );
        for spec in [KernelSpec::rbf(1.3).unwrap(), KernelSpec::linear()] {
            let g = gram_matrix(&spec, &a, &b).unwrap();
            let gt = gram_matrix(&spec, &b, &a).unwrap();
            for i in 0..5 {
                for j in 0..6 {
                    let xi: Vec<f64> = a.row(i).iter().copied().collect();
                    let zj: Vec<f64> = b.row(j).iter().copied().collect();
                    let expected = match spec {
                        KernelSpec::Rbf { bandwidth } => {
                            let d2: f64 =
                                xi.iter().zip(&zj).map(|(x, z)| (x - z) * (x - z)).sum();
                            (-d2 / (2.0 * bandwidth * bandwidth)).exp()
                        }
                        KernelSpec::Linear => xi.iter().zip(&zj).map(|(x, z)| x * z).sum(),
                    };
                    assert_relative_eq!(g.get(i, j), expected, max_relative = 1e-14);
                    assert_eq!(g.get(i, j), gt.get(j, i));
                }
            }
        }
    }

    #[test]
    fn gram_rejects_dimension_mismatch() {
        let spec = KernelSpec::linear();
        let a = mat(2, 3, &[1.0; 6]);
        let b = mat(2, 2, &[1.0; 4]);
        assert!(matches!(
            gram_matrix(&spec, &a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn labeled_kernel_flips_off_diagonal_signs() {
        let k = GramMatrix {
            values: mat(2, 2, &[1.0, 0.5, 0.5, 1.0]),
        };
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let omega = labeled_kernel(&k, &y).unwrap();
        assert_eq!(omega, mat(2, 2, &[1.0, -0.5, -0.5, 1.0]));
    }

    #[test]
    fn labeled_kernel_all_positive_is_identity_map() {
        let k = GramMatrix {
            values: mat(2, 2, &[0.9, 0.2, 0.2, 0.8]),
        };
        let y = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(labeled_kernel(&k, &y).unwrap(), k.values);
    }

    #[test]
    fn labeled_kernel_keeps_psd() {
        // Random PSD K from an RBF self-gram; smallest eigenvalue of the
        // signed matrix checked with nalgebra's symmetric eigensolver.
        let pts = mat(
            5,
            3,
            &[
                0.1, 0.7, -0.4, 1.2, -0.8, 0.3, -0.5, 0.9, 1.1, 0.6, -0.2, -0.9, -1.3, 0.4, 0.2,
            ],
        );
        let spec = KernelSpec::rbf(0.9).unwrap();
        let k = gram_matrix(&spec, &pts, &pts).unwrap();
        let y = DVector::from_vec(vec![1.0, -1.0, -1.0, 1.0, -1.0]);
        let omega = labeled_kernel(&k, &y).unwrap();
        let eig = nalgebra::SymmetricEigen::new(omega);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "smallest eigenvalue {min}");
    }

    #[test]
    fn labeled_kernel_rejects_length_mismatch() {
        let k = GramMatrix {
            values: mat(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        };
        let y = DVector::from_vec(vec![1.0, -1.0, 1.0]);
        assert!(matches!(
            labeled_kernel(&k, &y),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
