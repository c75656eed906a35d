//! Weighted LS-SVM dual solver.
//!
//! Solves for each binary subproblem the bordered linear system
//!
//! ```text
//!   [ 0    y^T            ] [ b     ]   [ 0   ]
//!   [ y    Omega + Lambda ] [ alpha ] = [ 1_N ]
//! ```
//!
//! with `Lambda = diag(1 / (gamma + rho * s_k))`. The kernel block
//! `Omega + Lambda` is symmetric positive definite (PSD kernel plus a
//! strictly positive diagonal), so the solver factors it once with a
//! Cholesky decomposition, solves the two right-hand sides `y` and `1_N`,
//! and recovers the bias from the border row.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::GramMatrix;

/// One weighted binary LS-SVM instance.
///
/// Holds borrowed views of the label-signed kernel matrix, the +/-1 label
/// vector, the two regularization parameters and the per-sample weights
/// from the previous training round.
#[derive(Debug, Clone, Copy)]
pub struct WeightedProblem<'a> {
    omega: &'a DMatrix<f64>,
    labels: &'a DVector<f64>,
    gamma: f64,
    rho: f64,
    weights: &'a DVector<f64>,
}

impl<'a> WeightedProblem<'a> {
    pub fn new(
        omega: &'a DMatrix<f64>,
        labels: &'a DVector<f64>,
        gamma: f64,
        rho: f64,
        weights: &'a DVector<f64>,
    ) -> Result<Self> {
        let n = omega.nrows();
        if omega.ncols() != n {
            return Err(Error::shape(
                "weighted problem",
                "square omega".to_string(),
                format!("{}x{}", n, omega.ncols()),
            ));
        }
        if labels.len() != n || weights.len() != n {
            return Err(Error::shape(
                "weighted problem",
                format!("labels and weights of length {n}"),
                format!("{} and {}", labels.len(), weights.len()),
            ));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::param("gamma", gamma, "must be finite and > 0"));
        }
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::param("rho", rho, "must be finite and >= 0"));
        }
        if !omega.iter().all(|v| v.is_finite()) {
            return Err(Error::non_finite("omega"));
        }
        if !weights.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(Error::param(
                "weights",
                "s",
                "sample weights must be finite and >= 0",
            ));
        }
        if !labels.iter().all(|v| *v == 1.0 || *v == -1.0) {
            return Err(Error::DegenerateLabels(
                "labels must be exactly +1 or -1".to_string(),
            ));
        }
        let positives = labels.iter().filter(|v| **v == 1.0).count();
        if n < 2 || positives == 0 || positives == n {
            return Err(Error::DegenerateLabels(format!(
                "need at least two samples with both signs present, got {positives}/{n} positive"
            )));
        }
        // The solve relies on symmetry of the kernel block.
        let scale = omega.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for j in 0..n {
            for i in (j + 1)..n {
                if (omega[(i, j)] - omega[(j, i)]).abs() > 1e-10 * scale {
                    return Err(Error::param(
                        "omega",
                        format!("({i},{j})"),
                        "matrix is not symmetric",
                    ));
                }
            }
        }
        Ok(WeightedProblem {
            omega,
            labels,
            gamma,
            rho,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.len() == 0
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        self.omega
    }

    pub fn labels(&self) -> &DVector<f64> {
        self.labels
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn weights(&self) -> &DVector<f64> {
        self.weights
    }

    /// Effective error penalty `gamma + rho * s_k` for sample `k`.
    pub fn penalty(&self, k: usize) -> f64 {
        self.gamma + self.rho * self.weights[k]
    }
}

/// Dual coefficients, bias and training errors of one solved subproblem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alpha: DVector<f64>,
    pub b: f64,
    pub errors: DVector<f64>,
}

/// Solve the bordered dual system for one weighted binary subproblem.
///
/// If the Cholesky factorization of the kernel block fails, the solve is
/// retried once with `1e-10 * trace / n` added to the diagonal before
/// reporting a solver failure.
pub fn solve_dual(p: &WeightedProblem) -> Result<DualSolution> {
    let n = p.len();
    let mut h = p.omega.clone();
    for k in 0..n {
        h[(k, k)] += 1.0 / p.penalty(k);
    }

    let chol = match Cholesky::new(h.clone()) {
        Some(c) => c,
        None => {
            let jitter = 1e-10 * h.trace() / n as f64;
            for k in 0..n {
                h[(k, k)] += jitter;
            }
            Cholesky::new(h).ok_or_else(|| {
                Error::SolverFailure(format!(
                    "kernel block of size {n} is not positive definite even after jitter"
                ))
            })?
        }
    };

    let eta = chol.solve(p.labels);
    let ones = DVector::from_element(n, 1.0);
    let nu = chol.solve(&ones);

    let denom = p.labels.dot(&eta);
    if !denom.is_finite() || denom.abs() < f64::MIN_POSITIVE {
        return Err(Error::SolverFailure(format!(
            "border elimination produced degenerate pivot {denom}"
        )));
    }
    let b = p.labels.dot(&nu) / denom;
    let alpha = &nu - &eta * b;
    if !b.is_finite() || !alpha.iter().all(|v| v.is_finite()) {
        return Err(Error::SolverFailure(
            "non-finite dual solution".to_string(),
        ));
    }

    let errors = training_errors(p, &alpha, b)?;
    Ok(DualSolution { alpha, b, errors })
}

/// Training errors `e_k = 1 - y_k f(x_k) = 1 - (Omega alpha)_k - y_k b`.
///
/// Identical, via the stationarity conditions, to `alpha_k / (gamma +
/// rho s_k)`; the score-based form is used as the primary path because it
/// stays meaningful when the factorization needed diagonal jitter.
pub fn training_errors(p: &WeightedProblem, alpha: &DVector<f64>, b: f64) -> Result<DVector<f64>> {
    if alpha.len() != p.len() {
        return Err(Error::shape(
            "training_errors",
            format!("alpha of length {}", p.len()),
            format!("{}", alpha.len()),
        ));
    }
    let oa = p.omega * alpha;
    Ok(DVector::from_fn(p.len(), |k, _| {
        1.0 - oa[k] - p.labels[k] * b
    }))
}

/// Decision scores `f(x*_i) = sum_k alpha_k y_k K(x*_i, x_k) + b` for every
/// test row of the cross-kernel matrix.
pub fn decision_scores(
    alpha: &DVector<f64>,
    b: f64,
    train_labels: &DVector<f64>,
    k_test_train: &GramMatrix,
) -> Result<DVector<f64>> {
    if k_test_train.col_count() != alpha.len() || train_labels.len() != alpha.len() {
        return Err(Error::shape(
            "decision_scores",
            format!("{} training columns", alpha.len()),
            format!(
                "{} columns, {} labels",
                k_test_train.col_count(),
                train_labels.len()
            ),
        ));
    }
    let signed = DVector::from_fn(alpha.len(), |k, _| alpha[k] * train_labels[k]);
    let mut scores = k_test_train.values() * signed;
    scores.add_scalar_mut(b);
    Ok(scores)
}

/// Max-norm residual of the full `(N+1)`-dimensional bordered system; used
/// by tests and diagnostics as an independent check of a solution.
pub fn bordered_residual(p: &WeightedProblem, sol: &DualSolution) -> f64 {
    let n = p.len();
    let mut r0 = 0.0;
    for k in 0..n {
        r0 += p.labels[k] * sol.alpha[k];
    }
    let mut max = r0.abs();
    let oa = p.omega * &sol.alpha;
    for k in 0..n {
        let lhs = p.labels[k] * sol.b + oa[k] + sol.alpha[k] / p.penalty(k);
        max = max.max((lhs - 1.0).abs());
    }
    max
}
