//! Adaptive weighted multi-view training and fused prediction.
//!
//! Training alternates, for a fixed number of rounds, between solving one
//! weighted LS-SVM dual per (view, class) subproblem and raising the
//! per-sample error penalties of each view from the *other* views'
//! misclassification errors: per round, every view's masked squared error
//! profile is averaged with weights proportional to its Euclidean distance
//! from the receiving view's own profile, so a view leans hardest on the
//! views least similar to it. A decay factor keeps later increments small.
//! Prediction averages the per-view class scores and takes the argmax.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{standardize_apply, standardize_fit, FeatureStats, MultiViewDataset};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, labeled_kernel, KernelSpec};
use crate::solver::{decision_scores, solve_dual, DualSolution, WeightedProblem};

/// Training hyperparameters, shared by every view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Base error penalty (gamma > 0).
    pub gamma: f64,
    /// Scale of the adaptive per-sample penalties (rho >= 0).
    pub rho: f64,
    /// Decay factor applied to weight increments, strictly inside (0, 1).
    pub beta: f64,
    /// Number of training rounds T >= 1; round one is plain LS-SVM.
    pub iterations: usize,
    /// Kernel used by every view.
    pub kernel: KernelSpec,
    /// Z-score each view with training statistics before training.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 1.0,
            rho: 1.0,
            beta: 0.7,
            iterations: 2,
            kernel: KernelSpec::Rbf { bandwidth: 1.0 },
            standardize: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::param("gamma", self.gamma, "must be finite and > 0"));
        }
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(Error::param("rho", self.rho, "must be finite and >= 0"));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 || self.beta >= 1.0 {
            return Err(Error::param(
                "beta",
                self.beta,
                "must lie strictly between 0 and 1",
            ));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations", 0, "need at least one round"));
        }
        self.kernel.validate()
    }
}

/// One-vs-all +/-1 encoding: column `c` is +1 where the label equals `c`.
pub fn encode_one_vs_all(labels: &[usize], num_classes: usize) -> Result<DMatrix<f64>> {
    if labels.is_empty() {
        return Err(Error::param("labels", "[]", "must be non-empty"));
    }
    let mut seen = vec![false; num_classes];
    for &l in labels {
        if l >= num_classes {
            return Err(Error::Validation(format!(
                "label {l} out of range [0, {num_classes})"
            )));
        }
        seen[l] = true;
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::DegenerateLabels(format!(
            "class {c} absent from the labels"
        )));
    }
    Ok(DMatrix::from_fn(labels.len(), num_classes, |i, c| {
        if labels[i] == c {
            1.0
        } else {
            -1.0
        }
    }))
}

/// Zero out the errors of correctly classified samples.
///
/// `e_k >= 1` is equivalent to `y_k f(x_k) <= 0`; the decision boundary
/// itself counts as misclassified.
pub fn mask_misclassified(e: &DVector<f64>) -> DVector<f64> {
    e.map(|v| if v >= 1.0 { v } else { 0.0 })
}

/// One incremental weight update for view `view` ahead of round `t`.
///
/// `masked_sq` holds every view's masked squared error vector from round
/// `t - 1`. The increment is `beta^(t-2)` times the distance-weighted
/// average of those vectors, where each donor view's weight is its
/// normalized Euclidean distance from the receiving view's vector; the
/// receiving view itself always contributes zero. When all pairwise
/// distances vanish the increment is zero and the previous weights are
/// returned unchanged.
pub fn update_weights(
    masked_sq: &[DVector<f64>],
    s_prev: &DVector<f64>,
    beta: f64,
    t: usize,
    view: usize,
) -> Result<DVector<f64>> {
    if t < 2 {
        return Err(Error::param("t", t, "weight updates start at round 2"));
    }
    if view >= masked_sq.len() {
        return Err(Error::param(
            "view",
            view,
            format!("only {} views provided", masked_sq.len()),
        ));
    }
    let n = s_prev.len();
    for (u, e2) in masked_sq.iter().enumerate() {
        if e2.len() != n {
            return Err(Error::shape(
                "update_weights",
                format!("vectors of length {n}"),
                format!("view {u} has length {}", e2.len()),
            ));
        }
    }
    let own = &masked_sq[view];
    let distances: Vec<f64> = masked_sq
        .iter()
        .map(|other| (own - other).norm())
        .collect();
    let denom: f64 = distances.iter().sum();
    if denom == 0.0 {
        return Ok(s_prev.clone());
    }
    let decay = beta.powi(t as i32 - 2);
    let mut out = s_prev.clone();
    for (u, e2) in masked_sq.iter().enumerate() {
        let w = distances[u] / denom;
        if w == 0.0 {
            continue;
        }
        for k in 0..n {
            out[k] += decay * w * e2[k];
        }
    }
    Ok(out)
}

/// Per-(view, class, sample) penalty weights; all zero before round one and
/// non-decreasing across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights {
    per_view_class: Vec<Vec<DVector<f64>>>,
}

impl SampleWeights {
    pub fn zeros(views: usize, classes: usize, samples: usize) -> Self {
        SampleWeights {
            per_view_class: vec![vec![DVector::zeros(samples); classes]; views],
        }
    }

    pub fn get(&self, view: usize, class: usize) -> &DVector<f64> {
        &self.per_view_class[view][class]
    }

    fn set(&mut self, view: usize, class: usize, w: DVector<f64>) {
        self.per_view_class[view][class] = w;
    }

    fn snapshot(&self) -> Vec<Vec<DVector<f64>>> {
        self.per_view_class.clone()
    }
}

/// Trained multi-view model: the final round's dual solutions for every
/// (view, class) subproblem plus everything needed to score new points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwModel {
    pub config: TrainConfig,
    pub num_classes: usize,
    pub view_names: Vec<String>,
    /// Per-view statistics when standardization was enabled.
    pub standardization: Option<Vec<FeatureStats>>,
    /// Training features after standardization, one matrix per view.
    pub train_views: Vec<DMatrix<f64>>,
    pub train_labels: Vec<usize>,
    /// Indexed `[view][class]`.
    pub solutions: Vec<Vec<DualSolution>>,
}

impl AwModel {
    pub fn num_views(&self) -> usize {
        self.train_views.len()
    }
}

/// Weight and error snapshots of one training round, indexed `[view][class]`.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// Weights the round's solves used.
    pub weights: Vec<Vec<DVector<f64>>>,
    /// Training errors the round produced.
    pub errors: Vec<Vec<DVector<f64>>>,
}

/// Round-by-round training history, mainly for tests and diagnostics.
#[derive(Debug, Clone)]
pub struct FitTrace {
    pub iterations: Vec<IterationTrace>,
}

/// Train on a multi-view dataset.
pub fn fit(train: &MultiViewDataset, config: &TrainConfig) -> Result<AwModel> {
    fit_with_trace(train, config).map(|(model, _)| model)
}

/// Train and additionally return per-round weight and error snapshots.
pub fn fit_with_trace(
    train: &MultiViewDataset,
    config: &TrainConfig,
) -> Result<(AwModel, FitTrace)> {
    config.validate()?;
    let n = train.num_samples();
    let views = train.num_views();
    let classes = train.num_classes();
    if classes < 2 {
        return Err(Error::DegenerateLabels(
            "training needs at least two classes".to_string(),
        ));
    }
    let encodings = encode_one_vs_all(train.labels(), classes)?;
    let targets: Vec<DVector<f64>> = (0..classes).map(|c| encodings.column(c).into_owned()).collect();

    let (standardization, features) = if config.standardize {
        let stats: Vec<FeatureStats> = train.views().iter().map(standardize_fit).collect();
        let feats = train
            .views()
            .iter()
            .zip(&stats)
            .map(|(view, s)| standardize_apply(s, view))
            .collect::<Result<Vec<_>>>()?;
        (Some(stats), feats)
    } else {
        (None, train.views().to_vec())
    };

    // The label-signed kernel matrices are fixed across rounds; only the
    // diagonal weight term changes.
    let omegas: Vec<Vec<DMatrix<f64>>> = features
        .iter()
        .map(|x| {
            let gram = gram_matrix(&config.kernel, x, x)?;
            targets
                .iter()
                .map(|y| labeled_kernel(&gram, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut weights = SampleWeights::zeros(views, classes, n);
    let mut trace = FitTrace {
        iterations: Vec::with_capacity(config.iterations),
    };
    let mut solutions: Vec<Vec<DualSolution>> = Vec::new();

    for t in 1..=config.iterations {
        let pairs: Vec<(usize, usize)> = (0..views)
            .flat_map(|v| (0..classes).map(move |c| (v, c)))
            .collect();
        let solved: Vec<DualSolution> = pairs
            .par_iter()
            .map(|&(v, c)| {
                let problem = WeightedProblem::new(
                    &omegas[v][c],
                    &targets[c],
                    config.gamma,
                    config.rho,
                    weights.get(v, c),
                )?;
                solve_dual(&problem)
            })
            .collect::<Result<Vec<_>>>()?;
        solutions = (0..views)
            .map(|v| solved[v * classes..(v + 1) * classes].to_vec())
            .collect();

        trace.iterations.push(IterationTrace {
            weights: weights.snapshot(),
            errors: solutions
                .iter()
                .map(|per_class| per_class.iter().map(|s| s.errors.clone()).collect())
                .collect(),
        });

        if t < config.iterations {
            for c in 0..classes {
                let masked_sq: Vec<DVector<f64>> = solutions
                    .iter()
                    .map(|per_class| mask_misclassified(&per_class[c].errors).map(|x| x * x))
                    .collect();
                for v in 0..views {
                    let updated =
                        update_weights(&masked_sq, weights.get(v, c), config.beta, t + 1, v)?;
                    weights.set(v, c, updated);
                }
            }
        }
    }

    let model = AwModel {
        config: config.clone(),
        num_classes: classes,
        view_names: train.view_names().to_vec(),
        standardization,
        train_views: features,
        train_labels: train.labels().to_vec(),
        solutions,
    };
    Ok((model, trace))
}

/// Predicted labels plus the fused per-class score matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<usize>,
    /// Shape (test samples x classes).
    pub scores: DMatrix<f64>,
}

/// Score new samples: per-view class scores are averaged and the predicted
/// label is the argmax, ties broken toward the lowest class id.
pub fn predict(model: &AwModel, test_views: &[DMatrix<f64>]) -> Result<Prediction> {
    let views = model.num_views();
    if test_views.len() != views {
        return Err(Error::shape(
            "predict",
            format!("{views} views"),
            format!("{}", test_views.len()),
        ));
    }
    let n_test = test_views[0].nrows();
    for (v, m) in test_views.iter().enumerate() {
        if m.nrows() != n_test {
            return Err(Error::shape(
                "predict",
                format!("{n_test} rows in every view"),
                format!("view {v} has {}", m.nrows()),
            ));
        }
    }
    let encodings = encode_one_vs_all(&model.train_labels, model.num_classes)?;
    let mut scores = DMatrix::zeros(n_test, model.num_classes);
    for v in 0..views {
        let expected_dim = match &model.standardization {
            Some(stats) => stats[v].mean.len(),
            None => model.train_views[v].ncols(),
        };
        if test_views[v].ncols() != expected_dim {
            return Err(Error::shape(
                format!("predict view {v}"),
                format!("{expected_dim} features"),
                format!("{}", test_views[v].ncols()),
            ));
        }
        let x = match &model.standardization {
            Some(stats) => standardize_apply(&stats[v], &test_views[v])?,
            None => test_views[v].clone(),
        };
        let k = gram_matrix(&model.config.kernel, &x, &model.train_views[v])?;
        for c in 0..model.num_classes {
            let y = encodings.column(c).into_owned();
            let sol = &model.solutions[v][c];
            let s = decision_scores(&sol.alpha, sol.b, &y, &k)?;
            for i in 0..n_test {
                scores[(i, c)] += s[i];
            }
        }
    }
    scores /= views as f64;

    let labels = (0..n_test)
        .map(|i| {
            let mut best = 0;
            for c in 1..model.num_classes {
                if scores[(i, c)] > scores[(i, best)] {
                    best = c;
                }
            }
            best
        })
        .collect();
    Ok(Prediction { labels, scores })
}
