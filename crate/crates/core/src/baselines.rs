//! Self-contained reference methods: best single view, early fusion and
//! late fusion. All three train plain (single-round, unweighted) LS-SVMs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adaptive::{fit, predict, AwModel, Prediction, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{kfold_cv, Method};
use crate::data::MultiViewDataset;

/// Fold-assignment seed for the internal view-selection cross-validation
/// of best-single-view; fixed so that fitting stays deterministic.
const BSV_CV_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Bsv,
    EarlyFusion,
    LateFusion,
}

/// A fitted baseline: one single-view model for best-single-view and early
/// fusion, one model per view for late fusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    /// Number of views the model expects at prediction time.
    pub input_views: usize,
    /// Chosen view index (best-single-view only).
    pub selected_view: Option<usize>,
    pub models: Vec<AwModel>,
}

/// Strip the adaptive part out of a configuration: a single round never
/// touches the sample weights.
fn plain(config: &TrainConfig) -> TrainConfig {
    TrainConfig {
        iterations: 1,
        ..config.clone()
    }
}

/// Train an LS-SVM per view, rank views by k-fold cross-validated balanced
/// accuracy on the training split, and refit the winner on the full split.
/// Ties go to the lower view index. Test data is never consulted.
pub fn fit_bsv(train: &MultiViewDataset, config: &TrainConfig, folds: usize) -> Result<BaselineModel> {
    if folds < 2 {
        return Err(Error::param("folds", folds, "need at least 2 folds"));
    }
    let cfg = plain(config);
    let mut best_view = 0;
    let mut best_score = f64::NEG_INFINITY;
    for v in 0..train.num_views() {
        let single = train.single_view(v)?;
        let score = kfold_cv(&single, &cfg, Method::AdaptiveWeighted, folds, BSV_CV_SEED)?;
        if score > best_score {
            best_score = score;
            best_view = v;
        }
    }
    let model = fit(&train.single_view(best_view)?, &cfg)?;
    Ok(BaselineModel {
        kind: BaselineKind::Bsv,
        input_views: train.num_views(),
        selected_view: Some(best_view),
        models: vec![model],
    })
}

/// Concatenate all view features per sample and train one LS-SVM.
pub fn fit_early_fusion(train: &MultiViewDataset, config: &TrainConfig) -> Result<BaselineModel> {
    let model = fit(&train.concatenated(), &plain(config))?;
    Ok(BaselineModel {
        kind: BaselineKind::EarlyFusion,
        input_views: train.num_views(),
        selected_view: None,
        models: vec![model],
    })
}

/// Train one LS-SVM per view; prediction is a majority vote over the
/// per-view predicted labels.
pub fn fit_late_fusion(train: &MultiViewDataset, config: &TrainConfig) -> Result<BaselineModel> {
    let cfg = plain(config);
    let models = (0..train.num_views())
        .map(|v| fit(&train.single_view(v)?, &cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaselineModel {
        kind: BaselineKind::LateFusion,
        input_views: train.num_views(),
        selected_view: None,
        models,
    })
}

/// Score new samples with a fitted baseline.
///
/// For late fusion the reported score matrix is the view-averaged soft
/// scores while the labels come from the vote, so labels need not be the
/// argmax of the matrix.
pub fn predict_baseline(model: &BaselineModel, views: &[DMatrix<f64>]) -> Result<Prediction> {
    if views.len() != model.input_views {
        return Err(Error::shape(
            "predict_baseline",
            format!("{} views", model.input_views),
            format!("{}", views.len()),
        ));
    }
    match model.kind {
        BaselineKind::Bsv => {
            let v = model.selected_view.ok_or_else(|| {
                Error::Validation("best-single-view model lacks its view index".to_string())
            })?;
            predict(&model.models[0], std::slice::from_ref(&views[v]))
        }
        BaselineKind::EarlyFusion => {
            let merged = concat_matrices(views)?;
            predict(&model.models[0], std::slice::from_ref(&merged))
        }
        BaselineKind::LateFusion => {
            let per_view = model
                .models
                .iter()
                .zip(views.iter())
                .map(|(m, x)| predict(m, std::slice::from_ref(x)))
                .collect::<Result<Vec<_>>>()?;
            majority_vote(&per_view)
        }
    }
}

fn concat_matrices(views: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let n = views[0].nrows();
    for (v, m) in views.iter().enumerate() {
        if m.nrows() != n {
            return Err(Error::shape(
                "concat",
                format!("{n} rows in every view"),
                format!("view {v} has {}", m.nrows()),
            ));
        }
    }
    let total: usize = views.iter().map(|m| m.ncols()).sum();
    let mut merged = DMatrix::zeros(n, total);
    let mut offset = 0;
    for m in views {
        merged.view_mut((0, offset), (n, m.ncols())).copy_from(m);
        offset += m.ncols();
    }
    Ok(merged)
}

/// Majority vote over per-view predictions; ties go to the class with the
/// highest soft score summed over all views, then to the lowest class id.
fn majority_vote(per_view: &[Prediction]) -> Result<Prediction> {
    let num_classes = per_view[0].scores.ncols();
    let n = per_view[0].labels.len();
    let views = per_view.len() as f64;

    let mut fused_scores = DMatrix::zeros(n, num_classes);
    for p in per_view {
        fused_scores += &p.scores;
    }

    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut votes = vec![0usize; num_classes];
        for p in per_view {
            votes[p.labels[i]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        let mut best = usize::MAX;
        let mut best_sum = f64::NEG_INFINITY;
        for c in 0..num_classes {
            if votes[c] == top && fused_scores[(i, c)] > best_sum {
                best_sum = fused_scores[(i, c)];
                best = c;
            }
        }
        labels.push(best);
    }
    fused_scores /= views;
    Ok(Prediction {
        labels,
        scores: fused_scores,
    })
}
