//! Multi-view kernel classification built on weighted least-squares SVMs.
//!
//! The centerpiece is AW-LSSVM, an iteratively reweighted LS-SVM for
//! datasets with several feature views of the same samples: each round,
//! every view raises the error penalties of the samples that *other* views
//! misclassified, weighting donor views by how different their error
//! profiles are, so complementary views end up covering for each other.
//! Raw features never cross view boundaries; only per-sample error
//! statistics do.
//!
//! The crate also ships the self-contained reference methods (best single
//! view, early fusion, late fusion), dataset loading/splitting utilities
//! and an evaluation harness with stratified cross-validation, seeded
//! random hyperparameter search, balanced accuracy and the exact Wilcoxon
//! signed-rank test.
//!
//! ```
//! use awlssvm_core::{fit, predict, synth, TrainConfig};
//!
//! let data = synth::complementary_views(20, 0.3, 7);
//! let model = fit(&data, &TrainConfig::default()).unwrap();
//! let pred = predict(&model, data.views()).unwrap();
//! assert_eq!(pred.labels.len(), data.num_samples());
//! ```

pub mod adaptive;
pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod kernels;
pub mod model_io;
pub mod solver;
pub mod synth;

pub use adaptive::{
    encode_one_vs_all, fit, fit_with_trace, mask_misclassified, predict, update_weights, AwModel,
    FitTrace, Prediction, SampleWeights, TrainConfig,
};
pub use baselines::{
    fit_bsv, fit_early_fusion, fit_late_fusion, predict_baseline, BaselineKind, BaselineModel,
};
pub use data::{
    load_dataset, retain_top_classes, save_dataset, standardize_apply, standardize_fit,
    stratified_downsample, stratified_kfold_indices, stratified_split, FeatureStats,
    MultiViewDataset, SplitPlan,
};
pub use error::{Error, Result};
pub use eval::{
    balanced_accuracy, benchmark, fit_method, kfold_cv, median_pairwise_distance, tune,
    wilcoxon_signed_rank, BenchmarkReport, Method, SearchSpace, SplitReport, TuneOutcome,
    TuneTrial, WilcoxonTest,
};
pub use kernels::{gram_matrix, kernel_eval, labeled_kernel, GramMatrix, KernelSpec};
pub use model_io::{load_model, save_model, TrainedModel};
pub use solver::{
    bordered_residual, decision_scores, solve_dual, training_errors, DualSolution,
    WeightedProblem,
};
