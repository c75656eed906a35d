//! Evaluation protocol: balanced accuracy, stratified cross-validation,
//! seeded random hyperparameter search and the exact Wilcoxon signed-rank
//! test, plus the benchmark harness that ties them together.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::adaptive::{fit, TrainConfig};
use crate::baselines::{fit_bsv, fit_early_fusion, fit_late_fusion};
use crate::data::{
    select_rows, standardize_apply, standardize_fit, stratified_kfold_indices, stratified_split,
    MultiViewDataset, SplitPlan,
};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::model_io::TrainedModel;

/// Largest effective sample size for which the Wilcoxon p-value is computed
/// by full enumeration of sign assignments.
const WILCOXON_EXACT_LIMIT: usize = 20;

/// Mean of per-class recalls over the classes present in `y_true`.
pub fn balanced_accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    if y_true.is_empty() {
        return Err(Error::param("y_true", "[]", "must be non-empty"));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::shape(
            "balanced_accuracy",
            format!("{} predictions", y_true.len()),
            format!("{}", y_pred.len()),
        ));
    }
    let num_classes = y_true.iter().max().map_or(0, |m| m + 1);
    let mut total = vec![0usize; num_classes];
    let mut correct = vec![0usize; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred.iter()) {
        total[t] += 1;
        if t == p {
            correct[t] += 1;
        }
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..num_classes {
        if total[c] > 0 {
            sum += correct[c] as f64 / total[c] as f64;
            present += 1;
        }
    }
    Ok(sum / present as f64)
}

/// The trainable methods exposed by the evaluation harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AdaptiveWeighted,
    BestSingleView,
    EarlyFusion,
    LateFusion,
}

impl Method {
    /// Short identifier used on the command line and in reports.
    pub fn id(&self) -> &'static str {
        match self {
            Method::AdaptiveWeighted => "aw",
            Method::BestSingleView => "bsv",
            Method::EarlyFusion => "early",
            Method::LateFusion => "late",
        }
    }

    /// Human-readable name for tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            Method::AdaptiveWeighted => "AW-LSSVM",
            Method::BestSingleView => "BSV",
            Method::EarlyFusion => "Early Fusion",
            Method::LateFusion => "Late Fusion",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.trim() {
            "aw" => Ok(Method::AdaptiveWeighted),
            "bsv" => Ok(Method::BestSingleView),
            "early" => Ok(Method::EarlyFusion),
            "late" => Ok(Method::LateFusion),
            other => Err(Error::param(
                "method",
                other,
                "expected one of: aw, bsv, early, late",
            )),
        }
    }
}

/// Fit one method on a training dataset.
pub fn fit_method(
    train: &MultiViewDataset,
    config: &TrainConfig,
    method: Method,
    folds: usize,
) -> Result<TrainedModel> {
    match method {
        Method::AdaptiveWeighted => Ok(TrainedModel::Aw(fit(train, config)?)),
        Method::BestSingleView => Ok(TrainedModel::Baseline(fit_bsv(train, config, folds)?)),
        Method::EarlyFusion => Ok(TrainedModel::Baseline(fit_early_fusion(train, config)?)),
        Method::LateFusion => Ok(TrainedModel::Baseline(fit_late_fusion(train, config)?)),
    }
}

/// Mean balanced accuracy over `k` stratified folds; deterministic for a
/// fixed seed.
pub fn kfold_cv(
    train: &MultiViewDataset,
    config: &TrainConfig,
    method: Method,
    k: usize,
    seed: u64,
) -> Result<f64> {
    let folds = stratified_kfold_indices(train.labels(), k, seed)?;
    let mut scores = Vec::with_capacity(k);
    for test_idx in &folds {
        let train_idx: Vec<usize> = (0..train.num_samples())
            .filter(|i| test_idx.binary_search(i).is_err())
            .collect();
        let sub = train.subset(&train_idx)?;
        let model = fit_method(&sub, config, method, k)?;
        let test_views = train
            .views()
            .iter()
            .map(|m| select_rows(m, test_idx))
            .collect::<Result<Vec<_>>>()?;
        let pred = model.predict(&test_views)?;
        let y_true: Vec<usize> = test_idx.iter().map(|&i| train.labels()[i]).collect();
        scores.push(balanced_accuracy(&y_true, &pred.labels)?);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Log-uniform search box for the three continuous hyperparameters.
///
/// The bandwidth interval is a multiplier applied to the median pairwise
/// Euclidean distance of the standardized, concatenated training features,
/// which keeps the search range scale-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSpace {
    pub gamma_range: (f64, f64),
    pub rho_range: (f64, f64),
    pub bandwidth_range: (f64, f64),
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            gamma_range: (1e-2, 1e3),
            rho_range: (1e-2, 1e3),
            bandwidth_range: (0.1, 10.0),
            budget: 16,
            seed: 7,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("gamma_range", self.gamma_range),
            ("rho_range", self.rho_range),
            ("bandwidth_range", self.bandwidth_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::param(
                    name,
                    format!("({lo}, {hi})"),
                    "bounds must be finite, positive and ordered",
                ));
            }
        }
        if self.budget == 0 {
            return Err(Error::param("budget", 0, "need at least one trial"));
        }
        Ok(())
    }
}

/// Median pairwise Euclidean distance of the standardized, concatenated
/// features; falls back to 1.0 when every pair coincides.
pub fn median_pairwise_distance(ds: &MultiViewDataset) -> f64 {
    let concat = ds.concatenated();
    let stats = standardize_fit(concat.view(0));
    let z = standardize_apply(&stats, concat.view(0)).expect("dims fixed by construction");
    let n = z.nrows();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for c in 0..z.ncols() {
                let d = z[(i, c)] - z[(j, c)];
                d2 += d * d;
            }
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if dists.is_empty() {
        0.0
    } else if dists.len() % 2 == 1 {
        dists[dists.len() / 2]
    } else {
        0.5 * (dists[dists.len() / 2 - 1] + dists[dists.len() / 2])
    };
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// One evaluated configuration of the random search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneTrial {
    pub index: usize,
    pub gamma: f64,
    pub rho: f64,
    pub bandwidth_multiplier: f64,
    /// Resolved kernel bandwidth; absent for linear kernels.
    pub bandwidth: Option<f64>,
    pub cv_score: f64,
}

/// Result of a random search: the winning configuration and the full,
/// index-ordered trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneOutcome {
    pub best: TrainConfig,
    pub best_score: f64,
    pub best_index: usize,
    pub trials: Vec<TuneTrial>,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Seeded log-uniform random search over (gamma, rho, bandwidth) evaluated
/// by k-fold cross-validation. Returns the argmax configuration, ties going
/// to the earliest sampled trial; deterministic for a fixed `space.seed`.
pub fn tune(
    train: &MultiViewDataset,
    space: &SearchSpace,
    base: &TrainConfig,
    method: Method,
    k: usize,
) -> Result<TuneOutcome> {
    space.validate()?;
    base.validate()?;
    let median = match base.kernel {
        KernelSpec::Rbf { .. } => Some(median_pairwise_distance(train)),
        KernelSpec::Linear => None,
    };

    // Sample sequentially so the candidate list depends only on the seed,
    // then evaluate in parallel.
    let mut rng = ChaCha8Rng::seed_from_u64(space.seed);
    let mut candidates = Vec::with_capacity(space.budget);
    for index in 0..space.budget {
        let gamma = log_uniform(&mut rng, space.gamma_range.0, space.gamma_range.1);
        let rho = log_uniform(&mut rng, space.rho_range.0, space.rho_range.1);
        let multiplier = log_uniform(&mut rng, space.bandwidth_range.0, space.bandwidth_range.1);
        let (kernel, bandwidth) = match median {
            Some(m) => {
                let bw = multiplier * m;
                (KernelSpec::Rbf { bandwidth: bw }, Some(bw))
            }
            None => (base.kernel, None),
        };
        let config = TrainConfig {
            gamma,
            rho,
            kernel,
            ..base.clone()
        };
        candidates.push((index, multiplier, bandwidth, config));
    }

    let trials: Vec<TuneTrial> = candidates
        .par_iter()
        .map(|(index, multiplier, bandwidth, config)| {
            let cv_score = kfold_cv(train, config, method, k, space.seed)?;
            Ok(TuneTrial {
                index: *index,
                gamma: config.gamma,
                rho: config.rho,
                bandwidth_multiplier: *multiplier,
                bandwidth: *bandwidth,
                cv_score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best_index = 0;
    for t in &trials {
        if t.cv_score > trials[best_index].cv_score {
            best_index = t.index;
        }
    }
    Ok(TuneOutcome {
        best: candidates[best_index].3.clone(),
        best_score: trials[best_index].cv_score,
        best_index,
        trials,
    })
}

/// Wilcoxon signed-rank statistic and two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonTest {
    /// The smaller of the positive- and negative-difference rank sums.
    pub t: f64,
    pub p: f64,
    /// Sample pairs remaining after zero differences are dropped.
    pub n_effective: usize,
}

/// Paired Wilcoxon signed-rank test.
///
/// Zero differences are dropped, absolute differences are ranked with
/// average ranks for ties, and `T` is the smaller signed-rank sum. The
/// two-sided p-value is exact (full enumeration of sign assignments) up to
/// 20 effective pairs, and a normal approximation with continuity
/// correction beyond that. All-zero differences yield `(T = 0, p = 1)`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonTest> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::shape(
            "wilcoxon_signed_rank",
            "two non-empty vectors of equal length".to_string(),
            format!("{} and {}", a.len(), b.len()),
        ));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::non_finite("wilcoxon differences"));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonTest {
            t: 0.0,
            p: 1.0,
            n_effective: 0,
        });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let mut positive = 0.0;
    let mut negative = 0.0;
    for (d, r) in diffs.iter().zip(ranks.iter()) {
        if *d > 0.0 {
            positive += r;
        } else {
            negative += r;
        }
    }
    let t = positive.min(negative);
    let p = if n <= WILCOXON_EXACT_LIMIT {
        wilcoxon_exact_two_sided_p(t, &ranks)
    } else {
        wilcoxon_normal_two_sided_p(t, n)
    };
    Ok(WilcoxonTest {
        t,
        p,
        n_effective: n,
    })
}

/// Average ranks (1-based) with ties receiving the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // Positions pos..end share the same value.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &idx in &order[pos..end] {
            ranks[idx] = avg;
        }
        pos = end;
    }
    ranks
}

/// Exact two-sided p-value: `min(1, 2 P(W <= t))` where `W` is the rank sum
/// of one sign under uniformly random sign assignments, computed by full
/// enumeration of all `2^n` assignments over the given ranks.
pub fn wilcoxon_exact_two_sided_p(t: f64, ranks: &[f64]) -> f64 {
    let n = ranks.len();
    assert!(n <= WILCOXON_EXACT_LIMIT, "enumeration limited to n <= 20");
    let total = 1u64 << n;
    let mut count = 0u64;
    for mask in 0..total {
        let mut w = 0.0;
        for (k, r) in ranks.iter().enumerate() {
            if mask & (1 << k) != 0 {
                w += r;
            }
        }
        // Ranks are multiples of 0.5, so the comparison is exact; the
        // epsilon only guards accumulated float error for larger n.
        if w <= t + 1e-9 {
            count += 1;
        }
    }
    (2.0 * count as f64 / total as f64).min(1.0)
}

/// Normal-approximation two-sided p-value with continuity correction.
pub fn wilcoxon_normal_two_sided_p(t: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let sd = (nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0).sqrt();
    let z = (t - mean + 0.5) / sd;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * normal.cdf(z)).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Benchmark outcome of one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub format_version: String,
    pub dataset: String,
    pub method: String,
    pub test_fraction: f64,
    pub folds: usize,
    pub tuner_seed: u64,
    pub splits: Vec<SplitReport>,
    pub mean: f64,
    pub std: f64,
}

/// Per-split record: the seed, the tuned configuration, the hold-out score
/// and the full tuner trial log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub seed: u64,
    pub config: TrainConfig,
    pub balanced_accuracy: f64,
    pub trials: Vec<TuneTrial>,
}

impl BenchmarkReport {
    /// Check that the stored moments match the per-split scores.
    pub fn validate_moments(&self) -> Result<()> {
        let scores: Vec<f64> = self.splits.iter().map(|s| s.balanced_accuracy).collect();
        let (mean, std) = mean_std(&scores);
        if (mean - self.mean).abs() > 1e-12 || (std - self.std).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "report moments ({}, {}) disagree with recomputed ({mean}, {std})",
                self.mean, self.std
            )));
        }
        Ok(())
    }

    /// Table cell in the `85.44(±4.23)` percent format.
    pub fn table_cell(&self) -> String {
        format!("{:.2}(±{:.2})", 100.0 * self.mean, 100.0 * self.std)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Full protocol for one dataset: per split seed, stratify, tune on the
/// training side only, refit with the winning configuration and score the
/// hold-out side; then aggregate.
pub fn benchmark(
    ds: &MultiViewDataset,
    plan: &SplitPlan,
    methods: &[Method],
    space: &SearchSpace,
    base: &TrainConfig,
    folds: usize,
) -> Result<Vec<BenchmarkReport>> {
    plan.validate()?;
    space.validate()?;
    base.validate()?;
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut splits = Vec::with_capacity(plan.seeds.len());
        for &seed in &plan.seeds {
            let (train, test) = stratified_split(ds, plan.test_fraction, seed)?;
            // Give each split its own tuner stream.
            let split_space = SearchSpace {
                seed: space.seed.wrapping_add(seed),
                ..space.clone()
            };
            let outcome = tune(&train, &split_space, base, method, folds)?;
            let model = fit_method(&train, &outcome.best, method, folds)?;
            let pred = model.predict(test.views())?;
            let score = balanced_accuracy(test.labels(), &pred.labels)?;
            splits.push(SplitReport {
                seed,
                config: outcome.best,
                balanced_accuracy: score,
                trials: outcome.trials,
            });
        }
        let scores: Vec<f64> = splits.iter().map(|s| s.balanced_accuracy).collect();
        let (mean, std) = mean_std(&scores);
        reports.push(BenchmarkReport {
            format_version: "1".to_string(),
            dataset: ds.name().to_string(),
            method: method.id().to_string(),
            test_fraction: plan.test_fraction,
            folds,
            tuner_seed: space.seed,
            splits,
            mean,
            std,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_accuracy_hand_example() {
        let ba = balanced_accuracy(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap();
        assert!((ba - 0.75).abs() <= 1e-15);
    }

    #[test]
    fn balanced_accuracy_perfect_and_constant() {
        assert_eq!(balanced_accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        // Constant predictor on a balanced 4-class set scores 1/4.
        let y: Vec<usize> = (0..20).map(|i| i % 4).collect();
        let pred = vec![2usize; 20];
        assert!((balanced_accuracy(&y, &pred).unwrap() - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn balanced_accuracy_rejects_empty_and_mismatch() {
        assert!(balanced_accuracy(&[], &[]).is_err());
        assert!(balanced_accuracy(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn wilcoxon_all_positive_differences() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let b = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.t, 0.0);
        assert_eq!(w.p, 2.0 / 512.0);
        assert_eq!(w.n_effective, 9);
    }

    #[test]
    fn wilcoxon_t7_n9_matches_enumeration() {
        // No ties: ranks 1..9; negative differences at ranks 3 and 4 give
        // T = 7 and an exact two-sided p of 38/512.
        let b = [0.0; 9];
        let a = [1.0, 2.0, -3.0, -4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.t, 7.0);
        assert!((w.p - 38.0 / 512.0).abs() <= 1e-12);
        assert!((w.p - 0.0742).abs() < 5e-4);
    }

    #[test]
    fn wilcoxon_identical_inputs() {
        let a = [0.5, 0.7, 0.9];
        let w = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(w.t, 0.0);
        assert_eq!(w.p, 1.0);
        assert_eq!(w.n_effective, 0);
    }

    #[test]
    fn wilcoxon_swapping_sides_changes_nothing() {
        let a = [0.9, 0.8, 0.85, 0.95, 0.7, 0.6, 0.75, 0.8];
        let b = [0.7, 0.82, 0.8, 0.9, 0.72, 0.65, 0.7, 0.6];
        let w1 = wilcoxon_signed_rank(&a, &b).unwrap();
        let w2 = wilcoxon_signed_rank(&b, &a).unwrap();
        assert_eq!(w1.t, w2.t);
        assert_eq!(w1.p, w2.p);
        assert!(w1.p > 0.0 && w1.p <= 1.0);
    }

    #[test]
    fn wilcoxon_average_ranks_for_ties() {
        // |d| = (1, 1, 2): tied pair shares rank 1.5, so T = 1.5 when the
        // smaller side holds one of the tied differences.
        let a = [1.0, -1.0, 2.0];
        let b = [0.0, 0.0, 0.0];
        let w = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(w.t, 1.5);
    }

    #[test]
    fn exact_matches_normal_approximation_at_n15() {
        // Randomized no-ties inputs; agreement within 0.02 absolute.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let diffs: Vec<f64> = (0..15)
                .map(|k| {
                    let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                    sign * (k as f64 + 1.0 + rng.random::<f64>() * 0.25)
                })
                .collect();
            let zeros = vec![0.0; 15];
            let w = wilcoxon_signed_rank(&diffs, &zeros).unwrap();
            let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
            let exact = wilcoxon_exact_two_sided_p(w.t, &ranks);
            let approx = wilcoxon_normal_two_sided_p(w.t, 15);
            assert!(
                (exact - approx).abs() < 0.02,
                "exact {exact} vs approx {approx} at T = {}",
                w.t
            );
        }
    }

    #[test]
    fn mean_std_is_population() {
        let (mean, std) = mean_std(&[1.0, 2.0, 3.0]);
        assert!((mean - 2.0).abs() < 1e-15);
        assert!((std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn method_parsing() {
        use std::str::FromStr;
        assert_eq!(Method::from_str("aw").unwrap(), Method::AdaptiveWeighted);
        assert_eq!(Method::from_str("bsv").unwrap(), Method::BestSingleView);
        assert_eq!(Method::from_str("early").unwrap(), Method::EarlyFusion);
        assert_eq!(Method::from_str("late").unwrap(), Method::LateFusion);
        assert!(Method::from_str("svm").is_err());
    }

    #[test]
    fn log_uniform_point_interval_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(log_uniform(&mut rng, 2.5, 2.5), 2.5);
    }
}
