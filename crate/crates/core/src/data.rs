//! Multi-view dataset container, on-disk format, splits and preprocessing.
//!
//! A dataset directory holds `manifest.json` plus one headerless CSV file
//! per view and a labels file with one integer per line:
//!
//! ```json
//! {
//!   "name": "demo",
//!   "num_samples": 210,
//!   "num_classes": 7,
//!   "labels_file": "labels.txt",
//!   "views": [{ "name": "shape", "file": "view0.csv", "dim": 24 }]
//! }
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N samples shared across V per-view feature matrices plus class labels.
///
/// Every view has exactly `num_samples` rows, all feature values are
/// finite, and every class in `[0, num_classes)` occurs at least once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiViewDataset {
    name: String,
    view_names: Vec<String>,
    views: Vec<DMatrix<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl MultiViewDataset {
    pub fn new(
        name: impl Into<String>,
        view_names: Vec<String>,
        views: Vec<DMatrix<f64>>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let name = name.into();
        if views.is_empty() {
            return Err(Error::Validation("dataset has no views".to_string()));
        }
        if view_names.len() != views.len() {
            return Err(Error::Validation(format!(
                "{} view names for {} views",
                view_names.len(),
                views.len()
            )));
        }
        let n = labels.len();
        if n == 0 {
            return Err(Error::Validation("dataset has no samples".to_string()));
        }
        for (v, m) in views.iter().enumerate() {
            if m.nrows() != n {
                return Err(Error::Validation(format!(
                    "view '{}' has {} rows, labels have {}",
                    view_names[v],
                    m.nrows(),
                    n
                )));
            }
            if m.ncols() == 0 {
                return Err(Error::Validation(format!(
                    "view '{}' has zero feature columns",
                    view_names[v]
                )));
            }
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if !m[(i, j)].is_finite() {
                        return Err(Error::Validation(format!(
                            "view '{}' has a non-finite value at row {}, column {}",
                            view_names[v], i, j
                        )));
                    }
                }
            }
        }
        if num_classes == 0 {
            return Err(Error::Validation("num_classes must be >= 1".to_string()));
        }
        let mut seen = vec![false; num_classes];
        for (i, &l) in labels.iter().enumerate() {
            if l >= num_classes {
                return Err(Error::Validation(format!(
                    "label {l} at row {i} is out of range [0, {num_classes})"
                )));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!(
                "class {missing} has no samples"
            )));
        }
        Ok(MultiViewDataset {
            name,
            view_names,
            views,
            labels,
            num_classes,
        })
    }

    /// Build from views and labels, deriving the class count from the labels.
    pub fn from_parts(
        name: impl Into<String>,
        views: Vec<DMatrix<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        let view_names = (0..views.len()).map(|v| format!("view{v}")).collect();
        Self::new(name, view_names, views, labels, num_classes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &DMatrix<f64> {
        &self.views[v]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn num_views(&self) -> usize {
        self.views.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Per-class sample counts.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Dataset restricted to one view.
    pub fn single_view(&self, v: usize) -> Result<MultiViewDataset> {
        if v >= self.views.len() {
            return Err(Error::param(
                "view",
                v,
                format!("dataset has {} views", self.views.len()),
            ));
        }
        MultiViewDataset::new(
            format!("{}:{}", self.name, self.view_names[v]),
            vec![self.view_names[v].clone()],
            vec![self.views[v].clone()],
            self.labels.clone(),
            self.num_classes,
        )
    }

    /// Single-view dataset with all view features concatenated per sample.
    pub fn concatenated(&self) -> MultiViewDataset {
        let n = self.num_samples();
        let total: usize = self.views.iter().map(|m| m.ncols()).sum();
        let mut merged = DMatrix::zeros(n, total);
        let mut offset = 0;
        for m in &self.views {
            merged.view_mut((0, offset), (n, m.ncols())).copy_from(m);
            offset += m.ncols();
        }
        MultiViewDataset {
            name: format!("{}:concat", self.name),
            view_names: vec!["concat".to_string()],
            views: vec![merged],
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }

    /// Row subset across every view and the labels. The indices must select
    /// at least one sample of every class.
    pub fn subset(&self, indices: &[usize]) -> Result<MultiViewDataset> {
        let views = self
            .views
            .iter()
            .map(|m| select_rows(m, indices))
            .collect::<Result<Vec<_>>>()?;
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        MultiViewDataset::new(
            self.name.clone(),
            self.view_names.clone(),
            views,
            labels,
            self.num_classes,
        )
    }
}

/// Copy the given rows of a matrix, in order.
pub fn select_rows(m: &DMatrix<f64>, indices: &[usize]) -> Result<DMatrix<f64>> {
    for &i in indices {
        if i >= m.nrows() {
            return Err(Error::param("row index", i, format!("matrix has {} rows", m.nrows())));
        }
    }
    Ok(DMatrix::from_fn(indices.len(), m.ncols(), |r, c| {
        m[(indices[r], c)]
    }))
}

/// Hold-out evaluation plan: one train/test split per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitPlan {
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            test_fraction: 0.2,
            seeds: vec![0, 1, 2],
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::param(
                "test_fraction",
                self.test_fraction,
                "must lie strictly between 0 and 1",
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "[]", "at least one split seed required"));
        }
        Ok(())
    }
}

/// Per-feature standardization statistics fitted on a training view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Fit per-feature mean and (population) standard deviation.
pub fn standardize_fit(view: &DMatrix<f64>) -> FeatureStats {
    let n = view.nrows() as f64;
    let d = view.ncols();
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    for j in 0..d {
        let col = view.column(j);
        let m = col.sum() / n;
        let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        mean[j] = m;
        std[j] = var.sqrt();
    }
    FeatureStats { mean, std }
}

/// Apply fitted statistics; zero-variance features map to 0.
pub fn standardize_apply(stats: &FeatureStats, view: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if view.ncols() != stats.mean.len() {
        return Err(Error::shape(
            "standardize_apply",
            format!("{} features", stats.mean.len()),
            format!("{}", view.ncols()),
        ));
    }
    Ok(DMatrix::from_fn(view.nrows(), view.ncols(), |i, j| {
        if stats.std[j] == 0.0 {
            0.0
        } else {
            (view[(i, j)] - stats.mean[j]) / stats.std[j]
        }
    }))
}

/// Stratified train/test split.
///
/// Per class, the test set receives `round(test_fraction * count)` samples
/// clamped to `[1, count - 1]`; sample order within each side follows the
/// original dataset order. Deterministic for a fixed seed.
pub fn stratified_split(
    ds: &MultiViewDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(MultiViewDataset, MultiViewDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::param(
            "test_fraction",
            test_fraction,
            "must lie strictly between 0 and 1",
        ));
    }
    let counts = ds.class_counts();
    for (c, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::Stratification(format!(
                "class {c} has {count} sample(s); need at least 2 to split"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        let mut members: Vec<usize> = (0..ds.num_samples())
            .filter(|&i| ds.labels()[i] == c)
            .collect();
        members.shuffle(&mut rng);
        let want = (test_fraction * count as f64).round() as usize;
        let take = want.clamp(1, count - 1);
        test_idx.extend_from_slice(&members[..take]);
    }
    test_idx.sort_unstable();
    let train_idx: Vec<usize> = (0..ds.num_samples())
        .filter(|i| test_idx.binary_search(i).is_err())
        .collect();
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?))
}

/// Stratified downsample to `target_n` samples with per-class counts
/// proportional to the original distribution (largest-remainder rounding).
pub fn stratified_downsample(
    ds: &MultiViewDataset,
    target_n: usize,
    seed: u64,
) -> Result<MultiViewDataset> {
    let n = ds.num_samples();
    if target_n == 0 || target_n > n {
        return Err(Error::Allocation(format!(
            "target {target_n} outside [1, {n}]"
        )));
    }
    let counts = ds.class_counts();
    let quotas: Vec<f64> = counts
        .iter()
        .map(|&c| target_n as f64 * c as f64 / n as f64)
        .collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    // Distribute the remainder by largest fractional part, ties to the
    // lower class id.
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &c in order.iter().take(target_n - assigned) {
        alloc[c] += 1;
    }
    if let Some(c) = alloc.iter().position(|&a| a == 0) {
        return Err(Error::Allocation(format!(
            "class {c} would lose all its samples at target {target_n}"
        )));
    }
    if alloc == counts {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(target_n);
    for (c, &take) in alloc.iter().enumerate() {
        let mut members: Vec<usize> = (0..n).filter(|&i| ds.labels()[i] == c).collect();
        members.shuffle(&mut rng);
        keep.extend_from_slice(&members[..take]);
    }
    keep.sort_unstable();
    ds.subset(&keep)
}

/// Keep the `k` classes with the most samples (ties to the lower original
/// class id), relabel them to `[0, k)` in descending-count order and drop
/// all other samples from every view.
pub fn retain_top_classes(ds: &MultiViewDataset, k: usize) -> Result<MultiViewDataset> {
    if k == 0 || k > ds.num_classes() {
        return Err(Error::param(
            "k",
            k,
            format!("must lie in [1, {}]", ds.num_classes()),
        ));
    }
    let counts = ds.class_counts();
    let mut order: Vec<usize> = (0..ds.num_classes()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let kept = &order[..k];
    let mut relabel = vec![usize::MAX; ds.num_classes()];
    for (new, &old) in kept.iter().enumerate() {
        relabel[old] = new;
    }
    let keep_idx: Vec<usize> = (0..ds.num_samples())
        .filter(|&i| relabel[ds.labels()[i]] != usize::MAX)
        .collect();
    let views = ds
        .views()
        .iter()
        .map(|m| select_rows(m, &keep_idx))
        .collect::<Result<Vec<_>>>()?;
    let labels = keep_idx.iter().map(|&i| relabel[ds.labels()[i]]).collect();
    MultiViewDataset::new(
        ds.name().to_string(),
        ds.view_names().to_vec(),
        views,
        labels,
        k,
    )
}

/// Stratified k-fold assignment; returns each fold's test indices (sorted).
///
/// Within each class the shuffled samples are dealt round-robin, so fold
/// sizes per class differ by at most one.
pub fn stratified_kfold_indices(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::param("k", k, "need at least 2 folds"));
    }
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; num_classes];
    for &l in labels {
        counts[l] += 1;
    }
    for (c, &count) in counts.iter().enumerate() {
        if count < 2 {
            return Err(Error::Stratification(format!(
                "class {c} has {count} sample(s); k-fold needs at least 2"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for c in 0..num_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (j, idx) in members.into_iter().enumerate() {
            folds[j % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
        if fold.is_empty() {
            return Err(Error::Stratification(format!(
                "{k} folds cannot all be non-empty with {} samples",
                labels.len()
            )));
        }
    }
    Ok(folds)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    name: String,
    num_samples: usize,
    num_classes: usize,
    labels_file: String,
    views: Vec<ViewEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ViewEntry {
    name: String,
    file: String,
    dim: usize,
}

/// Load and validate a dataset directory.
pub fn load_dataset(dir: &Path) -> Result<MultiViewDataset> {
    let manifest_path = dir.join("manifest.json");
    let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&raw)
        .map_err(|e| Error::Validation(format!("manifest.json: {e}")))?;

    if manifest.views.is_empty() {
        return Err(Error::Validation(
            "manifest declares no views".to_string(),
        ));
    }
    let mut views = Vec::with_capacity(manifest.views.len());
    let mut view_names = Vec::with_capacity(manifest.views.len());
    for entry in &manifest.views {
        views.push(read_view_csv(dir, entry, manifest.num_samples)?);
        view_names.push(entry.name.clone());
    }
    let labels = read_labels(
        &dir.join(&manifest.labels_file),
        manifest.num_samples,
        manifest.num_classes,
    )?;
    MultiViewDataset::new(
        manifest.name,
        view_names,
        views,
        labels,
        manifest.num_classes,
    )
}

fn read_view_csv(dir: &Path, entry: &ViewEntry, num_samples: usize) -> Result<DMatrix<f64>> {
    let path = dir.join(&entry.file);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Validation(format!(
                "view '{}': cannot open {}",
                entry.name,
                path.display()
            )),
            _ => Error::Validation(format!("view '{}': {e}", entry.name)),
        })?;
    let mut rows: Vec<f64> = Vec::with_capacity(num_samples * entry.dim);
    let mut count = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            file: entry.file.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if record.len() != entry.dim {
            return Err(Error::Validation(format!(
                "view '{}' row {}: {} columns, manifest declares dim {}",
                entry.name,
                i + 1,
                record.len(),
                entry.dim
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                file: entry.file.clone(),
                line: i + 1,
                message: format!("column {}: '{}' is not a real number", j + 1, field),
            })?;
            if !value.is_finite() {
                return Err(Error::Validation(format!(
                    "view '{}' row {} column {}: non-finite value",
                    entry.name,
                    i + 1,
                    j + 1
                )));
            }
            rows.push(value);
        }
        count += 1;
    }
    if count != num_samples {
        return Err(Error::Validation(format!(
            "view '{}' has {} rows, manifest declares {}",
            entry.name, count, num_samples
        )));
    }
    Ok(DMatrix::from_row_slice(num_samples, entry.dim, &rows))
}

fn read_labels(path: &Path, num_samples: usize, num_classes: usize) -> Result<Vec<usize>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = path
        .file_name()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    let mut labels = Vec::with_capacity(num_samples);
    for (i, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: i64 = line.parse().map_err(|_| Error::Parse {
            file: file.clone(),
            line: i + 1,
            message: format!("'{line}' is not an integer label"),
        })?;
        if value < 0 || value as usize >= num_classes {
            return Err(Error::Validation(format!(
                "label {} at line {} is out of range [0, {})",
                value,
                i + 1,
                num_classes
            )));
        }
        labels.push(value as usize);
    }
    if labels.len() != num_samples {
        return Err(Error::Validation(format!(
            "labels file has {} entries, manifest declares {}",
            labels.len(),
            num_samples
        )));
    }
    Ok(labels)
}

/// Write a dataset directory in the interchange format read by
/// [`load_dataset`].
pub fn save_dataset(ds: &MultiViewDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let views: Vec<ViewEntry> = ds
        .view_names()
        .iter()
        .enumerate()
        .map(|(v, name)| ViewEntry {
            name: name.clone(),
            file: format!("view{v}.csv"),
            dim: ds.view(v).ncols(),
        })
        .collect();
    let manifest = Manifest {
        name: ds.name().to_string(),
        num_samples: ds.num_samples(),
        num_classes: ds.num_classes(),
        labels_file: "labels.txt".to_string(),
        views,
    };
    let manifest_path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(&manifest_path, body + "\n").map_err(|e| Error::io(&manifest_path, e))?;

    for (v, m) in ds.views().iter().enumerate() {
        let path = dir.join(format!("view{v}.csv"));
        let mut out = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            writeln!(out, "{}", row.join(",")).map_err(|e| Error::io(&path, e))?;
        }
    }
    let labels_path = dir.join("labels.txt");
    let mut out = fs::File::create(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    for &l in ds.labels() {
        writeln!(out, "{l}").map_err(|e| Error::io(&labels_path, e))?;
    }
    Ok(())
}
