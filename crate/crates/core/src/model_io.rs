//! Unified trained-model envelope and its on-disk JSON form.
//!
//! Saving and reloading a model must not change its predictions: the JSON
//! writer emits the shortest decimal form that round-trips every f64
//! exactly, so a save/load/predict cycle is bit-identical.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::adaptive::{predict, AwModel, Prediction};
use crate::baselines::{predict_baseline, BaselineModel};
use crate::error::{Error, Result};

/// Any model the library can train, tagged for dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "snake_case")]
pub enum TrainedModel {
    Aw(AwModel),
    Baseline(BaselineModel),
}

impl TrainedModel {
    /// Number of views expected at prediction time.
    pub fn input_views(&self) -> usize {
        match self {
            TrainedModel::Aw(m) => m.num_views(),
            TrainedModel::Baseline(b) => b.input_views,
        }
    }

    pub fn predict(&self, views: &[DMatrix<f64>]) -> Result<Prediction> {
        match self {
            TrainedModel::Aw(m) => predict(m, views),
            TrainedModel::Baseline(b) => predict_baseline(b, views),
        }
    }
}

/// Write a model as a single JSON document.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let body =
        serde_json::to_string_pretty(model).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, body + "\n").map_err(|e| Error::io(path, e))
}

/// Read a model back from its JSON document.
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptive::{fit, TrainConfig};
    use crate::baselines::fit_late_fusion;
    use crate::data::MultiViewDataset;

    fn dataset() -> MultiViewDataset {
        let labels: Vec<usize> = (0..10).map(|i| i / 5).collect();
        let v0 = DMatrix::from_fn(10, 2, |i, j| {
            (if i < 5 { -1.0 } else { 1.0 }) + 0.3 * ((i * 2 + j) as f64).sin()
        });
        let v1 = DMatrix::from_fn(10, 3, |i, j| {
            (if i < 5 { 0.5 } else { -0.5 }) + 0.2 * ((i * 5 + j) as f64).cos()
        });
        MultiViewDataset::from_parts("io", vec![v0, v1], labels).unwrap()
    }

    #[test]
    fn save_load_predict_is_bit_identical() {
        let ds = dataset();
        let model = TrainedModel::Aw(fit(&ds, &TrainConfig::default()).unwrap());
        let before = model.predict(ds.views()).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);

        let after = loaded.predict(ds.views()).unwrap();
        assert_eq!(before.labels, after.labels);
        assert_eq!(before.scores, after.scores);
    }

    #[test]
    fn baseline_envelope_carries_kind_tag() {
        let ds = dataset();
        let model =
            TrainedModel::Baseline(fit_late_fusion(&ds, &TrainConfig::default()).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let raw = fs::read_to_string(&path).unwrap();
        assert!(raw.contains("\"model_type\": \"baseline\""));
        assert!(raw.contains("\"kind\": \"late_fusion\""));
        assert_eq!(load_model(&path).unwrap(), model);
    }
}
