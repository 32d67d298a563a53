//! Regressor representation, prediction, and the self-describing model
//! file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::severity::{CweRanking, FeatureVector, FEATURE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    ReLU,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::ReLU => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output.
    pub fn derivative_from_output(&self, y: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

/// One dense layer; `weights[o][i]` connects input `i` to output `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn output_dim(&self) -> usize {
        self.biases.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.first().map(Vec::len).unwrap_or(0)
    }

    pub fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, bias) in self.weights.iter().zip(&self.biases) {
            let z: f64 = bias
                + row
                    .iter()
                    .zip(input)
                    .map(|(w, x)| w * x)
                    .sum::<f64>();
            out.push(self.activation.apply(z));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    Dnn,
}

/// Hyperparameters and provenance recorded with every trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub final_train_loss: f64,
    /// Deterministic generator used for init and batch order.
    pub rng_algorithm: String,
    pub weight_init: String,
    /// Ridge strength for the closed-form linear solve.
    pub ridge: Option<f64>,
}

impl Default for TrainingMeta {
    fn default() -> Self {
        TrainingMeta {
            seed: 0,
            epochs: 0,
            learning_rate: 0.0,
            batch_size: 0,
            final_train_loss: 0.0,
            rng_algorithm: "chacha8".to_string(),
            weight_init: "glorot-uniform".to_string(),
            ridge: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub kind: ModelKind,
    pub layers: Vec<Layer>,
    pub training_meta: TrainingMeta,
}

impl RegressionModel {
    /// Raw network output in normalized [0,1]-ish target space.
    pub fn forward(&self, input: &[f64]) -> f64 {
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        current[0]
    }

    /// Predicted v3 base score on the 0–10 scale. The sigmoid head keeps
    /// DNN output in (0,1); the linear head is clamped after rescale.
    pub fn predict_score(&self, fv: &FeatureVector) -> f64 {
        (self.forward(fv.as_slice()) * 10.0).clamp(0.0, 10.0)
    }

    pub fn layer_widths(&self) -> Vec<usize> {
        let mut widths = vec![self.layers.first().map(Layer::input_dim).unwrap_or(0)];
        widths.extend(self.layers.iter().map(Layer::output_dim));
        widths
    }
}

/// On-disk model format: architecture, feature ordering, CWE ranking, and
/// training provenance together, so a loaded model can re-encode records
/// exactly as its trainer did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub feature_names: Vec<String>,
    pub cwe_ranking: Vec<String>,
    pub model: RegressionModel,
}

impl ModelFile {
    pub fn new(model: RegressionModel, ranking: &CweRanking) -> Self {
        ModelFile {
            format: "vulncure-model/1".to_string(),
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            cwe_ranking: ranking.ids().to_vec(),
            model,
        }
    }

    pub fn ranking(&self) -> CweRanking {
        CweRanking::from_list(self.cwe_ranking.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn parse_json(text: &str) -> Result<ModelFile> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::FeedFormat(format!("model file: {e}")))?;
        if file.feature_names.len() != FEATURE_NAMES.len() {
            return Err(Error::FeedFormat(format!(
                "model file declares {} features, expected {}",
                file.feature_names.len(),
                FEATURE_NAMES.len()
            )));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_dnn() -> RegressionModel {
        // Single sigmoid unit with zero weights: output is sigmoid(0) = 0.5.
        RegressionModel {
            kind: ModelKind::Dnn,
            layers: vec![Layer {
                weights: vec![vec![0.0; 13]],
                biases: vec![0.0],
                activation: Activation::Sigmoid,
            }],
            training_meta: TrainingMeta::default(),
        }
    }

    #[test]
    fn zero_weight_sigmoid_predicts_five() {
        let model = zero_dnn();
        let fv = FeatureVector { values: [0.3; 13] };
        assert!((model.predict_score(&fv) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn linear_output_clamped() {
        let model = RegressionModel {
            kind: ModelKind::Linear,
            layers: vec![Layer {
                weights: vec![vec![5.0; 13]],
                biases: vec![0.0],
                activation: Activation::Identity,
            }],
            training_meta: TrainingMeta::default(),
        };
        let fv = FeatureVector { values: [1.0; 13] };
        assert_eq!(model.predict_score(&fv), 10.0);
        let negative = RegressionModel {
            layers: vec![Layer {
                weights: vec![vec![-5.0; 13]],
                biases: vec![0.0],
                activation: Activation::Identity,
            }],
            ..model
        };
        assert_eq!(negative.predict_score(&fv), 0.0);
    }

    #[test]
    fn model_file_round_trips() {
        let file = ModelFile::new(
            zero_dnn(),
            &CweRanking::from_list(vec!["CWE-79".to_string(), "CWE-89".to_string()]),
        );
        let json = file.to_json();
        let reloaded = ModelFile::parse_json(&json).unwrap();
        assert_eq!(file, reloaded);
        assert_eq!(reloaded.ranking().ids(), ["CWE-79", "CWE-89"]);
        assert_eq!(reloaded.feature_names[6], "base_score");
    }

    #[test]
    fn activation_values() {
        assert_eq!(Activation::ReLU.apply(-2.0), 0.0);
        assert_eq!(Activation::ReLU.apply(3.0), 3.0);
        assert!((Activation::Sigmoid.apply(0.0) - 0.5).abs() < 1e-12);
        assert_eq!(Activation::Identity.apply(-7.0), -7.0);
    }
}
