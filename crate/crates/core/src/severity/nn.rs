//! Feed-forward network training: backpropagation with mini-batch Adam.
//!
//! Training is single-threaded and every operation runs in a fixed order,
//! so a given seed reproduces the weights bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::severity::model::{
    Activation, Layer, ModelKind, RegressionModel, TrainingMeta,
};
use crate::severity::{Sample, FEATURE_DIM};

/// Architecture of the severity regressor: four hidden layers then a
/// single sigmoid unit.
pub const DNN_WIDTHS: [usize; 6] = [FEATURE_DIM, 128, 128, 256, 256, 1];

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            epochs: 100,
            learning_rate: 0.001,
            batch_size: 128,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Builds a network with Glorot-uniform weights and zero biases.
/// `activations` must have one entry per layer transition.
pub fn new_network(widths: &[usize], activations: &[Activation], seed: u64) -> RegressionModel {
    assert_eq!(widths.len(), activations.len() + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = widths
        .windows(2)
        .zip(activations)
        .map(|(pair, &activation)| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.gen_range(-limit..limit)).collect())
                .collect();
            Layer {
                weights,
                biases: vec![0.0; fan_out],
                activation,
            }
        })
        .collect();
    RegressionModel {
        kind: ModelKind::Dnn,
        layers,
        training_meta: TrainingMeta {
            seed,
            ..TrainingMeta::default()
        },
    }
}

/// Per-layer gradient buffers, same shapes as the layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
}

impl Gradients {
    fn zeros_like(model: &RegressionModel) -> Self {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| {
                    (
                        l.weights.iter().map(|row| vec![0.0; row.len()]).collect(),
                        vec![0.0; l.biases.len()],
                    )
                })
                .collect(),
        }
    }

    fn reset(&mut self) {
        for (w, b) in &mut self.layers {
            for row in w {
                row.fill(0.0);
            }
            b.fill(0.0);
        }
    }
}

/// Mean squared error of the model over `(inputs, targets)`.
pub fn mse_loss(model: &RegressionModel, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    let mut total = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        let diff = model.forward(x) - y;
        total += diff * diff;
    }
    total / inputs.len() as f64
}

/// Forward pass retaining every layer's activations.
fn forward_trace(model: &RegressionModel, input: &[f64]) -> Vec<Vec<f64>> {
    let mut activations = Vec::with_capacity(model.layers.len() + 1);
    activations.push(input.to_vec());
    for layer in &model.layers {
        let mut out = Vec::new();
        layer.forward_into(activations.last().unwrap(), &mut out);
        activations.push(out);
    }
    activations
}

/// Accumulates dLoss/dParams for one sample into `grads`; returns the
/// sample's squared error. `scale` is the loss-averaging factor.
fn backprop_sample(
    model: &RegressionModel,
    input: &[f64],
    target: f64,
    scale: f64,
    grads: &mut Gradients,
) -> f64 {
    let activations = forward_trace(model, input);
    let prediction = activations.last().unwrap()[0];
    let error = prediction - target;

    // dL/dy for MSE averaged over the batch.
    let mut delta = vec![2.0 * error * scale];
    for (idx, layer) in model.layers.iter().enumerate().rev() {
        let output = &activations[idx + 1];
        let input_act = &activations[idx];
        // Through the activation.
        let dz: Vec<f64> = delta
            .iter()
            .zip(output)
            .map(|(d, &y)| d * layer.activation.derivative_from_output(y))
            .collect();
        let (grad_w, grad_b) = &mut grads.layers[idx];
        let mut next_delta = vec![0.0; input_act.len()];
        for (o, &dzo) in dz.iter().enumerate() {
            grad_b[o] += dzo;
            let gw_row = &mut grad_w[o];
            let w_row = &layer.weights[o];
            for i in 0..input_act.len() {
                gw_row[i] += dzo * input_act[i];
                next_delta[i] += dzo * w_row[i];
            }
        }
        delta = next_delta;
    }
    error * error
}

/// Batch loss and analytic gradients, for training and for verifying
/// backpropagation against finite differences.
pub fn loss_and_gradients(
    model: &RegressionModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> (f64, Gradients) {
    let mut grads = Gradients::zeros_like(model);
    let scale = 1.0 / inputs.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        loss += backprop_sample(model, x, y, scale, &mut grads);
    }
    (loss * scale, grads)
}

struct AdamState {
    m: Gradients,
    v: Gradients,
    t: u64,
}

impl AdamState {
    fn new(model: &RegressionModel) -> Self {
        AdamState {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut RegressionModel, grads: &Gradients, config: &TrainConfig) {
        self.t += 1;
        let bias1 = 1.0 - config.beta1.powi(self.t as i32);
        let bias2 = 1.0 - config.beta2.powi(self.t as i32);
        for (layer_idx, layer) in model.layers.iter_mut().enumerate() {
            let (gw, gb) = &grads.layers[layer_idx];
            let (mw, mb) = &mut self.m.layers[layer_idx];
            let (vw, vb) = &mut self.v.layers[layer_idx];
            for o in 0..layer.biases.len() {
                for i in 0..layer.weights[o].len() {
                    let g = gw[o][i];
                    mw[o][i] = config.beta1 * mw[o][i] + (1.0 - config.beta1) * g;
                    vw[o][i] = config.beta2 * vw[o][i] + (1.0 - config.beta2) * g * g;
                    let m_hat = mw[o][i] / bias1;
                    let v_hat = vw[o][i] / bias2;
                    layer.weights[o][i] -=
                        config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
                }
                let g = gb[o];
                mb[o] = config.beta1 * mb[o] + (1.0 - config.beta1) * g;
                vb[o] = config.beta2 * vb[o] + (1.0 - config.beta2) * g * g;
                let m_hat = mb[o] / bias1;
                let v_hat = vb[o] / bias2;
                layer.biases[o] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
            }
        }
    }
}

/// Trains `model` in place with mini-batch Adam on MSE; returns the final
/// full-set training loss.
pub fn train_network(
    model: &mut RegressionModel,
    inputs: &[Vec<f64>],
    targets: &[f64],
    config: &TrainConfig,
) -> f64 {
    assert_eq!(inputs.len(), targets.len());
    // Batch order comes from a second stream so architecture and shuffling
    // stay independently reproducible.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5a17));
    let mut adam = AdamState::new(model);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let batch = config.batch_size.max(1);
    let mut grads = Gradients::zeros_like(model);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            grads.reset();
            let scale = 1.0 / chunk.len() as f64;
            for &idx in chunk {
                backprop_sample(model, &inputs[idx], targets[idx], scale, &mut grads);
            }
            adam.step(model, &grads, config);
        }
    }
    mse_loss(model, inputs, targets)
}

/// Trains the fixed-architecture severity DNN on normalized targets.
pub fn train_dnn(train: &[Sample], config: &TrainConfig) -> Result<RegressionModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let inputs: Vec<Vec<f64>> = train.iter().map(|s| s.features.as_slice().to_vec()).collect();
    let targets: Vec<f64> = train.iter().map(|s| s.v3_score / 10.0).collect();
    let activations = [
        Activation::ReLU,
        Activation::ReLU,
        Activation::ReLU,
        Activation::ReLU,
        Activation::Sigmoid,
    ];
    let mut model = new_network(&DNN_WIDTHS, &activations, config.seed);
    let final_loss = train_network(&mut model, &inputs, &targets, config);
    model.training_meta = TrainingMeta {
        seed: config.seed,
        epochs: config.epochs,
        learning_rate: config.learning_rate,
        batch_size: config.batch_size,
        final_train_loss: final_loss,
        ridge: None,
        ..TrainingMeta::default()
    };
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severity::FeatureVector;

    fn synthetic_samples(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let mut values = [0.0f64; FEATURE_DIM];
                for v in &mut values {
                    *v = rng.gen_range(0.0..1.0);
                }
                let score = (values[6] * 8.0 + values[3] * 2.0).clamp(0.0, 10.0);
                Sample {
                    id: format!("S-{i}"),
                    features: FeatureVector { values },
                    v3_score: score,
                    v2_label: crate::types::SeverityLabel::Medium,
                    v3_label: crate::types::score_to_label(score, crate::types::CvssVersion::V3)
                        .unwrap(),
                }
            })
            .collect()
    }

    #[test]
    fn dnn_has_fixed_architecture() {
        let model = train_dnn(
            &synthetic_samples(8, 1),
            &TrainConfig {
                epochs: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(model.layer_widths(), vec![13, 128, 128, 256, 256, 1]);
        assert_eq!(model.layers.last().unwrap().activation, Activation::Sigmoid);
    }

    #[test]
    fn training_descends() {
        let samples = synthetic_samples(200, 2);
        let inputs: Vec<Vec<f64>> = samples.iter().map(|s| s.features.as_slice().to_vec()).collect();
        let targets: Vec<f64> = samples.iter().map(|s| s.v3_score / 10.0).collect();
        let config = TrainConfig {
            seed: 2,
            epochs: 20,
            ..TrainConfig::default()
        };
        let activations = [Activation::ReLU, Activation::Sigmoid];
        let mut model = new_network(&[13, 16, 1], &activations, config.seed);
        let initial = mse_loss(&model, &inputs, &targets);
        let final_loss = train_network(&mut model, &inputs, &targets, &config);
        assert!(final_loss < initial, "no descent: {initial} -> {final_loss}");
    }

    #[test]
    fn identical_seeds_identical_weights() {
        let samples = synthetic_samples(64, 3);
        let config = TrainConfig {
            seed: 11,
            epochs: 3,
            ..TrainConfig::default()
        };
        let a = train_dnn(&samples, &config).unwrap();
        let b = train_dnn(&samples, &config).unwrap();
        assert_eq!(a, b);
        let c = train_dnn(
            &samples,
            &TrainConfig {
                seed: 12,
                ..config
            },
        )
        .unwrap();
        assert_ne!(a.layers, c.layers);
    }

    #[test]
    fn overfit_tiny_network_memorizes() {
        let samples = synthetic_samples(10, 4);
        let inputs: Vec<Vec<f64>> = samples.iter().map(|s| s.features.as_slice().to_vec()).collect();
        let targets: Vec<f64> = samples.iter().map(|s| s.v3_score / 10.0).collect();
        let config = TrainConfig {
            seed: 4,
            epochs: 4000,
            batch_size: 10,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let mut model = new_network(
            &[13, 16, 16, 1],
            &[Activation::ReLU, Activation::ReLU, Activation::Sigmoid],
            config.seed,
        );
        train_network(&mut model, &inputs, &targets, &config);
        for (x, &y) in inputs.iter().zip(&targets) {
            assert!((model.forward(x) - y).abs() < 0.05, "not memorized");
        }
    }

    #[test]
    fn prediction_stays_in_range() {
        let model = train_dnn(
            &synthetic_samples(16, 5),
            &TrainConfig {
                epochs: 2,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let mut values = [0.0; FEATURE_DIM];
            for v in &mut values {
                *v = rng.gen_range(0.0..1.0);
            }
            let score = model.predict_score(&FeatureVector { values });
            assert!((0.0..=10.0).contains(&score));
        }
    }

    /// Central finite differences over every parameter of a small net.
    fn finite_difference_check(seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Smooth activations keep the difference quotient clean.
        let mut model = new_network(
            &[3, 4, 4, 1],
            &[Activation::Sigmoid, Activation::Sigmoid, Activation::Sigmoid],
            seed,
        );
        let inputs: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let targets: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
        let (_, grads) = loss_and_gradients(&model, &inputs, &targets);
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for layer_idx in 0..model.layers.len() {
            for o in 0..model.layers[layer_idx].biases.len() {
                for i in 0..model.layers[layer_idx].weights[o].len() {
                    let original = model.layers[layer_idx].weights[o][i];
                    model.layers[layer_idx].weights[o][i] = original + h;
                    let plus = mse_loss(&model, &inputs, &targets);
                    model.layers[layer_idx].weights[o][i] = original - h;
                    let minus = mse_loss(&model, &inputs, &targets);
                    model.layers[layer_idx].weights[o][i] = original;
                    let numeric = (plus - minus) / (2.0 * h);
                    let analytic = grads.layers[layer_idx].0[o][i];
                    let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                    worst = worst.max(rel);
                }
                let original = model.layers[layer_idx].biases[o];
                model.layers[layer_idx].biases[o] = original + h;
                let plus = mse_loss(&model, &inputs, &targets);
                model.layers[layer_idx].biases[o] = original - h;
                let minus = mse_loss(&model, &inputs, &targets);
                model.layers[layer_idx].biases[o] = original;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = grads.layers[layer_idx].1[o];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
                worst = worst.max(rel);
            }
        }
        worst
    }

    #[test]
    fn backprop_matches_finite_differences() {
        for seed in 0..5 {
            let worst = finite_difference_check(seed);
            assert!(worst < 1e-4, "seed {seed}: relative error {worst}");
        }
    }

    #[test]
    fn relu_backprop_on_fixed_example() {
        // Hand-checkable single ReLU unit: y = relu(w x + b), loss = (y-t)^2.
        let model = RegressionModel {
            kind: ModelKind::Dnn,
            layers: vec![Layer {
                weights: vec![vec![2.0]],
                biases: vec![1.0],
                activation: Activation::ReLU,
            }],
            training_meta: TrainingMeta::default(),
        };
        //  x=1: y = 3, t = 1 -> dL/dy = 2*(3-1) = 4; dy/dw = x = 1 -> dw = 4.
        let (loss, grads) = loss_and_gradients(&model, &[vec![1.0]], &[1.0]);
        assert!((loss - 4.0).abs() < 1e-12);
        assert!((grads.layers[0].0[0][0] - 4.0).abs() < 1e-12);
        assert!((grads.layers[0].1[0] - 4.0).abs() < 1e-12);
        // Dead unit: x=-1 -> z = -1 -> y = 0, gradient 0.
        let (_, grads) = loss_and_gradients(&model, &[vec![-1.0]], &[1.0]);
        assert_eq!(grads.layers[0].0[0][0], 0.0);
    }
}
