//! Closed-form linear regression: normal equations with a small ridge
//! term, solved by Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};
use crate::severity::model::{Activation, Layer, ModelKind, RegressionModel, TrainingMeta};
use crate::severity::{Sample, FEATURE_DIM};

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Fits `target ~ bias + w . features` on normalized targets (score/10).
pub fn train_linear(train: &[Sample], ridge: f64) -> Result<RegressionModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let dim = FEATURE_DIM + 1; // intercept first

    // Normal matrix X^T X and right-hand side X^T y, with X carrying a
    // leading 1 column.
    let mut xtx = vec![vec![0.0f64; dim]; dim];
    let mut xty = vec![0.0f64; dim];
    for sample in train {
        let mut row = [0.0f64; FEATURE_DIM + 1];
        row[0] = 1.0;
        row[1..].copy_from_slice(sample.features.as_slice());
        let y = sample.v3_score / 10.0;
        for i in 0..dim {
            xty[i] += row[i] * y;
            for j in i..dim {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
        xtx[i][i] += ridge;
    }

    let beta = solve(xtx, xty)?;
    let (bias, weights) = beta.split_first().expect("dim >= 1");
    Ok(RegressionModel {
        kind: ModelKind::Linear,
        layers: vec![Layer {
            weights: vec![weights.to_vec()],
            biases: vec![*bias],
            activation: Activation::Identity,
        }],
        training_meta: TrainingMeta {
            ridge: Some(ridge),
            weight_init: "least-squares".to_string(),
            rng_algorithm: "none".to_string(),
            ..TrainingMeta::default()
        },
    })
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[pivot_row][col].abs() < 1e-12 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for col in row + 1..n {
            sum -= a[row][col] * x[col];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::severity::FeatureVector;
    use crate::types::SeverityLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_target_samples(n: usize) -> Vec<Sample> {
        // Normalized target = 0.5 * feature_0 + 0.3, other features noise.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        (0..n)
            .map(|i| {
                let mut values = [0.0; FEATURE_DIM];
                for v in &mut values {
                    *v = rng.gen_range(0.0..1.0);
                }
                let target = 0.5 * values[0] + 0.3;
                Sample {
                    id: format!("L-{i}"),
                    features: FeatureVector { values },
                    v3_score: target * 10.0,
                    v2_label: SeverityLabel::Medium,
                    v3_label: SeverityLabel::Medium,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_known_coefficients() {
        let model = train_linear(&linear_target_samples(500), DEFAULT_RIDGE).unwrap();
        let weights = &model.layers[0].weights[0];
        let bias = model.layers[0].biases[0];
        assert!((weights[0] - 0.5).abs() < 1e-6, "w0 = {}", weights[0]);
        assert!((bias - 0.3).abs() < 1e-6, "bias = {bias}");
        for (i, w) in weights.iter().enumerate().skip(1) {
            assert!(w.abs() < 1e-6, "w{i} = {w}");
        }
    }

    #[test]
    fn empty_training_set_rejected() {
        assert!(train_linear(&[], DEFAULT_RIDGE).is_err());
    }

    #[test]
    fn degenerate_data_without_ridge_is_singular() {
        // One repeated sample makes X^T X rank deficient.
        let samples = vec![linear_target_samples(1)[0].clone(); 5];
        assert!(train_linear(&samples, 0.0).is_err());
        // Ridge regularizes it.
        assert!(train_linear(&samples, DEFAULT_RIDGE).is_ok());
    }

    #[test]
    fn prediction_uses_rescale() {
        let model = train_linear(&linear_target_samples(200), DEFAULT_RIDGE).unwrap();
        let mut values = [0.0; FEATURE_DIM];
        values[0] = 1.0;
        let predicted = model.predict_score(&FeatureVector { values });
        assert!((predicted - 8.0).abs() < 1e-4, "{predicted}");
    }
}
