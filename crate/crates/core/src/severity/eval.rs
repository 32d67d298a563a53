//! Regressor evaluation and corpus-wide v3 backfill.
//!
//! AE is the mean absolute score error; AER additionally divides each
//! error by the true score (samples with a true score of zero are counted
//! in AE only, since the ratio is undefined there). Label accuracy maps
//! scores through the published thresholds and compares labels.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::severity::model::{ModelFile, RegressionModel};
use crate::severity::{encode_features, Sample};
use crate::types::{score_to_label, CvssV3Assessment, CvssVersion, Provenance, SeverityLabel};

/// Counts of records per (v2 label, v3 label) cell. Rows are v2
/// Low/Medium/High; columns are v3 Low/Medium/High/Critical. A v3 `None`
/// label (base score 0) is tallied in the Low column.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub counts: [[usize; 4]; 3],
}

pub const TRANSITION_ROWS: [SeverityLabel; 3] = [
    SeverityLabel::Low,
    SeverityLabel::Medium,
    SeverityLabel::High,
];

pub const TRANSITION_COLS: [SeverityLabel; 4] = [
    SeverityLabel::Low,
    SeverityLabel::Medium,
    SeverityLabel::High,
    SeverityLabel::Critical,
];

impl TransitionMatrix {
    fn row_of(label: SeverityLabel) -> Option<usize> {
        match label {
            SeverityLabel::Low => Some(0),
            SeverityLabel::Medium => Some(1),
            SeverityLabel::High => Some(2),
            _ => None,
        }
    }

    fn col_of(label: SeverityLabel) -> usize {
        match label {
            SeverityLabel::None | SeverityLabel::Low => 0,
            SeverityLabel::Medium => 1,
            SeverityLabel::High => 2,
            SeverityLabel::Critical => 3,
        }
    }

    pub fn increment(&mut self, v2: SeverityLabel, v3: SeverityLabel) {
        if let Some(row) = Self::row_of(v2) {
            self.counts[row][Self::col_of(v3)] += 1;
        }
    }

    pub fn get(&self, v2: SeverityLabel, v3: SeverityLabel) -> usize {
        Self::row_of(v2)
            .map(|row| self.counts[row][Self::col_of(v3)])
            .unwrap_or(0)
    }

    pub fn row_sum(&self, v2: SeverityLabel) -> usize {
        Self::row_of(v2)
            .map(|row| self.counts[row].iter().sum())
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }
}

/// How evaluation treats ground-truth scores of zero in AER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AerZeroPolicy {
    /// Count the sample in AE only (default).
    Exclude,
    /// Refuse to evaluate.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Mean absolute error on the 0-10 score scale.
    pub ae: f64,
    /// Mean of |error|/truth over samples with nonzero truth.
    pub aer: f64,
    pub aer_excluded_zero_targets: usize,
    /// Fraction of samples whose predicted v3 label equals the true one.
    pub overall_accuracy: f64,
    /// Label accuracy grouped by the sample's v2 (input) label.
    pub per_input_class_accuracy: BTreeMap<SeverityLabel, f64>,
    /// v2 label x predicted v3 label over the test set.
    pub transition: TransitionMatrix,
    pub test_size: usize,
}

/// Evaluates a model on held-out samples.
pub fn evaluate(
    model: &RegressionModel,
    test: &[Sample],
    zero_policy: AerZeroPolicy,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let mut abs_error_sum = 0.0;
    let mut ratio_sum = 0.0;
    let mut ratio_count = 0usize;
    let mut zero_targets = 0usize;
    let mut correct = 0usize;
    let mut per_class: BTreeMap<SeverityLabel, (usize, usize)> = BTreeMap::new();
    let mut transition = TransitionMatrix::default();

    for sample in test {
        let predicted = model.predict_score(&sample.features);
        let abs_error = (predicted - sample.v3_score).abs();
        abs_error_sum += abs_error;
        if sample.v3_score == 0.0 {
            match zero_policy {
                AerZeroPolicy::Exclude => zero_targets += 1,
                AerZeroPolicy::Error => return Err(Error::ZeroTargetScore),
            }
        } else {
            ratio_sum += abs_error / sample.v3_score;
            ratio_count += 1;
        }

        let predicted_label = score_to_label(predicted, CvssVersion::V3).expect("clamped");
        let truth_label = score_to_label(sample.v3_score, CvssVersion::V3).expect("feed score");
        let class = per_class.entry(sample.v2_label).or_default();
        class.1 += 1;
        if predicted_label == truth_label {
            correct += 1;
            class.0 += 1;
        }
        transition.increment(sample.v2_label, predicted_label);
    }

    Ok(EvalReport {
        ae: abs_error_sum / test.len() as f64,
        aer: if ratio_count == 0 {
            0.0
        } else {
            ratio_sum / ratio_count as f64
        },
        aer_excluded_zero_targets: zero_targets,
        overall_accuracy: correct as f64 / test.len() as f64,
        per_input_class_accuracy: per_class
            .into_iter()
            .map(|(label, (ok, n))| (label, ok as f64 / n as f64))
            .collect(),
        transition,
        test_size: test.len(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BackfillStats {
    pub predicted: usize,
    pub kept_from_feed: usize,
    pub skipped_no_v2: usize,
}

/// Assigns a Predicted v3 assessment to every record that has a v2 vector
/// but no feed-provided v3. Feed assessments are never overwritten;
/// records lacking v2 are skipped and counted. Returns the transition
/// matrix of v2 label x predicted label.
pub fn backfill_v3(
    corpus: &Corpus,
    model_file: &ModelFile,
) -> (Corpus, TransitionMatrix, BackfillStats) {
    let ranking = model_file.ranking();
    let mut transition = TransitionMatrix::default();
    let mut stats = BackfillStats::default();
    let corpus = corpus.map_records(|record| {
        if record
            .v3
            .as_ref()
            .is_some_and(|v3| v3.provenance == Provenance::FromFeed)
        {
            stats.kept_from_feed += 1;
            return record.clone();
        }
        let Some(v2) = &record.v2 else {
            stats.skipped_no_v2 += 1;
            return record.clone();
        };
        let features = encode_features(record, &ranking).expect("v2 present");
        let predicted = model_file.model.predict_score(&features);
        let assessment =
            CvssV3Assessment::new(predicted, Provenance::Predicted).expect("clamped score");
        transition.increment(v2.label(), assessment.label);
        stats.predicted += 1;
        let mut out = record.clone();
        out.v3 = Some(assessment);
        out
    });
    (corpus, transition, stats)
}

/// Transition matrix of the dual-scored (feed v2 x feed v3) records.
pub fn ground_truth_transition(corpus: &Corpus) -> TransitionMatrix {
    let mut transition = TransitionMatrix::default();
    for record in corpus.records() {
        let (Some(v2), Some(v3)) = (&record.v2, &record.v3) else {
            continue;
        };
        if v3.provenance != Provenance::FromFeed {
            continue;
        }
        transition.increment(v2.label(), v3.label);
    }
    transition
}
