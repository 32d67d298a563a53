//! CVSS v3 extrapolation from v2 assessments.
//!
//! Only a third of the corpus carries modern v3 scores. Records that have
//! both versions form the ground truth for regressors (closed-form linear
//! least squares and a feed-forward network) that predict v3 base scores
//! for v2-only records. Targets are normalized to [0,1] (score/10) to
//! match the sigmoid output head; predictions are rescaled by 10.

pub mod eval;
pub mod linear;
pub mod model;
pub mod nn;
pub mod pca;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{
    is_cwe_placeholder, AccessComplexity, AccessVector, Authentication, CveRecord, ImpactLevel,
    Provenance, SeverityLabel,
};

/// Fixed ordering of the 13 features; serialized with every model so the
/// encoder and the weights cannot drift apart.
pub const FEATURE_NAMES: [&str; 13] = [
    "access_vector",
    "access_complexity",
    "authentication",
    "conf_impact",
    "integ_impact",
    "avail_impact",
    "base_score",
    "obtain_all_privilege",
    "obtain_user_privilege",
    "obtain_other_privilege",
    "user_interaction_required",
    "cwe_code",
    "v2_label_code",
];

pub const FEATURE_DIM: usize = 13;

/// The encoded regressor input; every component lies in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_DIM],
}

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// CWE ids ranked by corpus frequency (most frequent first); the rank is
/// the scalar CWE feature. Placeholders map to the reserved code 0, as do
/// ids absent from the ranking.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CweRanking {
    ranked: Vec<String>,
}

impl CweRanking {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for record in corpus.records() {
            for cwe in record.concrete_cwes() {
                *counts.entry(cwe).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        CweRanking {
            ranked: ranked.into_iter().map(|(id, _)| id.to_string()).collect(),
        }
    }

    pub fn from_list(ranked: Vec<String>) -> Self {
        CweRanking { ranked }
    }

    pub fn ids(&self) -> &[String] {
        &self.ranked
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    /// Normalized rank in (0,1] for a known id; 0 for placeholders and
    /// unknown ids.
    pub fn code_of(&self, cwe: &str) -> f64 {
        if is_cwe_placeholder(cwe) || self.ranked.is_empty() {
            return 0.0;
        }
        match self.ranked.iter().position(|c| c == cwe) {
            Some(idx) => (idx + 1) as f64 / self.ranked.len() as f64,
            None => 0.0,
        }
    }

    /// The best-ranked code among a record's CWE ids (deterministic choice
    /// for multi-CWE records); 0 when none rank.
    pub fn code_of_record(&self, record: &CveRecord) -> f64 {
        record
            .cwe_ids
            .iter()
            .map(|c| self.code_of(c))
            .filter(|&code| code > 0.0)
            .fold(None::<f64>, |best, code| {
                Some(best.map_or(code, |b| b.min(code)))
            })
            .unwrap_or(0.0)
    }
}

fn ordinal_av(v: AccessVector) -> f64 {
    match v {
        AccessVector::Local => 0.0,
        AccessVector::AdjacentNetwork => 0.5,
        AccessVector::Network => 1.0,
    }
}

fn ordinal_ac(v: AccessComplexity) -> f64 {
    match v {
        AccessComplexity::High => 0.0,
        AccessComplexity::Medium => 0.5,
        AccessComplexity::Low => 1.0,
    }
}

fn ordinal_auth(v: Authentication) -> f64 {
    match v {
        Authentication::Multiple => 0.0,
        Authentication::Single => 0.5,
        Authentication::None => 1.0,
    }
}

fn ordinal_impact(v: ImpactLevel) -> f64 {
    match v {
        ImpactLevel::None => 0.0,
        ImpactLevel::Partial => 0.5,
        ImpactLevel::Complete => 1.0,
    }
}

fn v2_label_code(label: SeverityLabel) -> f64 {
    match label {
        SeverityLabel::Low => 0.0,
        SeverityLabel::Medium => 0.5,
        _ => 1.0,
    }
}

/// Encodes a record's v2 assessment (plus CWE) into the 13-feature vector.
pub fn encode_features(record: &CveRecord, ranking: &CweRanking) -> Result<FeatureVector> {
    let v2 = record
        .v2
        .as_ref()
        .ok_or_else(|| Error::MissingV2(record.id.to_string()))?;
    let values = [
        ordinal_av(v2.access_vector),
        ordinal_ac(v2.access_complexity),
        ordinal_auth(v2.authentication),
        ordinal_impact(v2.conf_impact),
        ordinal_impact(v2.integ_impact),
        ordinal_impact(v2.avail_impact),
        v2.base_score / 10.0,
        f64::from(u8::from(v2.obtain_all_privilege)),
        f64::from(u8::from(v2.obtain_user_privilege)),
        f64::from(u8::from(v2.obtain_other_privilege)),
        f64::from(u8::from(v2.user_interaction_required)),
        ranking.code_of_record(record),
        v2_label_code(v2.label()),
    ];
    Ok(FeatureVector { values })
}

/// One ground-truth sample: encoded features plus the feed-provided v3
/// base score (0–10 scale) and both labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub features: FeatureVector,
    pub v3_score: f64,
    pub v2_label: SeverityLabel,
    pub v3_label: SeverityLabel,
}

/// Collects the dual-scored records as training samples.
pub fn ground_truth(corpus: &Corpus, ranking: &CweRanking) -> Vec<Sample> {
    let mut samples = Vec::new();
    for record in corpus.records() {
        let (Some(v2), Some(v3)) = (&record.v2, &record.v3) else {
            continue;
        };
        if v3.provenance != Provenance::FromFeed {
            continue;
        }
        let features = encode_features(record, ranking).expect("v2 present");
        samples.push(Sample {
            id: record.id.to_string(),
            features,
            v3_score: v3.base_score,
            v2_label: v2.label(),
            v3_label: v3.label,
        });
    }
    samples
}

/// Which label the stratified split balances on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StratifyOn {
    V2,
    V3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    /// Classes too small to split (kept whole in train).
    pub warnings: Vec<String>,
}

/// Splits samples into train/test, stratified by severity label, so each
/// class lands within one sample of the requested train fraction. The
/// shuffle is seeded; equal seeds give identical splits.
pub fn split_dataset(samples: &[Sample], ratio: f64, seed: u64, stratify: StratifyOn) -> Split {
    let mut by_class: BTreeMap<SeverityLabel, Vec<&Sample>> = BTreeMap::new();
    for sample in samples {
        let label = match stratify {
            StratifyOn::V2 => sample.v2_label,
            StratifyOn::V3 => sample.v3_label,
        };
        by_class.entry(label).or_default().push(sample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
        warnings: Vec::new(),
    };
    for (label, mut class) in by_class {
        class.shuffle(&mut rng);
        if class.len() < 2 {
            split
                .warnings
                .push(format!("class {} has {} sample(s); kept whole in train", label.as_str(), class.len()));
            split.train.extend(class.into_iter().cloned());
            continue;
        }
        let n_train = ((class.len() as f64 * ratio).round() as usize).clamp(1, class.len() - 1);
        for (idx, sample) in class.into_iter().enumerate() {
            if idx < n_train {
                split.train.push(sample.clone());
            } else {
                split.test.push(sample.clone());
            }
        }
    }
    split
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{record, v2_max, v2_min, v3_feed};

    #[test]
    fn encode_minimum_record() {
        let mut r = record("CVE-2018-0001");
        r.v2 = Some(v2_min(0.0));
        r.cwe_ids = vec!["NVD-CWE-Other".to_string()];
        let ranking = CweRanking::from_list(vec!["CWE-79".to_string()]);
        let fv = encode_features(&r, &ranking).unwrap();
        // Everything zero: minimum enums, score 0, flags false, placeholder
        // CWE, v2 label Low.
        assert_eq!(fv.values, [0.0; 13]);
    }

    #[test]
    fn encode_maximum_record() {
        let mut r = record("CVE-2018-0002");
        r.v2 = Some(v2_max(10.0));
        r.cwe_ids = vec!["CWE-79".to_string()];
        let ranking = CweRanking::from_list(vec!["CWE-79".to_string()]);
        let fv = encode_features(&r, &ranking).unwrap();
        assert_eq!(fv.values, [1.0; 13]);
    }

    #[test]
    fn encode_hand_checked_vector() {
        use crate::types::*;
        let mut r = record("CVE-2018-0003");
        r.v2 = Some(CvssV2Assessment {
            access_vector: AccessVector::Network,
            access_complexity: AccessComplexity::Medium,
            authentication: Authentication::None,
            conf_impact: ImpactLevel::Partial,
            integ_impact: ImpactLevel::Partial,
            avail_impact: ImpactLevel::None,
            base_score: 5.8,
            obtain_all_privilege: false,
            obtain_user_privilege: false,
            obtain_other_privilege: false,
            user_interaction_required: true,
        });
        r.cwe_ids = vec!["CWE-89".to_string()];
        let ranking =
            CweRanking::from_list(vec!["CWE-79".to_string(), "CWE-89".to_string()]);
        let fv = encode_features(&r, &ranking).unwrap();
        assert_eq!(
            fv.values,
            [1.0, 0.5, 1.0, 0.5, 0.5, 0.0, 0.58, 0.0, 0.0, 0.0, 1.0, 1.0, 0.5]
        );
    }

    #[test]
    fn encode_requires_v2() {
        let r = record("CVE-2018-0004");
        assert!(encode_features(&r, &CweRanking::default()).is_err());
    }

    #[test]
    fn feature_range_invariant() {
        let mut r = record("CVE-2018-0005");
        r.v2 = Some(v2_max(7.3));
        let fv = encode_features(&r, &CweRanking::default()).unwrap();
        assert!(fv.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ranking_orders_by_frequency() {
        let mut records = Vec::new();
        for i in 0..3 {
            let mut r = record(&format!("CVE-2018-000{}", i + 1));
            r.cwe_ids = vec!["CWE-79".to_string()];
            records.push(r);
        }
        let mut r = record("CVE-2018-0009");
        r.cwe_ids = vec!["CWE-89".to_string(), "NVD-CWE-Other".to_string()];
        records.push(r);
        let ranking = CweRanking::from_corpus(&Corpus::from_records(records));
        assert_eq!(ranking.ids(), ["CWE-79", "CWE-89"]);
        assert!((ranking.code_of("CWE-79") - 0.5).abs() < 1e-12);
        assert!((ranking.code_of("CWE-89") - 1.0).abs() < 1e-12);
        assert_eq!(ranking.code_of("NVD-CWE-Other"), 0.0);
        assert_eq!(ranking.code_of("CWE-9999"), 0.0);
    }

    fn sample(label: SeverityLabel, score: f64, n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| Sample {
                id: format!("{}-{i}", label.as_str()),
                features: FeatureVector { values: [0.0; 13] },
                v3_score: score,
                v2_label: SeverityLabel::Medium,
                v3_label: label,
            })
            .collect()
    }

    #[test]
    fn split_is_stratified() {
        let mut samples = Vec::new();
        samples.extend(sample(SeverityLabel::Low, 2.0, 25));
        samples.extend(sample(SeverityLabel::Medium, 5.0, 25));
        samples.extend(sample(SeverityLabel::High, 8.0, 25));
        samples.extend(sample(SeverityLabel::Critical, 9.5, 25));
        let split = split_dataset(&samples, 0.8, 42, StratifyOn::V3);
        assert_eq!(split.train.len(), 80);
        assert_eq!(split.test.len(), 20);
        for label in [
            SeverityLabel::Low,
            SeverityLabel::Medium,
            SeverityLabel::High,
            SeverityLabel::Critical,
        ] {
            assert_eq!(split.train.iter().filter(|s| s.v3_label == label).count(), 20);
            assert_eq!(split.test.iter().filter(|s| s.v3_label == label).count(), 5);
        }
        assert!(split.warnings.is_empty());
    }

    #[test]
    fn split_deterministic_for_seed() {
        let mut samples = Vec::new();
        samples.extend(sample(SeverityLabel::Medium, 5.0, 40));
        samples.extend(sample(SeverityLabel::High, 8.0, 20));
        let a = split_dataset(&samples, 0.8, 7, StratifyOn::V3);
        let b = split_dataset(&samples, 0.8, 7, StratifyOn::V3);
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let c = split_dataset(&samples, 0.8, 8, StratifyOn::V3);
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn tiny_class_kept_in_train_with_warning() {
        let mut samples = sample(SeverityLabel::Medium, 5.0, 10);
        samples.extend(sample(SeverityLabel::Critical, 9.5, 1));
        let split = split_dataset(&samples, 0.8, 1, StratifyOn::V3);
        assert_eq!(split.warnings.len(), 1);
        assert!(split.warnings[0].contains("Critical"));
        assert!(split.train.iter().any(|s| s.v3_label == SeverityLabel::Critical));
        assert!(!split.test.iter().any(|s| s.v3_label == SeverityLabel::Critical));
    }

    #[test]
    fn ground_truth_takes_dual_scored_only() {
        let mut dual = record("CVE-2018-0001");
        dual.v2 = Some(v2_min(5.0));
        dual.v3 = Some(v3_feed(6.1));
        let mut v2_only = record("CVE-2018-0002");
        v2_only.v2 = Some(v2_min(5.0));
        let mut predicted = record("CVE-2018-0003");
        predicted.v2 = Some(v2_min(5.0));
        predicted.v3 =
            Some(crate::types::CvssV3Assessment::new(6.0, Provenance::Predicted).unwrap());
        let corpus = Corpus::from_records([dual, v2_only, predicted]);
        let samples = ground_truth(&corpus, &CweRanking::default());
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].id, "CVE-2018-0001");
        assert_eq!(samples[0].v3_score, 6.1);
    }
}
