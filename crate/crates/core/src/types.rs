//! Domain types shared by every pipeline stage: CVE identifiers, CVSS
//! assessments, severity labels, and the per-record CPE list.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dates::DisclosureEstimate;
use crate::error::{Error, Result};

/// A CVE identifier, e.g. `CVE-2011-0700`.
///
/// The raw string is kept verbatim so formatting round-trips (sequence
/// numbers may carry leading zeros or exceed four digits).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CveId {
    year: i32,
    sequence: u64,
    raw: String,
}

impl CveId {
    pub fn parse(raw: &str) -> Result<Self> {
        let err = || Error::InvalidCveId(raw.to_string());
        let rest = raw.strip_prefix("CVE-").ok_or_else(err)?;
        let (year_s, seq_s) = rest.split_once('-').ok_or_else(err)?;
        if year_s.len() != 4 || seq_s.len() < 4 || !seq_s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let year: i32 = year_s.parse().map_err(|_| err())?;
        let sequence: u64 = seq_s.parse().map_err(|_| err())?;
        if sequence < 1 {
            return Err(err());
        }
        Ok(CveId {
            year,
            sequence,
            raw: raw.to_string(),
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn sequence(&self) -> u64 {
        self.sequence
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    /// Entries predating the 1999 CVE numbering scheme are kept but flagged.
    pub fn is_legacy(&self) -> bool {
        self.year < 1999
    }
}

impl fmt::Display for CveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// CVSS scoring scheme version.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CvssVersion {
    V2,
    V3,
}

/// Severity label, ordered `None < Low < Medium < High < Critical`.
///
/// `None` and `Critical` exist only under v3.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum SeverityLabel {
    None,
    Low,
    Medium,
    High,
    Critical,
}

impl SeverityLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeverityLabel::None => "None",
            SeverityLabel::Low => "Low",
            SeverityLabel::Medium => "Medium",
            SeverityLabel::High => "High",
            SeverityLabel::Critical => "Critical",
        }
    }

    /// Labels valid under the given scheme, in ascending order.
    pub fn all(version: CvssVersion) -> &'static [SeverityLabel] {
        match version {
            CvssVersion::V2 => &[
                SeverityLabel::Low,
                SeverityLabel::Medium,
                SeverityLabel::High,
            ],
            CvssVersion::V3 => &[
                SeverityLabel::None,
                SeverityLabel::Low,
                SeverityLabel::Medium,
                SeverityLabel::High,
                SeverityLabel::Critical,
            ],
        }
    }
}

/// Maps a base score to its severity label.
///
/// v2: Low 0.0–3.9, Medium 4.0–6.9, High 7.0–10.0.
/// v3: None 0.0, Low 0.1–3.9, Medium 4.0–6.9, High 7.0–8.9, Critical 9.0–10.0.
pub fn score_to_label(score: f64, version: CvssVersion) -> Result<SeverityLabel> {
    if !(0.0..=10.0).contains(&score) {
        return Err(Error::ScoreOutOfRange(score));
    }
    Ok(match version {
        CvssVersion::V2 => {
            if score < 4.0 {
                SeverityLabel::Low
            } else if score < 7.0 {
                SeverityLabel::Medium
            } else {
                SeverityLabel::High
            }
        }
        CvssVersion::V3 => {
            if score == 0.0 {
                SeverityLabel::None
            } else if score < 4.0 {
                SeverityLabel::Low
            } else if score < 7.0 {
                SeverityLabel::Medium
            } else if score < 9.0 {
                SeverityLabel::High
            } else {
                SeverityLabel::Critical
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccessVector {
    Local,
    AdjacentNetwork,
    Network,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccessComplexity {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Authentication {
    Multiple,
    Single,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ImpactLevel {
    None,
    Partial,
    Complete,
}

/// A complete CVSS v2 base vector as recorded in the feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvssV2Assessment {
    pub access_vector: AccessVector,
    pub access_complexity: AccessComplexity,
    pub authentication: Authentication,
    pub conf_impact: ImpactLevel,
    pub integ_impact: ImpactLevel,
    pub avail_impact: ImpactLevel,
    pub base_score: f64,
    pub obtain_all_privilege: bool,
    pub obtain_user_privilege: bool,
    pub obtain_other_privilege: bool,
    pub user_interaction_required: bool,
}

impl CvssV2Assessment {
    pub fn label(&self) -> SeverityLabel {
        score_to_label(self.base_score, CvssVersion::V2).expect("v2 score validated at ingest")
    }
}

/// Where a v3 assessment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    FromFeed,
    Predicted,
}

/// A CVSS v3 base score with its derived label and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvssV3Assessment {
    pub base_score: f64,
    pub label: SeverityLabel,
    pub provenance: Provenance,
}

impl CvssV3Assessment {
    pub fn new(base_score: f64, provenance: Provenance) -> Result<Self> {
        Ok(CvssV3Assessment {
            base_score,
            label: score_to_label(base_score, CvssVersion::V3)?,
            provenance,
        })
    }
}

/// One affected vendor/product entry from the CPE list, lowercased at ingest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CpeEntry {
    pub vendor: String,
    pub product: String,
    pub version: Option<String>,
}

impl CpeEntry {
    pub fn new(vendor: &str, product: &str, version: Option<&str>) -> Option<Self> {
        let vendor = vendor.trim().to_lowercase();
        let product = product.trim().to_lowercase();
        if vendor.is_empty() || product.is_empty() {
            return None;
        }
        Some(CpeEntry {
            vendor,
            product,
            version: version.map(|v| v.trim().to_lowercase()).filter(|v| !v.is_empty()),
        })
    }
}

/// A reference URL with its feed-assigned tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub url: String,
    pub tags: Vec<String>,
}

/// Placeholder CWE values that indicate a missing or non-specific type.
pub const CWE_PLACEHOLDERS: &[&str] = &["NVD-CWE-Other", "NVD-CWE-noinfo", ""];

pub fn is_cwe_placeholder(value: &str) -> bool {
    CWE_PLACEHOLDERS.contains(&value)
}

/// One NVD entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CveRecord {
    pub id: CveId,
    pub published: NaiveDate,
    pub last_modified: NaiveDate,
    pub descriptions: Vec<String>,
    pub references: Vec<Reference>,
    /// Raw CWE strings from the feed plus any merged recoveries; may contain
    /// placeholders like `NVD-CWE-Other`. Kept sorted and de-duplicated.
    pub cwe_ids: Vec<String>,
    pub v2: Option<CvssV2Assessment>,
    pub v3: Option<CvssV3Assessment>,
    pub cpes: Vec<CpeEntry>,
    pub edd: Option<DisclosureEstimate>,
}

impl CveRecord {
    /// Concrete (non-placeholder) CWE ids on this record.
    pub fn concrete_cwes(&self) -> impl Iterator<Item = &str> {
        self.cwe_ids
            .iter()
            .map(String::as_str)
            .filter(|c| !is_cwe_placeholder(c))
    }

    /// Severity label under the requested scheme, if assessed.
    pub fn label_for(&self, version: CvssVersion) -> Option<SeverityLabel> {
        match version {
            CvssVersion::V2 => self.v2.as_ref().map(CvssV2Assessment::label),
            CvssVersion::V3 => self.v3.as_ref().map(|a| a.label),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cve_id_round_trips() {
        for raw in ["CVE-1999-0001", "CVE-2011-0700", "CVE-2018-1000168", "CVE-2014-00540"] {
            let id = CveId::parse(raw).unwrap();
            assert_eq!(id.as_str(), raw);
        }
    }

    #[test]
    fn cve_id_fields() {
        let id = CveId::parse("CVE-2011-0700").unwrap();
        assert_eq!(id.year(), 2011);
        assert_eq!(id.sequence(), 700);
        assert!(!id.is_legacy());
        assert!(CveId::parse("CVE-1998-0001").unwrap().is_legacy());
    }

    #[test]
    fn cve_id_rejects_malformed() {
        for raw in ["CVE-2011", "cve-2011-0700", "CVE-11-0700", "CVE-2011-0000", "CVE-2011-12", "CVE-2011-12a4"] {
            assert!(CveId::parse(raw).is_err(), "{raw} should fail");
        }
    }

    #[test]
    fn thresholds_match_published_ranges() {
        use CvssVersion::*;
        use SeverityLabel::*;
        assert_eq!(score_to_label(7.0, V2).unwrap(), High);
        assert_eq!(score_to_label(9.0, V3).unwrap(), Critical);
        assert_eq!(score_to_label(0.0, V3).unwrap(), None);
        assert_eq!(score_to_label(0.0, V2).unwrap(), Low);
        assert_eq!(score_to_label(3.9, V2).unwrap(), Low);
        assert_eq!(score_to_label(3.9, V3).unwrap(), Low);
        assert_eq!(score_to_label(4.0, V2).unwrap(), Medium);
        assert_eq!(score_to_label(6.9, V3).unwrap(), Medium);
        assert_eq!(score_to_label(8.9, V3).unwrap(), High);
        assert_eq!(score_to_label(8.9, V2).unwrap(), High);
        assert_eq!(score_to_label(10.0, V2).unwrap(), High);
        assert_eq!(score_to_label(10.0, V3).unwrap(), Critical);
    }

    #[test]
    fn out_of_range_scores_rejected() {
        assert!(score_to_label(-0.1, CvssVersion::V2).is_err());
        assert!(score_to_label(10.1, CvssVersion::V3).is_err());
        assert!(score_to_label(f64::NAN, CvssVersion::V3).is_err());
    }

    #[test]
    fn label_ordering_monotone_in_score() {
        let mut prev_v2 = SeverityLabel::None;
        let mut prev_v3 = SeverityLabel::None;
        for tenth in 0..=100 {
            let s = f64::from(tenth) / 10.0;
            let l2 = score_to_label(s, CvssVersion::V2).unwrap();
            let l3 = score_to_label(s, CvssVersion::V3).unwrap();
            assert!(l2 >= prev_v2);
            assert!(l3 >= prev_v3);
            prev_v2 = l2;
            prev_v3 = l3;
        }
    }

    #[test]
    fn cpe_entry_lowercases_and_rejects_empty() {
        let e = CpeEntry::new("Microsoft", "Windows", Some("XP")).unwrap();
        assert_eq!(e.vendor, "microsoft");
        assert_eq!(e.product, "windows");
        assert_eq!(e.version.as_deref(), Some("xp"));
        assert!(CpeEntry::new("", "windows", None).is_none());
        assert!(CpeEntry::new("microsoft", "  ", None).is_none());
    }

    #[test]
    fn placeholder_detection() {
        assert!(is_cwe_placeholder("NVD-CWE-Other"));
        assert!(is_cwe_placeholder("NVD-CWE-noinfo"));
        assert!(is_cwe_placeholder(""));
        assert!(!is_cwe_placeholder("CWE-79"));
    }
}
