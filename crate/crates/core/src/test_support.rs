//! Record builders shared by unit, integration, and acceptance tests.

use chrono::NaiveDate;

use crate::types::{
    AccessComplexity, AccessVector, Authentication, CveId, CveRecord, CvssV2Assessment,
    CvssV3Assessment, ImpactLevel, Provenance,
};

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// A minimal well-formed record with the given id.
pub fn record(id: &str) -> CveRecord {
    CveRecord {
        id: CveId::parse(id).unwrap(),
        published: date(2018, 1, 1),
        last_modified: date(2018, 1, 2),
        descriptions: vec!["test record".to_string()],
        references: Vec::new(),
        cwe_ids: Vec::new(),
        v2: None,
        v3: None,
        cpes: Vec::new(),
        edd: None,
    }
}

/// A v2 assessment with every enum at its least-severe pole and the given
/// score; flags all false.
pub fn v2_min(base_score: f64) -> CvssV2Assessment {
    CvssV2Assessment {
        access_vector: AccessVector::Local,
        access_complexity: AccessComplexity::High,
        authentication: Authentication::Multiple,
        conf_impact: ImpactLevel::None,
        integ_impact: ImpactLevel::None,
        avail_impact: ImpactLevel::None,
        base_score,
        obtain_all_privilege: false,
        obtain_user_privilege: false,
        obtain_other_privilege: false,
        user_interaction_required: false,
    }
}

/// A v2 assessment with every enum at its most-severe pole and flags true.
pub fn v2_max(base_score: f64) -> CvssV2Assessment {
    CvssV2Assessment {
        access_vector: AccessVector::Network,
        access_complexity: AccessComplexity::Low,
        authentication: Authentication::None,
        conf_impact: ImpactLevel::Complete,
        integ_impact: ImpactLevel::Complete,
        avail_impact: ImpactLevel::Complete,
        base_score,
        obtain_all_privilege: true,
        obtain_user_privilege: true,
        obtain_other_privilege: true,
        user_interaction_required: true,
    }
}

pub fn v3_feed(score: f64) -> CvssV3Assessment {
    CvssV3Assessment::new(score, Provenance::FromFeed).unwrap()
}
