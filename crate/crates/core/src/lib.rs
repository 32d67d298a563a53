//! vulncure-core: data-quality tooling for the National Vulnerability
//! Database.
//!
//! The library ingests NVD JSON feeds into an indexed [`corpus::Corpus`]
//! and provides four correction stages plus reporting:
//!
//! - [`dates`] — disclosure-date estimation from reference pages and lag
//!   statistics;
//! - [`names`] — vendor/product name-inconsistency detection and
//!   consolidation;
//! - [`severity`] — CVSS v3 score extrapolation from v2 vectors with
//!   linear and feed-forward regressors;
//! - [`cwe`] — vulnerability-type recovery from free-form descriptions;
//! - [`analysis`] — case-study reports over raw or corrected corpora.

pub mod analysis;
pub mod corpus;
pub mod cwe;
pub mod dates;
pub mod error;
pub mod ingest;
pub mod names;
pub mod severity;
pub mod types;

#[doc(hidden)]
pub mod test_support;

pub use corpus::Corpus;
pub use error::{Error, Result};
pub use types::{score_to_label, CveId, CveRecord, CvssVersion, SeverityLabel};
