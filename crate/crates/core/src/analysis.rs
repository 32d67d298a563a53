//! Case-study reports over a raw or corrected corpus.
//!
//! Every report is a pure function of (corpus, parameters) with a
//! documented row order, so identical inputs give byte-identical CSV. The
//! same report run before and after the correction pipeline exposes what
//! the data issues change.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::cwe::CweCatalog;
use crate::error::{Error, Result};
use crate::types::{CveRecord, CvssVersion, Provenance, SeverityLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorpusTag {
    Raw,
    Corrected,
}

impl CorpusTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorpusTag::Raw => "raw",
            CorpusTag::Corrected => "corrected",
        }
    }
}

/// A rectangular, deterministic report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub corpus_tag: CorpusTag,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    fn new(name: &str, tag: CorpusTag, columns: &[&str]) -> Self {
        Report {
            name: name.to_string(),
            corpus_tag: tag,
            columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: Vec::new(),
        }
    }

    /// RFC 4180 CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        writer.write_record(&self.columns).expect("header");
        for row in &self.rows {
            writer.write_record(row).expect("row");
        }
        String::from_utf8(writer.into_inner().expect("flush")).expect("utf8 csv")
    }
}

fn fmt_percent(value: f64) -> String {
    format!("{value:.2}")
}

/// Which per-record date a report works from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DateField {
    Published,
    Edd,
}

impl DateField {
    pub fn as_str(&self) -> &'static str {
        match self {
            DateField::Published => "published",
            DateField::Edd => "edd",
        }
    }
}

fn date_of(record: &CveRecord, field: DateField) -> Result<NaiveDate> {
    match field {
        DateField::Published => Ok(record.published),
        DateField::Edd => record
            .edd
            .as_ref()
            .map(|e| e.edd)
            .ok_or_else(|| Error::MissingEstimate(record.id.to_string())),
    }
}

fn weekday_name(day: Weekday) -> &'static str {
    match day {
        Weekday::Mon => "Monday",
        Weekday::Tue => "Tuesday",
        Weekday::Wed => "Wednesday",
        Weekday::Thu => "Thursday",
        Weekday::Fri => "Friday",
        Weekday::Sat => "Saturday",
        Weekday::Sun => "Sunday",
    }
}

/// Top-n dates by record count. The year percentage divides by the number
/// of records whose *same* date field falls in that year. Sorted by count
/// descending, then date ascending.
pub fn top_dates(corpus: &Corpus, field: DateField, n: usize, tag: CorpusTag) -> Result<Report> {
    let mut by_date: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    let mut by_year: BTreeMap<i32, usize> = BTreeMap::new();
    for record in corpus.records() {
        let date = date_of(record, field)?;
        *by_date.entry(date).or_default() += 1;
        *by_year.entry(date.year()).or_default() += 1;
    }
    let mut entries: Vec<(NaiveDate, usize)> = by_date.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut report = Report::new(
        &format!("top_dates_{}", field.as_str()),
        tag,
        &["date", "day_of_week", "count", "percent_of_year"],
    );
    for (date, count) in entries.into_iter().take(n) {
        let year_total = by_year[&date.year()];
        report.rows.push(vec![
            date.format("%Y-%m-%d").to_string(),
            weekday_name(date.weekday()).to_string(),
            count.to_string(),
            fmt_percent(count as f64 / year_total as f64 * 100.0),
        ]);
    }
    Ok(report)
}

/// Monday..Sunday record counts for the chosen date field.
pub fn day_of_week_histogram(corpus: &Corpus, field: DateField, tag: CorpusTag) -> Result<Report> {
    let mut counts = [0usize; 7];
    for record in corpus.records() {
        let date = date_of(record, field)?;
        counts[date.weekday().num_days_from_monday() as usize] += 1;
    }
    let mut report = Report::new(
        &format!("day_of_week_{}", field.as_str()),
        tag,
        &["day_of_week", "count"],
    );
    const DAYS: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];
    for (day, count) in DAYS.iter().zip(counts) {
        report
            .rows
            .push(vec![weekday_name(*day).to_string(), count.to_string()]);
    }
    Ok(report)
}

/// Which severity assignment a distribution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeverityScheme {
    /// Feed v2 assessments.
    V2,
    /// Feed-provided v3 only.
    V3Feed,
    /// v3 including model predictions (requires a backfill pass).
    Pv3,
}

impl SeverityScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeverityScheme::V2 => "v2",
            SeverityScheme::V3Feed => "v3",
            SeverityScheme::Pv3 => "pv3",
        }
    }
}

fn scheme_label(record: &CveRecord, scheme: SeverityScheme) -> Option<SeverityLabel> {
    match scheme {
        SeverityScheme::V2 => record.label_for(CvssVersion::V2),
        SeverityScheme::V3Feed => record
            .v3
            .as_ref()
            .filter(|v3| v3.provenance == Provenance::FromFeed)
            .map(|v3| v3.label),
        SeverityScheme::Pv3 => record.v3.as_ref().map(|v3| v3.label),
    }
}

fn labels_of(scheme: SeverityScheme) -> &'static [SeverityLabel] {
    match scheme {
        SeverityScheme::V2 => SeverityLabel::all(CvssVersion::V2),
        _ => SeverityLabel::all(CvssVersion::V3),
    }
}

/// Guards the Pv3 precondition: every v2-scored record must carry some v3
/// assessment once backfill has run.
fn check_scheme_ready(corpus: &Corpus, scheme: SeverityScheme) -> Result<()> {
    if scheme != SeverityScheme::Pv3 {
        return Ok(());
    }
    let unfilled = corpus
        .records()
        .any(|r| r.v2.is_some() && r.v3.is_none());
    if unfilled {
        return Err(Error::SchemeUnavailable {
            scheme: "pv3".to_string(),
            missing_step: "backfill-v3".to_string(),
        });
    }
    Ok(())
}

/// Per-label counts and percentages, overall or split by publication year.
pub fn severity_distribution(
    corpus: &Corpus,
    scheme: SeverityScheme,
    by_year: bool,
    tag: CorpusTag,
) -> Result<Report> {
    check_scheme_ready(corpus, scheme)?;
    let name = format!("severity_distribution_{}", scheme.as_str());
    if by_year {
        let mut per_year: BTreeMap<i32, BTreeMap<SeverityLabel, usize>> = BTreeMap::new();
        for record in corpus.records() {
            if let Some(label) = scheme_label(record, scheme) {
                *per_year
                    .entry(record.published.year())
                    .or_default()
                    .entry(label)
                    .or_default() += 1;
            }
        }
        let mut report = Report::new(
            &format!("{name}_by_year"),
            tag,
            &["year", "label", "count", "percent"],
        );
        for (year, counts) in per_year {
            let total: usize = counts.values().sum();
            for label in labels_of(scheme) {
                let count = counts.get(label).copied().unwrap_or(0);
                report.rows.push(vec![
                    year.to_string(),
                    label.as_str().to_string(),
                    count.to_string(),
                    fmt_percent(count as f64 / total as f64 * 100.0),
                ]);
            }
        }
        return Ok(report);
    }

    let mut counts: BTreeMap<SeverityLabel, usize> = BTreeMap::new();
    for record in corpus.records() {
        if let Some(label) = scheme_label(record, scheme) {
            *counts.entry(label).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    let mut report = Report::new(&name, tag, &["label", "count", "percent"]);
    for label in labels_of(scheme) {
        let count = counts.get(label).copied().unwrap_or(0);
        let percent = if total == 0 {
            0.0
        } else {
            count as f64 / total as f64 * 100.0
        };
        report.rows.push(vec![
            label.as_str().to_string(),
            count.to_string(),
            fmt_percent(percent),
        ]);
    }
    Ok(report)
}

/// Top-n CWE types among records at the given severity level. A record
/// with several CWEs counts once under each; placeholders never rank.
pub fn top_cwe_by_severity(
    corpus: &Corpus,
    scheme: SeverityScheme,
    level: SeverityLabel,
    n: usize,
    catalog: &CweCatalog,
    tag: CorpusTag,
) -> Result<Report> {
    check_scheme_ready(corpus, scheme)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for record in corpus.records() {
        if scheme_label(record, scheme) != Some(level) {
            continue;
        }
        for cwe in record.concrete_cwes() {
            *counts.entry(cwe).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut report = Report::new(
        &format!(
            "top_cwe_{}_{}",
            scheme.as_str(),
            level.as_str().to_lowercase()
        ),
        tag,
        &["cwe_id", "name", "count"],
    );
    for (cwe, count) in entries.into_iter().take(n) {
        report.rows.push(vec![
            cwe.to_string(),
            catalog.name_of(cwe).unwrap_or("").to_string(),
            count.to_string(),
        ]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VendorMetric {
    CveCount,
    ProductCount,
}

impl VendorMetric {
    pub fn as_str(&self) -> &'static str {
        match self {
            VendorMetric::CveCount => "cve_count",
            VendorMetric::ProductCount => "product_count",
        }
    }
}

/// Top-n vendors by associated CVEs or affected products. A CVE touching
/// k vendors counts once per vendor; percentages are of all records (CVE
/// metric) or of all vendor-product pairs (product metric).
pub fn top_vendors(corpus: &Corpus, metric: VendorMetric, n: usize, tag: CorpusTag) -> Report {
    let denominator = match metric {
        VendorMetric::CveCount => corpus.len(),
        VendorMetric::ProductCount => corpus.product_pair_count(),
    };
    let mut entries: Vec<(String, usize)> = corpus
        .vendors()
        .map(|vendor| {
            let count = match metric {
                VendorMetric::CveCount => corpus.cve_count_of_vendor(vendor),
                VendorMetric::ProductCount => {
                    corpus.products_of(vendor).map(|p| p.len()).unwrap_or(0)
                }
            };
            (vendor.to_string(), count)
        })
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut report = Report::new(
        &format!("top_vendors_{}", metric.as_str()),
        tag,
        &["vendor", "count", "percent"],
    );
    for (vendor, count) in entries.into_iter().take(n) {
        let percent = if denominator == 0 {
            0.0
        } else {
            count as f64 / denominator as f64 * 100.0
        };
        report
            .rows
            .push(vec![vendor, count.to_string(), fmt_percent(percent)]);
    }
    report
}

/// Severity breakdown of the records whose vendor or product names were
/// rewritten between the raw and corrected corpora. Labels come from the
/// corrected corpus under the requested scheme.
pub fn mislabeled_severity_breakdown(
    raw: &Corpus,
    corrected: &Corpus,
    scheme: SeverityScheme,
) -> Result<Report> {
    check_scheme_ready(corrected, scheme)?;
    let mut vendor_counts: BTreeMap<SeverityLabel, usize> = BTreeMap::new();
    let mut product_counts: BTreeMap<SeverityLabel, usize> = BTreeMap::new();
    for record in raw.records() {
        let fixed = corrected
            .get(&record.id)
            .ok_or_else(|| Error::CorpusIdMismatch(record.id.to_string()))?;
        let Some(label) = scheme_label(fixed, scheme) else {
            continue;
        };
        let raw_vendors: std::collections::BTreeSet<&str> =
            record.cpes.iter().map(|c| c.vendor.as_str()).collect();
        let fixed_vendors: std::collections::BTreeSet<&str> =
            fixed.cpes.iter().map(|c| c.vendor.as_str()).collect();
        if raw_vendors != fixed_vendors {
            *vendor_counts.entry(label).or_default() += 1;
        }
        let raw_products: std::collections::BTreeSet<&str> =
            record.cpes.iter().map(|c| c.product.as_str()).collect();
        let fixed_products: std::collections::BTreeSet<&str> =
            fixed.cpes.iter().map(|c| c.product.as_str()).collect();
        if raw_products != fixed_products {
            *product_counts.entry(label).or_default() += 1;
        }
    }
    if corrected.records().count() != raw.records().count() {
        let extra = corrected
            .ids()
            .find(|id| raw.get(id).is_none())
            .map(|id| id.to_string())
            .unwrap_or_default();
        return Err(Error::CorpusIdMismatch(extra));
    }

    let mut report = Report::new(
        &format!("mislabeled_severity_{}", scheme.as_str()),
        CorpusTag::Corrected,
        &["label", "mislabeled_vendor", "mislabeled_product"],
    );
    for label in labels_of(scheme) {
        report.rows.push(vec![
            label.as_str().to_string(),
            vendor_counts.get(label).copied().unwrap_or(0).to_string(),
            product_counts.get(label).copied().unwrap_or(0).to_string(),
        ]);
    }
    Ok(report)
}
