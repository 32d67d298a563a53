//! Disclosure-date estimation.
//!
//! NVD publication dates say when an entry was added to the database, not
//! when the issue became public. For each record we mine its reference URLs:
//! the stored page body for each reference is searched for a publication
//! date, and the estimated disclosure date (EDD) is the minimum of those
//! page dates and the NVD publication date. Lag is the gap in whole days.
//!
//! Everything here runs offline against stored HTML fixtures; see
//! [`FixtureStore`] for the on-disk layout.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use url::Url;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{CveRecord, CvssVersion, SeverityLabel};

/// How a record's disclosure date was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EddSource {
    NvdPublished,
    ReferencePage,
}

/// The estimated disclosure date for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisclosureEstimate {
    pub edd: NaiveDate,
    pub source: EddSource,
    pub source_url: Option<String>,
    pub lag_days: u32,
}

/// Extracts the domain of an absolute URL: lowercased host, port stripped,
/// leading `www.` labels removed.
pub fn extract_domain(url: &str) -> Result<String> {
    let parsed = Url::parse(url).map_err(|_| Error::BadUrl(url.to_string()))?;
    let host = parsed
        .host_str()
        .ok_or_else(|| Error::BadUrl(url.to_string()))?;
    let mut host = host.to_lowercase();
    while let Some(rest) = host.strip_prefix("www.") {
        host = rest.to_string();
    }
    if host.is_empty() {
        return Err(Error::BadUrl(url.to_string()));
    }
    Ok(host)
}

/// Reference-URL volume per domain, ranked by count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainCoverage {
    /// (domain, url_count), descending by count, domain ascending on ties.
    pub ranked: Vec<(String, usize)>,
    pub total_urls: usize,
    /// URLs whose domain could not be extracted.
    pub skipped_urls: usize,
}

impl DomainCoverage {
    /// Fraction of all counted URLs that fall in the top-k domains.
    pub fn coverage_at(&self, k: usize) -> f64 {
        if self.total_urls == 0 {
            return 0.0;
        }
        let covered: usize = self.ranked.iter().take(k).map(|(_, n)| n).sum();
        covered as f64 / self.total_urls as f64
    }
}

/// Counts every reference URL in the corpus once and ranks domains.
pub fn rank_domains(corpus: &Corpus) -> DomainCoverage {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    let mut skipped = 0usize;
    for record in corpus.records() {
        for reference in &record.references {
            match extract_domain(&reference.url) {
                Ok(domain) => {
                    *counts.entry(domain).or_default() += 1;
                    total += 1;
                }
                Err(_) => skipped += 1,
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    DomainCoverage {
        ranked,
        total_urls: total,
        skipped_urls: skipped,
    }
}

/// A page-date extractor for one domain's page structure.
pub type Extractor = fn(&str) -> Option<NaiveDate>;

/// Per-domain extractors plus the always-registered generic fallback.
pub struct ExtractorRegistry {
    by_domain: BTreeMap<String, Extractor>,
}

impl Default for ExtractorRegistry {
    fn default() -> Self {
        let mut by_domain: BTreeMap<String, Extractor> = BTreeMap::new();
        by_domain.insert("securityfocus.com".to_string(), extract_securityfocus);
        by_domain.insert("securitytracker.com".to_string(), extract_securitytracker);
        by_domain.insert("bugzilla.redhat.com".to_string(), extract_bugzilla);
        by_domain.insert("bugzilla.mozilla.org".to_string(), extract_bugzilla);
        ExtractorRegistry { by_domain }
    }
}

impl ExtractorRegistry {
    pub fn register(&mut self, domain: &str, extractor: Extractor) {
        self.by_domain.insert(domain.to_string(), extractor);
    }

    pub fn has(&self, domain: &str) -> bool {
        self.by_domain.contains_key(domain)
    }
}

/// Extracts a publication date from a stored page body.
///
/// Uses the domain-specific extractor when registered, then the generic
/// fallback: HTML meta date tags, ISO-8601 patterns, then textual
/// month patterns. First match wins; absence is a value, not an error.
pub fn extract_page_date(
    domain: &str,
    html: &[u8],
    registry: &ExtractorRegistry,
) -> Option<NaiveDate> {
    let text = String::from_utf8_lossy(html);
    if let Some(extractor) = registry.by_domain.get(domain) {
        if let Some(date) = extractor(&text) {
            return Some(date);
        }
    }
    generic_extract(&text)
}

fn generic_extract(text: &str) -> Option<NaiveDate> {
    meta_tag_date(text)
        .or_else(|| iso_date(text))
        .or_else(|| month_name_date(text))
}

// SecurityFocus bid pages carry a "Published:" table row.
fn extract_securityfocus(text: &str) -> Option<NaiveDate> {
    labeled_date(text, "Published:")
}

// SecurityTracker advisories list a "Date:" header line.
fn extract_securitytracker(text: &str) -> Option<NaiveDate> {
    labeled_date(text, "Date:")
}

// Bugzilla-style trackers show "Reported: 2011-02-07 ..." on the bug page.
fn extract_bugzilla(text: &str) -> Option<NaiveDate> {
    let after = text.split("Reported:").nth(1)?;
    let window = &after[..after.len().min(200)];
    iso_date(window).or_else(|| month_name_date(window))
}

fn labeled_date(text: &str, label: &str) -> Option<NaiveDate> {
    let after = text.split(label).nth(1)?;
    let window = &after[..after.len().min(200)];
    month_name_date(window).or_else(|| iso_date(window))
}

fn meta_tag_date(text: &str) -> Option<NaiveDate> {
    // <meta name="date" content="2011-02-07"> and the common published-time
    // properties; only the content attribute is trusted.
    let meta = Regex::new(
        r#"(?is)<meta[^>]+(?:name|property)\s*=\s*["'](?:date|dc\.date|article:published_time|og:published_time|pubdate|publishdate)["'][^>]*content\s*=\s*["']([^"']+)["']"#,
    )
    .unwrap();
    for cap in meta.captures_iter(text) {
        if let Some(date) = iso_date(&cap[1]).or_else(|| month_name_date(&cap[1])) {
            return Some(date);
        }
    }
    None
}

fn iso_date_all(text: &str) -> Vec<NaiveDate> {
    let re = Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap();
    re.captures_iter(text)
        .filter_map(|cap| {
            let y = cap[1].parse().ok()?;
            let m = cap[2].parse().ok()?;
            let d = cap[3].parse().ok()?;
            NaiveDate::from_ymd_opt(y, m, d)
        })
        .collect()
}

fn iso_date(text: &str) -> Option<NaiveDate> {
    iso_date_all(text).into_iter().next()
}

fn month_number(name: &str) -> Option<u32> {
    const MONTHS: [&str; 12] = [
        "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec",
    ];
    let lower = name.to_lowercase();
    MONTHS
        .iter()
        .position(|m| lower.starts_with(m))
        .map(|i| i as u32 + 1)
}

/// Matches "February 7, 2011", "Feb 07 2011", and "7 Feb 2011" forms;
/// returns (byte offset, date) pairs in document order.
fn month_name_dates(text: &str) -> Vec<(usize, NaiveDate)> {
    let month_first = Regex::new(r"(?i)\b(Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|Jun(?:e)?|Jul(?:y)?|Aug(?:ust)?|Sep(?:tember)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\.?\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})\b").unwrap();
    let day_first = Regex::new(r"(?i)\b(\d{1,2})(?:st|nd|rd|th)?\s+(Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|Jun(?:e)?|Jul(?:y)?|Aug(?:ust)?|Sep(?:tember)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)\.?,?\s+(\d{4})\b").unwrap();

    let mut found: Vec<(usize, NaiveDate)> = Vec::new();
    for cap in month_first.captures_iter(text) {
        if let (Some(month), Ok(day), Ok(year)) = (
            month_number(&cap[1]),
            cap[2].parse::<u32>(),
            cap[3].parse::<i32>(),
        ) {
            if let Some(date) = NaiveDate::from_ymd_opt(year, month, day) {
                found.push((cap.get(0).unwrap().start(), date));
            }
        }
    }
    for cap in day_first.captures_iter(text) {
        if let (Ok(day), Some(month), Ok(year)) = (
            cap[1].parse::<u32>(),
            month_number(&cap[2]),
            cap[3].parse::<i32>(),
        ) {
            if let Some(date) = NaiveDate::from_ymd_opt(year, month, day) {
                found.push((cap.get(0).unwrap().start(), date));
            }
        }
    }
    found.sort_by_key(|(offset, _)| *offset);
    found
}

fn month_name_date(text: &str) -> Option<NaiveDate> {
    month_name_dates(text).into_iter().map(|(_, d)| d).next()
}

/// Which page date to take when a page yields several candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MultiDatePolicy {
    /// The extractor's first match (default).
    First,
    /// The minimum of all matches an extractor can produce.
    Min,
}

/// Like [`extract_page_date`] but honoring the multi-date policy: under
/// `Min`, every candidate from the domain extractor and all generic
/// fallback stages is collected and the earliest wins.
pub fn extract_page_date_with_policy(
    domain: &str,
    html: &[u8],
    registry: &ExtractorRegistry,
    policy: MultiDatePolicy,
) -> Option<NaiveDate> {
    match policy {
        MultiDatePolicy::First => extract_page_date(domain, html, registry),
        MultiDatePolicy::Min => {
            let text = String::from_utf8_lossy(html);
            let mut candidates: Vec<NaiveDate> = Vec::new();
            if let Some(extractor) = registry.by_domain.get(domain) {
                candidates.extend(extractor(&text));
            }
            candidates.extend(meta_tag_date(&text));
            candidates.extend(iso_date_all(&text));
            candidates.extend(month_name_dates(&text).into_iter().map(|(_, d)| d));
            candidates.into_iter().min()
        }
    }
}

/// Computes the disclosure estimate for one record from its extracted page
/// dates. Page dates after the NVD publication date are extraction noise
/// and ignored; on a tie with the publication date the reference page wins.
pub fn estimate_disclosure(
    record: &CveRecord,
    page_dates: &[(String, NaiveDate)],
) -> DisclosureEstimate {
    let mut best: Option<(NaiveDate, &str)> = None;
    for (url, date) in page_dates {
        if *date > record.published {
            continue;
        }
        match best {
            Some((current, _)) if *date >= current => {}
            _ => best = Some((*date, url)),
        }
    }
    match best {
        Some((edd, url)) => DisclosureEstimate {
            edd,
            source: EddSource::ReferencePage,
            source_url: Some(url.to_string()),
            lag_days: (record.published - edd).num_days() as u32,
        },
        None => DisclosureEstimate {
            edd: record.published,
            source: EddSource::NvdPublished,
            source_url: None,
            lag_days: 0,
        },
    }
}

/// One row of the lag distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCdfRow {
    pub lag_days: u32,
    pub count: usize,
    pub cumulative_fraction: f64,
}

/// Cumulative lag distribution over all records.
///
/// Every record must carry a disclosure estimate; the first record (in id
/// order) without one is named in the error.
pub fn lag_cdf(corpus: &Corpus) -> Result<Vec<LagCdfRow>> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for record in corpus.records() {
        let estimate = record
            .edd
            .as_ref()
            .ok_or_else(|| Error::MissingEstimate(record.id.to_string()))?;
        *counts.entry(estimate.lag_days).or_default() += 1;
    }
    let total: usize = counts.values().sum();
    let mut rows = Vec::with_capacity(counts.len());
    let mut running = 0usize;
    for (lag_days, count) in counts {
        running += count;
        rows.push(LagCdfRow {
            lag_days,
            count,
            cumulative_fraction: running as f64 / total as f64,
        });
    }
    Ok(rows)
}

/// Mean lag per v3 severity label; records without an estimate or a v3
/// label are excluded, and empty classes are omitted.
pub fn lag_by_severity(corpus: &Corpus) -> BTreeMap<SeverityLabel, f64> {
    let mut sums: BTreeMap<SeverityLabel, (u64, usize)> = BTreeMap::new();
    for record in corpus.records() {
        let (Some(estimate), Some(label)) = (&record.edd, record.label_for(CvssVersion::V3))
        else {
            continue;
        };
        let entry = sums.entry(label).or_default();
        entry.0 += u64::from(estimate.lag_days);
        entry.1 += 1;
    }
    sums.into_iter()
        .map(|(label, (sum, n))| (label, sum as f64 / n as f64))
        .collect()
}

/// On-disk store of reference page bodies:
/// `<root>/<domain>/<sha256-of-url>.html` with a sidecar `.url` file naming
/// the original URL. Tests and the pipeline never fetch; an external hook
/// may populate the store.
pub struct FixtureStore {
    root: PathBuf,
}

impl FixtureStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureStore { root: root.into() }
    }

    pub fn url_key(url: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(url.as_bytes());
        hex_string(&hasher.finalize())
    }

    pub fn page_path(&self, url: &str) -> Result<PathBuf> {
        let domain = extract_domain(url)?;
        Ok(self.root.join(domain).join(format!("{}.html", Self::url_key(url))))
    }

    /// The stored body for a URL, if present.
    pub fn load(&self, url: &str) -> Result<Option<Vec<u8>>> {
        let path = self.page_path(url)?;
        if !path.exists() {
            return Ok(None);
        }
        std::fs::read(&path).map(Some).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Stores a page body with its `.url` sidecar.
    pub fn store(&self, url: &str, body: &[u8]) -> Result<PathBuf> {
        let path = self.page_path(url)?;
        let dir = path.parent().expect("page path has parent");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
        let sidecar = path.with_extension("url");
        std::fs::write(&sidecar, url.as_bytes())
            .map_err(|e| Error::io(sidecar.display().to_string(), e))?;
        Ok(path)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

/// Estimates disclosure dates for every record using stored pages, and
/// returns the new corpus plus per-source counts.
pub fn estimate_all(
    corpus: &Corpus,
    store: &FixtureStore,
    registry: &ExtractorRegistry,
) -> (Corpus, EstimateStats) {
    estimate_all_with_policy(corpus, store, registry, MultiDatePolicy::First)
}

pub fn estimate_all_with_policy(
    corpus: &Corpus,
    store: &FixtureStore,
    registry: &ExtractorRegistry,
    policy: MultiDatePolicy,
) -> (Corpus, EstimateStats) {
    let mut stats = EstimateStats::default();
    let corpus = corpus.map_records(|record| {
        let mut page_dates: Vec<(String, NaiveDate)> = Vec::new();
        for reference in &record.references {
            let Ok(Some(body)) = store.load(&reference.url) else {
                continue;
            };
            stats.pages_seen += 1;
            let domain = match extract_domain(&reference.url) {
                Ok(d) => d,
                Err(_) => continue,
            };
            match extract_page_date_with_policy(&domain, &body, registry, policy) {
                Some(date) => page_dates.push((reference.url.clone(), date)),
                None => stats.pages_without_date += 1,
            }
        }
        let estimate = estimate_disclosure(record, &page_dates);
        match estimate.source {
            EddSource::ReferencePage => stats.from_reference += 1,
            EddSource::NvdPublished => stats.from_published += 1,
        }
        let mut out = record.clone();
        out.edd = Some(estimate);
        out
    });
    (corpus, stats)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateStats {
    pub from_reference: usize,
    pub from_published: usize,
    pub pages_seen: usize,
    pub pages_without_date: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::{date, record, v3_feed};
    use crate::types::Reference;

    #[test]
    fn domain_extraction() {
        assert_eq!(
            extract_domain("http://www.securityfocus.com/bid/123").unwrap(),
            "securityfocus.com"
        );
        assert_eq!(extract_domain("https://jvn.jp/x").unwrap(), "jvn.jp");
        assert_eq!(
            extract_domain("https://Example.COM:8080/a?b=c").unwrap(),
            "example.com"
        );
        assert!(extract_domain("not a url").is_err());
    }

    fn with_refs(id: &str, urls: &[&str]) -> CveRecord {
        let mut r = record(id);
        r.references = urls
            .iter()
            .map(|u| Reference {
                url: u.to_string(),
                tags: Vec::new(),
            })
            .collect();
        r
    }

    #[test]
    fn rank_single_domain() {
        let r = with_refs(
            "CVE-2018-0001",
            &["http://a.com/1", "http://a.com/2", "http://a.com/3"],
        );
        let coverage = rank_domains(&Corpus::from_records([r]));
        assert_eq!(coverage.ranked, vec![("a.com".to_string(), 3)]);
        assert!((coverage.coverage_at(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_coverage_fractions() {
        // 10 urls over domains with counts 5, 3, 2 => coverage_at(2) = 0.8.
        let mut urls = Vec::new();
        for i in 0..5 {
            urls.push(format!("http://five.com/{i}"));
        }
        for i in 0..3 {
            urls.push(format!("http://three.com/{i}"));
        }
        for i in 0..2 {
            urls.push(format!("http://two.com/{i}"));
        }
        let refs: Vec<&str> = urls.iter().map(String::as_str).collect();
        let coverage = rank_domains(&Corpus::from_records([with_refs("CVE-2018-0001", &refs)]));
        assert_eq!(coverage.total_urls, 10);
        assert!((coverage.coverage_at(2) - 0.8).abs() < 1e-12);
        // coverage_at is nondecreasing in k
        let mut prev = 0.0;
        for k in 0..=4 {
            let c = coverage.coverage_at(k);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn meta_tag_wins_first() {
        let html = br#"<html><head><meta name="date" content="2011-02-07"></head>
            <body>Updated March 1, 2012</body></html>"#;
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date("example.com", html, &registry),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn body_month_name_fallback() {
        let html = b"<html><body>Advisory published February 7, 2011 by the vendor.</body></html>";
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date("example.com", html, &registry),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn day_first_and_iso_patterns() {
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date("x.org", b"released 7 Feb 2011", &registry),
            Some(date(2011, 2, 7))
        );
        assert_eq!(
            extract_page_date("x.org", b"stamp 2011-02-07 here", &registry),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn empty_page_is_absent() {
        let registry = ExtractorRegistry::default();
        assert_eq!(extract_page_date("example.com", b"", &registry), None);
        assert_eq!(
            extract_page_date("example.com", b"<html>no dates here</html>", &registry),
            None
        );
    }

    #[test]
    fn securityfocus_extractor() {
        let html = b"<table><tr><td>Bugtraq ID:</td><td>46249</td></tr>
            <tr><td>Published:</td><td>Feb 07 2011 12:00AM</td></tr></table>";
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date("securityfocus.com", html, &registry),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn bugzilla_extractor() {
        let html = b"<div id='bz'>Reported: 2011-02-07 04:55 EST by someone</div>";
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date("bugzilla.redhat.com", html, &registry),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn worked_example_lag_35() {
        // Published 2011-03-14, advisory page dated 2011-02-07 -> lag 35.
        let mut r = record("CVE-2011-0700");
        r.published = date(2011, 3, 14);
        r.last_modified = date(2011, 3, 15);
        let est = estimate_disclosure(
            &r,
            &[("http://advisory.example/x".to_string(), date(2011, 2, 7))],
        );
        assert_eq!(est.edd, date(2011, 2, 7));
        assert_eq!(est.lag_days, 35);
        assert_eq!(est.source, EddSource::ReferencePage);
    }

    #[test]
    fn no_page_dates_means_zero_lag() {
        let r = record("CVE-2018-0001");
        let est = estimate_disclosure(&r, &[]);
        assert_eq!(est.edd, r.published);
        assert_eq!(est.lag_days, 0);
        assert_eq!(est.source, EddSource::NvdPublished);
        assert_eq!(est.source_url, None);
    }

    #[test]
    fn later_dates_ignored_min_taken() {
        let mut r = record("CVE-2020-0001");
        r.published = date(2020, 1, 8);
        r.last_modified = date(2020, 1, 9);
        let est = estimate_disclosure(
            &r,
            &[
                ("http://a.example/".to_string(), date(2020, 1, 10)),
                ("http://b.example/".to_string(), date(2020, 1, 5)),
            ],
        );
        assert_eq!(est.edd, date(2020, 1, 5));
        assert_eq!(est.lag_days, 3);
        assert_eq!(est.source_url.as_deref(), Some("http://b.example/"));
    }

    #[test]
    fn tie_with_published_credits_reference() {
        let mut r = record("CVE-2020-0002");
        r.published = date(2020, 1, 8);
        r.last_modified = date(2020, 1, 9);
        let est = estimate_disclosure(&r, &[("http://a.example/".to_string(), date(2020, 1, 8))]);
        assert_eq!(est.edd, r.published);
        assert_eq!(est.lag_days, 0);
        assert_eq!(est.source, EddSource::ReferencePage);
    }

    fn with_lag(id: &str, lag: u32) -> CveRecord {
        let mut r = record(id);
        r.edd = Some(DisclosureEstimate {
            edd: r.published - chrono::Duration::days(i64::from(lag)),
            source: EddSource::ReferencePage,
            source_url: None,
            lag_days: lag,
        });
        r
    }

    #[test]
    fn cdf_fractions() {
        let corpus = Corpus::from_records([
            with_lag("CVE-2018-0001", 0),
            with_lag("CVE-2018-0002", 0),
            with_lag("CVE-2018-0003", 7),
            with_lag("CVE-2018-0004", 30),
        ]);
        let rows = lag_cdf(&corpus).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].lag_days, rows[0].count), (0, 2));
        assert!((rows[0].cumulative_fraction - 0.5).abs() < 1e-12);
        assert!((rows[1].cumulative_fraction - 0.75).abs() < 1e-12);
        assert!((rows[2].cumulative_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_all_zero() {
        let corpus = Corpus::from_records([with_lag("CVE-2018-0001", 0)]);
        let rows = lag_cdf(&corpus).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].cumulative_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_missing_estimate_names_offender() {
        let corpus = Corpus::from_records([with_lag("CVE-2018-0002", 1), record("CVE-2018-0001")]);
        let err = lag_cdf(&corpus).unwrap_err();
        assert!(err.to_string().contains("CVE-2018-0001"), "{err}");
    }

    #[test]
    fn lag_by_severity_means() {
        let mut high_a = with_lag("CVE-2018-0001", 4);
        high_a.v3 = Some(v3_feed(7.5));
        let mut high_b = with_lag("CVE-2018-0002", 6);
        high_b.v3 = Some(v3_feed(8.0));
        let mut medium = with_lag("CVE-2018-0003", 10);
        medium.v3 = Some(v3_feed(5.0));
        let means = lag_by_severity(&Corpus::from_records([high_a, high_b, medium]));
        assert_eq!(means.len(), 2);
        assert!((means[&SeverityLabel::High] - 5.0).abs() < 1e-12);
        assert!((means[&SeverityLabel::Medium] - 10.0).abs() < 1e-12);
        assert!(!means.contains_key(&SeverityLabel::Critical));
    }

    #[test]
    fn min_policy_takes_earliest_candidate() {
        let html = b"<html><body>Updated 2012-03-01; originally published February 7, 2011.</body></html>";
        let registry = ExtractorRegistry::default();
        assert_eq!(
            extract_page_date_with_policy("x.org", html, &registry, MultiDatePolicy::First),
            Some(date(2012, 3, 1))
        );
        assert_eq!(
            extract_page_date_with_policy("x.org", html, &registry, MultiDatePolicy::Min),
            Some(date(2011, 2, 7))
        );
    }

    #[test]
    fn fixture_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path());
        let url = "http://www.securityfocus.com/bid/46249";
        let path = store.store(url, b"<html>Published: Feb 07 2011</html>").unwrap();
        assert!(path.starts_with(dir.path().join("securityfocus.com")));
        assert!(path.with_extension("url").exists());
        let body = store.load(url).unwrap().unwrap();
        assert!(body.starts_with(b"<html>"));
        assert_eq!(store.load("http://other.example/none").unwrap(), None);
    }
}
