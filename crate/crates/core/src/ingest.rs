//! NVD JSON data-feed ingestion (schema 1.0/1.1, optionally gzipped).
//!
//! The top-level document must parse; individual `CVE_Items` entries that
//! are malformed are skipped and counted instead of aborting the run.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{
    AccessComplexity, AccessVector, Authentication, CpeEntry, CveId, CveRecord, CvssV2Assessment,
    CvssV3Assessment, ImpactLevel, Provenance, Reference,
};

/// Per-feed parse accounting. `records_total = parsed + skipped`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeedStats {
    pub records_total: usize,
    pub records_skipped: usize,
    pub skip_reasons: BTreeMap<String, usize>,
}

impl FeedStats {
    fn skip(&mut self, reason: &str) {
        self.records_skipped += 1;
        *self.skip_reasons.entry(reason.to_string()).or_default() += 1;
    }

    pub fn merge(&mut self, other: &FeedStats) {
        self.records_total += other.records_total;
        self.records_skipped += other.records_skipped;
        for (reason, count) in &other.skip_reasons {
            *self.skip_reasons.entry(reason.clone()).or_default() += count;
        }
    }
}

/// Parses one NVD feed document, decompressing gzip when present.
pub fn parse_feed(feed_bytes: &[u8]) -> Result<(Vec<CveRecord>, FeedStats)> {
    let bytes = maybe_gunzip(feed_bytes)?;
    let doc: Value = serde_json::from_slice(&bytes)
        .map_err(|e| Error::FeedFormat(e.to_string()))?;
    let items = doc
        .get("CVE_Items")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::FeedFormat("missing CVE_Items array".to_string()))?;

    let mut stats = FeedStats {
        records_total: items.len(),
        ..FeedStats::default()
    };
    let mut records = Vec::with_capacity(items.len());
    for item in items {
        match parse_item(item) {
            Ok(record) => records.push(record),
            Err(reason) => stats.skip(reason),
        }
    }
    Ok((records, stats))
}

fn maybe_gunzip(bytes: &[u8]) -> Result<Vec<u8>> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut decoder = flate2::read::GzDecoder::new(bytes);
        let mut out = Vec::new();
        decoder
            .read_to_end(&mut out)
            .map_err(|e| Error::FeedFormat(format!("gzip: {e}")))?;
        Ok(out)
    } else {
        Ok(bytes.to_vec())
    }
}

fn parse_item(item: &Value) -> std::result::Result<CveRecord, &'static str> {
    let cve = item.get("cve").ok_or("no-cve")?;
    let raw_id = cve
        .pointer("/CVE_data_meta/ID")
        .and_then(Value::as_str)
        .ok_or("no-id")?;
    let id = CveId::parse(raw_id).map_err(|_| "bad-id")?;

    let descriptions: Vec<String> = cve
        .pointer("/description/description_data")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|d| d.get("value").and_then(Value::as_str))
                .map(str::to_string)
                .filter(|s| !s.trim().is_empty())
                .collect()
        })
        .unwrap_or_default();
    if descriptions.is_empty() {
        return Err("no-description");
    }

    let published = item
        .get("publishedDate")
        .and_then(Value::as_str)
        .and_then(parse_feed_date)
        .ok_or("bad-published-date")?;
    let last_modified = item
        .get("lastModifiedDate")
        .and_then(Value::as_str)
        .and_then(parse_feed_date)
        .ok_or("bad-modified-date")?;
    if published > last_modified {
        return Err("published-after-modified");
    }

    let references = cve
        .pointer("/references/reference_data")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|r| {
                    let url = r.get("url").and_then(Value::as_str)?.to_string();
                    let tags = r
                        .get("tags")
                        .and_then(Value::as_array)
                        .map(|t| {
                            t.iter()
                                .filter_map(Value::as_str)
                                .map(str::to_string)
                                .collect()
                        })
                        .unwrap_or_default();
                    Some(Reference { url, tags })
                })
                .collect()
        })
        .unwrap_or_default();

    // All listed CWE strings are kept, placeholders included; filtering is
    // the recovery stage's job so improvement deltas stay measurable.
    let mut cwe_ids: Vec<String> = cve
        .pointer("/problemtype/problemtype_data")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|pt| pt.get("description").and_then(Value::as_array))
                .flatten()
                .filter_map(|d| d.get("value").and_then(Value::as_str))
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    cwe_ids.sort();
    cwe_ids.dedup();

    let v2 = item.pointer("/impact/baseMetricV2").and_then(parse_v2);
    let v3 = item.pointer("/impact/baseMetricV3").and_then(parse_v3);

    let mut cpes = collect_configuration_cpes(item);
    if cpes.is_empty() {
        cpes = collect_legacy_cpes(item);
    }
    let mut seen = std::collections::BTreeSet::new();
    cpes.retain(|c| seen.insert(c.clone()));

    Ok(CveRecord {
        id,
        published,
        last_modified,
        descriptions,
        references,
        cwe_ids,
        v2,
        v3,
        cpes,
        edd: None,
    })
}

/// NVD stamps look like `2018-05-21T12:29Z`; only the date part is kept
/// since lag is measured in whole days.
fn parse_feed_date(s: &str) -> Option<NaiveDate> {
    let date_part = s.split('T').next()?;
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()
}

fn parse_v2(metric: &Value) -> Option<CvssV2Assessment> {
    let cvss = metric.get("cvssV2")?;
    let access_vector = match cvss.get("accessVector")?.as_str()? {
        "LOCAL" => AccessVector::Local,
        "ADJACENT_NETWORK" => AccessVector::AdjacentNetwork,
        "NETWORK" => AccessVector::Network,
        _ => return None,
    };
    let access_complexity = match cvss.get("accessComplexity")?.as_str()? {
        "HIGH" => AccessComplexity::High,
        "MEDIUM" => AccessComplexity::Medium,
        "LOW" => AccessComplexity::Low,
        _ => return None,
    };
    let authentication = match cvss.get("authentication")?.as_str()? {
        "MULTIPLE" => Authentication::Multiple,
        "SINGLE" => Authentication::Single,
        "NONE" => Authentication::None,
        _ => return None,
    };
    let impact = |key: &str| -> Option<ImpactLevel> {
        match cvss.get(key)?.as_str()? {
            "NONE" => Some(ImpactLevel::None),
            "PARTIAL" => Some(ImpactLevel::Partial),
            "COMPLETE" => Some(ImpactLevel::Complete),
            _ => None,
        }
    };
    let base_score = cvss.get("baseScore")?.as_f64()?;
    if !(0.0..=10.0).contains(&base_score) {
        return None;
    }
    Some(CvssV2Assessment {
        access_vector,
        access_complexity,
        authentication,
        conf_impact: impact("confidentialityImpact")?,
        integ_impact: impact("integrityImpact")?,
        avail_impact: impact("availabilityImpact")?,
        base_score,
        obtain_all_privilege: metric
            .get("obtainAllPrivilege")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        obtain_user_privilege: metric
            .get("obtainUserPrivilege")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        obtain_other_privilege: metric
            .get("obtainOtherPrivilege")
            .and_then(Value::as_bool)
            .unwrap_or(false),
        user_interaction_required: metric
            .get("userInteractionRequired")
            .and_then(Value::as_bool)
            .unwrap_or(false),
    })
}

fn parse_v3(metric: &Value) -> Option<CvssV3Assessment> {
    let base_score = metric.pointer("/cvssV3/baseScore")?.as_f64()?;
    CvssV3Assessment::new(base_score, Provenance::FromFeed).ok()
}

fn collect_configuration_cpes(item: &Value) -> Vec<CpeEntry> {
    let mut out = Vec::new();
    if let Some(nodes) = item.pointer("/configurations/nodes").and_then(Value::as_array) {
        for node in nodes {
            collect_node_cpes(node, &mut out);
        }
    }
    out
}

fn collect_node_cpes(node: &Value, out: &mut Vec<CpeEntry>) {
    if let Some(matches) = node.get("cpe_match").and_then(Value::as_array) {
        for m in matches {
            if m.get("vulnerable").and_then(Value::as_bool) == Some(false) {
                continue;
            }
            if let Some(uri) = m.get("cpe23Uri").and_then(Value::as_str) {
                if let Some(entry) = cpe_from_uri_23(uri) {
                    out.push(entry);
                }
            } else if let Some(uri) = m.get("cpe22Uri").and_then(Value::as_str) {
                if let Some(entry) = cpe_from_uri_22(uri) {
                    out.push(entry);
                }
            }
        }
    }
    if let Some(children) = node.get("children").and_then(Value::as_array) {
        for child in children {
            collect_node_cpes(child, out);
        }
    }
}

/// Legacy items carry `vulnerable_software_list` with CPE 2.2 URIs.
fn collect_legacy_cpes(item: &Value) -> Vec<CpeEntry> {
    item.get("vulnerable_software_list")
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(Value::as_str)
                .filter_map(cpe_from_uri_22)
                .collect()
        })
        .unwrap_or_default()
}

/// `cpe:2.3:part:vendor:product:version:...`
pub fn cpe_from_uri_23(uri: &str) -> Option<CpeEntry> {
    let parts: Vec<&str> = uri.split(':').collect();
    if parts.len() < 5 || parts[0] != "cpe" || parts[1] != "2.3" {
        return None;
    }
    let version = parts.get(5).filter(|v| !matches!(**v, "*" | "-"));
    CpeEntry::new(parts[3], parts[4], version.copied())
}

/// `cpe:/part:vendor:product:version` (CPE 2.2)
pub fn cpe_from_uri_22(uri: &str) -> Option<CpeEntry> {
    let rest = uri.strip_prefix("cpe:/")?;
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() < 3 {
        return None;
    }
    CpeEntry::new(parts[1], parts[2], parts.get(3).copied())
}

/// Serializes records back into a `CVE_Items` document in feed shape; the
/// snapshot writer for pipeline intermediates. `parse_feed` round-trips it.
pub fn write_feed(records: &[CveRecord]) -> Value {
    let items: Vec<Value> = records.iter().map(record_to_item).collect();
    serde_json::json!({
        "CVE_data_type": "CVE",
        "CVE_data_format": "MITRE",
        "CVE_data_version": "4.0",
        "CVE_data_numberOfCVEs": items.len().to_string(),
        "CVE_Items": items,
    })
}

fn record_to_item(record: &CveRecord) -> Value {
    let descriptions: Vec<Value> = record
        .descriptions
        .iter()
        .map(|d| serde_json::json!({"lang": "en", "value": d}))
        .collect();
    let cwes: Vec<Value> = record
        .cwe_ids
        .iter()
        .map(|c| serde_json::json!({"lang": "en", "value": c}))
        .collect();
    let references: Vec<Value> = record
        .references
        .iter()
        .map(|r| serde_json::json!({"url": r.url, "tags": r.tags}))
        .collect();
    let cpe_matches: Vec<Value> = record
        .cpes
        .iter()
        .map(|c| {
            let version = c.version.as_deref().unwrap_or("*");
            serde_json::json!({
                "vulnerable": true,
                "cpe23Uri": format!("cpe:2.3:a:{}:{}:{}:*:*:*:*:*:*:*", c.vendor, c.product, version),
            })
        })
        .collect();

    let mut impact = serde_json::Map::new();
    if let Some(v2) = &record.v2 {
        impact.insert(
            "baseMetricV2".to_string(),
            serde_json::json!({
                "cvssV2": {
                    "version": "2.0",
                    "accessVector": match v2.access_vector {
                        AccessVector::Local => "LOCAL",
                        AccessVector::AdjacentNetwork => "ADJACENT_NETWORK",
                        AccessVector::Network => "NETWORK",
                    },
                    "accessComplexity": match v2.access_complexity {
                        AccessComplexity::High => "HIGH",
                        AccessComplexity::Medium => "MEDIUM",
                        AccessComplexity::Low => "LOW",
                    },
                    "authentication": match v2.authentication {
                        Authentication::Multiple => "MULTIPLE",
                        Authentication::Single => "SINGLE",
                        Authentication::None => "NONE",
                    },
                    "confidentialityImpact": impact_str(v2.conf_impact),
                    "integrityImpact": impact_str(v2.integ_impact),
                    "availabilityImpact": impact_str(v2.avail_impact),
                    "baseScore": v2.base_score,
                },
                "obtainAllPrivilege": v2.obtain_all_privilege,
                "obtainUserPrivilege": v2.obtain_user_privilege,
                "obtainOtherPrivilege": v2.obtain_other_privilege,
                "userInteractionRequired": v2.user_interaction_required,
            }),
        );
    }
    // Only feed-provided v3 is serialized; predicted assessments travel in
    // their own sidecar artifact.
    if let Some(v3) = &record.v3 {
        if v3.provenance == Provenance::FromFeed {
            impact.insert(
                "baseMetricV3".to_string(),
                serde_json::json!({
                    "cvssV3": {
                        "version": "3.0",
                        "baseScore": v3.base_score,
                        "baseSeverity": v3.label.as_str().to_uppercase(),
                    }
                }),
            );
        }
    }

    serde_json::json!({
        "cve": {
            "data_type": "CVE",
            "CVE_data_meta": {"ID": record.id.as_str(), "ASSIGNER": "cve@mitre.org"},
            "problemtype": {"problemtype_data": [{"description": cwes}]},
            "references": {"reference_data": references},
            "description": {"description_data": descriptions},
        },
        "configurations": {
            "CVE_data_version": "4.0",
            "nodes": if cpe_matches.is_empty() {
                Vec::<Value>::new()
            } else {
                vec![serde_json::json!({"operator": "OR", "cpe_match": cpe_matches})]
            },
        },
        "impact": Value::Object(impact),
        "publishedDate": format!("{}T00:00Z", record.published.format("%Y-%m-%d")),
        "lastModifiedDate": format!("{}T00:00Z", record.last_modified.format("%Y-%m-%d")),
    })
}

fn impact_str(level: ImpactLevel) -> &'static str {
    match level {
        ImpactLevel::None => "NONE",
        ImpactLevel::Partial => "PARTIAL",
        ImpactLevel::Complete => "COMPLETE",
    }
}

/// Loads every `nvdcve-*.json[.gz]` under `directory` and merges them into
/// one corpus. When the same id appears in several feeds the record with
/// the newer `lastModifiedDate` wins, so the result is independent of file
/// read order.
pub fn load_snapshot(directory: &Path) -> Result<(Corpus, FeedStats)> {
    let mut paths: Vec<_> = std::fs::read_dir(directory)
        .map_err(|e| Error::io(directory.display().to_string(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| {
                    n.starts_with("nvdcve-") && (n.ends_with(".json") || n.ends_with(".json.gz"))
                })
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::NoFeeds(directory.display().to_string()));
    }

    let mut stats = FeedStats::default();
    let mut merged: BTreeMap<CveId, CveRecord> = BTreeMap::new();
    for path in &paths {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let (records, feed_stats) = parse_feed(&bytes)?;
        stats.merge(&feed_stats);
        for record in records {
            match merged.get(&record.id) {
                Some(existing) if !newer_than(&record, existing) => {}
                _ => {
                    merged.insert(record.id.clone(), record);
                }
            }
        }
    }
    Ok((Corpus::from_records(merged.into_values()), stats))
}

/// Duplicate-id precedence: later modification wins, then later publication;
/// a full-content comparison breaks any remaining tie deterministically.
fn newer_than(candidate: &CveRecord, existing: &CveRecord) -> bool {
    match candidate.last_modified.cmp(&existing.last_modified) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match candidate.published.cmp(&existing.published) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                format!("{candidate:?}") > format!("{existing:?}")
            }
        },
    }
}

/// Reads a one-name-per-line vendor list: lowercased, de-duplicated,
/// original order preserved.
pub fn load_external_vendor_list(file: &Path) -> Result<Vec<String>> {
    let text =
        std::fs::read_to_string(file).map_err(|e| Error::io(file.display().to_string(), e))?;
    let mut seen = std::collections::BTreeSet::new();
    let mut names = Vec::new();
    for line in text.lines() {
        let name = line.trim().to_lowercase();
        if name.is_empty() {
            continue;
        }
        if seen.insert(name.clone()) {
            names.push(name);
        }
    }
    Ok(names)
}
