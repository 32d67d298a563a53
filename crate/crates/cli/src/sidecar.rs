//! Sidecar artifacts that carry per-record results between subcommands:
//! disclosure estimates (`edd.csv`) and predicted v3 assessments
//! (`pv3.csv`). The corpus snapshot itself stays in NVD feed shape, which
//! cannot express either.

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use vulncure_core::dates::{DisclosureEstimate, EddSource};
use vulncure_core::types::{CvssV3Assessment, Provenance};
use vulncure_core::{Corpus, CveId};

pub fn write_edd_csv(corpus: &Corpus) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(["cve_id", "edd", "source", "source_url", "lag_days"])
        .expect("header");
    for record in corpus.records() {
        if let Some(estimate) = &record.edd {
            let source = match estimate.source {
                EddSource::NvdPublished => "nvd-published",
                EddSource::ReferencePage => "reference-page",
            };
            writer
                .write_record([
                    record.id.as_str(),
                    &estimate.edd.format("%Y-%m-%d").to_string(),
                    source,
                    estimate.source_url.as_deref().unwrap_or(""),
                    &estimate.lag_days.to_string(),
                ])
                .expect("row");
        }
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf8")
}

pub fn apply_edd_csv(corpus: &Corpus, text: &str) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut estimates = std::collections::BTreeMap::new();
    for row in reader.records() {
        let row = row.context("edd.csv row")?;
        if row.len() < 5 {
            bail!("edd.csv: expected 5 columns, got {}", row.len());
        }
        let id = CveId::parse(&row[0]).map_err(|e| anyhow::anyhow!("edd.csv: {e}"))?;
        let edd = NaiveDate::parse_from_str(&row[1], "%Y-%m-%d")
            .with_context(|| format!("edd.csv date {:?}", &row[1]))?;
        let source = match &row[2] {
            "nvd-published" => EddSource::NvdPublished,
            "reference-page" => EddSource::ReferencePage,
            other => bail!("edd.csv: unknown source {other:?}"),
        };
        let source_url = if row[3].is_empty() {
            None
        } else {
            Some(row[3].to_string())
        };
        let lag_days: u32 = row[4].parse().context("edd.csv lag_days")?;
        estimates.insert(
            id,
            DisclosureEstimate {
                edd,
                source,
                source_url,
                lag_days,
            },
        );
    }
    Ok(corpus.map_records(|record| {
        let mut out = record.clone();
        if let Some(estimate) = estimates.get(&record.id) {
            out.edd = Some(estimate.clone());
        }
        out
    }))
}

pub fn write_pv3_csv(corpus: &Corpus) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(["cve_id", "base_score", "label", "provenance"])
        .expect("header");
    for record in corpus.records() {
        if let Some(v3) = &record.v3 {
            if v3.provenance == Provenance::Predicted {
                writer
                    .write_record([
                        record.id.as_str(),
                        &format!("{}", v3.base_score),
                        v3.label.as_str(),
                        "predicted",
                    ])
                    .expect("row");
            }
        }
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf8")
}

/// Applies predicted assessments to records that lack a feed-provided v3.
pub fn apply_pv3_csv(corpus: &Corpus, text: &str) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let mut scores = std::collections::BTreeMap::new();
    for row in reader.records() {
        let row = row.context("pv3.csv row")?;
        let id = CveId::parse(&row[0]).map_err(|e| anyhow::anyhow!("pv3.csv: {e}"))?;
        let score: f64 = row[1].parse().context("pv3.csv base_score")?;
        scores.insert(id, score);
    }
    Ok(corpus.map_records(|record| {
        let mut out = record.clone();
        if out.v3.is_none() {
            if let Some(&score) = scores.get(&record.id) {
                out.v3 = Some(
                    CvssV3Assessment::new(score, Provenance::Predicted)
                        .expect("scores written from clamped predictions"),
                );
            }
        }
        out
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vulncure_core::test_support::{date, record, v2_min, v3_feed};

    #[test]
    fn edd_round_trip() {
        let mut a = record("CVE-2011-0700");
        a.published = date(2011, 3, 14);
        a.last_modified = date(2011, 3, 15);
        a.edd = Some(DisclosureEstimate {
            edd: date(2011, 2, 7),
            source: EddSource::ReferencePage,
            source_url: Some("http://example.com/a,b".to_string()),
            lag_days: 35,
        });
        let b = record("CVE-2011-0800");
        let corpus = Corpus::from_records([a.clone(), b.clone()]);
        let csv_text = write_edd_csv(&corpus);

        let bare = Corpus::from_records([
            {
                let mut r = a.clone();
                r.edd = None;
                r
            },
            b,
        ]);
        let applied = apply_edd_csv(&bare, &csv_text).unwrap();
        assert_eq!(applied.get(&a.id).unwrap().edd, a.edd);
    }

    #[test]
    fn pv3_round_trip_never_overwrites_feed() {
        let mut predicted = record("CVE-2018-0001");
        predicted.v2 = Some(v2_min(5.0));
        predicted.v3 = Some(CvssV3Assessment::new(7.25, Provenance::Predicted).unwrap());
        let mut feed_scored = record("CVE-2018-0002");
        feed_scored.v3 = Some(v3_feed(3.0));
        let corpus = Corpus::from_records([predicted.clone(), feed_scored.clone()]);
        let csv_text = write_pv3_csv(&corpus);
        assert!(csv_text.contains("CVE-2018-0001"));
        assert!(!csv_text.contains("CVE-2018-0002"));

        let mut bare_a = predicted.clone();
        bare_a.v3 = None;
        let bare = Corpus::from_records([bare_a, feed_scored.clone()]);
        let applied = apply_pv3_csv(&bare, &csv_text).unwrap();
        let got = applied.get(&predicted.id).unwrap().v3.as_ref().unwrap();
        assert_eq!(got.base_score, 7.25);
        assert_eq!(got.provenance, Provenance::Predicted);
        assert_eq!(applied.get(&feed_scored.id).unwrap().v3, feed_scored.v3);
    }
}
