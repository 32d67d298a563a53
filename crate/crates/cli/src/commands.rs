//! Subcommand implementations. Each reads its prerequisites, writes its
//! artifacts atomically, and records a run manifest.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use vulncure_core::analysis::{self, CorpusTag, DateField, Report, SeverityScheme, VendorMetric};
use vulncure_core::cwe::{self, CweCatalog};
use vulncure_core::dates::{self, ExtractorRegistry, FixtureStore};
use vulncure_core::ingest;
use vulncure_core::names::{self, mapping::DecisionSet};
use vulncure_core::severity::eval::{self, TransitionMatrix, TRANSITION_COLS, TRANSITION_ROWS};
use vulncure_core::severity::model::{ModelFile, ModelKind};
use vulncure_core::severity::{self, nn::TrainConfig, CweRanking};
use vulncure_core::types::SeverityLabel;
use vulncure_core::Corpus;

use crate::config::WorkspaceConfig;
use crate::manifest::ManifestBuilder;
use crate::sidecar;

/// Failure modes mapped to process exit codes: missing prerequisites exit
/// with 2, data errors with 1.
#[derive(Debug)]
pub enum CmdError {
    MissingPrerequisite(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError::Data(e.into())
    }
}

pub type CmdResult = Result<(), CmdError>;

fn missing(what: impl Into<String>) -> CmdError {
    CmdError::MissingPrerequisite(what.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CorpusChoice {
    Raw,
    Corrected,
}

fn raw_corpus_path(config: &WorkspaceConfig) -> PathBuf {
    config.output_dir.join("corpus_raw.json")
}

fn corrected_corpus_path(config: &WorkspaceConfig) -> PathBuf {
    config.output_dir.join("corpus_corrected.json")
}

fn load_corpus_file(path: &Path) -> Result<Corpus, CmdError> {
    if !path.exists() {
        return Err(missing(format!(
            "{} (run `vulncure ingest` first)",
            path.display()
        )));
    }
    let bytes = std::fs::read(path).context("reading corpus")?;
    let (records, _) = ingest::parse_feed(&bytes).map_err(|e| CmdError::Data(e.into()))?;
    Ok(Corpus::from_records(records))
}

/// Resolves `--corpus`: an explicit choice must exist; otherwise the
/// corrected snapshot is preferred when present.
fn select_corpus(
    config: &WorkspaceConfig,
    choice: Option<CorpusChoice>,
) -> Result<(PathBuf, CorpusTag), CmdError> {
    let raw = raw_corpus_path(config);
    let corrected = corrected_corpus_path(config);
    match choice {
        Some(CorpusChoice::Raw) => Ok((raw, CorpusTag::Raw)),
        Some(CorpusChoice::Corrected) => {
            if corrected.exists() {
                Ok((corrected, CorpusTag::Corrected))
            } else {
                Err(missing(format!(
                    "{} (run `vulncure name-apply` or `vulncure extract-cwe` first)",
                    corrected.display()
                )))
            }
        }
        None => {
            if corrected.exists() {
                Ok((corrected, CorpusTag::Corrected))
            } else {
                Ok((raw, CorpusTag::Raw))
            }
        }
    }
}

fn corpus_to_bytes(corpus: &Corpus) -> Vec<u8> {
    let records: Vec<_> = corpus.records().cloned().collect();
    let doc = ingest::write_feed(&records);
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("feed serializes");
    bytes.push(b'\n');
    bytes
}

pub fn cmd_ingest(config: &WorkspaceConfig) -> CmdResult {
    if !config.feeds_dir.is_dir() {
        return Err(missing(format!(
            "feeds directory {}",
            config.feeds_dir.display()
        )));
    }
    let mut manifest = ManifestBuilder::new("ingest", &config.root, config.seed, &config.entries);
    manifest.input_dir(&config.feeds_dir)?;
    let (corpus, stats) = ingest::load_snapshot(&config.feeds_dir)?;
    manifest.count("records", corpus.len());
    manifest.count("records_total", stats.records_total);
    manifest.count("records_skipped", stats.records_skipped);
    manifest.count("skip_reasons", &stats.skip_reasons);
    manifest.count("distinct_vendors", corpus.vendor_count());
    manifest.count("vendor_product_pairs", corpus.product_pair_count());
    manifest.write_output(&raw_corpus_path(config), &corpus_to_bytes(&corpus))?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

pub fn cmd_estimate_dates(config: &WorkspaceConfig) -> CmdResult {
    let corpus = load_corpus_file(&raw_corpus_path(config))?;
    let mut manifest =
        ManifestBuilder::new("estimate-dates", &config.root, config.seed, &config.entries);
    manifest.input(&raw_corpus_path(config))?;
    if config.fixtures_dir.is_dir() {
        manifest.input_dir(&config.fixtures_dir)?;
    }

    let store = FixtureStore::new(&config.fixtures_dir);
    let registry = ExtractorRegistry::default();
    let (with_edd, stats) =
        dates::estimate_all_with_policy(&corpus, &store, &registry, config.multi_date_policy);

    manifest.count("from_reference", stats.from_reference);
    manifest.count("from_published", stats.from_published);
    manifest.count("pages_seen", stats.pages_seen);
    manifest.count("pages_without_date", stats.pages_without_date);

    manifest.write_output(
        &config.output_dir.join("edd.csv"),
        sidecar::write_edd_csv(&with_edd).as_bytes(),
    )?;

    let cdf = dates::lag_cdf(&with_edd).map_err(|e| CmdError::Data(e.into()))?;
    let mut cdf_csv = String::from("lag_days,count,cumulative_fraction\n");
    for row in &cdf {
        cdf_csv.push_str(&format!(
            "{},{},{:.6}\n",
            row.lag_days, row.count, row.cumulative_fraction
        ));
    }
    manifest.write_output(&config.output_dir.join("lag_cdf.csv"), cdf_csv.as_bytes())?;

    let coverage = dates::rank_domains(&with_edd);
    let mut coverage_csv = String::from("rank,domain,url_count,cumulative_fraction\n");
    for (idx, (domain, count)) in coverage.ranked.iter().enumerate() {
        coverage_csv.push_str(&format!(
            "{},{},{},{:.6}\n",
            idx + 1,
            domain,
            count,
            coverage.coverage_at(idx + 1)
        ));
    }
    manifest.write_output(
        &config.output_dir.join("domain_coverage.csv"),
        coverage_csv.as_bytes(),
    )?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

/// Vendor candidates come from the raw corpus; product candidates are
/// found under consolidated vendors, so decided vendor matches are applied
/// provisionally before the product scan.
fn candidate_sets(
    corpus: &Corpus,
    decisions: &DecisionSet,
) -> Result<(Vec<names::PairClassification>, Vec<names::PairClassification>, Corpus), CmdError> {
    let vendor_pairs = names::candidate_vendor_pairs(corpus);
    let decided: Vec<names::PairClassification> = vendor_pairs
        .iter()
        .filter(|c| decisions.lookup(c.kind, &c.a, &c.b).is_some())
        .cloned()
        .collect();
    let provisional = names::mapping::build_mapping(corpus, &decided, decisions)
        .map_err(|e| CmdError::Data(e.into()))?;
    let (consolidated, _) = names::mapping::apply_mapping(corpus, &provisional);
    let product_pairs = names::candidate_product_pairs_all(&consolidated);
    Ok((vendor_pairs, product_pairs, consolidated))
}

pub fn cmd_name_candidates(config: &WorkspaceConfig) -> CmdResult {
    let corpus = load_corpus_file(&raw_corpus_path(config))?;
    let mut manifest =
        ManifestBuilder::new("name-candidates", &config.root, config.seed, &config.entries);
    manifest.input(&raw_corpus_path(config))?;

    let decisions = if config.decisions_file.exists() {
        manifest.input(&config.decisions_file)?;
        DecisionSet::load(&config.decisions_file).map_err(|e| CmdError::Data(e.into()))?
    } else {
        DecisionSet::default()
    };
    let (vendor_pairs, product_pairs, _) = candidate_sets(&corpus, &decisions)?;
    let mut pairs = vendor_pairs;
    pairs.extend(product_pairs);
    let undecided = pairs
        .iter()
        .filter(|c| decisions.lookup(c.kind, &c.a, &c.b).is_none())
        .count();
    manifest.count("vendor_pairs", pairs.iter().filter(|c| c.kind == names::NameKind::Vendor).count());
    manifest.count("product_pairs", pairs.iter().filter(|c| c.kind == names::NameKind::Product).count());
    manifest.count("undecided", undecided);

    let worksheet = names::mapping::render_worksheet(&pairs, &decisions);
    manifest.write_output(&config.output_dir.join("worksheet.tsv"), worksheet.as_bytes())?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

pub fn cmd_name_apply(config: &WorkspaceConfig) -> CmdResult {
    let corpus = load_corpus_file(&raw_corpus_path(config))?;
    if !config.decisions_file.exists() {
        return Err(missing(format!(
            "decisions file {} (run `vulncure name-candidates` and adjudicate the worksheet)",
            config.decisions_file.display()
        )));
    }
    let mut manifest =
        ManifestBuilder::new("name-apply", &config.root, config.seed, &config.entries);
    manifest.input(&raw_corpus_path(config))?;
    manifest.input(&config.decisions_file)?;

    let decisions = DecisionSet::load(&config.decisions_file).map_err(|e| CmdError::Data(e.into()))?;
    let pairs = names::candidate_vendor_pairs(&corpus);
    let vendor_mapping = names::mapping::build_mapping(&corpus, &pairs, &decisions)
        .map_err(|e| CmdError::Data(e.into()))?;
    let (consolidated, _) = names::mapping::apply_mapping(&corpus, &vendor_mapping);
    let product_pairs = names::candidate_product_pairs_all(&consolidated);
    let product_mapping =
        names::mapping::build_mapping(&consolidated, &product_pairs, &decisions)
            .map_err(|e| CmdError::Data(e.into()))?;
    let mapping = vendor_mapping
        .merge(product_mapping)
        .map_err(|e| CmdError::Data(e.into()))?;
    let (corrected, stats) = names::mapping::apply_mapping(&corpus, &mapping);

    manifest.count("mapping_entries", mapping.len());
    manifest.count("records_changed", stats.records_changed);
    manifest.count("distinct_vendors_before", stats.distinct_vendors_before);
    manifest.count("distinct_vendors_after", stats.distinct_vendors_after);
    manifest.count("distinct_products_before", stats.distinct_products_before);
    manifest.count("distinct_products_after", stats.distinct_products_after);

    manifest.write_output(&config.mapping_file, mapping.render_tsv().as_bytes())?;
    manifest.write_output(&corrected_corpus_path(config), &corpus_to_bytes(&corrected))?;

    let pattern = names::pattern_stats(&pairs, &decisions).map_err(|e| CmdError::Data(e.into()))?;
    let mut pattern_csv =
        String::from("category,lcs_bucket,possible_pairs,possible_names,confirmed_pairs,confirmed_names\n");
    use names::PatternCategory::*;
    for category in [Tokens, MpZero, MpOne, MpMany, Prefix, ProductAsVendor] {
        for lcs_ge_3 in [true, false] {
            let possible = pattern.cell(false, category, lcs_ge_3);
            let confirmed = pattern.cell(true, category, lcs_ge_3);
            pattern_csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                category.as_str(),
                if lcs_ge_3 { "lcs>=3" } else { "lcs<3" },
                possible.pairs,
                possible.names,
                confirmed.pairs,
                confirmed.names
            ));
        }
    }
    manifest.write_output(&config.output_dir.join("pattern_stats.csv"), pattern_csv.as_bytes())?;

    if let Some(list_path) = &config.external_vendor_list {
        if !list_path.exists() {
            return Err(missing(format!("external vendor list {}", list_path.display())));
        }
        manifest.input(list_path)?;
        let list = ingest::load_external_vendor_list(list_path).map_err(|e| CmdError::Data(e.into()))?;
        let remap = names::mapping::remap_external_vendor_list(&list, &mapping);
        let remap_csv = format!(
            "total,impacted,consolidated_targets\n{},{},{}\n",
            remap.total, remap.impacted, remap.consolidated_targets
        );
        manifest.write_output(&config.output_dir.join("external_remap.csv"), remap_csv.as_bytes())?;
    }
    manifest.finish(&config.output_dir)?;
    Ok(())
}

pub fn cmd_extract_cwe(config: &WorkspaceConfig, choice: Option<CorpusChoice>) -> CmdResult {
    if !config.cwe_catalog.exists() {
        return Err(missing(format!("CWE catalog {}", config.cwe_catalog.display())));
    }
    let (input_path, _) = select_corpus(config, choice)?;
    let corpus = load_corpus_file(&input_path)?;
    let mut manifest =
        ManifestBuilder::new("extract-cwe", &config.root, config.seed, &config.entries);
    manifest.input(&input_path)?;
    manifest.input(&config.cwe_catalog)?;

    let catalog = CweCatalog::load(&config.cwe_catalog).map_err(|e| CmdError::Data(e.into()))?;
    let (merged, stats) = cwe::merge_all(&corpus, &catalog);
    let gap = cwe::cwe_gap_report(&corpus, &merged).map_err(|e| CmdError::Data(e.into()))?;

    manifest.count("records_changed", stats.records_changed);
    manifest.count("quarantined", stats.quarantined.len());
    manifest.count("gap_other", gap.other);
    manifest.count("gap_noinfo", gap.noinfo);
    manifest.count("gap_unassigned", gap.unassigned);
    manifest.count("fixed_other", gap.fixed_other);
    manifest.count("fixed_noinfo_or_unassigned", gap.fixed_noinfo_or_unassigned);

    manifest.write_output(&corrected_corpus_path(config), &corpus_to_bytes(&merged))?;

    let gap_csv = format!(
        "metric,count\nother,{}\nnoinfo,{}\nunassigned,{}\nfixed_other,{}\nfixed_noinfo_or_unassigned,{}\n",
        gap.other, gap.noinfo, gap.unassigned, gap.fixed_other, gap.fixed_noinfo_or_unassigned
    );
    manifest.write_output(&config.output_dir.join("cwe_gap.csv"), gap_csv.as_bytes())?;

    let mut quarantine_csv = String::from("cve_id,cwe_id\n");
    for (id, cwe_id) in &stats.quarantined {
        quarantine_csv.push_str(&format!("{id},{cwe_id}\n"));
    }
    manifest.write_output(
        &config.output_dir.join("cwe_quarantine.csv"),
        quarantine_csv.as_bytes(),
    )?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

fn transition_csv(matrix: &TransitionMatrix) -> String {
    let mut out = String::from("v2_label,v3_low,v3_medium,v3_high,v3_critical\n");
    for row in TRANSITION_ROWS {
        out.push_str(row.as_str());
        for col in TRANSITION_COLS {
            out.push_str(&format!(",{}", matrix.get(row, col)));
        }
        out.push('\n');
    }
    out
}

pub fn cmd_train_severity(config: &WorkspaceConfig, choice: Option<CorpusChoice>) -> CmdResult {
    let (input_path, _) = select_corpus(config, choice)?;
    let corpus = load_corpus_file(&input_path)?;
    let mut manifest =
        ManifestBuilder::new("train-severity", &config.root, config.seed, &config.entries);
    manifest.input(&input_path)?;

    let ranking = CweRanking::from_corpus(&corpus);
    let samples = severity::ground_truth(&corpus, &ranking);
    if samples.is_empty() {
        return Err(CmdError::Data(anyhow!(
            "no dual-scored records in {}; cannot train",
            input_path.display()
        )));
    }
    let split = severity::split_dataset(&samples, config.split_ratio, config.seed, config.stratify_on);
    for warning in &split.warnings {
        eprintln!("warning: {warning}");
    }

    let model = match config.model_kind {
        ModelKind::Linear => severity::linear::train_linear(&split.train, config.ridge)
            .map_err(|e| CmdError::Data(e.into()))?,
        ModelKind::Dnn => {
            let train_config = TrainConfig {
                seed: config.seed,
                epochs: config.epochs,
                learning_rate: config.learning_rate,
                batch_size: config.batch_size,
                ..TrainConfig::default()
            };
            severity::nn::train_dnn(&split.train, &train_config)
                .map_err(|e| CmdError::Data(e.into()))?
        }
    };
    let model_file = ModelFile::new(model, &ranking);

    manifest.count("samples", samples.len());
    manifest.count("train", split.train.len());
    manifest.count("test", split.test.len());
    manifest.count("split_warnings", &split.warnings);

    manifest.write_output(&config.model_file, model_file.to_json().as_bytes())?;

    if !split.test.is_empty() {
        let report = eval::evaluate(&model_file.model, &split.test, config.aer_zero_policy)
            .map_err(|e| CmdError::Data(e.into()))?;
        let mut eval_csv = String::from("metric,value\n");
        eval_csv.push_str(&format!("ae,{:.6}\n", report.ae));
        eval_csv.push_str(&format!("aer,{:.6}\n", report.aer));
        eval_csv.push_str(&format!("aer_excluded_zero_targets,{}\n", report.aer_excluded_zero_targets));
        eval_csv.push_str(&format!("overall_accuracy,{:.6}\n", report.overall_accuracy));
        for (label, accuracy) in &report.per_input_class_accuracy {
            eval_csv.push_str(&format!(
                "accuracy_v2_{},{accuracy:.6}\n",
                label.as_str().to_lowercase()
            ));
        }
        eval_csv.push_str(&format!("test_size,{}\n", report.test_size));
        manifest.write_output(&config.output_dir.join("eval.csv"), eval_csv.as_bytes())?;

        let mut eval_json = serde_json::to_vec_pretty(&report).context("eval json")?;
        eval_json.push(b'\n');
        manifest.write_output(&config.output_dir.join("eval.json"), &eval_json)?;
        manifest.write_output(
            &config.output_dir.join("transition_eval_predicted.csv"),
            transition_csv(&report.transition).as_bytes(),
        )?;
    }

    let ground_truth_matrix = eval::ground_truth_transition(&corpus);
    manifest.write_output(
        &config.output_dir.join("transition_ground_truth.csv"),
        transition_csv(&ground_truth_matrix).as_bytes(),
    )?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

pub fn cmd_backfill(config: &WorkspaceConfig, choice: Option<CorpusChoice>) -> CmdResult {
    if !config.model_file.exists() {
        return Err(missing(format!(
            "model file {} (run `vulncure train-severity` first)",
            config.model_file.display()
        )));
    }
    let (input_path, _) = select_corpus(config, choice)?;
    let corpus = load_corpus_file(&input_path)?;
    let mut manifest =
        ManifestBuilder::new("backfill-v3", &config.root, config.seed, &config.entries);
    manifest.input(&input_path)?;
    manifest.input(&config.model_file)?;

    let model_file = ModelFile::load(&config.model_file).map_err(|e| CmdError::Data(e.into()))?;
    let (filled, transition, stats) = eval::backfill_v3(&corpus, &model_file);

    manifest.count("predicted", stats.predicted);
    manifest.count("kept_from_feed", stats.kept_from_feed);
    manifest.count("skipped_no_v2", stats.skipped_no_v2);

    manifest.write_output(
        &config.output_dir.join("pv3.csv"),
        sidecar::write_pv3_csv(&filled).as_bytes(),
    )?;
    manifest.write_output(
        &config.output_dir.join("transition_predicted.csv"),
        transition_csv(&transition).as_bytes(),
    )?;
    manifest.finish(&config.output_dir)?;
    Ok(())
}

/// Loads a corpus and folds in whichever sidecars exist.
fn corpus_with_sidecars(config: &WorkspaceConfig, path: &Path) -> Result<Corpus, CmdError> {
    let mut corpus = load_corpus_file(path)?;
    let edd_path = config.output_dir.join("edd.csv");
    if edd_path.exists() {
        let text = std::fs::read_to_string(&edd_path).context("reading edd.csv")?;
        corpus = sidecar::apply_edd_csv(&corpus, &text)?;
    }
    let pv3_path = config.output_dir.join("pv3.csv");
    if pv3_path.exists() {
        let text = std::fs::read_to_string(&pv3_path).context("reading pv3.csv")?;
        corpus = sidecar::apply_pv3_csv(&corpus, &text)?;
    }
    Ok(corpus)
}

fn write_report(
    manifest: &mut ManifestBuilder,
    dir: &Path,
    report: &Report,
    index: &mut Vec<serde_json::Value>,
) -> Result<(), CmdError> {
    let file = format!("{}.csv", report.name);
    manifest.write_output(&dir.join(&file), report.to_csv().as_bytes())?;
    index.push(serde_json::json!({
        "name": report.name,
        "file": file,
        "corpus_tag": report.corpus_tag.as_str(),
        "columns": report.columns,
        "row_count": report.rows.len(),
    }));
    Ok(())
}

fn reports_for_corpus(
    config: &WorkspaceConfig,
    manifest: &mut ManifestBuilder,
    corpus: &Corpus,
    tag: CorpusTag,
    catalog: &CweCatalog,
) -> Result<(), CmdError> {
    let dir = config.output_dir.join("reports").join(tag.as_str());
    let n = config.report_top_n;
    let mut index = Vec::new();
    let data = |e: vulncure_core::Error| CmdError::Data(e.into());

    let has_edd = corpus.records().all(|r| r.edd.is_some()) && !corpus.is_empty();
    let has_pv3 = !corpus.records().any(|r| r.v2.is_some() && r.v3.is_none());

    write_report(
        manifest,
        &dir,
        &analysis::top_dates(corpus, DateField::Published, n, tag).map_err(data)?,
        &mut index,
    )?;
    write_report(
        manifest,
        &dir,
        &analysis::day_of_week_histogram(corpus, DateField::Published, tag).map_err(data)?,
        &mut index,
    )?;
    if has_edd {
        write_report(
            manifest,
            &dir,
            &analysis::top_dates(corpus, DateField::Edd, n, tag).map_err(data)?,
            &mut index,
        )?;
        write_report(
            manifest,
            &dir,
            &analysis::day_of_week_histogram(corpus, DateField::Edd, tag).map_err(data)?,
            &mut index,
        )?;
    }

    write_report(
        manifest,
        &dir,
        &analysis::severity_distribution(corpus, SeverityScheme::V2, false, tag).map_err(data)?,
        &mut index,
    )?;
    write_report(
        manifest,
        &dir,
        &analysis::severity_distribution(corpus, SeverityScheme::V3Feed, false, tag).map_err(data)?,
        &mut index,
    )?;
    if has_pv3 {
        write_report(
            manifest,
            &dir,
            &analysis::severity_distribution(corpus, SeverityScheme::Pv3, false, tag).map_err(data)?,
            &mut index,
        )?;
        let mut by_year =
            analysis::severity_distribution(corpus, SeverityScheme::Pv3, true, tag).map_err(data)?;
        by_year.name = "severity_distribution_pv3_by_year".to_string();
        write_report(manifest, &dir, &by_year, &mut index)?;
    }

    write_report(
        manifest,
        &dir,
        &analysis::top_cwe_by_severity(corpus, SeverityScheme::V2, SeverityLabel::High, n, catalog, tag)
            .map_err(data)?,
        &mut index,
    )?;
    write_report(
        manifest,
        &dir,
        &analysis::top_cwe_by_severity(
            corpus,
            SeverityScheme::V3Feed,
            SeverityLabel::Critical,
            n,
            catalog,
            tag,
        )
        .map_err(data)?,
        &mut index,
    )?;
    if has_pv3 {
        for level in [SeverityLabel::Critical, SeverityLabel::High] {
            write_report(
                manifest,
                &dir,
                &analysis::top_cwe_by_severity(corpus, SeverityScheme::Pv3, level, n, catalog, tag)
                    .map_err(data)?,
                &mut index,
            )?;
        }
    }

    write_report(
        manifest,
        &dir,
        &analysis::top_vendors(corpus, VendorMetric::CveCount, n, tag),
        &mut index,
    )?;
    write_report(
        manifest,
        &dir,
        &analysis::top_vendors(corpus, VendorMetric::ProductCount, n, tag),
        &mut index,
    )?;

    if has_edd {
        let means = dates::lag_by_severity(corpus);
        let mut csv = String::from("label,mean_lag_days\n");
        for (label, mean) in &means {
            csv.push_str(&format!("{},{mean:.4}\n", label.as_str()));
        }
        manifest.write_output(&dir.join("lag_by_severity.csv"), csv.as_bytes())?;
        index.push(serde_json::json!({
            "name": "lag_by_severity",
            "file": "lag_by_severity.csv",
            "corpus_tag": tag.as_str(),
            "columns": ["label", "mean_lag_days"],
            "row_count": means.len(),
        }));
    }

    let envelope = serde_json::json!({
        "corpus_tag": tag.as_str(),
        "tool_version": crate::manifest::TOOL_VERSION,
        "seed": config.seed,
        "reports": index,
    });
    let mut bytes = serde_json::to_vec_pretty(&envelope).context("index json")?;
    bytes.push(b'\n');
    manifest.write_output(&dir.join("index.json"), &bytes)?;
    Ok(())
}

pub fn cmd_report(config: &WorkspaceConfig) -> CmdResult {
    if !config.cwe_catalog.exists() {
        return Err(missing(format!("CWE catalog {}", config.cwe_catalog.display())));
    }
    let raw_path = raw_corpus_path(config);
    let raw = corpus_with_sidecars(config, &raw_path)?;
    let catalog = CweCatalog::load(&config.cwe_catalog).map_err(|e| CmdError::Data(e.into()))?;

    let mut manifest = ManifestBuilder::new("report", &config.root, config.seed, &config.entries);
    manifest.input(&raw_path)?;
    manifest.input(&config.cwe_catalog)?;
    for sidecar in ["edd.csv", "pv3.csv"] {
        let path = config.output_dir.join(sidecar);
        if path.exists() {
            manifest.input(&path)?;
        }
    }

    reports_for_corpus(config, &mut manifest, &raw, CorpusTag::Raw, &catalog)?;

    let corrected_path = corrected_corpus_path(config);
    if corrected_path.exists() {
        manifest.input(&corrected_path)?;
        let corrected = corpus_with_sidecars(config, &corrected_path)?;
        reports_for_corpus(config, &mut manifest, &corrected, CorpusTag::Corrected, &catalog)?;

        let dir = config.output_dir.join("reports").join("corrected");
        let mislabeled_v2 =
            analysis::mislabeled_severity_breakdown(&raw, &corrected, SeverityScheme::V2)
                .map_err(|e| CmdError::Data(e.into()))?;
        manifest.write_output(
            &dir.join("mislabeled_severity_v2.csv"),
            mislabeled_v2.to_csv().as_bytes(),
        )?;
        let has_pv3 = !corrected.records().any(|r| r.v2.is_some() && r.v3.is_none());
        if has_pv3 {
            let mislabeled_pv3 =
                analysis::mislabeled_severity_breakdown(&raw, &corrected, SeverityScheme::Pv3)
                    .map_err(|e| CmdError::Data(e.into()))?;
            manifest.write_output(
                &dir.join("mislabeled_severity_pv3.csv"),
                mislabeled_pv3.to_csv().as_bytes(),
            )?;
        }
    }
    manifest.finish(&config.output_dir)?;
    Ok(())
}

/// Runs the whole pipeline in dependency order.
pub fn cmd_pipeline(config: &WorkspaceConfig) -> CmdResult {
    cmd_ingest(config)?;
    cmd_estimate_dates(config)?;
    cmd_name_candidates(config)?;
    cmd_name_apply(config)?;
    cmd_extract_cwe(config, None)?;
    cmd_train_severity(config, None)?;
    cmd_backfill(config, None)?;
    cmd_report(config)?;
    Ok(())
}
