//! Workspace configuration: flat `key=value` lines with section prefixes
//! (`run.seed=42`), `#` comments, and environment overrides of the form
//! `VULNCURE_<SECTION>_<KEY>`. Relative paths resolve against the config
//! file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use vulncure_core::dates::MultiDatePolicy;
use vulncure_core::severity::eval::AerZeroPolicy;
use vulncure_core::severity::model::ModelKind;
use vulncure_core::severity::StratifyOn;

#[derive(Debug, Clone)]
pub struct WorkspaceConfig {
    /// Directory the config file lives in; the workspace root.
    pub root: PathBuf,
    pub feeds_dir: PathBuf,
    pub fixtures_dir: PathBuf,
    pub cwe_catalog: PathBuf,
    pub decisions_file: PathBuf,
    pub external_vendor_list: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub mapping_file: PathBuf,
    pub model_file: PathBuf,
    pub seed: u64,
    pub multi_date_policy: MultiDatePolicy,
    pub split_ratio: f64,
    pub stratify_on: StratifyOn,
    pub aer_zero_policy: AerZeroPolicy,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub ridge: f64,
    pub model_kind: ModelKind,
    pub report_top_n: usize,
    /// Effective key/value view, recorded into run manifests.
    pub entries: BTreeMap<String, String>,
}

fn env_key(key: &str) -> String {
    let mut out = String::from("VULNCURE_");
    for c in key.chars() {
        if c == '.' || c == '-' {
            out.push('_');
        } else {
            out.push(c.to_ascii_uppercase());
        }
    }
    out
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut entries = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key=value, got {line:?}", idx + 1);
        };
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

impl WorkspaceConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut entries = parse_entries(&text)?;

        // Environment overrides win over the file.
        for key in KNOWN_KEYS {
            if let Ok(value) = std::env::var(env_key(key)) {
                entries.insert(key.to_string(), value);
            }
        }

        let root = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::from_entries(root, entries)
    }

    fn from_entries(root: PathBuf, entries: BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str, default: &str| -> String {
            entries.get(key).cloned().unwrap_or_else(|| default.to_string())
        };
        let resolve = |value: &str| -> PathBuf {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                root.join(p)
            }
        };

        let seed: u64 = get("run.seed", "42").parse().context("run.seed")?;
        let multi_date_policy = match get("dates.multi_date_policy", "first").as_str() {
            "first" => MultiDatePolicy::First,
            "min" => MultiDatePolicy::Min,
            other => bail!("dates.multi_date_policy must be first|min, got {other:?}"),
        };
        let stratify_on = match get("severity.split_stratify_on", "v3").as_str() {
            "v2" => StratifyOn::V2,
            "v3" => StratifyOn::V3,
            other => bail!("severity.split_stratify_on must be v2|v3, got {other:?}"),
        };
        let aer_zero_policy = match get("severity.aer_zero_policy", "exclude").as_str() {
            "exclude" => AerZeroPolicy::Exclude,
            "error" => AerZeroPolicy::Error,
            other => bail!("severity.aer_zero_policy must be exclude|error, got {other:?}"),
        };
        let model_kind = match get("severity.model", "dnn").as_str() {
            "dnn" => ModelKind::Dnn,
            "linear" => ModelKind::Linear,
            other => bail!("severity.model must be dnn|linear, got {other:?}"),
        };
        let external = entries
            .get("paths.external_vendor_list")
            .filter(|v| !v.is_empty())
            .map(|v| resolve(v));

        let mut effective = entries.clone();
        for key in KNOWN_KEYS {
            effective
                .entry(key.to_string())
                .or_insert_with(|| default_of(key).to_string());
        }

        Ok(WorkspaceConfig {
            feeds_dir: resolve(&get("paths.feeds_dir", "feeds")),
            fixtures_dir: resolve(&get("paths.fixtures_dir", "fixtures")),
            cwe_catalog: resolve(&get("paths.cwe_catalog", "cwe_catalog.tsv")),
            decisions_file: resolve(&get("paths.decisions_file", "decisions.tsv")),
            external_vendor_list: external,
            output_dir: resolve(&get("paths.output_dir", "out")),
            mapping_file: resolve(&get("paths.mapping_file", "out/mapping.tsv")),
            model_file: resolve(&get("paths.model_file", "out/model.json")),
            seed,
            multi_date_policy,
            split_ratio: get("severity.split_ratio", "0.8").parse().context("severity.split_ratio")?,
            stratify_on,
            aer_zero_policy,
            epochs: get("severity.epochs", "100").parse().context("severity.epochs")?,
            batch_size: get("severity.batch_size", "128").parse().context("severity.batch_size")?,
            learning_rate: get("severity.learning_rate", "0.001")
                .parse()
                .context("severity.learning_rate")?,
            ridge: get("severity.ridge", "1e-6").parse().context("severity.ridge")?,
            model_kind,
            report_top_n: get("report.top_n", "10").parse().context("report.top_n")?,
            entries: effective,
            root,
        })
    }
}

const KNOWN_KEYS: &[&str] = &[
    "paths.feeds_dir",
    "paths.fixtures_dir",
    "paths.cwe_catalog",
    "paths.decisions_file",
    "paths.external_vendor_list",
    "paths.output_dir",
    "paths.mapping_file",
    "paths.model_file",
    "run.seed",
    "dates.multi_date_policy",
    "severity.split_ratio",
    "severity.split_stratify_on",
    "severity.aer_zero_policy",
    "severity.epochs",
    "severity.batch_size",
    "severity.learning_rate",
    "severity.ridge",
    "severity.model",
    "report.top_n",
];

fn default_of(key: &str) -> &'static str {
    match key {
        "paths.feeds_dir" => "feeds",
        "paths.fixtures_dir" => "fixtures",
        "paths.cwe_catalog" => "cwe_catalog.tsv",
        "paths.decisions_file" => "decisions.tsv",
        "paths.external_vendor_list" => "",
        "paths.output_dir" => "out",
        "paths.mapping_file" => "out/mapping.tsv",
        "paths.model_file" => "out/model.json",
        "run.seed" => "42",
        "dates.multi_date_policy" => "first",
        "severity.split_ratio" => "0.8",
        "severity.split_stratify_on" => "v3",
        "severity.aer_zero_policy" => "exclude",
        "severity.epochs" => "100",
        "severity.batch_size" => "128",
        "severity.learning_rate" => "0.001",
        "severity.ridge" => "1e-6",
        "severity.model" => "dnn",
        "report.top_n" => "10",
        _ => "",
    }
}
