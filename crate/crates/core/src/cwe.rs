//! CWE-ID recovery from free-form descriptions.
//!
//! NVD evaluator comments often carry the concrete CWE (e.g. "CWE-835:
//! Loop with Unreachable Exit Condition") while the structured field says
//! `NVD-CWE-Other`. IDs are pulled from every description with a regular
//! expression, validated against a catalog snapshot, and merged into the
//! record's CWE set, displacing placeholders once a concrete id exists.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{is_cwe_placeholder, CveRecord};

/// The regex requires at least one digit: a bare "CWE-" is not an
/// identifier. Case-insensitive on the prefix.
fn cwe_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)CWE-[0-9]+").unwrap())
}

/// All maximal `CWE-[0-9]+` matches in `text`, normalized to an uppercase
/// prefix and de-duplicated in first-occurrence order.
pub fn extract_cwe_ids(text: &str) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for m in cwe_regex().find_iter(text) {
        let digits = &m.as_str()[4..];
        let id = format!("CWE-{digits}");
        if seen.insert(id.clone()) {
            out.push(id);
        }
    }
    out
}

/// Snapshot of the public CWE list: id -> weakness name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CweCatalog {
    entries: BTreeMap<String, String>,
}

impl CweCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn name_of(&self, id: &str) -> Option<&str> {
        self.entries.get(id).map(String::as_str)
    }

    /// Parses the two-column TSV snapshot (`id\tname`).
    pub fn parse_tsv(text: &str) -> Result<CweCatalog> {
        let id_re = Regex::new(r"^CWE-[0-9]+$").unwrap();
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (id, name) = line.split_once('\t').ok_or_else(|| Error::MalformedTable {
                what: "cwe catalog".to_string(),
                line: idx + 1,
                detail: "expected id\\tname".to_string(),
            })?;
            if !id_re.is_match(id) {
                return Err(Error::MalformedTable {
                    what: "cwe catalog".to_string(),
                    line: idx + 1,
                    detail: format!("bad id {id:?}"),
                });
            }
            entries.insert(id.to_string(), name.trim().to_string());
        }
        Ok(CweCatalog { entries })
    }

    pub fn load(path: &Path) -> Result<CweCatalog> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse_tsv(&text)
    }
}

/// Classic English stop words; enough to cover evaluator-comment prose.
const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "cannot", "could", "did", "do", "does", "doing", "down", "during", "each",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here",
    "hers", "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it",
    "its", "itself", "just", "may", "me", "might", "more", "most", "must", "my", "myself",
    "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "our",
    "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so", "some", "such",
    "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these",
    "they", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was",
    "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
    "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.binary_search(&word).is_ok()
}

/// Light suffix stripping for tense normalization ("accessed" -> "access",
/// "used" -> "use"). When removing "ed"/"ing" would leave fewer than three
/// characters, only the trailing consonant goes.
fn stem(word: &str) -> String {
    if !word.is_ascii() {
        return word.to_string();
    }
    for suffix in ["ed", "ing"] {
        if let Some(stripped) = word.strip_suffix(suffix) {
            if stripped.len() >= 3 {
                return stripped.to_string();
            }
            let shorter = &word[..word.len() - suffix.len() + 1];
            if shorter.len() >= 3 {
                return shorter.to_string();
            }
        }
    }
    word.to_string()
}

/// Normalizes a description: lowercase, contractions and possessives
/// dropped, special characters stripped, stop words removed, light
/// stemming applied.
pub fn preprocess_description(text: &str) -> String {
    let mut lowered = text.to_lowercase();
    for contraction in ["'s", "’s", "n't", "'re", "'ve", "'ll", "'d"] {
        lowered = lowered.replace(contraction, "");
    }
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !is_stop_word(t))
        .map(stem)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Result of merging description-extracted IDs into one record.
#[derive(Debug, Clone, PartialEq)]
pub struct CweMerge {
    pub record: CveRecord,
    pub changed: bool,
    /// Extracted IDs absent from the catalog: reported, never merged.
    pub quarantined: Vec<String>,
}

/// Unions the feed CWE set with IDs recovered from every description.
/// Placeholders are removed once at least one concrete id exists and kept
/// otherwise; concrete feed ids are never removed. Idempotent.
pub fn merge_cwe(record: &CveRecord, catalog: &CweCatalog) -> CweMerge {
    let mut extracted: Vec<String> = Vec::new();
    for description in &record.descriptions {
        for id in extract_cwe_ids(description) {
            if !extracted.contains(&id) {
                extracted.push(id);
            }
        }
    }
    let mut quarantined = Vec::new();
    let mut accepted = Vec::new();
    for id in extracted {
        if catalog.contains(&id) {
            accepted.push(id);
        } else {
            quarantined.push(id);
        }
    }

    let mut merged: Vec<String> = record.cwe_ids.clone();
    for id in accepted {
        if !merged.contains(&id) {
            merged.push(id);
        }
    }
    let has_concrete = merged.iter().any(|c| !is_cwe_placeholder(c));
    if has_concrete {
        merged.retain(|c| !is_cwe_placeholder(c));
    }
    merged.sort();
    merged.dedup();

    let changed = merged != record.cwe_ids;
    let mut out = record.clone();
    out.cwe_ids = merged;
    CweMerge {
        record: out,
        changed,
        quarantined,
    }
}

/// Placeholder population before the merge and how much of it was fixed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CweGapStats {
    pub other: usize,
    pub noinfo: usize,
    pub unassigned: usize,
    pub fixed_other: usize,
    pub fixed_noinfo_or_unassigned: usize,
}

/// Compares placeholder populations before and after a merge pass over
/// corpora sharing the same record ids.
pub fn cwe_gap_report(raw: &Corpus, merged: &Corpus) -> Result<CweGapStats> {
    let mut stats = CweGapStats::default();
    for record in raw.records() {
        let after = merged
            .get(&record.id)
            .ok_or_else(|| Error::CorpusIdMismatch(record.id.to_string()))?;
        let had_other = record.cwe_ids.iter().any(|c| c == "NVD-CWE-Other");
        let had_noinfo = record.cwe_ids.iter().any(|c| c == "NVD-CWE-noinfo");
        let had_unassigned =
            record.cwe_ids.is_empty() || record.cwe_ids.iter().all(|c| c.is_empty());
        let fixed = after.concrete_cwes().next().is_some()
            && record.concrete_cwes().next().is_none();
        if had_other {
            stats.other += 1;
            if fixed {
                stats.fixed_other += 1;
            }
        }
        if had_noinfo {
            stats.noinfo += 1;
        }
        if had_unassigned {
            stats.unassigned += 1;
        }
        if (had_noinfo || had_unassigned) && !had_other && fixed {
            stats.fixed_noinfo_or_unassigned += 1;
        }
    }
    Ok(stats)
}

/// Runs the merge across the corpus, collecting quarantined ids per record.
pub fn merge_all(corpus: &Corpus, catalog: &CweCatalog) -> (Corpus, MergeAllStats) {
    let mut stats = MergeAllStats::default();
    let merged = corpus.map_records(|record| {
        let outcome = merge_cwe(record, catalog);
        if outcome.changed {
            stats.records_changed += 1;
        }
        for id in outcome.quarantined {
            stats
                .quarantined
                .push((record.id.to_string(), id));
        }
        outcome.record
    });
    (merged, stats)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MergeAllStats {
    pub records_changed: usize,
    /// (cve id, extracted-but-unknown CWE id)
    pub quarantined: Vec<(String, String)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_support::record;

    fn catalog() -> CweCatalog {
        CweCatalog::parse_tsv(
            "CWE-79\tCross-site Scripting\nCWE-89\tSQL Injection\nCWE-835\tLoop with Unreachable Exit Condition ('Infinite Loop')\n",
        )
        .unwrap()
    }

    #[test]
    fn extracts_evaluator_comment_id() {
        assert_eq!(
            extract_cwe_ids("CWE-835: Loop with Unreachable Exit Condition ('Infinite Loop')"),
            ["CWE-835"]
        );
    }

    #[test]
    fn extracts_nothing_from_plain_text() {
        assert!(extract_cwe_ids("no identifiers here").is_empty());
        assert!(extract_cwe_ids("").is_empty());
        // Bare "CWE-" is not an identifier.
        assert!(extract_cwe_ids("see CWE- for details").is_empty());
    }

    #[test]
    fn dedups_case_insensitively_in_order() {
        assert_eq!(
            extract_cwe_ids("CWE-79 and cwe-89; CWE-79 again"),
            ["CWE-79", "CWE-89"]
        );
    }

    #[test]
    fn matches_are_maximal() {
        assert_eq!(extract_cwe_ids("CWE-1234x"), ["CWE-1234"]);
        assert_eq!(extract_cwe_ids("xCWE-79"), ["CWE-79"]);
    }

    /// Character-scan oracle: walks the string by hand looking for the
    /// case-insensitive prefix and a maximal digit run.
    fn scan_oracle(text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let ahead: String = chars[i..chars.len().min(i + 4)].iter().collect();
            if ahead.to_lowercase() == "cwe-" {
                let mut j = i + 4;
                let mut digits = String::new();
                while j < chars.len() && chars[j].is_ascii_digit() {
                    digits.push(chars[j]);
                    j += 1;
                }
                if !digits.is_empty() {
                    let id = format!("CWE-{digits}");
                    if seen.insert(id.clone()) {
                        out.push(id);
                    }
                    i = j;
                    continue;
                }
            }
            i += 1;
        }
        out
    }

    #[test]
    fn agrees_with_scan_oracle_on_planted_ids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let filler = ["lorem", "CWE", "cwe-", "-12", "buffer", "CW", "overflow"];
        for _ in 0..1000 {
            let mut text = String::new();
            for _ in 0..rng.gen_range(0..12) {
                if rng.gen_bool(0.3) {
                    let n: u32 = rng.gen_range(1..10000);
                    let prefix = ["CWE-", "cwe-", "Cwe-"][rng.gen_range(0..3)];
                    text.push_str(&format!("{prefix}{n}"));
                } else {
                    text.push_str(filler[rng.gen_range(0..filler.len())]);
                }
                text.push(' ');
            }
            assert_eq!(extract_cwe_ids(&text), scan_oracle(&text), "{text:?}");
        }
    }

    #[test]
    fn extracted_ids_are_substrings_after_case_fold() {
        let text = "mix of cwe-79, CWE-835 and Cwe-20";
        for id in extract_cwe_ids(text) {
            assert!(text.to_uppercase().contains(&id));
        }
    }

    #[test]
    fn preprocess_worked_example() {
        assert_eq!(
            preprocess_description("This capability can be accessed"),
            "capability access"
        );
    }

    #[test]
    fn preprocess_contractions_and_tense() {
        assert_eq!(preprocess_description("identifier's"), "identifier");
        assert_eq!(preprocess_description("it was used"), "use");
        assert_eq!(preprocess_description(""), "");
    }

    #[test]
    fn preprocess_paragraph() {
        // Hand normalization: lowercase, strip stop words/specials, stem.
        let text = "The attacker, having crafted a request, accessed the admin's panel!";
        assert_eq!(
            preprocess_description(text),
            "attacker craft request access admin panel"
        );
    }

    #[test]
    fn merge_replaces_placeholder_with_extracted() {
        let mut r = record("CVE-2007-0838");
        r.cwe_ids = vec!["NVD-CWE-Other".to_string()];
        r.descriptions = vec![
            "Microsoft Office 2004 for Mac allows remote attackers to cause a denial of service."
                .to_string(),
            "CWE-835: Loop with Unreachable Exit Condition ('Infinite Loop')".to_string(),
        ];
        let outcome = merge_cwe(&r, &catalog());
        assert!(outcome.changed);
        assert_eq!(outcome.record.cwe_ids, ["CWE-835"]);
        assert!(outcome.quarantined.is_empty());
        // Idempotent.
        let again = merge_cwe(&outcome.record, &catalog());
        assert!(!again.changed);
        assert_eq!(again.record, outcome.record);
    }

    #[test]
    fn merge_keeps_concrete_feed_ids() {
        let mut r = record("CVE-2018-0001");
        r.cwe_ids = vec!["CWE-79".to_string()];
        let outcome = merge_cwe(&r, &catalog());
        assert!(!outcome.changed);
        assert_eq!(outcome.record.cwe_ids, ["CWE-79"]);
    }

    #[test]
    fn merge_retains_placeholder_without_recovery() {
        let mut r = record("CVE-2018-0002");
        r.cwe_ids = vec!["NVD-CWE-noinfo".to_string()];
        let outcome = merge_cwe(&r, &catalog());
        assert!(!outcome.changed);
        assert_eq!(outcome.record.cwe_ids, ["NVD-CWE-noinfo"]);
    }

    #[test]
    fn merge_quarantines_unknown_ids() {
        let mut r = record("CVE-2018-0003");
        r.cwe_ids = vec!["NVD-CWE-Other".to_string()];
        r.descriptions = vec!["evaluator: CWE-99999 applies".to_string()];
        let outcome = merge_cwe(&r, &catalog());
        assert_eq!(outcome.quarantined, ["CWE-99999"]);
        // Nothing merged, placeholder retained.
        assert!(!outcome.changed);
        assert_eq!(outcome.record.cwe_ids, ["NVD-CWE-Other"]);
    }

    #[test]
    fn merge_never_removes_concrete_ids() {
        let mut r = record("CVE-2018-0004");
        r.cwe_ids = vec!["CWE-89".to_string(), "NVD-CWE-Other".to_string()];
        r.descriptions = vec!["also CWE-79 applies".to_string()];
        let outcome = merge_cwe(&r, &catalog());
        assert!(outcome.changed);
        assert_eq!(outcome.record.cwe_ids, ["CWE-79", "CWE-89"]);
    }

    #[test]
    fn gap_report_counts() {
        let mut fixable_a = record("CVE-2018-0001");
        fixable_a.cwe_ids = vec!["NVD-CWE-Other".to_string()];
        fixable_a.descriptions = vec!["CWE-79 case".to_string()];
        let mut fixable_b = record("CVE-2018-0002");
        fixable_b.cwe_ids = vec!["NVD-CWE-Other".to_string()];
        fixable_b.descriptions = vec!["CWE-89 case".to_string()];
        let mut stuck = record("CVE-2018-0003");
        stuck.cwe_ids = vec!["NVD-CWE-noinfo".to_string()];
        let fine = {
            let mut r = record("CVE-2018-0004");
            r.cwe_ids = vec!["CWE-79".to_string()];
            r
        };
        let unassigned = record("CVE-2018-0005");
        let raw = Corpus::from_records([fixable_a, fixable_b, stuck, fine, unassigned]);
        let (merged, merge_stats) = merge_all(&raw, &catalog());
        let stats = cwe_gap_report(&raw, &merged).unwrap();
        assert_eq!(stats.other, 2);
        assert_eq!(stats.fixed_other, 2);
        assert_eq!(stats.noinfo, 1);
        assert_eq!(stats.unassigned, 1);
        assert_eq!(stats.fixed_noinfo_or_unassigned, 0);
        assert_eq!(merge_stats.records_changed, 2);
    }

    #[test]
    fn gap_report_no_placeholders_zero() {
        let mut r = record("CVE-2018-0001");
        r.cwe_ids = vec!["CWE-79".to_string()];
        let corpus = Corpus::from_records([r]);
        let stats = cwe_gap_report(&corpus, &corpus).unwrap();
        assert_eq!(stats, CweGapStats::default());
    }

    #[test]
    fn catalog_rejects_bad_rows() {
        assert!(CweCatalog::parse_tsv("CWE-79 Cross-site Scripting\n").is_err());
        assert!(CweCatalog::parse_tsv("79\tCross-site Scripting\n").is_err());
        assert!(CweCatalog::parse_tsv("CWE-79\tXSS\n").is_ok());
    }

    #[test]
    fn stop_words_sorted_for_binary_search() {
        let mut sorted = STOP_WORDS.to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, STOP_WORDS);
    }
}
