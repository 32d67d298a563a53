//! Vendor and product name-inconsistency detection and repair.
//!
//! The NVD's free-form CPE names drift: misspellings (`microsoft` /
//! `microsft`), formatting variants (`avast` / `avast!`), abbreviations
//! (`lan_management_system` / `lms`), strict prefixes (`lynx` /
//! `lynx_project`), products used as vendors, and typos at edit distance
//! one. Heuristics flag likely matching pairs into a review worksheet; a
//! human decision file drives consolidation under the name with the most
//! associated CVEs.

pub mod mapping;
pub mod similarity;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use similarity::{abbreviation, levenshtein, longest_common_substring, normalize_tokens};

/// Whether a pair names vendors or products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NameKind {
    Vendor,
    Product,
}

impl NameKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NameKind::Vendor => "vendor",
            NameKind::Product => "product",
        }
    }

    pub fn parse(s: &str) -> Option<NameKind> {
        match s {
            "vendor" => Some(NameKind::Vendor),
            "product" => Some(NameKind::Product),
            _ => None,
        }
    }
}

/// Every signal computed for a candidate name pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClassification {
    pub kind: NameKind,
    pub a: String,
    pub b: String,
    /// Token streams identical after splitting on special characters.
    pub tokens_equal: bool,
    pub lcs_length: usize,
    /// One name is a strict string prefix of the other.
    pub is_prefix: bool,
    /// One name appears as a product of the other vendor (vendor pairs).
    pub product_as_vendor: bool,
    /// #MP: products listed under both vendors (vendor pairs).
    pub matching_products: usize,
    /// One name is the first-letter abbreviation of the other.
    pub abbreviation_match: bool,
    pub edit_distance: usize,
}

impl PairClassification {
    /// Compact flag summary for the review worksheet.
    pub fn flags(&self) -> String {
        let mut parts = Vec::new();
        if self.tokens_equal {
            parts.push("tokens".to_string());
        }
        parts.push(format!("lcs={}", self.lcs_length));
        if self.is_prefix {
            parts.push("prefix".to_string());
        }
        if self.product_as_vendor {
            parts.push("pav".to_string());
        }
        if self.kind == NameKind::Vendor {
            parts.push(format!("mp={}", self.matching_products));
        }
        if self.abbreviation_match {
            parts.push("abbr".to_string());
        }
        parts.push(format!("ed={}", self.edit_distance));
        parts.join(",")
    }
}

/// Classifies one name pair against the corpus. `a` and `b` must differ;
/// pairs are normalized so `a < b` lexicographically.
pub fn classify_pair(kind: NameKind, a: &str, b: &str, corpus: &Corpus) -> PairClassification {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let tokens_equal = normalize_tokens(a) == normalize_tokens(b);
    let lcs_length = longest_common_substring(a, b);
    let is_prefix = a != b && (b.starts_with(a) || a.starts_with(b));
    let abbr_a = abbreviation(a);
    let abbr_b = abbreviation(b);
    let abbreviation_match = (!abbr_a.is_empty() && abbr_a == b) || (!abbr_b.is_empty() && abbr_b == a);
    let edit_distance = levenshtein(a, b);

    let (product_as_vendor, matching_products) = if kind == NameKind::Vendor {
        let products_a = corpus.products_of(a);
        let products_b = corpus.products_of(b);
        let pav = products_a.map(|p| p.contains(b)).unwrap_or(false)
            || products_b.map(|p| p.contains(a)).unwrap_or(false);
        let shared = match (products_a, products_b) {
            (Some(pa), Some(pb)) => pa.intersection(pb).count(),
            _ => 0,
        };
        (pav, shared)
    } else {
        (false, 0)
    };

    PairClassification {
        kind,
        a: a.to_string(),
        b: b.to_string(),
        tokens_equal,
        lcs_length,
        is_prefix,
        product_as_vendor,
        matching_products,
        abbreviation_match,
        edit_distance,
    }
}

/// Whether a classified vendor pair reaches the review worksheet.
///
/// Shared-substring candidates are gated at |LCS| >= 3 or prefix or token
/// equality or an abbreviation hit; pairs below that gate enter only via a
/// shared product (#MP >= 1) or product-as-vendor.
fn vendor_candidate(c: &PairClassification) -> bool {
    c.tokens_equal
        || c.lcs_length >= 3
        || c.is_prefix
        || c.abbreviation_match
        || c.matching_products >= 1
        || c.product_as_vendor
}

/// All vendor pairs flagged by the matching heuristics.
pub fn candidate_vendor_pairs(corpus: &Corpus) -> Vec<PairClassification> {
    let vendors: Vec<&str> = corpus.vendors().collect();
    let mut out = Vec::new();
    for i in 0..vendors.len() {
        for j in i + 1..vendors.len() {
            let c = classify_pair(NameKind::Vendor, vendors[i], vendors[j], corpus);
            if vendor_candidate(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Edit-distance gate for product pairs: distance 1 always; distance 2
/// only with a long shared substring. Firmware-style names at distance 1
/// are still flagged — the review decision resolves them as non-matching.
fn product_edit_gate(c: &PairClassification) -> bool {
    c.edit_distance <= 1 || (c.edit_distance == 2 && c.lcs_length >= 5)
}

/// Product pairs under one vendor flagged by token equality, abbreviation,
/// or the edit-distance gate.
pub fn candidate_product_pairs(corpus: &Corpus, vendor: &str) -> Result<Vec<PairClassification>> {
    let products = corpus
        .products_of(vendor)
        .ok_or_else(|| Error::UnknownVendor(vendor.to_string()))?;
    let products: Vec<&str> = products.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    for i in 0..products.len() {
        for j in i + 1..products.len() {
            let c = classify_pair(NameKind::Product, products[i], products[j], corpus);
            if c.tokens_equal || c.abbreviation_match || product_edit_gate(&c) {
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// Flagged product pairs across every vendor.
pub fn candidate_product_pairs_all(corpus: &Corpus) -> Vec<PairClassification> {
    let mut out = Vec::new();
    let vendors: Vec<String> = corpus.vendors().map(str::to_string).collect();
    for vendor in vendors {
        if let Ok(mut pairs) = candidate_product_pairs(corpus, &vendor) {
            out.append(&mut pairs);
        }
    }
    out.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    out.dedup_by(|x, y| x.a == y.a && x.b == y.b);
    out
}

/// The inconsistency-pattern buckets of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternCategory {
    Tokens,
    MpZero,
    MpOne,
    MpMany,
    Prefix,
    ProductAsVendor,
}

impl PatternCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            PatternCategory::Tokens => "tokens",
            PatternCategory::MpZero => "mp=0",
            PatternCategory::MpOne => "mp=1",
            PatternCategory::MpMany => "mp>1",
            PatternCategory::Prefix => "prefix",
            PatternCategory::ProductAsVendor => "pav",
        }
    }
}

/// One cell of the pattern summary: unique pairs and distinct names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCell {
    pub pairs: usize,
    pub names: usize,
}

/// Pattern-by-pattern tally of flagged pairs, split by whether the longest
/// substring match reaches 3 characters, for all flagged ("possible") and
/// reviewer-confirmed pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PatternStats {
    /// (category, lcs_ge_3) -> cell; Tokens pairs are tallied only under
    /// Tokens, other pairs under their #MP bucket plus Prefix/PaV when set.
    pub possible: Vec<((PatternCategory, bool), PatternCell)>,
    pub confirmed: Vec<((PatternCategory, bool), PatternCell)>,
}

impl PatternStats {
    pub fn cell(&self, confirmed: bool, category: PatternCategory, lcs_ge_3: bool) -> PatternCell {
        let rows = if confirmed { &self.confirmed } else { &self.possible };
        rows.iter()
            .find(|(key, _)| *key == (category, lcs_ge_3))
            .map(|(_, cell)| *cell)
            .unwrap_or_default()
    }
}

fn categories_of(c: &PairClassification) -> Vec<PatternCategory> {
    if c.tokens_equal {
        return vec![PatternCategory::Tokens];
    }
    let mut cats = vec![match c.matching_products {
        0 => PatternCategory::MpZero,
        1 => PatternCategory::MpOne,
        _ => PatternCategory::MpMany,
    }];
    if c.is_prefix {
        cats.push(PatternCategory::Prefix);
    }
    if c.product_as_vendor {
        cats.push(PatternCategory::ProductAsVendor);
    }
    cats
}

fn tally(pairs: &[&PairClassification]) -> Vec<((PatternCategory, bool), PatternCell)> {
    use std::collections::BTreeMap;
    let mut cells: BTreeMap<(PatternCategory, bool), (usize, BTreeSet<String>)> = BTreeMap::new();
    for c in pairs {
        let lcs_ge_3 = c.lcs_length >= 3;
        for cat in categories_of(c) {
            let entry = cells.entry((cat, lcs_ge_3)).or_default();
            entry.0 += 1;
            entry.1.insert(c.a.clone());
            entry.1.insert(c.b.clone());
        }
    }
    cells
        .into_iter()
        .map(|(key, (pairs, names))| {
            (
                key,
                PatternCell {
                    pairs,
                    names: names.len(),
                },
            )
        })
        .collect()
}

/// Summarizes flagged pairs against the review decisions.
pub fn pattern_stats(
    pairs: &[PairClassification],
    decisions: &mapping::DecisionSet,
) -> Result<PatternStats> {
    let all: Vec<&PairClassification> = pairs.iter().collect();
    let mut confirmed = Vec::new();
    for c in pairs {
        if decisions
            .lookup(c.kind, &c.a, &c.b)
            .ok_or_else(|| Error::UndecidedPairs(1, format!("{} {} / {}", c.kind.as_str(), c.a, c.b)))?
        {
            confirmed.push(c);
        }
    }
    Ok(PatternStats {
        possible: tally(&all),
        confirmed: tally(&confirmed),
    })
}
