//! Review worksheets, decision files, and the raw-name -> canonical-name
//! mapping built from adjudicated pairs.
//!
//! Manual adjudication is a persistent TSV so the review step is auditable
//! and reproducible. Matched pairs are grouped with union-find; each
//! group's canonical name is the member with the most associated CVEs
//! (ties broken lexicographically).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::CveId;

use super::{NameKind, PairClassification};

/// Adjudications for flagged pairs, keyed by normalized (kind, a, b).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecisionSet {
    decisions: BTreeMap<(NameKind, String, String), Decision>,
}

#[derive(Debug, Clone, PartialEq)]
struct Decision {
    matched: bool,
    note: String,
}

fn pair_key(kind: NameKind, a: &str, b: &str) -> (NameKind, String, String) {
    if a <= b {
        (kind, a.to_string(), b.to_string())
    } else {
        (kind, b.to_string(), a.to_string())
    }
}

impl DecisionSet {
    pub fn insert(&mut self, kind: NameKind, a: &str, b: &str, matched: bool, note: &str) {
        self.decisions.insert(
            pair_key(kind, a, b),
            Decision {
                matched,
                note: note.to_string(),
            },
        );
    }

    pub fn lookup(&self, kind: NameKind, a: &str, b: &str) -> Option<bool> {
        self.decisions.get(&pair_key(kind, a, b)).map(|d| d.matched)
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Parses a worksheet/decision TSV. Lines: `kind\ta\tb\tflags\tmatch\tnote`;
    /// the header row and `#` comments are skipped; an empty match column
    /// leaves the pair undecided (not inserted).
    pub fn parse(text: &str) -> Result<DecisionSet> {
        let mut set = DecisionSet::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if idx == 0 && fields.first() == Some(&"kind") {
                continue;
            }
            if fields.len() < 5 {
                return Err(Error::MalformedTable {
                    what: "decision file".to_string(),
                    line: line_no,
                    detail: format!("expected >=5 tab-separated fields, got {}", fields.len()),
                });
            }
            let kind = NameKind::parse(fields[0]).ok_or_else(|| Error::MalformedTable {
                what: "decision file".to_string(),
                line: line_no,
                detail: format!("unknown kind {:?}", fields[0]),
            })?;
            let matched = match fields[4].trim() {
                "" => continue,
                "yes" | "y" | "1" | "true" => true,
                "no" | "n" | "0" | "false" => false,
                other => {
                    return Err(Error::MalformedTable {
                        what: "decision file".to_string(),
                        line: line_no,
                        detail: format!("match must be yes/no, got {other:?}"),
                    })
                }
            };
            set.insert(kind, fields[1], fields[2], matched, fields.get(5).unwrap_or(&""));
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<DecisionSet> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

/// Renders flagged pairs as a review worksheet, carrying over any already
/// recorded decisions so re-runs never lose adjudications.
pub fn render_worksheet(pairs: &[PairClassification], decisions: &DecisionSet) -> String {
    let mut out = String::from("kind\ta\tb\tflags\tmatch\tnote\n");
    let mut sorted: Vec<&PairClassification> = pairs.iter().collect();
    sorted.sort_by(|x, y| (x.kind, &x.a, &x.b).cmp(&(y.kind, &y.a, &y.b)));
    for c in sorted {
        let decision = decisions
            .decisions
            .get(&pair_key(c.kind, &c.a, &c.b));
        let (matched, note) = match decision {
            Some(d) => (if d.matched { "yes" } else { "no" }, d.note.as_str()),
            None => ("", ""),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            c.kind.as_str(),
            c.a,
            c.b,
            c.flags(),
            matched,
            note
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecidedBy {
    HeuristicManual,
    ImportedFile,
}

impl DecidedBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecidedBy::HeuristicManual => "heuristic+manual",
            DecidedBy::ImportedFile => "imported-file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryProvenance {
    pub flags: String,
    pub decided_by: DecidedBy,
}

/// Auditable raw-name -> canonical-name table for vendors and products.
///
/// Canonical names are fixed points: no canonical appears as a raw key, so
/// application is acyclic and idempotent by construction.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NameMapping {
    entries: BTreeMap<(NameKind, String), String>,
    provenance: BTreeMap<(NameKind, String), EntryProvenance>,
}

impl NameMapping {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn canonical_for(&self, kind: NameKind, raw: &str) -> Option<&str> {
        self.entries
            .get(&(kind, raw.to_string()))
            .map(String::as_str)
    }

    /// Rewrites a name through the mapping; unmapped names pass through.
    pub fn apply(&self, kind: NameKind, name: &str) -> String {
        self.canonical_for(kind, name)
            .map(str::to_string)
            .unwrap_or_else(|| name.to_string())
    }

    pub fn entries(&self) -> impl Iterator<Item = (NameKind, &str, &str)> {
        self.entries
            .iter()
            .map(|((kind, raw), canonical)| (*kind, raw.as_str(), canonical.as_str()))
    }

    /// Distinct canonical targets of the given kind.
    pub fn canonical_targets(&self, kind: NameKind) -> BTreeSet<&str> {
        self.entries
            .iter()
            .filter(|((k, _), _)| *k == kind)
            .map(|(_, canonical)| canonical.as_str())
            .collect()
    }

    fn insert(&mut self, kind: NameKind, raw: String, canonical: String, prov: EntryProvenance) {
        debug_assert_ne!(raw, canonical);
        self.provenance.insert((kind, raw.clone()), prov);
        self.entries.insert((kind, raw), canonical);
    }

    /// Unions two mappings with disjoint key sets (e.g. the vendor stage
    /// and the product stage built on the consolidated corpus).
    pub fn merge(mut self, other: NameMapping) -> Result<NameMapping> {
        for ((kind, raw), canonical) in other.entries {
            if self.entries.contains_key(&(kind, raw.clone())) {
                return Err(Error::MalformedTable {
                    what: "name mapping".to_string(),
                    line: 0,
                    detail: format!("duplicate entry for {} {raw:?}", kind.as_str()),
                });
            }
            let prov = other
                .provenance
                .get(&(kind, raw.clone()))
                .cloned()
                .unwrap_or(EntryProvenance {
                    flags: String::new(),
                    decided_by: DecidedBy::HeuristicManual,
                });
            self.insert(kind, raw, canonical, prov);
        }
        self.validate()?;
        Ok(self)
    }

    /// Checks the fixed-point invariant: no canonical target is itself a key.
    pub fn validate(&self) -> Result<()> {
        for ((kind, raw), canonical) in &self.entries {
            if self.entries.contains_key(&(*kind, canonical.clone())) {
                return Err(Error::MalformedTable {
                    what: "name mapping".to_string(),
                    line: 0,
                    detail: format!(
                        "canonical {canonical:?} for {raw:?} is itself remapped"
                    ),
                });
            }
        }
        Ok(())
    }

    /// TSV export: `kind\traw\tcanonical\tdecided_by`.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("kind\traw\tcanonical\tdecided_by\n");
        for ((kind, raw), canonical) in &self.entries {
            let decided = self
                .provenance
                .get(&(*kind, raw.clone()))
                .map(|p| p.decided_by.as_str())
                .unwrap_or("imported-file");
            out.push_str(&format!("{}\t{raw}\t{canonical}\t{decided}\n", kind.as_str()));
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<NameMapping> {
        let mut mapping = NameMapping::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if idx == 0 && fields.first() == Some(&"kind") {
                continue;
            }
            if fields.len() < 3 {
                return Err(Error::MalformedTable {
                    what: "mapping file".to_string(),
                    line: idx + 1,
                    detail: "expected kind, raw, canonical".to_string(),
                });
            }
            let kind = NameKind::parse(fields[0]).ok_or_else(|| Error::MalformedTable {
                what: "mapping file".to_string(),
                line: idx + 1,
                detail: format!("unknown kind {:?}", fields[0]),
            })?;
            let decided_by = match fields.get(3).copied() {
                Some("heuristic+manual") => DecidedBy::HeuristicManual,
                _ => DecidedBy::ImportedFile,
            };
            mapping.insert(
                kind,
                fields[1].to_string(),
                fields[2].to_string(),
                EntryProvenance {
                    flags: String::new(),
                    decided_by,
                },
            );
        }
        mapping.validate()?;
        Ok(mapping)
    }

    pub fn load(path: &Path) -> Result<NameMapping> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse_tsv(&text)
    }
}

struct UnionFind {
    parent: BTreeMap<String, String>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind {
            parent: BTreeMap::new(),
        }
    }

    fn find(&mut self, x: &str) -> String {
        let parent = self
            .parent
            .entry(x.to_string())
            .or_insert_with(|| x.to_string())
            .clone();
        if parent == x {
            return parent;
        }
        let root = self.find(&parent);
        self.parent.insert(x.to_string(), root.clone());
        root
    }

    fn union(&mut self, a: &str, b: &str) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Smaller root wins so grouping is order-independent.
            let (keep, merge) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent.insert(merge, keep);
        }
    }
}

/// Distinct CVEs associated with a name, the canonical-choice metric.
fn cve_count(corpus: &Corpus, kind: NameKind, name: &str) -> usize {
    match kind {
        NameKind::Vendor => corpus.cve_count_of_vendor(name),
        NameKind::Product => {
            let mut ids: BTreeSet<&CveId> = BTreeSet::new();
            for vendor in corpus.vendors() {
                if let Some(products) = corpus.products_of(vendor) {
                    if products.contains(name) {
                        if let Some(cves) = corpus.cves_of_product(vendor, name) {
                            ids.extend(cves.iter());
                        }
                    }
                }
            }
            ids.len()
        }
    }
}

/// Builds the consolidation mapping from flagged pairs and their
/// adjudications. Every flagged pair must have a decision; otherwise the
/// undecided pairs are reported and nothing is built.
pub fn build_mapping(
    corpus: &Corpus,
    pairs: &[PairClassification],
    decisions: &DecisionSet,
) -> Result<NameMapping> {
    let mut undecided: Vec<String> = Vec::new();
    let mut matched: Vec<&PairClassification> = Vec::new();
    for c in pairs {
        match decisions.lookup(c.kind, &c.a, &c.b) {
            None => undecided.push(format!("{} {} / {}", c.kind.as_str(), c.a, c.b)),
            Some(true) => matched.push(c),
            Some(false) => {}
        }
    }
    if !undecided.is_empty() {
        undecided.sort();
        return Err(Error::UndecidedPairs(undecided.len(), undecided[0].clone()));
    }

    let mut mapping = NameMapping::default();
    for kind in [NameKind::Vendor, NameKind::Product] {
        let kind_pairs: Vec<&&PairClassification> =
            matched.iter().filter(|c| c.kind == kind).collect();
        let mut uf = UnionFind::new();
        for c in &kind_pairs {
            uf.union(&c.a, &c.b);
        }
        let mut groups: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for c in &kind_pairs {
            for name in [&c.a, &c.b] {
                let root = uf.find(name);
                groups.entry(root).or_default().insert(name.clone());
            }
        }
        for members in groups.values() {
            // Most associated CVEs wins; lexicographically smallest on ties.
            let canonical = members
                .iter()
                .max_by(|x, y| {
                    cve_count(corpus, kind, x)
                        .cmp(&cve_count(corpus, kind, y))
                        .then_with(|| y.cmp(x))
                })
                .expect("group nonempty")
                .clone();
            for member in members {
                if *member == canonical {
                    continue;
                }
                let flags = kind_pairs
                    .iter()
                    .find(|c| c.a == *member || c.b == *member)
                    .map(|c| c.flags())
                    .unwrap_or_default();
                mapping.insert(
                    kind,
                    member.clone(),
                    canonical.clone(),
                    EntryProvenance {
                        flags,
                        decided_by: DecidedBy::HeuristicManual,
                    },
                );
            }
        }
    }
    mapping.validate()?;
    Ok(mapping)
}

/// Distinct-name deltas from applying a mapping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ApplyStats {
    pub records_changed: usize,
    pub distinct_vendors_before: usize,
    pub distinct_vendors_after: usize,
    pub distinct_products_before: usize,
    pub distinct_products_after: usize,
}

fn distinct_product_names(corpus: &Corpus) -> usize {
    let mut names: BTreeSet<&str> = BTreeSet::new();
    for record in corpus.records() {
        for cpe in &record.cpes {
            names.insert(&cpe.product);
        }
    }
    names.len()
}

/// Rewrites every CPE vendor/product through the mapping and rebuilds
/// indices. Idempotent: canonical names are fixed points.
pub fn apply_mapping(corpus: &Corpus, mapping: &NameMapping) -> (Corpus, ApplyStats) {
    let mut stats = ApplyStats {
        distinct_vendors_before: corpus.vendor_count(),
        distinct_products_before: distinct_product_names(corpus),
        ..ApplyStats::default()
    };
    let corrected = corpus.map_records(|record| {
        let mut out = record.clone();
        let mut changed = false;
        for cpe in &mut out.cpes {
            let vendor = mapping.apply(NameKind::Vendor, &cpe.vendor);
            let product = mapping.apply(NameKind::Product, &cpe.product);
            if vendor != cpe.vendor || product != cpe.product {
                changed = true;
                cpe.vendor = vendor;
                cpe.product = product;
            }
        }
        if changed {
            stats.records_changed += 1;
            // Rewrites can collapse two rows into one.
            let mut seen = BTreeSet::new();
            out.cpes.retain(|c| seen.insert(c.clone()));
        }
        out
    });
    stats.distinct_vendors_after = corrected.vendor_count();
    stats.distinct_products_after = distinct_product_names(&corrected);
    (corrected, stats)
}

/// Outcome of replaying the vendor mapping onto an external vendor list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalRemapStats {
    pub total: usize,
    /// Names present in the list as non-canonical mapping keys.
    pub impacted: usize,
    /// Distinct canonical names the impacted ones map to.
    pub consolidated_targets: usize,
}

pub fn remap_external_vendor_list(names: &[String], mapping: &NameMapping) -> ExternalRemapStats {
    let mut targets: BTreeSet<&str> = BTreeSet::new();
    let mut impacted = 0;
    for name in names {
        if let Some(canonical) = mapping.canonical_for(NameKind::Vendor, name) {
            impacted += 1;
            targets.insert(canonical);
        }
    }
    ExternalRemapStats {
        total: names.len(),
        impacted,
        consolidated_targets: targets.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::{candidate_vendor_pairs, classify_pair};
    use crate::test_support::record;
    use crate::types::CpeEntry;

    /// Corpus where `bea` has `n_bea` CVEs and `bea_systems` has `n_sys`.
    fn bea_corpus(n_bea: usize, n_sys: usize) -> Corpus {
        let mut records = Vec::new();
        for i in 0..n_bea {
            let mut r = record(&format!("CVE-2018-1{i:03}"));
            r.cpes = vec![CpeEntry::new("bea", "weblogic_server", None).unwrap()];
            records.push(r);
        }
        for i in 0..n_sys {
            let mut r = record(&format!("CVE-2018-2{i:03}"));
            r.cpes = vec![CpeEntry::new("bea_systems", "weblogic_server", None).unwrap()];
            records.push(r);
        }
        Corpus::from_records(records)
    }

    fn decide_all(pairs: &[PairClassification], matched: bool) -> DecisionSet {
        let mut d = DecisionSet::default();
        for c in pairs {
            d.insert(c.kind, &c.a, &c.b, matched, "");
        }
        d
    }

    #[test]
    fn canonical_is_most_cves() {
        let corpus = bea_corpus(171, 14);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, true)).unwrap();
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "bea_systems"), Some("bea"));
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "bea"), None);
    }

    #[test]
    fn no_matches_empty_mapping() {
        let corpus = bea_corpus(5, 2);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, false)).unwrap();
        assert!(mapping.is_empty());
    }

    #[test]
    fn undecided_pairs_block() {
        let corpus = bea_corpus(5, 2);
        let pairs = candidate_vendor_pairs(&corpus);
        let err = build_mapping(&corpus, &pairs, &DecisionSet::default()).unwrap_err();
        assert!(err.to_string().contains("bea"), "{err}");
    }

    /// Corpus with three aliases of one vendor at given CVE counts.
    fn trio_corpus(counts: [(usize, &str); 3]) -> Corpus {
        let mut records = Vec::new();
        let mut n = 0;
        for (count, vendor) in counts {
            for _ in 0..count {
                n += 1;
                let mut r = record(&format!("CVE-2018-{n:04}"));
                r.cpes = vec![CpeEntry::new(vendor, "shared_product", None).unwrap()];
                records.push(r);
            }
        }
        Corpus::from_records(records)
    }

    #[test]
    fn tie_breaks_lexicographically() {
        // Counts 5, 5, 2: canonical is the lexicographically smaller of the
        // two tied names.
        let corpus = trio_corpus([(5, "acme_b"), (5, "acme_a"), (2, "acme_c")]);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, true)).unwrap();
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "acme_b"), Some("acme_a"));
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "acme_c"), Some("acme_a"));
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "acme_a"), None);
    }

    #[test]
    fn canonical_choice_scale_invariant() {
        let base = trio_corpus([(3, "acme_b"), (2, "acme_a"), (1, "acme_c")]);
        let scaled = trio_corpus([(9, "acme_b"), (6, "acme_a"), (3, "acme_c")]);
        for corpus in [&base, &scaled] {
            let pairs = candidate_vendor_pairs(corpus);
            let mapping = build_mapping(corpus, &pairs, &decide_all(&pairs, true)).unwrap();
            assert_eq!(mapping.canonical_for(NameKind::Vendor, "acme_a"), Some("acme_b"));
            assert_eq!(mapping.canonical_for(NameKind::Vendor, "acme_c"), Some("acme_b"));
        }
    }

    #[test]
    fn apply_consolidates_and_is_idempotent() {
        let corpus = bea_corpus(3, 2);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, true)).unwrap();
        let (once, stats) = apply_mapping(&corpus, &mapping);
        assert_eq!(stats.distinct_vendors_before, 2);
        assert_eq!(stats.distinct_vendors_after, 1);
        assert_eq!(stats.records_changed, 2);
        assert_eq!(once.cve_count_of_vendor("bea"), 5);
        assert_eq!(once.cve_count_of_vendor("bea_systems"), 0);
        let (twice, stats2) = apply_mapping(&once, &mapping);
        assert_eq!(once, twice);
        assert_eq!(stats2.records_changed, 0);
    }

    #[test]
    fn empty_mapping_leaves_corpus_unchanged() {
        let corpus = bea_corpus(2, 2);
        let (applied, stats) = apply_mapping(&corpus, &NameMapping::default());
        assert_eq!(corpus, applied);
        assert_eq!(stats.records_changed, 0);
    }

    #[test]
    fn external_list_remap() {
        let corpus = trio_corpus([(5, "acme_a"), (2, "acme_b"), (1, "acme_c")]);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, true)).unwrap();

        let disjoint = vec!["zzz".to_string(), "yyy".to_string()];
        let stats = remap_external_vendor_list(&disjoint, &mapping);
        assert_eq!(stats.impacted, 0);
        assert_eq!(stats.total, 2);

        // All non-canonical keys of the 3-name group: impacted 2, targets 1.
        let keys = vec!["acme_b".to_string(), "acme_c".to_string()];
        let stats = remap_external_vendor_list(&keys, &mapping);
        assert_eq!(stats.impacted, 2);
        assert_eq!(stats.consolidated_targets, 1);
    }

    #[test]
    fn worksheet_round_trip_preserves_decisions() {
        let corpus = bea_corpus(2, 1);
        let pairs = candidate_vendor_pairs(&corpus);
        let sheet = render_worksheet(&pairs, &DecisionSet::default());
        assert!(sheet.starts_with("kind\ta\tb\tflags\tmatch\tnote\n"));
        // Undecided worksheet parses to an empty decision set.
        assert!(DecisionSet::parse(&sheet).unwrap().is_empty());

        let mut decided = DecisionSet::default();
        decided.insert(NameKind::Vendor, "bea", "bea_systems", true, "same vendor");
        let sheet = render_worksheet(&pairs, &decided);
        let reparsed = DecisionSet::parse(&sheet).unwrap();
        assert_eq!(reparsed.lookup(NameKind::Vendor, "bea", "bea_systems"), Some(true));
        // Lookup is order-insensitive.
        assert_eq!(reparsed.lookup(NameKind::Vendor, "bea_systems", "bea"), Some(true));
    }

    #[test]
    fn decision_file_rejects_garbage() {
        assert!(DecisionSet::parse("vendor\ta\tb\tflags\tmaybe\t").is_err());
        assert!(DecisionSet::parse("gadget\ta\tb\tflags\tyes\t").is_err());
        assert!(DecisionSet::parse("vendor\ta\tb\n").is_err());
    }

    #[test]
    fn mapping_tsv_round_trip() {
        let corpus = bea_corpus(3, 1);
        let pairs = candidate_vendor_pairs(&corpus);
        let mapping = build_mapping(&corpus, &pairs, &decide_all(&pairs, true)).unwrap();
        let tsv = mapping.render_tsv();
        assert!(tsv.contains("vendor\tbea_systems\tbea\theuristic+manual"));
        let reloaded = NameMapping::parse_tsv(&tsv).unwrap();
        assert_eq!(reloaded.canonical_for(NameKind::Vendor, "bea_systems"), Some("bea"));
    }

    #[test]
    fn mapping_validation_rejects_chains() {
        let tsv = "vendor\ta\tb\timported-file\nvendor\tb\tc\timported-file\n";
        assert!(NameMapping::parse_tsv(tsv).is_err());
    }

    #[test]
    fn product_groups_do_not_mix_with_vendor_groups() {
        let mut records = Vec::new();
        for (i, (vendor, product)) in [
            ("microsoft", "internet-explorer"),
            ("microsoft", "internet-explorer"),
            ("microsoft", "ie"),
        ]
        .iter()
        .enumerate()
        {
            let mut r = record(&format!("CVE-2018-{:04}", i + 1));
            r.cpes = vec![CpeEntry::new(vendor, product, None).unwrap()];
            records.push(r);
        }
        let corpus = Corpus::from_records(records);
        let c = classify_pair(NameKind::Product, "internet-explorer", "ie", &corpus);
        let mut decisions = DecisionSet::default();
        decisions.insert(NameKind::Product, "ie", "internet-explorer", true, "abbr");
        let mapping = build_mapping(&corpus, &[c], &decisions).unwrap();
        assert_eq!(
            mapping.canonical_for(NameKind::Product, "ie"),
            Some("internet-explorer")
        );
        assert_eq!(mapping.canonical_for(NameKind::Vendor, "ie"), None);
    }
}
