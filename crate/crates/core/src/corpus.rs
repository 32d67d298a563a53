//! The indexed record collection.
//!
//! A `Corpus` is immutable after construction; every correction stage
//! produces a new value. All collections are ordered so iteration, and
//! therefore every derived artifact, is deterministic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::types::{CveId, CveRecord};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    records: BTreeMap<CveId, CveRecord>,
    vendor_index: BTreeMap<String, BTreeSet<String>>,
    product_index: BTreeMap<(String, String), BTreeSet<CveId>>,
}

impl Corpus {
    pub fn from_records(records: impl IntoIterator<Item = CveRecord>) -> Self {
        let records: BTreeMap<CveId, CveRecord> =
            records.into_iter().map(|r| (r.id.clone(), r)).collect();
        let mut corpus = Corpus {
            records,
            vendor_index: BTreeMap::new(),
            product_index: BTreeMap::new(),
        };
        corpus.build_indices();
        corpus
    }

    fn build_indices(&mut self) {
        self.vendor_index.clear();
        self.product_index.clear();
        for (id, record) in &self.records {
            for cpe in &record.cpes {
                self.vendor_index
                    .entry(cpe.vendor.clone())
                    .or_default()
                    .insert(cpe.product.clone());
                self.product_index
                    .entry((cpe.vendor.clone(), cpe.product.clone()))
                    .or_default()
                    .insert(id.clone());
            }
        }
    }

    /// Recomputes the vendor and product indices from the records.
    /// Idempotent; `from_records` already leaves indices consistent.
    pub fn rebuild_indices(mut self) -> Self {
        self.build_indices();
        self
    }

    /// Checks that the stored indices equal a fresh rebuild.
    pub fn indices_consistent(&self) -> bool {
        let rebuilt = self.clone().rebuild_indices();
        rebuilt.vendor_index == self.vendor_index && rebuilt.product_index == self.product_index
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &CveId) -> Option<&CveRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &CveRecord> {
        self.records.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &CveId> {
        self.records.keys()
    }

    pub fn vendors(&self) -> impl Iterator<Item = &str> {
        self.vendor_index.keys().map(String::as_str)
    }

    pub fn vendor_count(&self) -> usize {
        self.vendor_index.len()
    }

    pub fn products_of(&self, vendor: &str) -> Option<&BTreeSet<String>> {
        self.vendor_index.get(vendor)
    }

    pub fn cves_of_product(&self, vendor: &str, product: &str) -> Option<&BTreeSet<CveId>> {
        self.product_index
            .get(&(vendor.to_string(), product.to_string()))
    }

    /// Distinct CVEs that list the vendor in at least one CPE entry.
    pub fn cve_count_of_vendor(&self, vendor: &str) -> usize {
        let Some(products) = self.vendor_index.get(vendor) else {
            return 0;
        };
        let mut ids: BTreeSet<&CveId> = BTreeSet::new();
        for product in products {
            if let Some(cves) = self
                .product_index
                .get(&(vendor.to_string(), product.clone()))
            {
                ids.extend(cves.iter());
            }
        }
        ids.len()
    }

    /// Total number of distinct (vendor, product) pairs.
    pub fn product_pair_count(&self) -> usize {
        self.product_index.len()
    }

    /// Applies `f` to every record and rebuilds indices.
    pub fn map_records(&self, mut f: impl FnMut(&CveRecord) -> CveRecord) -> Corpus {
        Corpus::from_records(self.records.values().map(|r| f(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::CpeEntry;
    use crate::test_support::record;

    #[test]
    fn empty_corpus_has_empty_indices() {
        let corpus = Corpus::from_records([]);
        assert_eq!(corpus.len(), 0);
        assert_eq!(corpus.vendor_count(), 0);
        assert_eq!(corpus.product_pair_count(), 0);
    }

    #[test]
    fn single_record_indexed() {
        let mut r = record("CVE-2018-0001");
        r.cpes = vec![CpeEntry::new("microsoft", "windows", None).unwrap()];
        let corpus = Corpus::from_records([r]);
        assert_eq!(
            corpus.products_of("microsoft").unwrap().iter().collect::<Vec<_>>(),
            ["windows"]
        );
        assert_eq!(corpus.cve_count_of_vendor("microsoft"), 1);
    }

    #[test]
    fn duplicate_cpe_rows_deduplicated() {
        // Set-semantics oracle: the index is a set, so repeating the same CPE
        // row on one record (or across records) yields one product entry and
        // one id per record.
        let mut a = record("CVE-2018-0001");
        a.cpes = vec![
            CpeEntry::new("oracle", "database", Some("1")).unwrap(),
            CpeEntry::new("oracle", "database", Some("2")).unwrap(),
        ];
        let mut b = record("CVE-2018-0002");
        b.cpes = vec![CpeEntry::new("oracle", "database", None).unwrap()];
        let corpus = Corpus::from_records([a, b]);
        assert_eq!(corpus.products_of("oracle").unwrap().len(), 1);
        assert_eq!(corpus.cves_of_product("oracle", "database").unwrap().len(), 2);
        assert_eq!(corpus.cve_count_of_vendor("oracle"), 2);
    }

    #[test]
    fn rebuild_is_idempotent() {
        let mut r = record("CVE-2018-0001");
        r.cpes = vec![CpeEntry::new("a", "b", None).unwrap()];
        let corpus = Corpus::from_records([r]);
        let once = corpus.clone().rebuild_indices();
        let twice = once.clone().rebuild_indices();
        assert_eq!(once, twice);
        assert!(corpus.indices_consistent());
    }
}
