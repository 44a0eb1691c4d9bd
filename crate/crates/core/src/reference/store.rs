use std::collections::{BTreeMap, HashMap};

use super::doi::normalize_doi;
use super::record::{normalize_title, PaperRecord, RecordError};
use crate::{Warning, WarningKind};

/// Deduplicated records, sorted by `record_id`, with DOI and PMID indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordStore {
    records: Vec<PaperRecord>,
    doi_index: HashMap<String, usize>,
    pmid_index: HashMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DuplicateKey {
    #[error("record {index}: {source}")]
    Invalid { index: usize, source: RecordError },
    #[error("record {index}: key {key:?} already used by another record")]
    Duplicate { index: usize, key: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LookupKey {
    Doi(String),
    Pmid(String),
}

impl RecordStore {
    /// Builds a store from records that are already unique. Records are
    /// sorted by `record_id`; error indices refer to that sorted order.
    pub fn from_unique(mut records: Vec<PaperRecord>) -> Result<Self, DuplicateKey> {
        records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        let mut doi_index = HashMap::new();
        let mut pmid_index = HashMap::new();
        let mut ids = HashMap::new();
        for (index, r) in records.iter().enumerate() {
            r.validate().map_err(|source| DuplicateKey::Invalid { index, source })?;
            if ids.insert(r.record_id.as_str(), index).is_some() {
                return Err(DuplicateKey::Duplicate { index, key: r.record_id.clone() });
            }
            if let Some(doi) = &r.doi {
                if doi_index.insert(doi.clone(), index).is_some() {
                    return Err(DuplicateKey::Duplicate { index, key: doi.clone() });
                }
            }
            if let Some(pmid) = &r.pmid {
                if pmid_index.insert(pmid.clone(), index).is_some() {
                    return Err(DuplicateKey::Duplicate { index, key: format!("pmid:{pmid}") });
                }
            }
        }
        Ok(RecordStore { records, doi_index, pmid_index })
    }

    pub fn records(&self) -> &[PaperRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<PaperRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// DOI keys are normalised before lookup; an unparseable DOI is a miss.
    pub fn lookup(&self, key: &LookupKey) -> Option<&PaperRecord> {
        let idx = match key {
            LookupKey::Doi(raw) => self.doi_index.get(&normalize_doi(raw).ok()?)?,
            LookupKey::Pmid(pmid) => self.pmid_index.get(pmid.trim())?,
        };
        self.records.get(*idx)
    }

    pub fn get_by_doi(&self, doi: &str) -> Option<&PaperRecord> {
        self.lookup(&LookupKey::Doi(doi.to_string()))
    }

    pub fn get_by_pmid(&self, pmid: &str) -> Option<&PaperRecord> {
        self.lookup(&LookupKey::Pmid(pmid.to_string()))
    }
}

fn pick(a: Option<String>, b: Option<String>) -> Option<String> {
    match a {
        Some(v) if !v.is_empty() => Some(v),
        _ => b.filter(|v| !v.is_empty()),
    }
}

/// Records `b`'s identifier under `extra[key]` when it lost to a different
/// value in `a`, so nothing from the source files is silently dropped.
fn keep_alternate(extra: &mut BTreeMap<String, String>, key: &str, a: &Option<String>, b: &Option<String>) {
    if let (Some(a), Some(b)) = (a, b) {
        if !a.is_empty() && !b.is_empty() && a != b {
            let entry = extra.entry(key.to_string()).or_default();
            if !entry.split("; ").any(|v| v == b) {
                if !entry.is_empty() {
                    entry.push_str("; ");
                }
                entry.push_str(b);
            }
        }
    }
}

/// Field-wise merge of two records for the same work. `a` wins every
/// conflict; lists take the longer side (ties keep `a`). A DOI or PMID of
/// `b` that differs from `a`'s is kept in `extra` as `alt_doi` / `alt_pmid`.
pub fn merge_records(a: PaperRecord, b: PaperRecord) -> PaperRecord {
    let mut extra = b.extra;
    extra.extend(a.extra);
    keep_alternate(&mut extra, "alt_doi", &a.doi, &b.doi);
    keep_alternate(&mut extra, "alt_pmid", &a.pmid, &b.pmid);
    let merged = PaperRecord {
        record_id: String::new(),
        doi: pick(a.doi, b.doi),
        pmid: pick(a.pmid, b.pmid),
        title: if a.title.is_empty() { b.title } else { a.title },
        authors: if b.authors.len() > a.authors.len() { b.authors } else { a.authors },
        journal: pick(a.journal, b.journal),
        pub_date: pick(a.pub_date, b.pub_date),
        abstract_text: pick(a.abstract_text, b.abstract_text),
        keywords: if b.keywords.len() > a.keywords.len() { b.keywords } else { a.keywords },
        source_format: a.source_format,
        extra,
    };
    merged.finish()
}

/// Normalises identifiers on records that did not come from the parsers
/// (bulk uploads, hand-built records). Unusable identifiers move to `extra`.
fn sanitize(mut r: PaperRecord, warnings: &mut Vec<Warning>) -> PaperRecord {
    if let Some(raw) = r.doi.take() {
        match normalize_doi(&raw) {
            Ok(doi) => r.doi = Some(doi),
            Err(_) if raw.trim().is_empty() => {}
            Err(_) => {
                warnings.push(Warning::new(WarningKind::InvalidDoi, format!("ignoring malformed DOI {raw:?}")));
                r.extra.insert("doi".into(), raw);
            }
        }
    }
    if let Some(raw) = r.pmid.take() {
        let trimmed = raw.trim();
        if !trimmed.is_empty() && trimmed.bytes().all(|b| b.is_ascii_digit()) {
            r.pmid = Some(trimmed.to_string());
        } else if !trimmed.is_empty() {
            warnings.push(Warning::new(WarningKind::InvalidPmid, format!("ignoring malformed PMID {raw:?}")));
            r.extra.insert("pmid".into(), raw);
        }
    }
    r.finish()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    /// Keeps the smaller index as root so components remember first appearance.
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Groups records describing the same work and merges each group in input
/// order.
///
/// Records are linked when they share a DOI or a PMID; records carrying
/// neither are linked by normalised title. Linking on either identifier is
/// what guarantees the store's uniqueness invariant for both indices.
/// Records without a usable identity are dropped with a warning.
pub fn dedup(records: Vec<PaperRecord>) -> (RecordStore, Vec<Warning>) {
    let mut warnings = Vec::new();
    let records: Vec<PaperRecord> = records
        .into_iter()
        .filter_map(|r| {
            let r = sanitize(r, &mut warnings);
            if r.has_identity() {
                Some(r)
            } else {
                warnings.push(Warning::new(WarningKind::DroppedRecord, "record has no DOI, PMID or title"));
                None
            }
        })
        .collect();

    let mut uf = UnionFind((0..records.len()).collect());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let mut keys = Vec::with_capacity(2);
        if let Some(doi) = &r.doi {
            keys.push(format!("doi:{doi}"));
        }
        if let Some(pmid) = &r.pmid {
            keys.push(format!("pmid:{pmid}"));
        }
        if keys.is_empty() {
            keys.push(format!("title:{}", normalize_title(&r.title)));
        }
        for key in keys {
            match seen.get(&key) {
                Some(&j) => uf.union(i, j),
                None => {
                    seen.insert(key, i);
                }
            }
        }
    }

    let mut groups: Vec<Option<PaperRecord>> = vec![None; records.len()];
    for (i, r) in records.into_iter().enumerate() {
        let root = uf.find(i);
        groups[root] = Some(match groups[root].take() {
            None => r,
            Some(acc) => {
                warnings
                    .push(Warning::new(WarningKind::Merged, format!("merged {} into {}", r.record_id, acc.record_id)));
                merge_records(acc, r)
            }
        });
    }
    let merged: Vec<PaperRecord> = groups.into_iter().flatten().collect();
    let store = RecordStore::from_unique(merged).expect("dedup yields unique identifiers");
    (store, warnings)
}
