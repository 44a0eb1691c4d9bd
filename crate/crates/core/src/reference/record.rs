use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::doi::is_normalized_doi;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    Bibtex,
    Nbib,
}

/// Normalised bibliographic metadata for one paper.
///
/// Field order here is the canonical serialisation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub record_id: String,
    pub doi: Option<String>,
    pub pmid: Option<String>,
    pub title: String,
    pub authors: Vec<String>,
    pub journal: Option<String>,
    pub pub_date: Option<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub keywords: Vec<String>,
    pub source_format: SourceFormat,
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("record has no DOI, PMID or title")]
    NoIdentity,
    #[error("DOI {0:?} is not in normalised form")]
    BadDoi(String),
    #[error("PMID {0:?} is not all digits")]
    BadPmid(String),
    #[error("record_id {found:?} does not match fields (expected {expected:?})")]
    StaleId { found: String, expected: String },
}

/// Lowercase, whitespace runs collapsed, trailing punctuation removed.
pub fn normalize_title(title: &str) -> String {
    let collapsed = title.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    collapsed.trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace()).to_string()
}

fn non_empty(s: &Option<String>) -> Option<&str> {
    s.as_deref().filter(|v| !v.is_empty())
}

impl PaperRecord {
    /// Empty record of the given source format. Call [`PaperRecord::finish`]
    /// once fields are filled in.
    pub fn empty(source_format: SourceFormat) -> Self {
        PaperRecord {
            record_id: String::new(),
            doi: None,
            pmid: None,
            title: String::new(),
            authors: Vec::new(),
            journal: None,
            pub_date: None,
            abstract_text: None,
            keywords: Vec::new(),
            source_format,
            extra: BTreeMap::new(),
        }
    }

    /// The identity key: DOI, else `pmid:<PMID>`, else `title:<normalised title>`.
    pub fn compute_id(&self) -> String {
        if let Some(doi) = non_empty(&self.doi) {
            doi.to_string()
        } else if let Some(pmid) = non_empty(&self.pmid) {
            format!("pmid:{pmid}")
        } else {
            format!("title:{}", normalize_title(&self.title))
        }
    }

    /// Turns empty optional strings into `None` and recomputes `record_id`.
    pub fn finish(mut self) -> Self {
        for field in [&mut self.doi, &mut self.pmid, &mut self.journal, &mut self.pub_date, &mut self.abstract_text] {
            if field.as_deref().is_some_and(str::is_empty) {
                *field = None;
            }
        }
        self.record_id = self.compute_id();
        self
    }

    pub fn has_identity(&self) -> bool {
        non_empty(&self.doi).is_some() || non_empty(&self.pmid).is_some() || !normalize_title(&self.title).is_empty()
    }

    pub fn abstract_or_empty(&self) -> &str {
        self.abstract_text.as_deref().unwrap_or("")
    }

    /// Checks every record invariant, including that `record_id` is current.
    pub fn validate(&self) -> Result<(), RecordError> {
        if !self.has_identity() {
            return Err(RecordError::NoIdentity);
        }
        if let Some(doi) = &self.doi {
            if !is_normalized_doi(doi) {
                return Err(RecordError::BadDoi(doi.clone()));
            }
        }
        if let Some(pmid) = &self.pmid {
            if pmid.is_empty() || !pmid.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RecordError::BadPmid(pmid.clone()));
            }
        }
        let expected = self.compute_id();
        if self.record_id != expected {
            return Err(RecordError::StaleId { found: self.record_id.clone(), expected });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_precedence() {
        let mut r = PaperRecord::empty(SourceFormat::Bibtex);
        r.title = "  Telomere   Length, and NHANES. ".into();
        assert_eq!(r.compute_id(), "title:telomere length, and nhanes");
        r.pmid = Some("42".into());
        assert_eq!(r.compute_id(), "pmid:42");
        r.doi = Some("10.1/x".into());
        assert_eq!(r.compute_id(), "10.1/x");
    }

    #[test]
    fn finish_clears_empty_strings() {
        let mut r = PaperRecord::empty(SourceFormat::Nbib);
        r.pmid = Some("7".into());
        r.abstract_text = Some(String::new());
        let r = r.finish();
        assert_eq!(r.abstract_text, None);
        assert_eq!(r.record_id, "pmid:7");
        r.validate().unwrap();
    }

    #[test]
    fn validate_rejects_bad_fields() {
        let mut r = PaperRecord::empty(SourceFormat::Nbib);
        assert_eq!(r.clone().finish().validate(), Err(RecordError::NoIdentity));
        r.pmid = Some("12a".into());
        assert!(matches!(r.clone().finish().validate(), Err(RecordError::BadPmid(_))));
        r.pmid = None;
        r.doi = Some("10.1/ABC".into());
        assert!(matches!(r.finish().validate(), Err(RecordError::BadDoi(_))));
    }
}
