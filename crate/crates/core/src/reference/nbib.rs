//! MEDLINE / PubMed `.nbib` tag format.
//!
//! ```text
//! PMID- 12345
//! TI  - A title that
//!       wraps onto a second line
//! AID - 10.2/Y2 [doi]
//! ```

use super::doi::normalize_doi;
use super::record::{PaperRecord, SourceFormat};
use crate::{Warning, WarningKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NbibError {
    #[error("line {line}: malformed field line {text:?}")]
    MalformedFieldLine { line: usize, text: String },
}

struct Field {
    tag: String,
    value: String,
    line: usize,
}

/// Parses blank-line separated MEDLINE records.
pub fn parse_nbib(text: &str) -> Result<(Vec<PaperRecord>, Vec<Warning>), NbibError> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut current: Vec<Field> = Vec::new();
    let mut start_line = 1;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                flush(std::mem::take(&mut current), start_line, &mut records, &mut warnings);
            }
            continue;
        }
        if line.starts_with(|c: char| c.is_whitespace()) {
            match current.last_mut() {
                Some(field) => {
                    let cont = line.trim();
                    if field.value.is_empty() {
                        field.value.push_str(cont);
                    } else {
                        field.value.push(' ');
                        field.value.push_str(cont);
                    }
                    continue;
                }
                None => return Err(NbibError::MalformedFieldLine { line: line_no, text: line.to_string() }),
            }
        }
        let (tag, value) = split_field_line(line)
            .ok_or_else(|| NbibError::MalformedFieldLine { line: line_no, text: line.to_string() })?;
        if current.is_empty() {
            start_line = line_no;
        }
        current.push(Field { tag: tag.to_string(), value: value.trim().to_string(), line: line_no });
    }
    if !current.is_empty() {
        flush(current, start_line, &mut records, &mut warnings);
    }
    Ok((records, warnings))
}

/// `TAG - value` where the tag is 1–4 uppercase letters/digits, space padded.
fn split_field_line(line: &str) -> Option<(&str, &str)> {
    let dash = line.find('-')?;
    let tag = line[..dash].trim_end();
    if tag.is_empty() || tag.len() > 4 || !tag.bytes().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit()) {
        return None;
    }
    let rest = &line[dash + 1..];
    if !rest.is_empty() && !rest.starts_with(' ') {
        return None;
    }
    Some((tag, rest))
}

fn flush(fields: Vec<Field>, start_line: usize, records: &mut Vec<PaperRecord>, warnings: &mut Vec<Warning>) {
    let mut record = PaperRecord::empty(SourceFormat::Nbib);
    let mut short_authors = Vec::new();
    for Field { tag, value, line } in fields {
        match tag.as_str() {
            "PMID" => {
                if !value.is_empty() && value.bytes().all(|b| b.is_ascii_digit()) {
                    record.pmid = Some(value);
                } else {
                    warnings.push(Warning::at_line(WarningKind::InvalidPmid, line, format!("ignoring PMID {value:?}")));
                }
            }
            "TI" => record.title = value,
            "AB" => record.abstract_text = Some(value),
            "FAU" => record.authors.push(value),
            "AU" => short_authors.push(value),
            "JT" => record.journal = Some(value),
            "DP" => record.pub_date = Some(value),
            "OT" => record.keywords.push(value),
            "AID" | "LID" => {
                if let Some(raw) = value.strip_suffix("[doi]") {
                    if record.doi.is_some() {
                        continue;
                    }
                    match normalize_doi(raw) {
                        Ok(doi) => record.doi = Some(doi),
                        Err(_) => warnings.push(Warning::at_line(
                            WarningKind::InvalidDoi,
                            line,
                            format!("ignoring malformed DOI {raw:?}"),
                        )),
                    }
                }
            }
            _ => {
                if record.extra.insert(tag.clone(), value).is_some() {
                    warnings.push(Warning::at_line(
                        WarningKind::OverwrittenTag,
                        line,
                        format!("tag {tag} repeated; last value kept"),
                    ));
                }
            }
        }
    }
    if record.authors.is_empty() {
        record.authors = short_authors;
    }
    let record = record.finish();
    if record.pmid.is_none() && record.doi.is_none() && record.title.trim().is_empty() {
        warnings.push(Warning::at_line(
            WarningKind::DroppedRecord,
            start_line,
            "record has no PMID, DOI or TI; dropped",
        ));
        return;
    }
    records.push(record);
}
