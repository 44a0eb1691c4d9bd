//! A small BibTeX reader covering what reference managers and PubMed export:
//! `@type{key, field = value, ...}` entries with brace, quote or bare values.
//!
//! `@string` macros and `#` concatenation are not expanded; values using them
//! are kept raw and flagged.

use std::collections::BTreeMap;

use super::doi::normalize_doi;
use super::record::{PaperRecord, SourceFormat};
use crate::{Warning, WarningKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BibtexError {
    #[error("unbalanced {delimiter:?} opened at byte {offset} (line {line})")]
    UnbalancedDelimiter { delimiter: char, offset: usize, line: usize },
    #[error("entry at byte {offset} (line {line}) has no citation key")]
    MissingEntryKey { offset: usize, line: usize },
    #[error("unexpected input at byte {offset} (line {line}): {message}")]
    Syntax { offset: usize, line: usize, message: String },
}

const MONTHS: [&str; 12] = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];

/// Parses every entry in `text`. Empty input yields no records and no warnings.
pub fn parse_bibtex(text: &str) -> Result<(Vec<PaperRecord>, Vec<Warning>), BibtexError> {
    let mut parser = Parser { src: text, bytes: text.as_bytes(), pos: 0, warnings: Vec::new() };
    let mut records = Vec::new();
    while let Some(at) = parser.find_from(parser.pos, b'@') {
        parser.pos = at + 1;
        parser.skip_ws();
        let entry_type = parser.identifier().to_ascii_lowercase();
        parser.skip_ws();
        let open = match parser.peek() {
            Some(b'{') => b'{',
            Some(b'(') => b'(',
            // A lone '@' in free text between entries.
            _ => continue,
        };
        let open_at = parser.pos;
        let close = if open == b'{' { b'}' } else { b')' };
        match entry_type.as_str() {
            "comment" | "preamble" | "string" => {
                let end = parser.block_end(open_at, open, close)?;
                let kind =
                    if entry_type == "string" { WarningKind::UnsupportedMacro } else { WarningKind::SkippedBlock };
                let line = parser.line_of(at);
                parser.warnings.push(Warning::at_line(kind, line, format!("skipped @{entry_type} block")));
                parser.pos = end + 1;
            }
            _ => {
                parser.pos = open_at + 1;
                let fields = parser.entry_body(at, open, close)?;
                if let Some(record) = parser.build_record(at, fields) {
                    records.push(record);
                }
            }
        }
    }
    Ok((records, parser.warnings))
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    warnings: Vec<Warning>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn find_from(&self, from: usize, needle: u8) -> Option<usize> {
        self.bytes.get(from..)?.iter().position(|&b| b == needle).map(|i| from + i)
    }

    fn line_of(&self, offset: usize) -> usize {
        self.bytes[..offset.min(self.bytes.len())].iter().filter(|&&b| b == b'\n').count() + 1
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn identifier(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b':' | b'.' | b'+')) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn unbalanced(&self, delimiter: u8, offset: usize) -> BibtexError {
        BibtexError::UnbalancedDelimiter { delimiter: delimiter as char, offset, line: self.line_of(offset) }
    }

    fn syntax(&self, message: impl Into<String>) -> BibtexError {
        BibtexError::Syntax { offset: self.pos, line: self.line_of(self.pos), message: message.into() }
    }

    /// Offset of the delimiter closing the block opened at `open_at`, with
    /// braces nesting inside it.
    fn block_end(&self, open_at: usize, open: u8, close: u8) -> Result<usize, BibtexError> {
        let mut depth = 0usize;
        for (i, &b) in self.bytes.iter().enumerate().skip(open_at + 1) {
            match b {
                b'{' => depth += 1,
                b'}' if depth > 0 => depth -= 1,
                _ if b == close && depth == 0 => return Ok(i),
                _ => {}
            }
        }
        Err(self.unbalanced(open, open_at))
    }

    /// Reads `key, name = value, ...` up to and including the closing delimiter.
    fn entry_body(&mut self, at: usize, open: u8, close: u8) -> Result<Vec<(String, String, usize)>, BibtexError> {
        let open_at = self.pos - 1;
        self.skip_ws();
        let key_start = self.pos;
        while self
            .peek()
            .is_some_and(|b| !b.is_ascii_whitespace() && !matches!(b, b',' | b'=' | b'{' | b'}' | b'(' | b')' | b'"'))
        {
            self.pos += 1;
        }
        let key_empty = self.pos == key_start;
        self.skip_ws();
        if key_empty || self.peek() == Some(b'=') {
            return Err(BibtexError::MissingEntryKey { offset: at, line: self.line_of(at) });
        }
        let mut fields = Vec::new();
        match self.peek() {
            Some(b',') => self.pos += 1,
            Some(b) if b == close => {
                self.pos += 1;
                return Ok(fields);
            }
            None => return Err(self.unbalanced(open, open_at)),
            Some(_) => return Err(self.syntax("expected ',' after citation key")),
        }
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.unbalanced(open, open_at)),
                Some(b) if b == close => {
                    self.pos += 1;
                    return Ok(fields);
                }
                _ => {}
            }
            let name_at = self.pos;
            let name = self.identifier().to_ascii_lowercase();
            if name.is_empty() {
                return Err(self.syntax("expected field name"));
            }
            self.skip_ws();
            if self.peek() != Some(b'=') {
                return Err(self.syntax(format!("expected '=' after field {name:?}")));
            }
            self.pos += 1;
            let value = self.value(close)?;
            fields.push((name, value, name_at));
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b) if b == close => {}
                None => return Err(self.unbalanced(open, open_at)),
                Some(_) => return Err(self.syntax("expected ',' or end of entry")),
            }
        }
    }

    /// A value expression. Braced and quoted parts are returned with their
    /// inner braces intact so author lists can be split at depth zero.
    fn value(&mut self, close: u8) -> Result<String, BibtexError> {
        self.skip_ws();
        let expr_start = self.pos;
        let mut parts: Vec<(String, bool)> = Vec::new();
        loop {
            self.skip_ws();
            let part_start = self.pos;
            match self.peek() {
                Some(b'{') => {
                    let end = self.block_end(part_start, b'{', b'}')?;
                    parts.push((self.src[part_start + 1..end].to_string(), false));
                    self.pos = end + 1;
                }
                Some(b'"') => {
                    let mut depth = 0usize;
                    let mut end = None;
                    for (i, &b) in self.bytes.iter().enumerate().skip(part_start + 1) {
                        match b {
                            b'{' => depth += 1,
                            b'}' => depth = depth.saturating_sub(1),
                            b'"' if depth == 0 => {
                                end = Some(i);
                                break;
                            }
                            _ => {}
                        }
                    }
                    let end = end.ok_or_else(|| self.unbalanced(b'"', part_start))?;
                    parts.push((self.src[part_start + 1..end].to_string(), false));
                    self.pos = end + 1;
                }
                Some(b) if !b.is_ascii_whitespace() && !matches!(b, b',' | b'#' | b'}' | b')') && b != close => {
                    while self.peek().is_some_and(|b| {
                        !b.is_ascii_whitespace() && !matches!(b, b',' | b'#' | b'{' | b'}' | b'"' | b')')
                    }) {
                        self.pos += 1;
                    }
                    parts.push((self.src[part_start..self.pos].to_string(), true));
                }
                None => return Err(self.unbalanced(b'{', expr_start)),
                Some(_) => return Err(self.syntax("expected field value")),
            }
            self.skip_ws();
            if self.peek() == Some(b'#') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let line = self.line_of(expr_start);
        if parts.len() > 1 {
            let raw = self.src[expr_start..self.pos].trim().to_string();
            self.warnings.push(Warning::at_line(
                WarningKind::UnsupportedMacro,
                line,
                format!("string concatenation not expanded; kept raw value {raw:?}"),
            ));
            return Ok(raw);
        }
        let (text, bare) = parts.pop().unwrap_or_default();
        let is_number = text.bytes().all(|b| b.is_ascii_digit());
        if bare && !is_number && !MONTHS.contains(&text.to_ascii_lowercase().as_str()) {
            self.warnings.push(Warning::at_line(
                WarningKind::UnsupportedMacro,
                line,
                format!("macro {text:?} not expanded; kept raw"),
            ));
        }
        Ok(text)
    }

    fn build_record(&mut self, at: usize, fields: Vec<(String, String, usize)>) -> Option<PaperRecord> {
        let entry_line = self.line_of(at);
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (name, value, name_at) in fields {
            if map.insert(name.clone(), value).is_some() {
                self.warnings.push(Warning::at_line(
                    WarningKind::DuplicateField,
                    self.line_of(name_at),
                    format!("field {name:?} repeated; last value kept"),
                ));
            }
        }
        let mut record = PaperRecord::empty(SourceFormat::Bibtex);
        let mut year = None;
        let mut month = None;
        for (name, raw) in map {
            let value = clean_value(&raw);
            match name.as_str() {
                "doi" => match normalize_doi(&value) {
                    Ok(doi) => record.doi = Some(doi),
                    Err(_) => {
                        self.warnings.push(Warning::at_line(
                            WarningKind::InvalidDoi,
                            entry_line,
                            format!("ignoring malformed DOI {value:?}"),
                        ));
                        record.extra.insert(name, value);
                    }
                },
                "pmid" => {
                    if !value.is_empty() && value.bytes().all(|b| b.is_ascii_digit()) {
                        record.pmid = Some(value);
                    } else {
                        self.warnings.push(Warning::at_line(
                            WarningKind::InvalidPmid,
                            entry_line,
                            format!("ignoring malformed PMID {value:?}"),
                        ));
                        record.extra.insert(name, value);
                    }
                }
                "title" => record.title = value,
                "author" => record.authors = split_authors(&raw),
                "journal" => record.journal = Some(value),
                "year" => year = Some(value),
                "month" => month = Some(value),
                "abstract" => record.abstract_text = Some(value),
                "keywords" => {
                    record.keywords =
                        value.split([';', ',']).map(str::trim).filter(|k| !k.is_empty()).map(String::from).collect()
                }
                _ => {
                    record.extra.insert(name, value);
                }
            }
        }
        let date: Vec<String> = [year, month].into_iter().flatten().filter(|s| !s.is_empty()).collect();
        if !date.is_empty() {
            record.pub_date = Some(date.join(" "));
        }
        let record = record.finish();
        if !record.has_identity() {
            self.warnings.push(Warning::at_line(
                WarningKind::DroppedRecord,
                entry_line,
                "entry has no DOI, PMID or title; dropped",
            ));
            return None;
        }
        Some(record)
    }
}

/// Removes grouping braces and collapses whitespace.
fn clean_value(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut prev_backslash = false;
    for c in raw.chars() {
        if (c == '{' || c == '}') && !prev_backslash {
            prev_backslash = false;
            continue;
        }
        prev_backslash = c == '\\';
        out.push(c);
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Splits on the word `and` at brace depth zero, so `{Smith and Sons}` stays whole.
fn split_authors(raw: &str) -> Vec<String> {
    let bytes = raw.as_bytes();
    let mut names = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => depth += 1,
            b'}' => depth = depth.saturating_sub(1),
            b if depth == 0 && b.is_ascii_whitespace() => {
                let rest = &bytes[i + 1..];
                let word_at = rest.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(rest.len());
                let word = &rest[word_at..];
                if word.len() > 3 && word[..3].eq_ignore_ascii_case(b"and") && word[3].is_ascii_whitespace() {
                    names.push(&raw[start..i]);
                    i = i + 1 + word_at + 3;
                    start = i;
                    continue;
                }
            }
            _ => {}
        }
        i += 1;
    }
    names.push(&raw[start..]);
    names.into_iter().map(clean_value).filter(|n| !n.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry() {
        let (recs, warns) =
            parse_bibtex("@article{k1, title={Telomere Study}, author={Doe, J. and Roe, A.}, doi={10.1/X1}}").unwrap();
        assert!(warns.is_empty());
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.title, "Telomere Study");
        assert_eq!(r.authors, vec!["Doe, J.", "Roe, A."]);
        assert_eq!(r.doi.as_deref(), Some("10.1/x1"));
        assert_eq!(r.record_id, "10.1/x1");
        assert_eq!(r.source_format, SourceFormat::Bibtex);
    }

    #[test]
    fn empty_input() {
        let (recs, warns) = parse_bibtex("").unwrap();
        assert!(recs.is_empty() && warns.is_empty());
    }

    #[test]
    fn delimiters_and_case() {
        let src = r#"
@ARTICLE(pm1,
  TITLE = "A {Nested {Brace}} title",
  Year = 2024,
  month = jun,
  PMID = "38000001",
  Journal = {J. Test},
  keywords = {telomere; NHANES, aging},
  note = {kept},
)
"#;
        let (recs, warns) = parse_bibtex(src).unwrap();
        assert!(warns.is_empty(), "{warns:?}");
        let r = &recs[0];
        assert_eq!(r.title, "A Nested Brace title");
        assert_eq!(r.pub_date.as_deref(), Some("2024 jun"));
        assert_eq!(r.pmid.as_deref(), Some("38000001"));
        assert_eq!(r.journal.as_deref(), Some("J. Test"));
        assert_eq!(r.keywords, vec!["telomere", "NHANES", "aging"]);
        assert_eq!(r.extra.get("note").map(String::as_str), Some("kept"));
        assert_eq!(r.record_id, "pmid:38000001");
    }

    #[test]
    fn protected_and_is_not_split() {
        assert_eq!(split_authors("{Smith and Sons} and Doe, J."), vec!["Smith and Sons", "Doe, J."]);
        assert_eq!(split_authors("A\n  AND B"), vec!["A", "B"]);
        assert_eq!(split_authors("Anderson, K. and Band, L."), vec!["Anderson, K.", "Band, L."]);
    }

    #[test]
    fn comment_preamble_string_skipped_with_warning() {
        let src = "@comment{ignore me}\n@preamble{\"x\"}\n@string{jt = {Journal}}\n@misc{a, title={T}}";
        let (recs, warns) = parse_bibtex(src).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(warns.len(), 3);
        assert_eq!(warns[0].kind, WarningKind::SkippedBlock);
        assert_eq!(warns[2].kind, WarningKind::UnsupportedMacro);
    }

    #[test]
    fn concatenation_kept_raw() {
        let (recs, warns) = parse_bibtex("@misc{a, title = \"Part\" # jt}").unwrap();
        assert_eq!(recs[0].title, "\"Part\" # jt");
        assert_eq!(warns[0].kind, WarningKind::UnsupportedMacro);
    }

    #[test]
    fn duplicate_field_last_wins() {
        let (recs, warns) = parse_bibtex("@misc{a, title={One}, title={Two}}").unwrap();
        assert_eq!(recs[0].title, "Two");
        assert_eq!(warns.len(), 1);
        assert_eq!(warns[0].kind, WarningKind::DuplicateField);
    }

    #[test]
    fn malformed_doi_goes_to_extra() {
        let (recs, warns) = parse_bibtex("@misc{a, title={T}, doi={n/a}}").unwrap();
        assert_eq!(recs[0].doi, None);
        assert_eq!(recs[0].extra["doi"], "n/a");
        assert_eq!(warns[0].kind, WarningKind::InvalidDoi);
    }

    #[test]
    fn record_without_identity_dropped() {
        let (recs, warns) = parse_bibtex("@misc{a, year={2020}}").unwrap();
        assert!(recs.is_empty());
        assert_eq!(warns[0].kind, WarningKind::DroppedRecord);
    }

    #[test]
    fn unbalanced_reports_position() {
        let err = parse_bibtex("\n@article{k, title={open}").unwrap_err();
        assert_eq!(err, BibtexError::UnbalancedDelimiter { delimiter: '{', offset: 9, line: 2 });
        let err = parse_bibtex("@article{k, title={never closed, doi={x}}").unwrap_err();
        assert!(matches!(err, BibtexError::UnbalancedDelimiter { .. }));
        let err = parse_bibtex("@article{k, title=\"open}").unwrap_err();
        assert!(matches!(err, BibtexError::UnbalancedDelimiter { delimiter: '"', .. }));
    }

    #[test]
    fn missing_key() {
        assert!(matches!(parse_bibtex("@article{, title={T}}"), Err(BibtexError::MissingEntryKey { .. })));
        assert!(matches!(parse_bibtex("@article{title={T}}"), Err(BibtexError::MissingEntryKey { .. })));
    }

    #[test]
    fn stray_at_sign_ignored() {
        let (recs, _) = parse_bibtex("mail me @ home\n@misc{a, title={T}}").unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn unicode_values() {
        let (recs, _) = parse_bibtex("@misc{ü, title={Télomère «étude»}, author={Müller, Ö.}}").unwrap();
        assert_eq!(recs[0].title, "Télomère «étude»");
        assert_eq!(recs[0].authors, vec!["Müller, Ö."]);
    }
}
