//! Curated question-answer pairs: validation, append-only JSONL storage and
//! progress statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::DateTime;
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::clock::Clock;
use crate::io::append_atomic;
use crate::reference::normalize_doi;
use crate::{Warning, WarningKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Knowledge,
    Method,
    Discussion,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Knowledge, Category::Method, Category::Discussion];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Knowledge => "knowledge",
            Category::Method => "method",
            Category::Discussion => "discussion",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = QaError;

    /// Case-insensitive; `methodology` is accepted for `method`.
    fn from_str(s: &str) -> Result<Self, QaError> {
        match s.trim().to_lowercase().as_str() {
            "knowledge" => Ok(Category::Knowledge),
            "method" | "methodology" => Ok(Category::Method),
            "discussion" => Ok(Category::Discussion),
            _ => Err(QaError::UnknownCategory(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    #[default]
    Human,
    Model,
}

/// One validated question-answer item. Serialises to the on-disk line schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub question: String,
    pub answer: String,
    pub pmid: String,
    pub doi: String,
    pub category: Category,
    pub submitted_at: String,
    pub origin: Origin,
}

impl QAPair {
    /// Stable content reference used by score files: the first 16 hex digits
    /// of SHA-256 over question, answer and PMID.
    pub fn reference(&self) -> String {
        let mut h = Sha256::new();
        for part in [&self.question, &self.answer, &self.pmid] {
            h.update(part.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Unvalidated QA fields as they arrive from a form, an API body or a model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RawQa {
    pub question: Option<String>,
    pub answer: Option<String>,
    #[serde(deserialize_with = "string_or_number")]
    pub pmid: Option<String>,
    pub doi: Option<String>,
    pub category: Option<String>,
    pub submitted_at: Option<String>,
    pub origin: Option<Origin>,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Loose {
        S(String),
        N(u64),
    }
    Ok(Option::<Loose>::deserialize(d)?.map(|v| match v {
        Loose::S(s) => s,
        Loose::N(n) => n.to_string(),
    }))
}

impl From<&QAPair> for RawQa {
    fn from(p: &QAPair) -> Self {
        RawQa {
            question: Some(p.question.clone()),
            answer: Some(p.answer.clone()),
            pmid: Some(p.pmid.clone()),
            doi: Some(p.doi.clone()),
            category: Some(p.category.as_str().to_string()),
            submitted_at: Some(p.submitted_at.clone()),
            origin: Some(p.origin),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QaError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("answer is empty")]
    EmptyAnswer,
    #[error("unknown category {0:?}; expected one of knowledge, method, discussion")]
    UnknownCategory(String),
    #[error("PMID {0:?} must be all digits")]
    BadPmid(String),
    #[error("DOI {0:?} is not a DOI")]
    BadDoi(String),
    #[error("submitted_at {0:?} is not an RFC 3339 timestamp")]
    BadTimestamp(String),
}

impl QaError {
    /// Machine-readable error code, e.g. `"UnknownCategory"`.
    pub fn code(&self) -> &'static str {
        match self {
            QaError::EmptyQuestion => "EmptyQuestion",
            QaError::EmptyAnswer => "EmptyAnswer",
            QaError::UnknownCategory(_) => "UnknownCategory",
            QaError::BadPmid(_) => "BadPmid",
            QaError::BadDoi(_) => "BadDoi",
            QaError::BadTimestamp(_) => "BadTimestamp",
        }
    }
}

/// Trims and canonicalises a candidate pair. A missing `submitted_at` is
/// stamped from `clock`; a missing origin defaults to human.
pub fn validate_qa(raw: &RawQa, clock: &dyn Clock) -> Result<QAPair, QaError> {
    let trimmed = |s: &Option<String>| s.as_deref().unwrap_or("").trim().to_string();
    let question = trimmed(&raw.question);
    if question.is_empty() {
        return Err(QaError::EmptyQuestion);
    }
    let answer = trimmed(&raw.answer);
    if answer.is_empty() {
        return Err(QaError::EmptyAnswer);
    }
    let category: Category = trimmed(&raw.category).parse()?;
    let pmid = trimmed(&raw.pmid);
    if !pmid.bytes().all(|b| b.is_ascii_digit()) {
        return Err(QaError::BadPmid(pmid));
    }
    let doi = trimmed(&raw.doi);
    let doi = if doi.is_empty() { doi } else { normalize_doi(&doi).map_err(|_| QaError::BadDoi(doi))? };
    let submitted_at = match trimmed(&raw.submitted_at) {
        s if s.is_empty() => clock.timestamp(),
        s => {
            DateTime::parse_from_rfc3339(&s).map_err(|_| QaError::BadTimestamp(s.clone()))?;
            s
        }
    };
    Ok(QAPair { question, answer, pmid, doi, category, submitted_at, origin: raw.origin.unwrap_or_default() })
}

fn to_line(pair: &QAPair) -> Vec<u8> {
    let mut line = serde_json::to_vec(pair).expect("QAPair serialises");
    line.push(b'\n');
    line
}

/// Owns the append handle of a QA file. Each pair goes out as one
/// `write_all` of a complete line, so readers never see a torn record.
#[derive(Debug)]
pub struct QaWriter {
    file: File,
    fsync: bool,
}

impl QaWriter {
    pub fn open(path: &Path, fsync: bool) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(QaWriter { file, fsync })
    }

    pub fn append(&mut self, pair: &QAPair) -> io::Result<()> {
        self.file.write_all(&to_line(pair))?;
        if self.fsync {
            self.file.sync_data()?;
        }
        Ok(())
    }
}

/// Appends one pair to `path`, creating the file if needed.
pub fn append_qa(path: &Path, pair: &QAPair, fsync: bool) -> io::Result<()> {
    QaWriter::open(path, fsync)?.append(pair)
}

/// Appends a batch all-or-nothing: either every line lands or the file is
/// unchanged.
pub fn append_batch(path: &Path, pairs: &[QAPair]) -> io::Result<()> {
    let mut buf = Vec::new();
    for p in pairs {
        buf.extend(to_line(p));
    }
    append_atomic(path, &buf)
}

/// Reads every valid pair. Lines that fail to parse or validate are skipped
/// with a warning carrying their 1-based line number; a missing file is empty.
pub fn load_store(path: &Path) -> io::Result<(Vec<QAPair>, Vec<Warning>)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((Vec::new(), Vec::new())),
        Err(e) => return Err(e),
    };
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(pair) => pairs.push(pair),
            Err(msg) => warnings.push(Warning::at_line(WarningKind::SkippedLine, idx + 1, msg)),
        }
    }
    Ok((pairs, warnings))
}

fn parse_line(line: &str) -> Result<QAPair, String> {
    let pair: QAPair = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let clock = crate::clock::SystemClock;
    let checked = validate_qa(&RawQa::from(&pair), &clock).map_err(|e| e.to_string())?;
    if checked != pair {
        return Err("stored pair is not in canonical form".into());
    }
    Ok(pair)
}

/// Progress counters shown while curating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAStats {
    /// Distinct non-empty PMIDs among the pairs.
    pub total_papers: usize,
    pub total_qas: usize,
    pub by_category: BTreeMap<Category, usize>,
}

impl Default for QAStats {
    fn default() -> Self {
        QAStats { total_papers: 0, total_qas: 0, by_category: Category::ALL.iter().map(|&c| (c, 0)).collect() }
    }
}

pub fn stats(pairs: &[QAPair]) -> QAStats {
    let mut counter = StatsCounter::default();
    for p in pairs {
        counter.record(p);
    }
    counter.snapshot()
}

/// Incrementally maintained [`QAStats`], O(1) per pair.
#[derive(Debug, Clone, Default)]
pub struct StatsCounter {
    papers: BTreeSet<String>,
    stats: QAStats,
}

impl StatsCounter {
    pub fn record(&mut self, pair: &QAPair) {
        if !pair.pmid.is_empty() && self.papers.insert(pair.pmid.clone()) {
            self.stats.total_papers += 1;
        }
        self.stats.total_qas += 1;
        *self.stats.by_category.entry(pair.category).or_insert(0) += 1;
    }

    pub fn snapshot(&self) -> QAStats {
        self.stats.clone()
    }
}
