use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Warning, WarningKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("{field} cannot be {value}; allowed values are {allowed:?}")]
    InvalidComponentValue { field: &'static str, value: u8, allowed: &'static [u8] },
}

const FORMAT: &[u8] = &[0, 2];
const ACCURACY: &[u8] = &[0, 2, 4];
const LENGTH: &[u8] = &[0, 1];
const CATEGORY: &[u8] = &[0, 4];

/// One reviewer's marks for one QA pair. Components only ever hold values
/// allowed by the rubric, so the total is always in `0..=15`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCard")]
pub struct ScoreCard {
    qa_ref: String,
    reviewer_id: String,
    format_adherence: u8,
    question_accuracy: u8,
    answer_accuracy: u8,
    length_score: u8,
    category_alignment: u8,
}

#[derive(Deserialize)]
struct RawCard {
    qa_ref: String,
    reviewer_id: String,
    format_adherence: u8,
    question_accuracy: u8,
    answer_accuracy: u8,
    length_score: u8,
    category_alignment: u8,
}

impl TryFrom<RawCard> for ScoreCard {
    type Error = ScoreError;

    fn try_from(r: RawCard) -> Result<Self, ScoreError> {
        ScoreCard::new(
            r.qa_ref,
            r.reviewer_id,
            [r.format_adherence, r.question_accuracy, r.answer_accuracy, r.length_score, r.category_alignment],
        )
    }
}

fn check(field: &'static str, value: u8, allowed: &'static [u8]) -> Result<u8, ScoreError> {
    if allowed.contains(&value) {
        Ok(value)
    } else {
        Err(ScoreError::InvalidComponentValue { field, value, allowed })
    }
}

impl ScoreCard {
    /// Components in rubric order: format, question accuracy, answer
    /// accuracy, length, category alignment.
    pub fn new(
        qa_ref: impl Into<String>,
        reviewer_id: impl Into<String>,
        components: [u8; 5],
    ) -> Result<Self, ScoreError> {
        let [f, q, a, l, c] = components;
        Ok(ScoreCard {
            qa_ref: qa_ref.into(),
            reviewer_id: reviewer_id.into(),
            format_adherence: check("format_adherence", f, FORMAT)?,
            question_accuracy: check("question_accuracy", q, ACCURACY)?,
            answer_accuracy: check("answer_accuracy", a, ACCURACY)?,
            length_score: check("length_score", l, LENGTH)?,
            category_alignment: check("category_alignment", c, CATEGORY)?,
        })
    }

    /// Every valid card for a given reference and reviewer (72 of them).
    pub fn enumerate_all(qa_ref: &str, reviewer_id: &str) -> Vec<ScoreCard> {
        let mut out = Vec::with_capacity(72);
        for &f in FORMAT {
            for &q in ACCURACY {
                for &a in ACCURACY {
                    for &l in LENGTH {
                        for &c in CATEGORY {
                            out.push(ScoreCard::new(qa_ref, reviewer_id, [f, q, a, l, c]).expect("allowed values"));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn qa_ref(&self) -> &str {
        &self.qa_ref
    }

    pub fn reviewer_id(&self) -> &str {
        &self.reviewer_id
    }

    pub fn components(&self) -> [u8; 5] {
        [
            self.format_adherence,
            self.question_accuracy,
            self.answer_accuracy,
            self.length_score,
            self.category_alignment,
        ]
    }

    pub fn total(&self) -> u32 {
        self.components().iter().map(|&c| u32::from(c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("no reviews to aggregate")]
    EmptyReviewSet,
    #[error("reviews mix qa_ref {0:?} and {1:?}")]
    MixedQaRef(String, String),
}

/// Per-criterion means over all reviewers of one pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedScore {
    pub qa_ref: String,
    pub reviewers: usize,
    pub format_adherence: f64,
    pub question_accuracy: f64,
    pub answer_accuracy: f64,
    pub length_score: f64,
    pub category_alignment: f64,
    /// Sum of the five criterion means.
    pub total: f64,
}

pub fn aggregate_reviews(cards: &[ScoreCard]) -> Result<AggregatedScore, AggregateError> {
    let first = cards.first().ok_or(AggregateError::EmptyReviewSet)?;
    if let Some(other) = cards.iter().find(|c| c.qa_ref != first.qa_ref) {
        return Err(AggregateError::MixedQaRef(first.qa_ref.clone(), other.qa_ref.clone()));
    }
    let n = cards.len() as f64;
    let mut sums = [0u32; 5];
    for card in cards {
        for (s, c) in sums.iter_mut().zip(card.components()) {
            *s += u32::from(c);
        }
    }
    let means = sums.map(|s| f64::from(s) / n);
    Ok(AggregatedScore {
        qa_ref: first.qa_ref.clone(),
        reviewers: cards.len(),
        format_adherence: means[0],
        question_accuracy: means[1],
        answer_accuracy: means[2],
        length_score: means[3],
        category_alignment: means[4],
        total: means.iter().sum(),
    })
}

/// Appends one card as a JSON line.
pub fn append_score(path: &Path, card: &ScoreCard) -> io::Result<()> {
    let mut line = serde_json::to_vec(card).expect("score card serialises");
    line.push(b'\n');
    OpenOptions::new().create(true).append(true).open(path)?.write_all(&line)
}

/// Reads a score file; lines that fail to parse or carry disallowed values
/// are skipped with a warning.
pub fn load_scores(path: &Path) -> io::Result<(Vec<ScoreCard>, Vec<Warning>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut cards = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ScoreCard>(&line) {
            Ok(card) => cards.push(card),
            Err(e) => warnings.push(Warning::at_line(WarningKind::SkippedLine, idx + 1, e.to_string())),
        }
    }
    Ok((cards, warnings))
}
