use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaField {
    Question,
    Answer,
}

impl fmt::Display for QaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QaField::Question => "question",
            QaField::Answer => "answer",
        })
    }
}

/// Maximum lengths in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CleanLimits {
    pub question: usize,
    pub answer: usize,
}

impl Default for CleanLimits {
    fn default() -> Self {
        CleanLimits { question: 500, answer: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CleanError {
    #[error("{0} is empty after cleaning")]
    EmptyAfterCleaning(QaField),
    #[error("{field} is {len} characters, limit {limit}")]
    OverLength { field: QaField, len: usize, limit: usize },
}

const QUOTES: [(char, char); 3] = [('"', '"'), ('\'', '\''), ('\u{201c}', '\u{201d}')];

fn clean_one(raw: &str, field: QaField, limit: usize) -> Result<String, CleanError> {
    let mut s = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    for (open, close) in QUOTES {
        if s.chars().count() >= 2 && s.starts_with(open) && s.ends_with(close) {
            s = s[open.len_utf8()..s.len() - close.len_utf8()].trim().to_string();
            break;
        }
    }
    if s.is_empty() {
        return Err(CleanError::EmptyAfterCleaning(field));
    }
    let len = s.chars().count();
    if len > limit {
        return Err(CleanError::OverLength { field, len, limit });
    }
    Ok(s)
}

/// Trims, collapses whitespace runs to single spaces and strips one pair of
/// wrapping quotes. Over-long fields are rejected, never truncated.
pub fn clean_qa(question: &str, answer: &str, limits: CleanLimits) -> Result<(String, String), CleanError> {
    Ok((clean_one(question, QaField::Question, limits.question)?, clean_one(answer, QaField::Answer, limits.answer)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trim_and_collapse() {
        let got = clean_qa("  What  cohort? ", "NHANES ", CleanLimits::default()).unwrap();
        assert_eq!(got, ("What cohort?".to_string(), "NHANES".to_string()));
        let got = clean_qa("a\n\tb", "c", CleanLimits::default()).unwrap();
        assert_eq!(got.0, "a b");
    }

    #[test]
    fn strips_one_quote_pair() {
        let got = clean_qa("\"Q\"", "A", CleanLimits::default()).unwrap();
        assert_eq!(got, ("Q".to_string(), "A".to_string()));
        assert_eq!(clean_qa("\"\"Q\"\"", "A", CleanLimits::default()).unwrap().0, "\"Q\"");
        assert_eq!(clean_qa("\u{201c}Q\u{201d}", "A", CleanLimits::default()).unwrap().0, "Q");
        assert_eq!(clean_qa("\"", "A", CleanLimits::default()).unwrap().0, "\"");
    }

    #[test]
    fn rejects_empty_and_long() {
        assert_eq!(clean_qa("  ", "A", CleanLimits::default()), Err(CleanError::EmptyAfterCleaning(QaField::Question)));
        assert_eq!(clean_qa("Q", "\"\"", CleanLimits::default()), Err(CleanError::EmptyAfterCleaning(QaField::Answer)));
        let long = "x".repeat(3000);
        assert_eq!(
            clean_qa("Q", &long, CleanLimits::default()),
            Err(CleanError::OverLength { field: QaField::Answer, len: 3000, limit: 2000 })
        );
        assert!(clean_qa(&"é".repeat(500), "A", CleanLimits::default()).is_ok());
    }
}
