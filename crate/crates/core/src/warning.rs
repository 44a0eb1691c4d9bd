use std::fmt;

use serde::Serialize;

/// Category of a non-fatal diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    SkippedBlock,
    DuplicateField,
    UnsupportedMacro,
    InvalidDoi,
    InvalidPmid,
    DroppedRecord,
    OverwrittenTag,
    Merged,
    SkippedLine,
    UnresolvedPair,
    MissingContext,
    OverBudget,
    EmptyValue,
}

/// A diagnostic produced while processing input that did not stop processing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub kind: WarningKind,
    /// 1-based line number, when the warning refers to a line of input.
    pub line: Option<usize>,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, message: impl Into<String>) -> Self {
        Warning { kind, line: None, message: message.into() }
    }

    pub fn at_line(kind: WarningKind, line: usize, message: impl Into<String>) -> Self {
        Warning { kind, line: Some(line), message: message.into() }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{:?} (line {line}): {}", self.kind, self.message),
            None => write!(f, "{:?}: {}", self.kind, self.message),
        }
    }
}
