use serde::{Deserialize, Serialize};

use super::tokens::TokenCounter;
use crate::qa::QAPair;
use crate::reference::{LookupKey, RecordStore};
use crate::{Execution, Warning, WarningKind};

/// Appended to a context that was cut to fit the token budget.
pub const TRUNCATION_MARKER: &str = "[truncated]";

/// One causal-LM training item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub context: String,
    pub question: String,
    pub answer: String,
}

impl TrainingExample {
    pub fn is_valid(&self) -> bool {
        [&self.context, &self.question, &self.answer].iter().all(|s| !s.trim().is_empty())
    }
}

/// [`build_manifest_with`] using the default execution mode.
pub fn build_manifest(
    subset: &[QAPair],
    records: &RecordStore,
    counter: &dyn TokenCounter,
    max_token_len: usize,
) -> (Vec<TrainingExample>, Vec<Warning>) {
    build_manifest_with(subset, records, counter, max_token_len, Execution::default())
}

/// Pairs each QA with its paper's abstract.
///
/// A pair is resolved by PMID first, then DOI; pairs that resolve to nothing
/// or to a paper without an abstract are skipped with a warning. When
/// `count(context) + count(question) + count(answer)` exceeds
/// `max_token_len`, the context is cut at a whitespace boundary and
/// [`TRUNCATION_MARKER`] appended so the total fits, and an `OverBudget`
/// warning is emitted. If the question and answer alone exceed the budget the
/// context becomes just the marker.
pub fn build_manifest_with(
    subset: &[QAPair],
    records: &RecordStore,
    counter: &dyn TokenCounter,
    max_token_len: usize,
    exec: Execution,
) -> (Vec<TrainingExample>, Vec<Warning>) {
    let outcomes = exec.map_indexed(subset, |i, pair| resolve_one(i, pair, records, counter, max_token_len));
    let mut examples = Vec::with_capacity(subset.len());
    let mut warnings = Vec::new();
    for (example, warning) in outcomes {
        examples.extend(example);
        warnings.extend(warning);
    }
    (examples, warnings)
}

fn resolve_one(
    i: usize,
    pair: &QAPair,
    records: &RecordStore,
    counter: &dyn TokenCounter,
    max_token_len: usize,
) -> (Option<TrainingExample>, Option<Warning>) {
    let record = (!pair.pmid.is_empty())
        .then(|| records.lookup(&LookupKey::Pmid(pair.pmid.clone())))
        .flatten()
        .or_else(|| (!pair.doi.is_empty()).then(|| records.lookup(&LookupKey::Doi(pair.doi.clone()))).flatten());
    let Some(record) = record else {
        let msg = format!("pair {i}: no paper for pmid {:?} / doi {:?}; skipped", pair.pmid, pair.doi);
        return (None, Some(Warning::new(WarningKind::UnresolvedPair, msg)));
    };
    let context = record.abstract_or_empty();
    if context.trim().is_empty() {
        let msg = format!("pair {i}: paper {} has no abstract; skipped", record.record_id);
        return (None, Some(Warning::new(WarningKind::MissingContext, msg)));
    }
    let qa_tokens = counter.count(&pair.question) + counter.count(&pair.answer);
    let total = counter.count(context) + qa_tokens;
    let example =
        |context: String| TrainingExample { context, question: pair.question.clone(), answer: pair.answer.clone() };
    if total <= max_token_len {
        return (Some(example(context.to_string())), None);
    }
    let truncated = truncate_to_fit(context, max_token_len.saturating_sub(qa_tokens), counter);
    let kept = counter.count(&truncated) + qa_tokens;
    let msg = format!("pair {i}: {total} tokens exceeds budget {max_token_len}; context truncated to {kept}");
    (Some(example(truncated)), Some(Warning::new(WarningKind::OverBudget, msg)))
}

/// Longest whitespace-boundary prefix of `context` that, with the marker
/// appended, counts at most `budget` tokens.
fn truncate_to_fit(context: &str, budget: usize, counter: &dyn TokenCounter) -> String {
    let mut word_ends = Vec::new();
    let mut in_word = false;
    for (pos, c) in context.char_indices() {
        if c.is_whitespace() {
            if in_word {
                word_ends.push(pos);
            }
            in_word = false;
        } else {
            in_word = true;
        }
    }
    if in_word {
        word_ends.push(context.len());
    }
    let candidate = |k: usize| -> String {
        if k == 0 {
            TRUNCATION_MARKER.to_string()
        } else {
            format!("{} {TRUNCATION_MARKER}", &context[..word_ends[k - 1]])
        }
    };
    // Largest k with count(candidate(k)) <= budget; counts grow with k.
    let (mut lo, mut hi) = (0usize, word_ends.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if counter.count(&candidate(mid)) <= budget {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    candidate(lo)
}
