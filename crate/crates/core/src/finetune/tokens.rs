/// Counts model tokens in a string. The default counts whitespace-separated
/// words; plug in a real tokenizer where exact budgets matter.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

impl<F: Fn(&str) -> usize + Send + Sync> TokenCounter for F {
    fn count(&self, text: &str) -> usize {
        self(text)
    }
}

/// Default token count: whitespace-separated units.
pub fn count_tokens(text: &str) -> usize {
    WhitespaceCounter.count(text)
}
