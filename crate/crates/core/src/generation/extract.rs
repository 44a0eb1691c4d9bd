use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedQa {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("no JSON object found in model output")]
    NoJsonFound,
    #[error("JSON object has no {0:?} key")]
    MissingKeys(&'static str),
    #[error("value under {0:?} is not a string")]
    NonStringValue(&'static str),
}

const FENCE: &str = "```";

/// Removes every ``` marker together with a language word directly after it.
fn strip_fences(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(FENCE) {
        out.push_str(&rest[..pos]);
        rest = &rest[pos + FENCE.len()..];
        let lang = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-')).unwrap_or(rest.len());
        rest = &rest[lang..];
    }
    out.push_str(rest);
    out
}

/// End (exclusive) of the brace-balanced span opening at `start`, honouring
/// JSON string literals and escapes.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_str {
            match (escaped, b) {
                (true, _) => escaped = false,
                (false, b'\\') => escaped = true,
                (false, b'"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_str = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn take(obj: &Map<String, Value>) -> Result<ExtractedQa, ExtractError> {
    let field = |key: &'static str| match obj.get(key) {
        None => Err(ExtractError::MissingKeys(key)),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ExtractError::NonStringValue(key)),
    };
    Ok(ExtractedQa { question: field("question")?, answer: field("answer")? })
}

/// Pulls `{"question": .., "answer": ..}` out of model output.
///
/// Code fences are stripped, then every `{` is tried in order as the start
/// of a brace-balanced JSON object; the first object with string values
/// under both keys wins. Values are returned untrimmed. If objects were
/// found but none qualified, the error describes the first one.
pub fn extract_qa_json(output_text: &str) -> Result<ExtractedQa, ExtractError> {
    let text = strip_fences(output_text);
    let bytes = text.as_bytes();
    let mut first_err = None;
    for start in memchr_all(bytes, b'{') {
        let Some(end) = balanced_end(bytes, start) else { continue };
        let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(&text[start..end]) else { continue };
        match take(&obj) {
            Ok(qa) => return Ok(qa),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(ExtractError::NoJsonFound))
}

fn memchr_all(bytes: &[u8], needle: u8) -> impl Iterator<Item = usize> + '_ {
    bytes.iter().enumerate().filter(move |(_, &b)| b == needle).map(|(i, _)| i)
}
