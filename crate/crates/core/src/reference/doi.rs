/// The input did not normalise to something starting with `10.`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a DOI: {0:?}")]
pub struct NotADoi(pub String);

const PREFIXES: [&str; 4] = ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "doi:"];

/// Canonical DOI form: trimmed, resolver/`doi:` prefix removed, lowercase.
///
/// ```
/// use qaforge_core::reference::normalize_doi;
/// assert_eq!(normalize_doi("HTTPS://DOI.ORG/10.1000/ABC").unwrap(), "10.1000/abc");
/// assert!(normalize_doi("not-a-doi").is_err());
/// ```
pub fn normalize_doi(raw: &str) -> Result<String, NotADoi> {
    let mut s = raw.trim();
    for prefix in PREFIXES {
        if s.len() >= prefix.len() && s.is_char_boundary(prefix.len()) && s[..prefix.len()].eq_ignore_ascii_case(prefix)
        {
            s = s[prefix.len()..].trim_start();
            break;
        }
    }
    let lowered = s.to_lowercase();
    if lowered.starts_with("10.") && !lowered.chars().any(char::is_whitespace) {
        Ok(lowered)
    } else {
        Err(NotADoi(raw.to_string()))
    }
}

pub(crate) fn is_normalized_doi(s: &str) -> bool {
    normalize_doi(s).map(|n| n == s).unwrap_or(false)
}
