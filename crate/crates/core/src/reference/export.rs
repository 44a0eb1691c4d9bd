use std::collections::HashSet;
use std::io;
use std::path::Path;

use super::record::PaperRecord;
use super::store::RecordStore;
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreFormat {
    Yaml,
    Jsonl,
}

impl StoreFormat {
    /// Guesses from the file extension: `.yaml`/`.yml` or `.jsonl`/`.json`.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "yaml" | "yml" => Some(StoreFormat::Yaml),
            "jsonl" | "json" => Some(StoreFormat::Jsonl),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    /// `index` is the 0-based position of the offending record in the file.
    #[error("record {index}: {message}")]
    Parse { index: usize, message: String },
}

/// Serialises the store in canonical order (records by `record_id`, fields
/// in declaration order).
pub fn render_store(store: &RecordStore, format: StoreFormat) -> String {
    match format {
        StoreFormat::Yaml => serde_yaml::to_string(store.records()).expect("records serialise to YAML"),
        StoreFormat::Jsonl => {
            let mut out = String::new();
            for r in store.records() {
                out.push_str(&serde_json::to_string(r).expect("records serialise to JSON"));
                out.push('\n');
            }
            out
        }
    }
}

pub fn export_store(store: &RecordStore, format: StoreFormat, path: &Path) -> Result<(), StoreIoError> {
    write_atomic(path, render_store(store, format).as_bytes())?;
    Ok(())
}

pub fn import_store(path: &Path, format: StoreFormat) -> Result<RecordStore, StoreIoError> {
    let text = std::fs::read_to_string(path)?;
    let records = match format {
        StoreFormat::Jsonl => parse_jsonl(&text)?,
        StoreFormat::Yaml => parse_yaml(&text)?,
    };
    check_unique(&records)?;
    RecordStore::from_unique(records).map_err(|e| StoreIoError::Parse { index: 0, message: e.to_string() })
}

fn parse_jsonl(text: &str) -> Result<Vec<PaperRecord>, StoreIoError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(index, line)| {
            serde_json::from_str(line).map_err(|e| StoreIoError::Parse { index, message: e.to_string() })
        })
        .collect()
}

fn parse_yaml(text: &str) -> Result<Vec<PaperRecord>, StoreIoError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let values: Vec<serde_yaml::Value> = serde_yaml::from_str(text).map_err(|e| {
        let line = e.location().map(|l| l.line()).unwrap_or(usize::MAX);
        StoreIoError::Parse { index: yaml_item_index(text, line), message: e.to_string() }
    })?;
    values
        .into_iter()
        .enumerate()
        .map(|(index, v)| serde_yaml::from_value(v).map_err(|e| StoreIoError::Parse { index, message: e.to_string() }))
        .collect()
}

/// Index of the top-level list item containing 1-based `line`.
fn yaml_item_index(text: &str, line: usize) -> usize {
    text.lines().take(line).filter(|l| l.starts_with("- ") || *l == "-").count().saturating_sub(1)
}

fn check_unique(records: &[PaperRecord]) -> Result<(), StoreIoError> {
    let mut seen = HashSet::new();
    for (index, r) in records.iter().enumerate() {
        r.validate().map_err(|e| StoreIoError::Parse { index, message: e.to_string() })?;
        let keys = std::iter::once(("record_id", r.record_id.clone()))
            .chain(r.doi.iter().map(|d| ("doi", d.clone())))
            .chain(r.pmid.iter().map(|p| ("pmid", p.clone())));
        for key in keys {
            if !seen.insert(key.clone()) {
                return Err(StoreIoError::Parse { index, message: format!("duplicate key {key:?}") });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::record::SourceFormat;
    use super::super::store::dedup;
    use super::*;

    fn sample_store() -> RecordStore {
        let mut recs = Vec::new();
        for i in 0..4 {
            let mut r = PaperRecord::empty(if i % 2 == 0 { SourceFormat::Bibtex } else { SourceFormat::Nbib });
            r.title = format!("Paper {i}: telomeres");
            if i != 3 {
                r.pmid = Some(format!("{}", 1000 + i));
            }
            if i == 0 {
                r.doi = Some("10.1/zero".into());
                r.abstract_text = Some("Line one.\nLine \"two\": yes".into());
                r.extra.insert("url".into(), "https://example.org/0".into());
            }
            r.authors = vec!["Doe, J.".into(), "Roe, A.".into()];
            recs.push(r.finish());
        }
        dedup(recs).0
    }

    #[test]
    fn round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let store = sample_store();
        for (format, name) in [(StoreFormat::Yaml, "s.yaml"), (StoreFormat::Jsonl, "s.jsonl")] {
            let path = dir.path().join(name);
            export_store(&store, format, &path).unwrap();
            assert_eq!(import_store(&path, format).unwrap(), store);
        }
    }

    #[test]
    fn canonical_field_order() {
        let line = render_store(&sample_store(), StoreFormat::Jsonl);
        let first = line.lines().next().unwrap();
        let order = [
            "record_id",
            "doi",
            "pmid",
            "title",
            "authors",
            "journal",
            "pub_date",
            "abstract",
            "keywords",
            "source_format",
            "extra",
        ];
        let positions: Vec<usize> = order.iter().map(|k| first.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_store() {
        let dir = tempfile::tempdir().unwrap();
        for (format, name) in [(StoreFormat::Yaml, "e.yaml"), (StoreFormat::Jsonl, "e.jsonl")] {
            let path = dir.path().join(name);
            export_store(&RecordStore::default(), format, &path).unwrap();
            assert!(import_store(&path, format).unwrap().is_empty());
        }
    }

    #[test]
    fn truncated_jsonl_reports_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let text = render_store(&sample_store(), StoreFormat::Jsonl);
        let cut = text.len() - 20;
        std::fs::write(&path, &text[..cut]).unwrap();
        match import_store(&path, StoreFormat::Jsonl) {
            Err(StoreIoError::Parse { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncated_yaml_reports_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.yaml");
        let text = render_store(&sample_store(), StoreFormat::Yaml);
        let cut = text.rfind("source_format").unwrap();
        std::fs::write(&path, &text[..cut]).unwrap();
        match import_store(&path, StoreFormat::Yaml) {
            Err(StoreIoError::Parse { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_in_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        let text = render_store(&sample_store(), StoreFormat::Jsonl);
        let first = text.lines().next().unwrap();
        std::fs::write(&path, format!("{text}{first}\n")).unwrap();
        assert!(matches!(import_store(&path, StoreFormat::Jsonl), Err(StoreIoError::Parse { index: 4, .. })));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(StoreFormat::from_path(Path::new("a.YML")), Some(StoreFormat::Yaml));
        assert_eq!(StoreFormat::from_path(Path::new("a.jsonl")), Some(StoreFormat::Jsonl));
        assert_eq!(StoreFormat::from_path(Path::new("a.txt")), None);
    }
}
