//! Placeholder-only prompt templates.
//!
//! A template is plain text with `{{ identifier }}` placeholders. There are no
//! loops, conditionals or filters. Substituted values are inserted verbatim
//! and never re-scanned, so an abstract containing `{{` cannot inject
//! placeholders.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

/// Name under which [`builtin_qa_prompt`] is registered.
pub const BUILTIN_QA_PROMPT: &str = "qa_generation";

const BUILTIN_QA_BODY: &str = include_str!("../../templates/qa_generation.tpl");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("unclosed placeholder starting at byte {0}")]
    UnbalancedPlaceholder(usize),
    #[error("invalid placeholder identifier {0:?}")]
    BadIdentifier(String),
    #[error("no value for placeholder {0:?}")]
    MissingVariable(String),
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("reading templates: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Var(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    body: String,
    segments: Vec<Segment>,
    required_vars: BTreeSet<String>,
}

/// Values substituted into a template.
pub type RenderContext = BTreeMap<String, String>;

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `body` into literal text and placeholders. Whitespace inside the
/// braces is ignored. A `}}` with no opening `{{` is literal text.
pub fn parse_template(name: &str, body: &str) -> Result<PromptTemplate, TemplateError> {
    let mut segments = Vec::new();
    let mut required_vars = BTreeSet::new();
    let mut rest = body;
    let mut offset = 0;
    while let Some(open) = rest.find("{{") {
        let close = rest[open + 2..].find("}}").ok_or(TemplateError::UnbalancedPlaceholder(offset + open))?;
        let ident = rest[open + 2..open + 2 + close].trim();
        if !is_identifier(ident) {
            return Err(TemplateError::BadIdentifier(ident.to_string()));
        }
        if open > 0 {
            segments.push(Segment::Text(rest[..open].to_string()));
        }
        segments.push(Segment::Var(ident.to_string()));
        required_vars.insert(ident.to_string());
        let consumed = open + 2 + close + 2;
        offset += consumed;
        rest = &rest[consumed..];
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest.to_string()));
    }
    Ok(PromptTemplate { name: name.to_string(), body: body.to_string(), segments, required_vars })
}

impl PromptTemplate {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn required_vars(&self) -> &BTreeSet<String> {
        &self.required_vars
    }

    /// Required variables whose value in `ctx` is empty or whitespace.
    pub fn empty_vars(&self, ctx: &RenderContext) -> Vec<String> {
        self.required_vars.iter().filter(|v| ctx.get(*v).is_some_and(|s| s.trim().is_empty())).cloned().collect()
    }
}

/// Substitutes every placeholder. Text outside placeholders is copied byte
/// for byte; an empty string is a valid value, an absent key is an error.
pub fn render(template: &PromptTemplate, ctx: &RenderContext) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.body.len());
    for seg in &template.segments {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Var(v) => out.push_str(ctx.get(v).ok_or_else(|| TemplateError::MissingVariable(v.clone()))?),
        }
    }
    Ok(out)
}

/// The shipped QA-generation prompt. Interpolates `title` and `abstract` and
/// asks for one JSON object with `question` and `answer` keys.
pub fn builtin_qa_prompt() -> PromptTemplate {
    parse_template(BUILTIN_QA_PROMPT, BUILTIN_QA_BODY).expect("builtin template parses")
}

/// Templates addressable by name: the builtin prompt plus any `*.tpl` files
/// loaded from a directory (file stem is the name; files override builtins).
#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    templates: HashMap<String, PromptTemplate>,
}

impl Default for TemplateLibrary {
    fn default() -> Self {
        let builtin = builtin_qa_prompt();
        TemplateLibrary { templates: HashMap::from([(builtin.name.clone(), builtin)]) }
    }
}

impl TemplateLibrary {
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut lib = TemplateLibrary::default();
        let entries = fs::read_dir(dir).map_err(|e| TemplateError::Io(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| TemplateError::Io(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("tpl") {
                continue;
            }
            let Some(name) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let body = fs::read_to_string(&path).map_err(|e| TemplateError::Io(format!("{}: {e}", path.display())))?;
            lib.templates.insert(name.to_string(), parse_template(name, &body)?);
        }
        Ok(lib)
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, TemplateError> {
        self.templates.get(name).ok_or_else(|| TemplateError::UnknownTemplate(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.templates.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }
}
