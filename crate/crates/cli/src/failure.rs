use std::fmt::Write as _;

use serde::Serialize;
use stampcheck::{Error, ValidationReport};

/// Exit codes.
pub const OK: i32 = 0;
pub const USAGE: i32 = 1;
pub const INVALID: i32 = 2;
pub const ASSERTION: i32 = 3;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

/// An error that ends the command before it produces an outcome.
#[derive(Debug, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    /// What the location refers to, e.g. `formula` or a file path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<Box<ValidationReport>>,
    #[serde(skip)]
    excerpt: Option<Box<(String, usize)>>,
}

impl Failure {
    pub fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
            source: None,
            location: None,
            validation: None,
            excerpt: None,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure::new(USAGE, "usage", message)
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::new(USAGE, "io", format!("{}: {e}", path.display()))
    }

    /// Marks byte `offset` of `text` as the error site.
    fn at(mut self, source: &str, text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = text[line_start..offset].chars().count() + 1;
        let line_text = text[line_start..].lines().next().unwrap_or("").to_string();
        self.source = Some(source.to_string());
        self.location = Some(Location { line, column });
        self.excerpt = Some(Box::new((line_text, column)));
        self
    }

    /// Diagnostic text for stderr.
    pub fn render(&self) -> String {
        let mut out = format!("error: {}\n", self.message);
        if let (Some(src), Some(loc)) = (&self.source, self.location) {
            let _ = writeln!(out, "  --> {src}, line {}, column {}", loc.line, loc.column);
        }
        if let Some((line, column)) = self.excerpt.as_deref() {
            let _ = writeln!(out, "   | {line}");
            let _ = writeln!(out, "   | {}^", " ".repeat(column - 1));
        }
        if let Some(report) = &self.validation {
            out.push_str(&report.to_string());
        }
        out
    }
}

/// The name an unresolved-lookup error is about.
fn culprit(e: &Error) -> Option<&str> {
    match e {
        Error::UnknownAgent(s)
        | Error::UnknownVariable(s)
        | Error::UnknownGroup(s)
        | Error::UnknownStamp(s)
        | Error::UnknownRun(s)
        | Error::AmbiguousName(s) => Some(s),
        Error::UnknownValue { value, .. } => Some(value),
        Error::EmptyGroup => Some("{}"),
        _ => None,
    }
}

/// Byte offset of the first whole-word occurrence of `word` in `text`. The
/// agent in `B_i` counts as a word.
fn find_word(text: &str, word: &str) -> Option<usize> {
    let ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let starts_word = |head: &str| {
        let head = head.strip_suffix("B_").unwrap_or(head);
        !head.chars().next_back().is_some_and(ident)
    };
    text.match_indices(word).map(|(i, _)| i).find(|&i| {
        let after = text[i + word.len()..].chars().next();
        starts_word(&text[..i]) && !after.is_some_and(ident)
    })
}

/// Converts a library error raised while handling user input `text`
/// (a formula or group argument) into a located failure.
pub fn from_input(source: &str, text: &str, e: Error) -> Failure {
    match e {
        Error::Parse(p) => {
            Failure::new(USAGE, "parse", format!("in {source}: {p}")).at(source, text, p.offset)
        }
        other => {
            let f = Failure::new(USAGE, "lookup", format!("in {source}: {other}"));
            match culprit(&other).and_then(|w| find_word(text, w)) {
                Some(offset) => f.at(source, text, offset),
                None => f,
            }
        }
    }
}

/// The position serde_json appends to its messages.
fn json_location(msg: &str) -> Option<Location> {
    let (_, tail) = msg.rsplit_once(" at line ")?;
    let (line, column) = tail.split_once(" column ")?;
    Some(Location {
        line: line.trim().parse().ok()?,
        column: column.trim().parse().ok()?,
    })
}

/// Converts an error raised while loading or checking a model.
pub fn from_model(path: &str, e: Error) -> Failure {
    match e {
        Error::ModelFormat(msg) => {
            let mut f = Failure::new(INVALID, "model-format", format!("{path}: {msg}"));
            f.source = Some(path.to_string());
            f.location = json_location(&msg);
            f
        }
        Error::InvalidModel(report) => {
            let mut f = Failure::new(
                INVALID,
                "validation",
                format!("{path}: model failed validation"),
            );
            f.validation = Some(Box::new(report));
            f
        }
        other => Failure::new(USAGE, "lookup", other.to_string()),
    }
}
