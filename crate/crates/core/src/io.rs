//! The JSON filter document.
//!
//! ```json
//! {
//!   "alphabet": ["a", "b"],
//!   "states": [{"id": "0", "colors": ["red"]}, {"id": "1", "colors": ["blue", "red"]}],
//!   "initial": ["0"],
//!   "edges": [{"from": "0", "to": "1", "symbols": ["a", "b"]}]
//! }
//! ```
//!
//! Syntax errors, unknown fields, duplicate or unknown state ids and empty
//! symbol lists are [`ParseError`]s with a line, a column and the offending
//! field. A well-formed document that describes an invalid filter (empty
//! color set, symbol outside the alphabet, …) is a [`ValidationError`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::filter::{validate, ColorSet, Filter, StateRecord, Symbol, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub id: String,
    pub colors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub from: String,
    pub to: String,
    pub symbols: Vec<String>,
}

/// Serialized form of a [`Filter`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterDocument {
    pub alphabet: Vec<String>,
    pub states: Vec<StateDocument>,
    pub initial: Vec<String>,
    pub edges: Vec<EdgeDocument>,
}

impl From<&Filter> for FilterDocument {
    fn from(f: &Filter) -> Self {
        FilterDocument {
            alphabet: f.symbols().iter().map(|y| y.to_string()).collect(),
            states: f
                .states()
                .iter()
                .map(|s| StateDocument {
                    id: s.id.clone(),
                    colors: s.colors.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
            initial: f.initial().iter().map(|&v| f.id(v).to_owned()).collect(),
            edges: f
                .edges()
                .map(|(u, v, l)| EdgeDocument {
                    from: f.id(u).to_owned(),
                    to: f.id(v).to_owned(),
                    symbols: l.iter().map(|y| y.to_string()).collect(),
                })
                .collect(),
        }
    }
}

impl Serialize for Filter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FilterDocument::from(self).serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Path of the offending element, e.g. `edges[2].to`. Empty for pure
    /// syntax errors.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}:{}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "{}:{}: {}: {}", self.line, self.column, self.field, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Error)]
#[error("invalid filter: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Parses and validates a filter document.
pub fn parse_filter(text: &str) -> Result<Filter, DocumentError> {
    let doc: FilterDocument = serde_json::from_str(text).map_err(|e| ParseError {
        line: e.line(),
        column: e.column(),
        field: backticked(&e.to_string()).unwrap_or_default(),
        message: e.to_string(),
    })?;
    let positions = locate_values(text);
    let at = |field: String, message: String| {
        let (line, column) = positions.get(&field).copied().unwrap_or((1, 1));
        ParseError {
            line,
            column,
            field,
            message,
        }
    };
    from_document(&doc).map_err(|e| match e {
        ResolveError::Parse { field, message } => DocumentError::Parse(at(field, message)),
        ResolveError::Invalid(v) => DocumentError::Invalid(v),
    })
}

enum ResolveError {
    Parse { field: String, message: String },
    Invalid(ValidationError),
}

fn from_document(doc: &FilterDocument) -> Result<Filter, ResolveError> {
    let parse = |field: String, message: String| ResolveError::Parse { field, message };
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, s) in doc.states.iter().enumerate() {
        if index.insert(s.id.as_str(), i).is_some() {
            return Err(parse(format!("states[{i}].id"), format!("duplicate state id `{}`", s.id)));
        }
    }
    let lookup = |id: &str, field: String| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| parse(field, format!("unknown state id `{id}`")))
    };
    let mut initial = Vec::new();
    for (i, id) in doc.initial.iter().enumerate() {
        initial.push(lookup(id, format!("initial[{i}]"))?);
    }
    let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
    for (i, e) in doc.edges.iter().enumerate() {
        let u = lookup(&e.from, format!("edges[{i}].from"))?;
        let v = lookup(&e.to, format!("edges[{i}].to"))?;
        if e.symbols.is_empty() {
            return Err(parse(format!("edges[{i}].symbols"), "edge has no symbols".into()));
        }
        edges
            .entry((u, v))
            .or_default()
            .extend(e.symbols.iter().map(|y| Symbol::from(y.as_str())));
    }
    let states = doc
        .states
        .iter()
        .map(|s| StateRecord::new(s.id.clone(), s.colors.iter().map(|c| c.as_str()).collect::<ColorSet>()))
        .collect();
    let f = Filter::from_raw(
        states,
        initial,
        doc.alphabet.iter().map(|y| Symbol::from(y.as_str())),
        edges,
    );
    let violations = validate(&f);
    if violations.is_empty() {
        Ok(f)
    } else {
        Err(ResolveError::Invalid(ValidationError { violations }))
    }
}

/// Pretty-printed document with a trailing newline.
pub fn emit(f: &Filter) -> String {
    let mut out = serde_json::to_string_pretty(&FilterDocument::from(f)).expect("plain data");
    out.push('\n');
    out
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_owned())
}

/// Line and column (1-based) of every value in a syntactically valid JSON
/// text, keyed by path (`edges[0].to`).
fn locate_values(text: &str) -> HashMap<String, (usize, usize)> {
    let mut loc = Locator {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        out: HashMap::new(),
    };
    loc.value(String::new());
    loc.out
}

struct Locator {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    out: HashMap<String, (usize, usize)>,
}

impl Locator {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn string(&mut self) -> String {
        let mut s = String::new();
        self.bump();
        while let Some(c) = self.bump() {
            match c {
                '"' => break,
                '\\' => {
                    if let Some(e) = self.bump() {
                        s.push(e);
                    }
                }
                _ => s.push(c),
            }
        }
        s
    }

    fn value(&mut self, path: String) {
        self.skip_ws();
        self.out.insert(path.clone(), (self.line, self.column));
        match self.peek() {
            Some('{') => {
                self.bump();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some('"') => {
                            let key = self.string();
                            self.skip_ws();
                            self.bump(); // ':'
                            let child = if path.is_empty() { key } else { format!("{path}.{key}") };
                            self.value(child);
                        }
                        Some(',') => {
                            self.bump();
                        }
                        _ => {
                            self.bump();
                            break;
                        }
                    }
                }
            }
            Some('[') => {
                self.bump();
                let mut i = 0;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(']') | None => {
                            self.bump();
                            break;
                        }
                        Some(',') => {
                            self.bump();
                        }
                        _ => {
                            self.value(format!("{path}[{i}]"));
                            i += 1;
                        }
                    }
                }
            }
            Some('"') => {
                self.string();
            }
            _ => {
                while matches!(self.peek(), Some(c) if !matches!(c, ',' | ']' | '}') && !c.is_whitespace()) {
                    self.bump();
                }
            }
        }
    }
}
