//! Line-oriented fault-tree file format.
//!
//! ```text
//! format eps-tree 1
//! top TOP
//! gate TOP or inputs=A,G1 desc="top event"
//! gate G1 and inputs=B,C condition=COND
//! event A basic model=constant q=1e-4
//! event B basic model=repair lambda=3e-8 mu=0.01
//! event C basic model=rate component="Transistor"
//! event COND conditioning state=true
//! event H house state=false
//! ```
//!
//! The first record must be the format header. `#` starts a comment outside
//! quoted values; quoted values accept `\"`, `\\`, `\n`, `\r` and `\t`
//! escapes. Records may appear in any order after the header. A `rate` or
//! `repair` model without `lambda` takes the midpoint rate of the
//! component-library entry named by `component`, or by the description when
//! `component` is absent. An event with no model at all is treated as `rate`
//! when the library has an entry for it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::fta::{EventKind, EventNode, FaultTree, FtaError, GateKind, GateNode, RawTree};
use crate::quant::{ModelMap, ProbabilityModel};
use crate::sizing::ComponentLibrary;

pub const FORMAT_NAME: &str = "eps-tree";
pub const FORMAT_VERSION: u32 = 1;

/// Name accepted by the CLI for the bundled power-system tree.
pub const EPS_EXAMPLE_NAME: &str = "eps_example";

const EPS_EXAMPLE_SOURCE: &str = include_str!("../data/eps_example.tree");

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: field {field}: {message}")]
    Schema {
        line: usize,
        field: String,
        message: String,
    },
    #[error(transparent)]
    Semantic(#[from] FtaError),
    #[error("event {event}: {reason}")]
    Model { event: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Constant { q: f64 },
    Rate { lambda: Option<f64> },
    Repair { lambda: Option<f64>, mu: f64 },
}

impl ModelSpec {
    fn keyword(&self) -> &'static str {
        match self {
            ModelSpec::Constant { .. } => "constant",
            ModelSpec::Rate { .. } => "rate",
            ModelSpec::Repair { .. } => "repair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventDef {
    pub id: String,
    pub kind: EventKind,
    pub description: String,
    pub model: Option<ModelSpec>,
    /// Component-library entry supplying a default rate.
    pub component: Option<String>,
    /// House state, or whether a conditioning event holds.
    pub state: Option<bool>,
}

impl EventDef {
    pub fn new(id: impl Into<String>, kind: EventKind) -> Self {
        Self {
            id: id.into(),
            kind,
            description: String::new(),
            model: None,
            component: None,
            state: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateDef {
    pub id: String,
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub condition: Option<String>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeDocument {
    pub format: u32,
    pub top: String,
    pub events: Vec<EventDef>,
    pub gates: Vec<GateDef>,
}

/// Rate taken from the component library.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefaultedRate {
    pub event: String,
    pub component: String,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModels {
    pub models: ModelMap,
    pub defaulted: Vec<DefaultedRate>,
}

impl TreeDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let doc = Parser::default().run(text)?;
        doc.fault_tree()?;
        Ok(doc)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The bundled satellite power-system tree.
    pub fn eps_example() -> Self {
        Self::parse(EPS_EXAMPLE_SOURCE).expect("bundled example is valid")
    }

    pub fn eps_example_source() -> &'static str {
        EPS_EXAMPLE_SOURCE
    }

    pub fn to_raw(&self) -> RawTree {
        let events = self
            .events
            .iter()
            .map(|e| {
                let mut node = EventNode::new(e.id.clone(), e.kind).with_description(e.description.clone());
                match e.kind {
                    EventKind::House => node.house_state = e.state,
                    EventKind::Conditioning => node.condition_state = e.state,
                    EventKind::Basic | EventKind::Undeveloped => {}
                }
                node
            })
            .collect();
        let gates = self
            .gates
            .iter()
            .map(|g| GateNode {
                id: g.id.clone(),
                kind: g.kind,
                inputs: g.inputs.clone(),
                condition: g.condition.clone(),
                description: g.description.clone(),
            })
            .collect();
        RawTree {
            events,
            gates,
            top: self.top.clone(),
        }
    }

    pub fn fault_tree(&self) -> Result<FaultTree, FtaError> {
        FaultTree::validate(self.to_raw())
    }

    /// Probability model of every basic and undeveloped event. Library
    /// defaults are skipped when `library` is `None`.
    pub fn resolve_models(&self, library: Option<&ComponentLibrary>) -> Result<ResolvedModels, DocumentError> {
        let mut models = BTreeMap::new();
        let mut defaulted = Vec::new();
        for e in self.events.iter().filter(|e| e.kind.is_stochastic()) {
            let default_rate = |defaulted: &mut Vec<DefaultedRate>| -> Result<f64, DocumentError> {
                let name = e.component.as_deref().unwrap_or(&e.description);
                let entry = library
                    .and_then(|lib| lib.find(name))
                    .ok_or_else(|| DocumentError::Model {
                        event: e.id.clone(),
                        reason: match library {
                            Some(_) => format!("no lambda given and no library entry named {name:?}"),
                            None => "no lambda given and library defaults are disabled".into(),
                        },
                    })?;
                defaulted.push(DefaultedRate {
                    event: e.id.clone(),
                    component: entry.name.clone(),
                    lambda: entry.midpoint(),
                });
                Ok(entry.midpoint())
            };
            let model = match e.model.unwrap_or(ModelSpec::Rate { lambda: None }) {
                ModelSpec::Constant { q } => ProbabilityModel::ConstantProbability { q },
                ModelSpec::Rate { lambda } => ProbabilityModel::FailureRateOnly {
                    lambda: lambda.map_or_else(|| default_rate(&mut defaulted), Ok)?,
                },
                ModelSpec::Repair { lambda, mu } => ProbabilityModel::FailureWithRepair {
                    lambda: lambda.map_or_else(|| default_rate(&mut defaulted), Ok)?,
                    mu,
                },
            };
            model.check().map_err(|reason| DocumentError::Model {
                event: e.id.clone(),
                reason,
            })?;
            models.insert(e.id.clone(), model);
        }
        Ok(ResolvedModels { models, defaulted })
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TreeDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "format {FORMAT_NAME} {}", self.format)?;
        writeln!(f, "top {}", self.top)?;
        for g in &self.gates {
            write!(f, "gate {} {} inputs={}", g.id, g.kind.as_str(), g.inputs.join(","))?;
            if let Some(c) = &g.condition {
                write!(f, " condition={c}")?;
            }
            if !g.description.is_empty() {
                write!(f, " desc={}", quote(&g.description))?;
            }
            writeln!(f)?;
        }
        for e in &self.events {
            write!(f, "event {} {}", e.id, e.kind.as_str())?;
            if let Some(m) = &e.model {
                write!(f, " model={}", m.keyword())?;
                match *m {
                    ModelSpec::Constant { q } => write!(f, " q={q:?}")?,
                    ModelSpec::Rate { lambda } => {
                        if let Some(l) = lambda {
                            write!(f, " lambda={l:?}")?;
                        }
                    }
                    ModelSpec::Repair { lambda, mu } => {
                        if let Some(l) = lambda {
                            write!(f, " lambda={l:?}")?;
                        }
                        write!(f, " mu={mu:?}")?;
                    }
                }
            }
            if let Some(s) = e.state {
                write!(f, " state={s}")?;
            }
            if let Some(c) = &e.component {
                write!(f, " component={}", quote(c))?;
            }
            if !e.description.is_empty() {
                write!(f, " desc={}", quote(&e.description))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, PartialEq)]
enum Token {
    Word(String),
    Pair(String, String),
}

fn syntax(line: usize, message: impl Into<String>) -> DocumentError {
    DocumentError::Syntax {
        line,
        message: message.into(),
    }
}

fn schema(line: usize, field: &str, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema {
        line,
        field: field.to_string(),
        message: message.into(),
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, DocumentError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        match chars.peek() {
            None | Some('#') => break,
            _ => {}
        }
        let mut key = String::new();
        while let Some(c) = chars.next_if(|c| !c.is_whitespace() && *c != '=' && *c != '#' && *c != '"') {
            key.push(c);
        }
        match chars.peek() {
            Some('=') => {
                chars.next();
                if key.is_empty() {
                    return Err(syntax(line, "'=' without a field name"));
                }
                let mut value = String::new();
                if chars.next_if_eq(&'"').is_some() {
                    loop {
                        match chars.next() {
                            Some('"') => break,
                            Some('\\') => match chars.next() {
                                Some(c @ ('"' | '\\')) => value.push(c),
                                Some('n') => value.push('\n'),
                                Some('r') => value.push('\r'),
                                Some('t') => value.push('\t'),
                                Some(c) => return Err(syntax(line, format!("unknown escape \\{c}"))),
                                None => return Err(syntax(line, "unterminated quoted value")),
                            },
                            Some(c) => value.push(c),
                            None => return Err(syntax(line, "unterminated quoted value")),
                        }
                    }
                    if chars.peek().is_some_and(|c| !c.is_whitespace() && *c != '#') {
                        return Err(syntax(line, "missing space after quoted value"));
                    }
                } else {
                    while let Some(c) = chars.next_if(|c| !c.is_whitespace() && *c != '#') {
                        if c == '"' || c == '=' {
                            return Err(syntax(line, format!("unexpected {c:?} in value of {key}")));
                        }
                        value.push(c);
                    }
                }
                tokens.push(Token::Pair(key, value));
            }
            Some('"') => return Err(syntax(line, "quoted text must follow a field name and '='")),
            _ => tokens.push(Token::Word(key)),
        }
    }
    Ok(tokens)
}

fn check_id(id: &str, line: usize, field: &str) -> Result<String, DocumentError> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '/'));
    if ok {
        Ok(id.to_string())
    } else {
        Err(schema(line, field, format!("invalid id {id:?}")))
    }
}

fn parse_event_kind(s: &str) -> Option<EventKind> {
    [
        EventKind::Basic,
        EventKind::House,
        EventKind::Undeveloped,
        EventKind::Conditioning,
    ]
    .into_iter()
    .find(|k| k.as_str() == s)
}

fn parse_gate_kind(s: &str) -> Option<GateKind> {
    [GateKind::Or, GateKind::And, GateKind::Xor, GateKind::PriorityAnd]
        .into_iter()
        .find(|k| k.as_str() == s)
}

/// Key/value fields of one record, consumed as they are interpreted.
struct Fields {
    line: usize,
    map: BTreeMap<String, String>,
}

impl Fields {
    fn new(line: usize, tokens: impl Iterator<Item = Token>) -> Result<Self, DocumentError> {
        let mut map = BTreeMap::new();
        for t in tokens {
            match t {
                Token::Pair(k, v) => {
                    if map.contains_key(&k) {
                        return Err(schema(line, &k, "given more than once"));
                    }
                    map.insert(k, v);
                }
                Token::Word(w) => return Err(syntax(line, format!("expected field=value, found {w:?}"))),
            }
        }
        Ok(Self { line, map })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, DocumentError> {
        self.take(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(schema(self.line, key, format!("expected a finite number, found {v:?}"))),
            })
            .transpose()
    }

    fn required_number(&mut self, key: &str, context: &str) -> Result<f64, DocumentError> {
        self.number(key)?
            .ok_or_else(|| schema(self.line, key, format!("required by {context}")))
    }

    fn finish(self) -> Result<(), DocumentError> {
        match self.map.into_keys().next() {
            Some(k) => Err(schema(self.line, &k, "not allowed here")),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct Parser {
    header_seen: bool,
    top: Option<(usize, String)>,
    events: Vec<EventDef>,
    gates: Vec<GateDef>,
}

impl Parser {
    fn run(mut self, text: &str) -> Result<TreeDocument, DocumentError> {
        let mut last_line = 0;
        for (k, raw_line) in text.lines().enumerate() {
            let line = k + 1;
            last_line = line;
            let tokens = tokenize(raw_line, line)?;
            if !tokens.is_empty() {
                self.record(line, tokens)?;
            }
        }
        if !self.header_seen {
            return Err(syntax(
                last_line.max(1),
                format!("missing `format {FORMAT_NAME} {FORMAT_VERSION}` header"),
            ));
        }
        let top = self.top.ok_or_else(|| schema(last_line, "top", "no `top` record"))?.1;
        Ok(TreeDocument {
            format: FORMAT_VERSION,
            top,
            events: self.events,
            gates: self.gates,
        })
    }

    fn record(&mut self, line: usize, tokens: Vec<Token>) -> Result<(), DocumentError> {
        let mut it = tokens.into_iter();
        let keyword = match it.next() {
            Some(Token::Word(w)) => w,
            _ => return Err(syntax(line, "record must start with a keyword")),
        };
        if !self.header_seen {
            return match (keyword.as_str(), it.next(), it.next(), it.next()) {
                ("format", Some(Token::Word(name)), Some(Token::Word(version)), None) if name == FORMAT_NAME => {
                    if version.parse::<u32>().ok() != Some(FORMAT_VERSION) {
                        return Err(schema(line, "format", format!("unsupported version {version:?}")));
                    }
                    self.header_seen = true;
                    Ok(())
                }
                _ => Err(syntax(
                    line,
                    format!("expected `format {FORMAT_NAME} {FORMAT_VERSION}` header"),
                )),
            };
        }
        let mut word = |what: &str| match it.next() {
            Some(Token::Word(w)) => Ok(w),
            _ => Err(syntax(line, format!("{keyword} record needs {what}"))),
        };
        match keyword.as_str() {
            "format" => Err(syntax(line, "format header given twice")),
            "top" => {
                let id = check_id(&word("an id")?, line, "top")?;
                if it.next().is_some() {
                    return Err(syntax(line, "top record takes a single id"));
                }
                if let Some((first, _)) = &self.top {
                    return Err(schema(line, "top", format!("already set on line {first}")));
                }
                self.top = Some((line, id));
                Ok(())
            }
            "gate" => {
                let id = check_id(&word("an id")?, line, "id")?;
                let kind_word = word("a kind")?;
                let kind = parse_gate_kind(&kind_word)
                    .ok_or_else(|| schema(line, "kind", format!("unknown gate kind {kind_word:?}")))?;
                let mut fields = Fields::new(line, it)?;
                let inputs = fields
                    .take("inputs")
                    .ok_or_else(|| schema(line, "inputs", "required"))?;
                let inputs = if inputs.is_empty() {
                    Vec::new()
                } else {
                    inputs
                        .split(',')
                        .map(|s| check_id(s, line, "inputs"))
                        .collect::<Result<_, _>>()?
                };
                let condition = fields
                    .take("condition")
                    .map(|c| check_id(&c, line, "condition"))
                    .transpose()?;
                let description = fields.take("desc").unwrap_or_default();
                fields.finish()?;
                self.gates.push(GateDef {
                    id,
                    kind,
                    inputs,
                    condition,
                    description,
                });
                Ok(())
            }
            "event" => {
                let id = check_id(&word("an id")?, line, "id")?;
                let kind_word = word("a kind")?;
                let kind = parse_event_kind(&kind_word)
                    .ok_or_else(|| schema(line, "kind", format!("unknown event kind {kind_word:?}")))?;
                let fields = Fields::new(line, it)?;
                self.events.push(event_fields(id, kind, fields)?);
                Ok(())
            }
            other => Err(syntax(line, format!("unknown record {other:?}"))),
        }
    }
}

fn event_fields(id: String, kind: EventKind, mut fields: Fields) -> Result<EventDef, DocumentError> {
    let line = fields.line;
    let mut event = EventDef::new(id, kind);
    event.description = fields.take("desc").unwrap_or_default();
    if kind.is_stochastic() {
        event.component = fields.take("component");
        event.model = match fields.take("model").as_deref() {
            None => None,
            Some("constant") => Some(ModelSpec::Constant {
                q: fields.required_number("q", "model=constant")?,
            }),
            Some("rate") => Some(ModelSpec::Rate {
                lambda: fields.number("lambda")?,
            }),
            Some("repair") => Some(ModelSpec::Repair {
                lambda: fields.number("lambda")?,
                mu: fields.required_number("mu", "model=repair")?,
            }),
            Some(other) => return Err(schema(line, "model", format!("unknown model {other:?}"))),
        };
    } else {
        let state = fields.take("state");
        event.state = match state.as_deref() {
            Some("true") => Some(true),
            Some("false") => Some(false),
            Some(other) => {
                return Err(schema(
                    line,
                    "state",
                    format!("expected true or false, found {other:?}"),
                ))
            }
            None if kind == EventKind::House => return Err(schema(line, "state", "required for house events")),
            None => None,
        };
    }
    fields.finish()?;
    Ok(event)
}

/// Loads a tree by path, or the bundled example by name.
pub fn load_tree(spec: &str) -> Result<TreeDocument, DocumentError> {
    if spec == EPS_EXAMPLE_NAME {
        Ok(TreeDocument::eps_example())
    } else {
        TreeDocument::from_path(spec)
    }
}

/// Source bytes for hashing: the bundled text or the file contents.
pub fn tree_source(spec: &str) -> Result<Vec<u8>, DocumentError> {
    if spec == EPS_EXAMPLE_NAME {
        Ok(EPS_EXAMPLE_SOURCE.as_bytes().to_vec())
    } else {
        std::fs::read(spec).map_err(|source| DocumentError::Io {
            path: spec.to_string(),
            source,
        })
    }
}
