//! State tables: parsing, validation and hold-expansion.
//!
//! Text format (`.st`):
//!
//! ```text
//! cell DFF
//! input level D
//! input edge CLK
//! state Q
//! table
//! 0 R 0 : 0      # D CLK Q : Q'
//! ```
//!
//! Edge values are `R`, `F` or an explicit previous/current pair `00`,
//! `01`, `10`, `11`. `#` starts a comment.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::config::{EdgeValue, Layout};

/// Largest supported `N + 2M + K`.
pub const MAX_KEY_WIDTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PinKind {
    LevelInput,
    EdgeInput,
    MemoryElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PinDeclaration {
    pub name: String,
    pub kind: PinKind,
}

impl PinDeclaration {
    pub fn new(name: impl Into<String>, kind: PinKind) -> Self {
        PinDeclaration { name: name.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateTableRow {
    pub level_inputs: Vec<bool>,
    pub edge_inputs: Vec<EdgeValue>,
    pub prev_states: Vec<bool>,
    pub next_states: Vec<bool>,
}

impl StateTableRow {
    pub fn key(&self, layout: &Layout) -> u32 {
        layout.encode_key(&self.level_inputs, &self.edge_inputs, &self.prev_states)
    }

    fn width_matches(&self, layout: &Layout) -> bool {
        self.level_inputs.len() == layout.levels
            && self.edge_inputs.len() == layout.edges
            && self.prev_states.len() == layout.states
            && self.next_states.len() == layout.states
    }
}

/// Structural problems with a table, independent of any source text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("duplicate pin name `{0}`")]
    DuplicatePin(String),
    #[error("cell declares no memory elements")]
    NoMemoryElements,
    #[error("table has no rows")]
    NoRows,
    #[error("key width N+2M+K = {0} exceeds the supported ceiling of {MAX_KEY_WIDTH}")]
    TooWide(usize),
    #[error("row {row}: widths do not match the pin declarations")]
    WidthMismatch { row: usize },
    #[error("rows {first} and {second} have the same inputs and previous states")]
    DuplicateKey { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: unknown pin kind `{kind}`")]
    UnknownPinKind { line: usize, column: usize, kind: String },
    #[error("line {line}: expected {expected} values {side} `:`, found {found}")]
    WidthMismatch { line: usize, side: &'static str, expected: usize, found: usize },
    #[error("lines {first} and {second}: nondeterministic table, same inputs and previous states map to different next states")]
    Nondeterministic { first: usize, second: usize },
    #[error("line {line}: duplicate pin name `{name}`")]
    DuplicatePin { line: usize, name: String },
    #[error("cell declares no memory elements (combinational cells are not supported)")]
    NoMemoryElements,
    #[error("no rows")]
    NoRows,
    #[error("key width N+2M+K = {0} exceeds the supported ceiling of {MAX_KEY_WIDTH}")]
    TooWide(usize),
    #[error("unexpected end of input: {0}")]
    UnexpectedEof(&'static str),
}

/// Non-fatal findings while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTable {
    cell_name: String,
    declarations: Vec<PinDeclaration>,
    rows: Vec<StateTableRow>,
    layout: Layout,
}

impl StateTable {
    pub fn new(
        cell_name: impl Into<String>,
        declarations: Vec<PinDeclaration>,
        rows: Vec<StateTableRow>,
    ) -> Result<Self, TableError> {
        let layout = check_declarations(&declarations)?;
        if rows.is_empty() {
            return Err(TableError::NoRows);
        }
        let mut seen: HashMap<u32, usize> = HashMap::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if !row.width_matches(&layout) {
                return Err(TableError::WidthMismatch { row: i });
            }
            if let Some(&first) = seen.get(&row.key(&layout)) {
                return Err(TableError::DuplicateKey { first, second: i });
            }
            seen.insert(row.key(&layout), i);
        }
        Ok(StateTable { cell_name: cell_name.into(), declarations, rows, layout })
    }

    pub fn cell_name(&self) -> &str {
        &self.cell_name
    }

    pub fn declarations(&self) -> &[PinDeclaration] {
        &self.declarations
    }

    pub fn rows(&self) -> &[StateTableRow] {
        &self.rows
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    fn names_of(&self, kind: PinKind) -> impl Iterator<Item = &str> {
        self.declarations
            .iter()
            .filter(move |d| d.kind == kind)
            .map(|d| d.name.as_str())
    }

    pub fn level_names(&self) -> Vec<&str> {
        self.names_of(PinKind::LevelInput).collect()
    }

    pub fn edge_names(&self) -> Vec<&str> {
        self.names_of(PinKind::EdgeInput).collect()
    }

    pub fn state_names(&self) -> Vec<&str> {
        self.names_of(PinKind::MemoryElement).collect()
    }

    /// Input pin names in stimulus order: level inputs, then edge inputs.
    pub fn input_names(&self) -> Vec<&str> {
        let mut names = self.level_names();
        names.extend(self.edge_names());
        names
    }

    /// Dense next-state lookup indexed by key.
    pub fn transitions(&self) -> TransitionTable {
        let mut next = vec![None; self.layout.key_count() as usize];
        for row in &self.rows {
            next[row.key(&self.layout) as usize] = Some(self.layout.encode_states(&row.next_states));
        }
        TransitionTable { layout: self.layout, next }
    }

    /// Serialize back to the `.st` text format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |b: &bool| if *b { "1" } else { "0" };
        writeln!(f, "cell {}", self.cell_name)?;
        for d in &self.declarations {
            let kind = match d.kind {
                PinKind::LevelInput => "input level",
                PinKind::EdgeInput => "input edge",
                PinKind::MemoryElement => "state",
            };
            writeln!(f, "{kind} {}", d.name)?;
        }
        writeln!(f, "table")?;
        for row in &self.rows {
            let mut lhs: Vec<String> = row.level_inputs.iter().map(|b| bit(b).to_string()).collect();
            lhs.extend(row.edge_inputs.iter().map(|e| e.to_string()));
            lhs.extend(row.prev_states.iter().map(|b| bit(b).to_string()));
            let rhs: Vec<&str> = row.next_states.iter().map(bit).collect();
            writeln!(f, "{} : {}", lhs.join(" "), rhs.join(" "))?;
        }
        Ok(())
    }
}

fn check_declarations(declarations: &[PinDeclaration]) -> Result<Layout, TableError> {
    let mut names = std::collections::HashSet::new();
    let mut layout = Layout::default();
    for d in declarations {
        if !names.insert(d.name.as_str()) {
            return Err(TableError::DuplicatePin(d.name.clone()));
        }
        match d.kind {
            PinKind::LevelInput => layout.levels += 1,
            PinKind::EdgeInput => layout.edges += 1,
            PinKind::MemoryElement => layout.states += 1,
        }
    }
    if layout.states == 0 {
        return Err(TableError::NoMemoryElements);
    }
    if layout.key_width() > MAX_KEY_WIDTH {
        return Err(TableError::TooWide(layout.key_width()));
    }
    Ok(layout)
}

/// Next-state function of a table, indexed by key.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    layout: Layout,
    next: Vec<Option<u32>>,
}

impl TransitionTable {
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn next(&self, key: u32) -> Option<u32> {
        self.next.get(key as usize).copied().flatten()
    }

    pub fn is_complete(&self) -> bool {
        self.next.iter().all(Option::is_some)
    }
}

/// Result of [`validate_complete`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletenessReport {
    pub row_count: usize,
    pub expected_rows: u64,
    pub missing_keys: Vec<u32>,
    pub duplicate_keys: Vec<u32>,
}

impl CompletenessReport {
    pub fn is_complete(&self) -> bool {
        self.missing_keys.is_empty() && self.duplicate_keys.is_empty()
    }
}

pub fn validate_complete(st: &StateTable) -> CompletenessReport {
    let layout = st.layout();
    let mut count = vec![0u32; layout.key_count() as usize];
    for row in st.rows() {
        count[row.key(&layout) as usize] += 1;
    }
    let missing_keys = (0..count.len() as u32).filter(|&k| count[k as usize] == 0).collect();
    let duplicate_keys = (0..count.len() as u32).filter(|&k| count[k as usize] > 1).collect();
    CompletenessReport {
        row_count: st.rows().len(),
        expected_rows: layout.key_count(),
        missing_keys,
        duplicate_keys,
    }
}

/// Add a hold row (`next = prev`) for every key the table does not
/// specify. Existing rows are kept in order; added rows follow in ascending
/// key order.
pub fn expand(st: &StateTable) -> StateTable {
    let layout = st.layout();
    let report = validate_complete(st);
    let mut rows = st.rows.clone();
    rows.reserve(report.missing_keys.len());
    for key in report.missing_keys {
        let (level_inputs, edge_inputs, prev_states) = layout.decode_key(key);
        rows.push(StateTableRow {
            level_inputs,
            edge_inputs,
            next_states: prev_states.clone(),
            prev_states,
        });
    }
    StateTable {
        cell_name: st.cell_name.clone(),
        declarations: st.declarations.clone(),
        rows,
        layout,
    }
}

pub fn parse(text: &str) -> Result<StateTable, ParseError> {
    parse_with_warnings(text).map(|(st, _)| st)
}

pub fn parse_with_warnings(text: &str) -> Result<(StateTable, Vec<ParseWarning>), ParseError> {
    Parser::default().run(text)
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Whitespace-separated tokens of `s`, with 1-based columns relative to a
/// line whose text starts `offset` characters before `s`.
fn tokens(s: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(Token { text: &s[st..i], column: offset + s[..st].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(Token { text: &s[st..], column: offset + s[..st].chars().count() + 1 });
    }
    out
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '[' | ']'))
}

#[derive(Default)]
struct Parser {
    cell_name: Option<String>,
    declarations: Vec<PinDeclaration>,
    decl_lines: HashMap<String, usize>,
    layout: Layout,
    in_table: bool,
    rows: Vec<StateTableRow>,
    row_lines: Vec<usize>,
    by_key: HashMap<u32, usize>,
    warnings: Vec<ParseWarning>,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, column, message: message.into() }
}

impl Parser {
    fn run(mut self, text: &str) -> Result<(StateTable, Vec<ParseWarning>), ParseError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            if self.in_table {
                self.row(line_no, content)?;
            } else {
                self.header(line_no, content)?;
            }
        }
        if self.cell_name.is_none() {
            return Err(ParseError::UnexpectedEof("missing `cell` line"));
        }
        if !self.in_table {
            return Err(ParseError::UnexpectedEof("missing `table` line"));
        }
        if self.rows.is_empty() {
            return Err(ParseError::NoRows);
        }
        let st = StateTable {
            cell_name: self.cell_name.take().unwrap_or_default(),
            declarations: self.declarations,
            rows: self.rows,
            layout: self.layout,
        };
        Ok((st, self.warnings))
    }

    fn header(&mut self, line: usize, content: &str) -> Result<(), ParseError> {
        let toks = tokens(content, 0);
        let first = &toks[0];
        if self.cell_name.is_none() {
            if first.text != "cell" {
                return Err(syntax(line, first.column, "expected `cell <name>`"));
            }
            let name = match toks.get(1) {
                Some(t) if is_identifier(t.text) => t,
                Some(t) => return Err(syntax(line, t.column, format!("invalid cell name `{}`", t.text))),
                None => return Err(syntax(line, first.column + 4, "missing cell name")),
            };
            if let Some(extra) = toks.get(2) {
                return Err(syntax(line, extra.column, "unexpected token after cell name"));
            }
            self.cell_name = Some(name.text.to_string());
            return Ok(());
        }
        let (kind, name_tok) = match first.text {
            "table" => {
                if let Some(extra) = toks.get(1) {
                    return Err(syntax(line, extra.column, "unexpected token after `table`"));
                }
                return self.begin_table();
            }
            "state" => (PinKind::MemoryElement, toks.get(1)),
            "input" => {
                let kind_tok = toks
                    .get(1)
                    .ok_or_else(|| syntax(line, first.column + 5, "expected `level` or `edge`"))?;
                let kind = match kind_tok.text {
                    "level" => PinKind::LevelInput,
                    "edge" => PinKind::EdgeInput,
                    other => {
                        return Err(ParseError::UnknownPinKind {
                            line,
                            column: kind_tok.column,
                            kind: other.to_string(),
                        })
                    }
                };
                (kind, toks.get(2))
            }
            other => {
                return Err(ParseError::UnknownPinKind {
                    line,
                    column: first.column,
                    kind: other.to_string(),
                })
            }
        };
        let name_tok = name_tok.ok_or_else(|| syntax(line, content.trim_end().len() + 1, "missing pin name"))?;
        if !is_identifier(name_tok.text) {
            return Err(syntax(line, name_tok.column, format!("invalid pin name `{}`", name_tok.text)));
        }
        let consumed = if kind == PinKind::MemoryElement { 2 } else { 3 };
        if let Some(extra) = toks.get(consumed) {
            return Err(syntax(line, extra.column, "unexpected token after pin name"));
        }
        if self.decl_lines.insert(name_tok.text.to_string(), line).is_some() {
            return Err(ParseError::DuplicatePin { line, name: name_tok.text.to_string() });
        }
        self.declarations.push(PinDeclaration::new(name_tok.text, kind));
        Ok(())
    }

    fn begin_table(&mut self) -> Result<(), ParseError> {
        self.layout = match check_declarations(&self.declarations) {
            Ok(layout) => layout,
            Err(TableError::NoMemoryElements) => return Err(ParseError::NoMemoryElements),
            Err(TableError::TooWide(w)) => return Err(ParseError::TooWide(w)),
            Err(e) => unreachable!("declarations already checked: {e}"),
        };
        self.in_table = true;
        Ok(())
    }

    fn row(&mut self, line: usize, content: &str) -> Result<(), ParseError> {
        let layout = self.layout;
        let colon = content
            .find(':')
            .ok_or_else(|| syntax(line, content.trim_end().len() + 1, "expected `:` between previous and next values"))?;
        let lhs = tokens(&content[..colon], 0);
        let rhs_offset = content[..=colon].chars().count();
        let rhs = tokens(&content[colon + 1..], rhs_offset);
        let want_lhs = layout.levels + layout.edges + layout.states;
        if lhs.len() != want_lhs {
            return Err(ParseError::WidthMismatch { line, side: "before", expected: want_lhs, found: lhs.len() });
        }
        if rhs.len() != layout.states {
            return Err(ParseError::WidthMismatch { line, side: "after", expected: layout.states, found: rhs.len() });
        }
        let bit = |t: &Token| match t.text {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(syntax(line, t.column, format!("expected 0 or 1, found `{other}`"))),
        };
        let edge = |t: &Token| match t.text {
            "R" | "r" | "01" => Ok(EdgeValue::RISING),
            "F" | "f" | "10" => Ok(EdgeValue::FALLING),
            "00" => Ok(EdgeValue::LOW),
            "11" => Ok(EdgeValue::HIGH),
            other => Err(syntax(line, t.column, format!("expected R, F, 00, 01, 10 or 11, found `{other}`"))),
        };
        let level_inputs = lhs[..layout.levels].iter().map(bit).collect::<Result<Vec<_>, _>>()?;
        let edge_inputs = lhs[layout.levels..layout.levels + layout.edges]
            .iter()
            .map(edge)
            .collect::<Result<Vec<_>, _>>()?;
        let prev_states = lhs[layout.levels + layout.edges..].iter().map(bit).collect::<Result<Vec<_>, _>>()?;
        let next_states = rhs.iter().map(bit).collect::<Result<Vec<_>, _>>()?;
        let row = StateTableRow { level_inputs, edge_inputs, prev_states, next_states };
        let key = row.key(&layout);
        if let Some(&idx) = self.by_key.get(&key) {
            let first = self.row_lines[idx];
            if self.rows[idx].next_states != row.next_states {
                return Err(ParseError::Nondeterministic { first, second: line });
            }
            self.warnings.push(ParseWarning {
                line,
                message: format!("duplicate of row on line {first}, ignored"),
            });
            return Ok(());
        }
        self.by_key.insert(key, self.rows.len());
        self.rows.push(row);
        self.row_lines.push(line);
        Ok(())
    }
}
