//! Test vectors: walk-to-stimulus conversion, replay against the state
//! table, coverage accounting and the CSV vector file.

use std::fmt::Write as _;

use thiserror::Error;

use crate::config::EdgeValue;
use crate::dcpw::PostmanWalk;
use crate::graph::SccReport;
use crate::sicstg::SicGraph;
use crate::state_table::StateTable;

/// One applied stimulus and the memory values expected after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestVector {
    /// 1-based; step 0 is the initial configuration.
    pub step: usize,
    /// Current value per input pin, level inputs first.
    pub stimulus: Vec<bool>,
    /// Current value per memory element.
    pub expected: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestVectorSequence {
    pub cell_name: String,
    pub input_names: Vec<String>,
    pub state_names: Vec<String>,
    /// Label bits of the configuration the cell must be in before step 1.
    pub initial: Vec<bool>,
    pub vectors: Vec<TestVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("walk does not match the graph: {0}")]
    WalkMismatch(#[from] crate::dcpw::WalkError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn label_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { "1" } else { "0" }).collect::<Vec<_>>().join(",")
}

impl TestVectorSequence {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn initial_label(&self) -> String {
        label_string(&self.initial)
    }

    /// Steps (1-based) whose stimulus does not differ from the previous one
    /// in exactly one position.
    pub fn sic_violations(&self) -> Vec<usize> {
        self.vectors
            .windows(2)
            .filter(|w| hamming(&w[0].stimulus, &w[1].stimulus) != 1)
            .map(|w| w[1].step)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# cell: {}\n# initial: {}\n", self.cell_name, self.initial_label());
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec!["step".to_string()];
        header.extend(self.input_names.iter().cloned());
        header.extend(self.state_names.iter().map(|s| format!("expect_{s}")));
        w.write_record(&header).expect("write to memory");
        for v in &self.vectors {
            let mut rec = vec![v.step.to_string()];
            rec.extend(v.stimulus.iter().chain(&v.expected).map(|&b| if b { "1" } else { "0" }.to_string()));
            w.write_record(&rec).expect("write to memory");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, VectorError> {
        let fmt_err = |line: usize, message: String| VectorError::Format { line, message };
        let mut cell_name = None;
        let mut initial = None;
        for (i, line) in text.lines().enumerate() {
            let Some(meta) = line.trim_start().strip_prefix('#') else { continue };
            if let Some((k, v)) = meta.split_once(':') {
                match k.trim() {
                    "cell" => cell_name = Some(v.trim().to_string()),
                    "initial" => {
                        let bits = v
                            .trim()
                            .split(',')
                            .map(|b| match b.trim() {
                                "0" => Ok(false),
                                "1" => Ok(true),
                                other => Err(fmt_err(i + 1, format!("bad initial label bit `{other}`"))),
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        initial = Some(bits);
                    }
                    _ => {}
                }
            }
        }
        let cell_name = cell_name.ok_or_else(|| fmt_err(1, "missing `# cell:` metadata".into()))?;
        let initial = initial.ok_or_else(|| fmt_err(1, "missing `# initial:` metadata".into()))?;

        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let line_of = |pos: Option<&csv::Position>| pos.map_or(0, |p| p.line() as usize);
        let header = reader
            .headers()
            .map_err(|e| fmt_err(line_of(e.position()), e.to_string()))?
            .clone();
        let header_line = line_of(Some(reader.position()));
        if header.get(0) != Some("step") {
            return Err(fmt_err(header_line, "first column must be `step`".into()));
        }
        let names: Vec<&str> = header.iter().skip(1).collect();
        let split = names.iter().position(|n| n.starts_with("expect_")).unwrap_or(names.len());
        let input_names: Vec<String> = names[..split].iter().map(|s| s.to_string()).collect();
        let state_names = names[split..]
            .iter()
            .map(|n| {
                n.strip_prefix("expect_")
                    .map(str::to_string)
                    .ok_or_else(|| fmt_err(header_line, format!("column `{n}` after the expect_ columns")))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut vectors = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| fmt_err(line_of(e.position()), e.to_string()))?;
            let line = line_of(rec.position());
            if rec.len() != header.len() {
                return Err(fmt_err(line, format!("expected {} fields, found {}", header.len(), rec.len())));
            }
            let step = rec[0]
                .trim()
                .parse()
                .map_err(|_| fmt_err(line, format!("bad step number `{}`", &rec[0])))?;
            let bits = rec
                .iter()
                .skip(1)
                .map(|f| match f.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(fmt_err(line, format!("expected 0 or 1, found `{other}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (stimulus, expected) = bits.split_at(split);
            vectors.push(TestVector { step, stimulus: stimulus.to_vec(), expected: expected.to_vec() });
        }
        Ok(TestVectorSequence { cell_name, input_names, state_names, initial, vectors })
    }
}

fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// One vector per traversed edge: the destination's current inputs and
/// current memory values.
pub fn walk_to_vectors(walk: &PostmanWalk, g: &SicGraph, st: &StateTable) -> Result<TestVectorSequence, VectorError> {
    walk.validate(g.graph())?;
    let layout = g.layout();
    let vectors = walk
        .edges
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let dst = g.vertex(g.graph().edge(e as usize).1);
            let f = layout.fields(dst);
            let mut stimulus = f.level_values;
            stimulus.extend(f.edge_values.iter().map(|e| e.cur));
            let expected = f.state_values.iter().map(|s| s.1).collect();
            TestVector { step: i + 1, stimulus, expected }
        })
        .collect();
    Ok(TestVectorSequence {
        cell_name: st.cell_name().to_string(),
        input_names: st.input_names().into_iter().map(String::from).collect(),
        state_names: st.state_names().into_iter().map(String::from).collect(),
        initial: layout.bits(g.vertex(walk.start)),
        vectors,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub step: usize,
    pub expected: Vec<bool>,
    pub actual: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplayReport {
    pub steps: usize,
    pub mismatches: Vec<Mismatch>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn render(&self, state_names: &[String]) -> String {
        let mut out = format!("steps replayed: {}\nmismatches: {}\n", self.steps, self.mismatches.len());
        for m in &self.mismatches {
            let diff: Vec<String> = state_names
                .iter()
                .zip(m.expected.iter().zip(&m.actual))
                .filter(|(_, (e, a))| e != a)
                .map(|(n, (&e, &a))| format!("{n} expected {} model {}", e as u8, a as u8))
                .collect();
            let _ = writeln!(out, "step {}: {}", m.step, diff.join(", "));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("state table is incomplete; expand it before replay")]
    IncompleteTable,
    #[error("vector pins {found:?} do not match the cell pins {expected:?}")]
    PinMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("initial configuration has {found} bits, the cell needs {expected}")]
    InitialWidth { expected: usize, found: usize },
    #[error("step {step}: vector width does not match the cell")]
    VectorWidth { step: usize },
}

/// Simulate the table as the reference model and compare every expected
/// memory value. The model starts from the sequence's initial
/// configuration and always continues from its own next state.
pub fn replay(st: &StateTable, seq: &TestVectorSequence) -> Result<ReplayReport, ReplayError> {
    let table = st.transitions();
    if !table.is_complete() {
        return Err(ReplayError::IncompleteTable);
    }
    let layout = st.layout();
    let pins = |names: Vec<&str>| names.into_iter().map(String::from).collect::<Vec<_>>();
    let mut expected_pins = pins(st.input_names());
    expected_pins.extend(pins(st.state_names()));
    let mut found_pins = seq.input_names.clone();
    found_pins.extend(seq.state_names.iter().cloned());
    if expected_pins != found_pins {
        return Err(ReplayError::PinMismatch { expected: expected_pins, found: found_pins });
    }
    if seq.initial.len() != layout.label_width() {
        return Err(ReplayError::InitialWidth { expected: layout.label_width(), found: seq.initial.len() });
    }
    let init = layout.fields(crate::config::Configuration(
        seq.initial.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64),
    ));
    let mut prev_edges: Vec<bool> = init.edge_values.iter().map(|e| e.cur).collect();
    let mut prev_states: Vec<bool> = init.state_values.iter().map(|s| s.1).collect();

    let mut report = ReplayReport::default();
    for v in &seq.vectors {
        if v.stimulus.len() != layout.inputs() || v.expected.len() != layout.states {
            return Err(ReplayError::VectorWidth { step: v.step });
        }
        let (levels, edge_cur) = v.stimulus.split_at(layout.levels);
        let edges: Vec<EdgeValue> = prev_edges.iter().zip(edge_cur).map(|(&p, &c)| EdgeValue::new(p, c)).collect();
        let key = layout.encode_key(levels, &edges, &prev_states);
        let next = layout.decode_states(table.next(key).expect("complete table"));
        if next != v.expected {
            report.mismatches.push(Mismatch { step: v.step, expected: v.expected.clone(), actual: next.clone() });
        }
        prev_edges = edge_cur.to_vec();
        prev_states = next;
        report.steps += 1;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub walk_length: usize,
    pub repeated: u64,
    /// Traversals per edge id of the walked graph.
    pub histogram: Vec<u64>,
    /// Labels of configurations removed before the walk.
    pub untestable: Vec<String>,
    /// Edges of the full graph left out of the walk, as label pairs.
    pub dropped_edges: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl CoverageReport {
    pub fn min_traversals(&self) -> u64 {
        self.histogram.iter().copied().min().unwrap_or(0)
    }

    pub fn max_traversals(&self) -> u64 {
        self.histogram.iter().copied().max().unwrap_or(0)
    }

    pub fn is_complete(&self) -> bool {
        self.edge_count > 0 && self.min_traversals() >= 1
    }
}

/// `g` is the walked graph, `full` the graph before pruning that `scc`
/// indices refer to.
pub fn coverage(walk: &PostmanWalk, g: &SicGraph, full: &SicGraph, scc: &SccReport) -> CoverageReport {
    let histogram = walk.histogram(g.edge_count());
    let mut untestable: Vec<u32> = scc.pruned.iter().chain(&scc.excluded).copied().collect();
    untestable.sort_unstable();
    let mut notes = vec![format!("scc policy: {}", scc.policy)];
    if scc.component_count > 1 {
        notes.push(format!(
            "{} strongly connected components after pruning; kept the one with the most edges",
            scc.component_count
        ));
    }
    CoverageReport {
        vertex_count: g.vertex_count(),
        edge_count: g.edge_count(),
        walk_length: walk.len(),
        repeated: walk.repeated,
        histogram,
        untestable: untestable.into_iter().map(|v| full.label(v)).collect(),
        dropped_edges: scc.dropped_edges.iter().map(|&(u, v)| (full.label(u), full.label(v))).collect(),
        notes,
    }
}
