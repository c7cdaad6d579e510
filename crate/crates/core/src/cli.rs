//! Command-line driver: `generate`, `check` and `replay`.
//!
//! Diagnostics go to standard error. Data goes to the requested files, or
//! to standard output when no file is given.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::dcpw::dcpw;
use crate::graph::{ConnectivityError, SccPolicy};
use crate::sicstg::{build, SicGraph};
use crate::state_table::{expand, parse_with_warnings, validate_complete, StateTable};
use crate::vectors::{coverage, replay, walk_to_vectors, CoverageReport, TestVectorSequence};

pub const EXIT_OK: u8 = 0;
/// Unreadable input, parse or validation error, bad vector file.
pub const EXIT_INPUT: u8 = 1;
/// Graph is not strongly connected under the strict policy, or empty.
pub const EXIT_CONNECTIVITY: u8 = 2;
/// Replay found mismatches. From `generate` this is always a bug.
pub const EXIT_MISMATCH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "sicvec", version, about = "Single-input-change test vectors for sequential cells")]
pub struct Cli {
    /// More diagnostics on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the transition graph and write a minimal covering vector sequence.
    Generate {
        input: PathBuf,
        /// Vector CSV path (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Coverage report path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PolicyArg::Strict)]
        scc_policy: PolicyArg,
        /// Write the edge list (`src -> dst` per line).
        #[arg(long)]
        dump_graph: Option<PathBuf>,
        /// Write a Graphviz DOT export.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Validate and expand a state table and print graph statistics.
    Check { input: PathBuf },
    /// Replay a vector file against a state table.
    Replay {
        input: PathBuf,
        vectors: PathBuf,
        /// Mismatch report path (standard output if omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Strict,
    LargestComponent,
}

impl From<PolicyArg> for SccPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Strict => SccPolicy::Strict,
            PolicyArg::LargestComponent => SccPolicy::LargestComponent,
        }
    }
}

/// Options of one `generate` run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub policy: SccPolicy,
    pub dump_graph: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            out: None,
            report: None,
            policy: SccPolicy::Strict,
            dump_graph: None,
            dot: None,
            verbosity: 0,
        }
    }
}

pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Generate { input, out, report, scc_policy, dump_graph, dot } => cmd_generate(&RunConfig {
            input,
            out,
            report,
            policy: scc_policy.into(),
            dump_graph,
            dot,
            verbosity: cli.verbose,
        }),
        Command::Check { input } => {
            let mut cfg = RunConfig::new(input);
            cfg.verbosity = cli.verbose;
            cmd_check(&cfg)
        }
        Command::Replay { input, vectors, report } => {
            let mut cfg = RunConfig::new(input);
            cfg.report = report;
            cfg.verbosity = cli.verbose;
            cmd_replay(&cfg, &vectors)
        }
    }
}

/// Write through a temporary file in the destination directory and rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    // devices, pipes and symlinks are written in place; renaming over them would replace the node
    match fs::symlink_metadata(path) {
        Ok(meta) if !meta.file_type().is_file() => return fs::write(path, contents),
        _ => {}
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(path: Option<&Path>, contents: &str) -> io::Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => io::stdout().lock().write_all(contents.as_bytes()),
    }
}

struct Loaded {
    given: usize,
    table: StateTable,
}

fn load(path: &Path, verbosity: u8) -> Result<Loaded, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_INPUT
    })?;
    let (st, warnings) = parse_with_warnings(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_INPUT
    })?;
    for w in &warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    let given = st.rows().len();
    let table = expand(&st);
    if verbosity > 0 {
        eprintln!(
            "{}: {} rows given, {} added by hold expansion",
            st.cell_name(),
            given,
            table.rows().len() - given
        );
    }
    Ok(Loaded { given, table })
}

fn connectivity_message(full: &SicGraph, err: &ConnectivityError) -> String {
    match err {
        ConnectivityError::Empty => err.to_string(),
        ConnectivityError::NotStronglyConnected { components } => {
            let mut msg = format!("{err}");
            for (i, comp) in components.iter().enumerate() {
                let labels: Vec<String> = comp.iter().map(|&v| format!("[{}]", full.label(v))).collect();
                let _ = write!(msg, "\n  component {i}: {}", labels.join(" "));
            }
            msg.push_str("\n(rerun with --scc-policy largest-component to cover the largest component only)");
            msg
        }
    }
}

pub fn cmd_generate(cfg: &RunConfig) -> u8 {
    let Loaded { given, table } = match load(&cfg.input, cfg.verbosity) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let full = build(&table).expect("expanded table is complete");
    if cfg.verbosity > 0 {
        eprintln!("graph: {} vertices, {} edges", full.vertex_count(), full.edge_count());
    }
    let dumps = [
        (cfg.dump_graph.as_deref(), full.edge_list()),
        (cfg.dot.as_deref(), cfg.dot.as_ref().map(|_| full.to_dot(table.cell_name())).unwrap_or_default()),
    ];
    for (path, contents) in dumps {
        if let Some(p) = path {
            if let Err(e) = write_atomic(p, &contents) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return EXIT_INPUT;
            }
        }
    }

    let (graph, scc) = match full.prune_and_check(cfg.policy) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", connectivity_message(&full, &e));
            return EXIT_CONNECTIVITY;
        }
    };
    let walk = match dcpw(graph.graph()) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("internal error: postman walk failed: {e}");
            return EXIT_MISMATCH;
        }
    };
    let seq = match walk_to_vectors(&walk, &graph, &table) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("internal error: {e}");
            return EXIT_MISMATCH;
        }
    };
    let check = match replay(&table, &seq) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("internal error: self-check replay failed: {e}");
            return EXIT_MISMATCH;
        }
    };
    let cov = coverage(&walk, &graph, &full, &scc);
    let sic = seq.sic_violations();
    if !check.is_clean() || !cov.is_complete() || !sic.is_empty() {
        eprintln!(
            "internal error: self-check failed ({} replay mismatches, min edge traversals {}, {} non-SIC steps)",
            check.mismatches.len(),
            cov.min_traversals(),
            sic.len()
        );
        return EXIT_MISMATCH;
    }

    let summary = ReportInput { table: &table, given, full: &full, coverage: &cov, seq: &seq };
    if let Err(e) = emit(cfg.out.as_deref(), &seq.to_csv()) {
        eprintln!("error: cannot write vectors: {e}");
        return EXIT_INPUT;
    }
    if let Some(p) = &cfg.report {
        if let Err(e) = write_atomic(p, &render_report(&summary)) {
            eprintln!("error: cannot write {}: {e}", p.display());
            return EXIT_INPUT;
        }
    }
    eprintln!(
        "{}: {} vectors cover {} of {} transitions ({} repeated traversals)",
        table.cell_name(),
        seq.len(),
        cov.edge_count,
        full.edge_count(),
        cov.repeated
    );
    EXIT_OK
}

struct ReportInput<'a> {
    table: &'a StateTable,
    given: usize,
    full: &'a SicGraph,
    coverage: &'a CoverageReport,
    seq: &'a TestVectorSequence,
}

fn render_report(r: &ReportInput) -> String {
    let st = r.table;
    let cov = r.coverage;
    let layout = st.layout();
    let added = st.rows().len() - r.given;
    let mut out = String::new();
    let _ = writeln!(out, "[cell]");
    let _ = writeln!(out, "name: {}", st.cell_name());
    let _ = writeln!(out, "level inputs: {}", st.level_names().join(" "));
    let _ = writeln!(out, "edge inputs: {}", st.edge_names().join(" "));
    let _ = writeln!(out, "memory elements: {}", st.state_names().join(" "));
    let _ = writeln!(out, "rows given: {}", r.given);
    let _ = writeln!(out, "rows added by hold expansion: {added}");
    let _ = writeln!(out, "rows total: {}", st.rows().len());
    let _ = writeln!(out);
    let _ = writeln!(out, "[graph]");
    let _ = writeln!(out, "vertices: {}", r.full.vertex_count());
    let _ = writeln!(out, "edges: {}", r.full.edge_count());
    let _ = writeln!(out, "vertices walked: {}", cov.vertex_count);
    let _ = writeln!(out, "edges walked: {}", cov.edge_count);
    let _ = writeln!(out);
    let _ = writeln!(out, "[walk]");
    let _ = writeln!(out, "initial configuration: {}", r.seq.initial_label());
    let _ = writeln!(out, "length: {}", cov.walk_length);
    let _ = writeln!(out, "repeated traversals: {}", cov.repeated);
    let _ = writeln!(out);
    let _ = writeln!(out, "[histogram]");
    let _ = writeln!(out, "min traversals: {}", cov.min_traversals());
    let _ = writeln!(out, "max traversals: {}", cov.max_traversals());
    let mut counts: Vec<(u64, usize)> = Vec::new();
    for &h in &cov.histogram {
        match counts.iter_mut().find(|(k, _)| *k == h) {
            Some((_, n)) => *n += 1,
            None => counts.push((h, 1)),
        }
    }
    counts.sort_unstable();
    for (k, n) in counts {
        let _ = writeln!(out, "edges traversed {k}x: {n}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[untestable configurations]");
    if cov.untestable.is_empty() {
        let _ = writeln!(out, "none");
    }
    for label in &cov.untestable {
        let _ = writeln!(out, "{label}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[dropped transitions]");
    if cov.dropped_edges.is_empty() {
        let _ = writeln!(out, "none");
    }
    for (u, v) in &cov.dropped_edges {
        let _ = writeln!(out, "{u} -> {v}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[notes]");
    for note in &cov.notes {
        let _ = writeln!(out, "{note}");
    }
    let _ = writeln!(
        out,
        "hold expansion fills every unspecified key, including keys of cells without edge inputs"
    );
    if layout.edges == 0 && added > 0 {
        let _ = writeln!(out, "cell has no edge inputs; {added} level-only keys were filled with hold rows");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "[self-check]");
    let _ = writeln!(out, "replay mismatches: 0");
    out
}

pub fn cmd_check(cfg: &RunConfig) -> u8 {
    let Loaded { given, table } = match load(&cfg.input, cfg.verbosity) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let report = validate_complete(&table);
    let full = build(&table).expect("expanded table is complete");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} rows given, {} rows added by expansion, {} total",
        given,
        report.row_count - given,
        report.row_count
    );
    let _ = writeln!(out, "vertices: {}", full.vertex_count());
    let _ = writeln!(out, "edges: {}", full.edge_count());
    match full.prune_and_check(SccPolicy::LargestComponent) {
        Ok((g, scc)) => {
            let _ = writeln!(out, "vertices pruned for zero in/out degree: {}", scc.pruned.len());
            let _ = writeln!(out, "strongly connected components after pruning: {}", scc.component_count);
            let _ = writeln!(out, "largest component: {} vertices, {} edges", g.vertex_count(), g.edge_count());
        }
        Err(e) => {
            let _ = writeln!(out, "connectivity: {e}");
        }
    }
    if let Err(e) = emit(None, &out) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    EXIT_OK
}

pub fn cmd_replay(cfg: &RunConfig, vectors: &Path) -> u8 {
    let Loaded { table, .. } = match load(&cfg.input, cfg.verbosity) {
        Ok(l) => l,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(vectors) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", vectors.display());
            return EXIT_INPUT;
        }
    };
    let seq = match TestVectorSequence::from_csv(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", vectors.display());
            return EXIT_INPUT;
        }
    };
    let result = match replay(&table, &seq) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = emit(cfg.report.as_deref(), &result.render(&seq.state_names)) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_INPUT;
    }
    if result.is_clean() {
        EXIT_OK
    } else {
        eprintln!("{} mismatches in {} steps", result.mismatches.len(), result.steps);
        EXIT_MISMATCH
    }
}
