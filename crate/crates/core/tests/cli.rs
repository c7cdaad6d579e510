use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sicvec::{expand, parse};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn sicvec(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sicvec")).args(args).output().unwrap()
}

macro_rules! run {
    ($($arg:expr),* $(,)?) => {
        sicvec(&[$(std::ffi::OsStr::new(&$arg)),*])
    };
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_dff_to_stdout() {
    let o = run!("generate", fixture("dff.st"));
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("# cell: DFF\n# initial: 0,0,0,0,0\nstep,D,CLK,expect_Q\n"));
    assert_eq!(csv.lines().count(), 3 + 40);
    assert!(stderr(&o).contains("40 vectors cover 32 of 32 transitions"));
}

#[test]
fn generate_writes_graph_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("dff.edges");
    let dot = dir.path().join("dff.dot");
    let out = dir.path().join("dff.csv");
    let o = run!("generate", fixture("dff.st"), "--out", out, "--dump-graph", edges, "--dot", dot);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let list = fs::read_to_string(&edges).unwrap();
    assert_eq!(list.lines().count(), 32);
    assert!(list.contains("0,0,1,0,0 -> 0,1,0,0,0\n"));
    assert!(list.contains("0,0,1,0,0 -> 1,1,1,0,0\n"));
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph \"DFF\" {"));
    // no temporary files left behind
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn conflicting_rows_exit_one_with_lines() {
    let o = run!("generate", fixture("broken.st"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("lines 6 and 8"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn split_graph_exits_two_under_strict() {
    let o = run!("generate", fixture("hold.st"), "--scc-policy", "strict");
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("component 0: [0,0,0] [1,0,0]"));
    assert!(err.contains("component 1: [0,1,1] [1,1,1]"));
}

#[test]
fn largest_component_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("hold.txt");
    let o = run!("generate", fixture("hold.st"), "--scc-policy", "largest-component", "--report", report);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("[untestable configurations]\n0,1,1\n1,1,1\n"));
    assert!(text.contains("edges walked: 2\n"));
    assert!(text.contains("cell has no edge inputs; 3 level-only keys were filled with hold rows"));
}

#[test]
fn check_reports_expansion() {
    let o = run!("check", fixture("dff.st"));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("8 rows given, 8 rows added by expansion, 16 total\n"));

    let dir = tempfile::tempdir().unwrap();
    let complete = dir.path().join("full.st");
    fs::write(&complete, expand(&parse(&fs::read_to_string(fixture("dff.st")).unwrap()).unwrap()).to_text()).unwrap();
    let o = run!("check", complete);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("16 rows given, 0 rows added by expansion, 16 total\n"));
}

#[test]
fn check_rejects_over_width() {
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.st");
    let mut text = String::from("cell WIDE\n");
    for i in 0..23 {
        text.push_str(&format!("input level L{i}\n"));
    }
    text.push_str("state Q\nstate P\ntable\n");
    text.push_str(&"0 ".repeat(25));
    text.push_str(": 0 0\n");
    fs::write(&wide, text).unwrap();
    let o = run!("check", wide);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceeds the supported ceiling of 24"));
}

#[test]
fn replay_roundtrip_and_defects() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("dff.csv");
    assert_eq!(run!("generate", fixture("dff.st"), "--out", csv).status.code(), Some(0));
    let o = run!("replay", fixture("dff.st"), csv);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "steps replayed: 40\nmismatches: 0\n");

    // flip the expected Q of step 5
    let text = fs::read_to_string(&csv).unwrap();
    let flipped: Vec<String> = text
        .lines()
        .map(|l| {
            if let Some(rest) = l.strip_prefix("5,") {
                let (stim, q) = rest.rsplit_once(',').unwrap();
                format!("5,{stim},{}", if q == "0" { "1" } else { "0" })
            } else {
                l.to_string()
            }
        })
        .collect();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, flipped.join("\n") + "\n").unwrap();
    let report = dir.path().join("mismatch.txt");
    let o = run!("replay", fixture("dff.st"), bad, "--report", report);
    assert_ne!(o.status.code(), Some(0));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.contains("mismatches: 1\nstep 5: Q expected"));

    // vectors of one cell against another cell with the same pins
    let o = run!("replay", fixture("negdff.st"), csv);
    assert_eq!(o.status.code(), Some(3));
    assert!(!stdout(&o).contains("mismatches: 0"));

    // different pins: a format error, not a crash
    let o = run!("replay", fixture("srlatch.st"), csv);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("do not match"));
}

#[test]
fn replay_rejects_malformed_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("junk.csv");
    fs::write(&csv, "# cell: DFF\n# initial: 0,0,0,0,0\nstep,D,CLK,expect_Q\n1,0,x,0\n").unwrap();
    let o = run!("replay", fixture("dff.st"), csv);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"));
}

#[test]
fn missing_input_file() {
    let o = run!("check", "/nonexistent/cell.st");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_through_symlink_keeps_link() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.txt");
    let link = dir.path().join("link.txt");
    fs::write(&target, "").unwrap();
    std::os::unix::fs::symlink(&target, &link).unwrap();
    let o = run!("generate", fixture("dff.st"), "--out", link);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::symlink_metadata(&link).unwrap().file_type().is_symlink());
    assert!(fs::read_to_string(&target).unwrap().starts_with("# cell: DFF\n"));
}
