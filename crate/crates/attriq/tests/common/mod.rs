//! Helpers shared by the integration suites.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// The installed binary, for process-level tests.
pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_attriq"))
}

/// Run the binary in `dir` and capture everything.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Run the binary in `dir`, requiring success.
pub fn run_ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "command {args:?} failed with {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    out
}

/// Run a subcommand in-process, as library callers would.
pub fn run_cli(args: &[&str]) -> attriq::Result<()> {
    attriq::cli::run_from(std::iter::once("attriq").chain(args.iter().copied()))
}

pub fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

/// Extract the plain query texts from a labeled-query file into a
/// one-query-per-line file.
pub fn write_query_lines(labeled: &Path, out: &Path) {
    let queries = attriq::load_labeled_queries(labeled).expect("labeled queries load");
    let mut text = String::new();
    for lq in &queries {
        text.push_str(&lq.query);
        text.push('\n');
    }
    std::fs::write(out, text).expect("query lines write");
}
