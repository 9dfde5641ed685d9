//! Report printing, data files and the `run.log` sidecar.
//!
//! Data files and reports depend only on the inputs; wall-clock times go
//! to `run.log` alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub struct OutFile {
    pub name: String,
    pub contents: String,
}

pub struct Outcome {
    pub results: Map<String, Value>,
    pub files: Vec<OutFile>,
    /// gnuplot script body, written as `<command>.gp` under `--plot`.
    pub plot: Option<String>,
    pub warnings: Vec<String>,
    /// Lines printed instead of the generic key/value rendering.
    pub text: Option<Vec<String>>,
    pub passed: bool,
}

impl Outcome {
    pub fn new(results: Map<String, Value>) -> Self {
        Outcome {
            results,
            files: Vec::new(),
            plot: None,
            warnings: Vec::new(),
            text: None,
            passed: true,
        }
    }

    pub fn file(mut self, name: impl Into<String>, contents: String) -> Self {
        self.files.push(OutFile {
            name: name.into(),
            contents,
        });
        self
    }
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit(command: &str, outcome: &Outcome, out: &Path, json: bool, plot: bool, log: &mut RunLog) -> CliResult<()> {
    let mut written = Vec::new();
    let mut warnings = outcome.warnings.clone();
    let want_dir = !outcome.files.is_empty() || (plot && outcome.plot.is_some());
    if want_dir {
        std::fs::create_dir_all(out).map_err(|source| CliError::Output {
            path: out.to_path_buf(),
            source,
        })?;
    }
    for f in &outcome.files {
        write(&out.join(&f.name), &f.contents)?;
        written.push(f.name.clone());
    }
    if plot {
        match &outcome.plot {
            Some(script) => {
                let name = format!("{command}.gp");
                write(&out.join(&name), script)?;
                written.push(name);
            }
            None => warnings.push(format!("{command} has no plot data; --plot ignored")),
        }
    }
    let report = json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "status": if outcome.passed { "ok" } else { "failed" },
        "results": Value::Object(outcome.results.clone()),
        "files": written,
        "warnings": warnings,
    });
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    } else {
        print!("{}", render_text(command, outcome, &written, &warnings));
    }
    log.files = written;
    log.warnings = warnings;
    Ok(())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "nan".to_string(),
        other => other.to_string(),
    }
}

fn render_value(out: &mut String, key: &str, v: &Value) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                render_value(out, &format!("{key}.{k}"), x);
            }
        }
        Value::Array(rows) if rows.iter().any(Value::is_array) => {
            let _ = writeln!(out, "{key}:");
            for row in rows {
                let cells: Vec<String> = match row {
                    Value::Array(r) => r.iter().map(scalar).collect(),
                    other => vec![scalar(other)],
                };
                let _ = writeln!(out, "  {}", cells.join(" "));
            }
        }
        Value::Array(xs) => {
            let _ = writeln!(out, "{key}: [{}]", xs.iter().map(scalar).collect::<Vec<_>>().join(", "));
        }
        other => {
            let _ = writeln!(out, "{key}: {}", scalar(other));
        }
    }
}

fn render_text(command: &str, outcome: &Outcome, files: &[String], warnings: &[String]) -> String {
    let mut out = format!("zcoupling {command}\n");
    match &outcome.text {
        Some(lines) => {
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
        }
        None => {
            for (k, v) in &outcome.results {
                render_value(&mut out, k, v);
            }
        }
    }
    for f in files {
        let _ = writeln!(out, "wrote {f}");
    }
    for w in warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    let _ = writeln!(out, "status: {}", if outcome.passed { "ok" } else { "failed" });
    out
}

/// Contents of `run.log`, written into the output directory at exit.
pub struct RunLog {
    command: String,
    started: Duration,
    args: Vec<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl RunLog {
    pub fn new(command: &str, started: Duration) -> Self {
        RunLog {
            command: command.to_string(),
            started,
            args: std::env::args().collect(),
            out: None,
            jobs: None,
            files: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    /// Writes the log if an output directory was resolved and exists.
    pub fn finish(&self, exit_code: i32, elapsed: Duration) {
        let Some(dir) = &self.out else { return };
        if !dir.is_dir() {
            return;
        }
        let mut s = String::new();
        let _ = writeln!(s, "zcoupling {} {}", env!("CARGO_PKG_VERSION"), self.command);
        let _ = writeln!(s, "started_unix_s {:.3}", self.started.as_secs_f64());
        let _ = writeln!(s, "elapsed_s {:.3}", elapsed.as_secs_f64());
        let _ = writeln!(s, "args {}", self.args.join(" "));
        match self.jobs {
            Some(j) => {
                let _ = writeln!(s, "jobs {j}");
            }
            None => {
                let _ = writeln!(s, "jobs default");
            }
        }
        for f in &self.files {
            let _ = writeln!(s, "file {f}");
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning {w}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error {e}");
        }
        let _ = writeln!(s, "exit {exit_code}");
        if let Err(e) = std::fs::write(dir.join("run.log"), s) {
            log::warn!("cannot write run.log: {e}");
        }
    }
}
