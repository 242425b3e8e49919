//! Artifact writers and the per-run manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ergodic_core::dynamics::{Point, TorusPoint};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i128),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(n: $t) -> Self {
                Cell::Int(n as i128)
            }
        }
    )*};
}
int_cell!(i64, u64, usize, u32);

/// CSV text with a header row and LF line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A fixed-point torus coordinate: exact raw value plus a decimal approximation.
pub fn torus_json(p: TorusPoint) -> Value {
    json!({ "raw": p.raw().to_string(), "approx": p.to_f64() })
}

pub fn point_json(p: &Point) -> Value {
    match p {
        Point::Circle(x) => torus_json(*x),
        Point::Pair(x, y) => json!({ "x": torus_json(*x), "y": torus_json(*y) }),
        Point::Symbol(s) => json!({ "seed": s.seed.to_string(), "alphabet": s.alphabet, "offset": s.offset }),
    }
}

pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Collects the artifacts, timings and warnings of one run and writes its manifest.
pub struct Run {
    dir: PathBuf,
    command: String,
    config_hash: String,
    threads: usize,
    started: Instant,
    timings: Vec<(String, f64)>,
    warnings: Vec<String>,
    outputs: Vec<(String, String)>,
}

pub const MANIFEST: &str = "manifest.json";

impl Run {
    pub fn new(dir: &Path, command: &str, config_text: &str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Run {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config_hash: sha256_hex(config_text.as_bytes()),
            threads: rayon::current_num_threads(),
            started: Instant::now(),
            timings: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn time<T>(&mut self, op: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.record(op, t.elapsed().as_secs_f64());
        out
    }

    pub fn record(&mut self, op: &str, seconds: f64) {
        self.timings.push((op.to_string(), seconds));
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.outputs.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<Cell>>,
    ) -> io::Result<()> {
        self.write(name, &csv(header, rows))
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> io::Result<()> {
        self.write(name, &to_json_text(value))
    }

    /// Writes `manifest.json`. A failed run is marked with its error and
    /// lists only the outputs completed before the failure.
    pub fn finish(self, error: Option<&str>) -> io::Result<()> {
        let timings: Vec<Value> = self
            .timings
            .iter()
            .map(|(op, s)| json!({ "op": op, "seconds": s }))
            .collect();
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|(file, sha)| json!({ "file": file, "sha256": sha }))
            .collect();
        let manifest = json!({
            "command": self.command,
            "config_sha256": self.config_hash,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "threads": self.threads,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
            "timings": timings,
            "warnings": self.warnings,
            "outputs": outputs,
            "status": if error.is_some() { "failed" } else { "ok" },
            "error": error,
        });
        fs::write(self.dir.join(MANIFEST), to_json_text(&manifest))
    }
}

/// Manifest fields that legitimately vary between otherwise identical runs.
pub const VOLATILE_MANIFEST_KEYS: [&str; 3] = ["threads", "timings", "wall_clock_seconds"];
