//! CSV and JSON writers shared by the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::DiagnosticsRecord;

pub const VERSION: &str = concat!("quadnls ", env!("CARGO_PKG_VERSION"));

/// Version of the trajectory CSV column layout.
pub const CSV_SCHEMA: u32 = 1;

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t",
    "Q",
    "E",
    "K",
    "P",
    "M",
    "Mprime",
    "loc_mass",
    "loc_L3",
    "tail_mass",
    "Mprime_sd",
    "Mprime_fd",
    "coercivity_ratio",
];

pub struct Output {
    dir: PathBuf,
    hash: String,
    config: Value,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Output {
    pub fn new(dir: &Path, hash: &str, config: Value) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: hash.to_string(),
            config,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn csv_preamble(&self) -> String {
        format!("# {VERSION} schema={CSV_SCHEMA} config_hash={}\n", self.hash)
    }

    /// Writes `body` (header plus rows) after the hash comment line.
    pub fn write_csv(&self, name: &str, body: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, format!("{}{body}", self.csv_preamble()))?;
        Ok(path)
    }

    /// Wraps `payload` with version, config hash and config echo.
    pub fn write_json(&self, name: &str, payload: Value) -> std::io::Result<PathBuf> {
        let mut doc = json!({
            "version": VERSION,
            "config_hash": self.hash,
            "config": self.config,
        });
        if let (Value::Object(d), Value::Object(p)) = (&mut doc, payload) {
            d.extend(p);
        }
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&doc).expect("json value serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    /// Wall-clock time lives in its own file so the summaries stay
    /// reproducible byte for byte.
    pub fn write_timing(&self, command: &str, seconds: f64) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(&json!({
            "command": command,
            "config_hash": self.hash,
            "wall_time_s": seconds,
        }))
        .expect("json value serializes");
        fs::write(self.dir.join("timing.json"), text + "\n")
    }
}

pub fn trajectory_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            r.q,
            r.e_beta,
            r.k,
            r.p,
            r.m,
            r.m_prime,
            r.loc_mass,
            r.loc_l3,
            r.tail_mass,
            r.m_prime_sd,
            opt(r.m_prime_fd),
            opt(r.coercivity_ratio),
        );
    }
    out
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}
