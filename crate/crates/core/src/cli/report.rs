//! Plain-text run reports and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `contents` to `dir/name` via a temporary file and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, &target)?;
    Ok(target)
}

/// Key/value lines in insertion order.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub system: String,
    pub input_digest: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub entries: Vec<(String, String)>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, system: &str, input_digest: String, seed: u64) -> Self {
        Report {
            command: command.into(),
            system: system.into(),
            input_digest,
            seed,
            wall_time_s: 0.0,
            entries: Vec::new(),
            passed: true,
        }
    }

    pub fn add(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.add(key, format!("{value:.6e}"));
    }

    /// Records a named check and folds it into the overall status.
    pub fn check(&mut self, key: impl Into<String>, value: f64, tol: f64) -> bool {
        let ok = value <= tol;
        let key = key.into();
        self.add(
            key,
            format!("{value:.6e} (tol {tol:.1e}) {}", if ok { "pass" } else { "FAIL" }),
        );
        self.passed &= ok;
        ok
    }

    pub fn fail(&mut self, key: impl Into<String>, why: impl ToString) {
        self.add(key, format!("FAIL: {}", why.to_string()));
        self.passed = false;
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {}", self.command);
        let _ = writeln!(s, "system = {}", self.system);
        let _ = writeln!(s, "input_sha256 = {}", self.input_digest);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "wall_time_s = {:.3}", self.wall_time_s);
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "status = {}", if self.passed { "pass" } else { "fail" });
        let _ = writeln!(s, "exit_code = {}", self.exit_code());
        s
    }
}
