#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

/// Copy of the bundled fixture set in a fresh temporary directory.
pub fn fixture_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixtures(), dir.path());
    dir
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().expect("terminated by signal"),
            stdout: String::from_utf8(o.stdout).unwrap(),
            stderr: String::from_utf8(o.stderr).unwrap(),
        }
    }
}

pub fn airsim(args: &[&str]) -> Run {
    Command::new(env!("CARGO_BIN_EXE_airsim")).args(args).env_remove("AIRSIM_CONFIG").output().unwrap().into()
}

pub fn airsim_in(config: &Path, out: &Path, args: &[&str]) -> Run {
    let mut all = vec!["--config", config.to_str().unwrap(), "--output-dir", out.to_str().unwrap()];
    all.extend_from_slice(args);
    airsim(&all)
}

/// Writes a config next to the catalog files in `dir`.
pub fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("test.conf");
    fs::write(&p, body).unwrap();
    p
}

pub fn daily_csv(rows: impl IntoIterator<Item = (chrono::NaiveDate, f64)>) -> String {
    let mut s = String::from("date,value\n");
    for (d, v) in rows {
        s.push_str(&format!("{d},{v}\n"));
    }
    s
}

/// Parses an ESRI ASCII grid into header pairs and rows of values.
pub fn read_ascii_grid(text: &str) -> (Vec<(String, String)>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = (&mut lines)
        .take(6)
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect();
    let rows = lines.map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}
