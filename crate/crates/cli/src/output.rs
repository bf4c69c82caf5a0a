//! Staged output files. Everything is rendered in memory first so that a
//! refused overwrite leaves the output directory untouched.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub struct Staged {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every staged file. Fails before writing anything if a target
    /// exists and `force` is false.
    pub fn commit(self, force: bool) -> Result<Vec<PathBuf>, CliError> {
        let targets: Vec<PathBuf> = self.files.iter().map(|(n, _)| self.dir.join(n)).collect();
        if !force {
            if let Some(existing) = targets.iter().find(|p| p.exists()) {
                return Err(CliError::OutputExists(existing.clone()));
            }
        }
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        for (path, (_, bytes)) in targets.iter().zip(self.files) {
            fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
        }
        Ok(targets)
    }
}

/// Lower-case file-name fragment for a city label.
pub fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect()
}

/// Long-format plot data: `series,date_or_year,value`.
pub fn long_csv<'a>(rows: impl IntoIterator<Item = (&'a str, String, f64)>) -> Vec<u8> {
    let mut out = String::from("series,date_or_year,value\n");
    for (series, key, value) in rows {
        out.push_str(&format!("{series},{key},{value:.3}\n"));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_overwrite_without_force() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.csv"), "old").unwrap();
        let mut s = Staged::new(dir.path());
        s.add("a.csv", b"new".to_vec());
        s.add("b.csv", b"new".to_vec());
        assert!(matches!(s.commit(false), Err(CliError::OutputExists(_))));
        assert!(!dir.path().join("a.csv").exists());
        assert_eq!(fs::read_to_string(dir.path().join("b.csv")).unwrap(), "old");

        let mut s = Staged::new(dir.path());
        s.add("b.csv", b"new".to_vec());
        s.commit(true).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("b.csv")).unwrap(), "new");
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("New Delhi"), "new_delhi");
        assert_eq!(slug("Bengaluru"), "bengaluru");
    }
}
