//! Output files are staged in memory and only written once a command has
//! fully succeeded, each through a temp file renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    /// Writes everything to temp files first, then renames. A failure while
    /// staging leaves no output behind.
    pub fn commit(self) -> std::io::Result<()> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir)?;
            let mut tmp = NamedTempFile::new_in(&dir)?;
            tmp.write_all(bytes)?;
            tmp.flush()?;
            staged.push((tmp, path.clone()));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| e.error)?;
        }
        Ok(())
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}
