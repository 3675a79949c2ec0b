use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Output files buffered in memory and written together, so a failing run
/// leaves nothing behind.
pub(crate) struct OutputSet {
    dir: PathBuf,
    header: String,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new(dir: &Path, config: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            header: format!("# config: {config}\n"),
            files: Vec::new(),
        }
    }

    /// Adds a file whose body is produced by `fill`; the config line comes first.
    pub fn add<F>(&mut self, name: &str, fill: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>,
    {
        let mut buf = self.header.clone().into_bytes();
        fill(&mut buf).map_err(|e| Error::io(self.dir.join(name), std::io::Error::other(e)))?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    /// Adds a file verbatim, without the config comment line.
    pub fn add_raw(&mut self, name: &str, body: Vec<u8>) {
        self.files.push((name.to_string(), body));
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let path = self.dir.join(name);
            let res = fs::File::create(&path).and_then(|mut f| f.write_all(body));
            if let Err(e) = res {
                let _ = fs::remove_file(&path);
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(Error::io(path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}
