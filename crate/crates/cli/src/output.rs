//! Buffered artifacts, written only once the whole run has succeeded.

use std::io::Write;
use std::path::PathBuf;

use tempfile::NamedTempFile;

pub struct Artifacts {
    dir: Option<PathBuf>,
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Artifacts { dir, files: Vec::new() }
    }

    pub fn text(&mut self, name: &str, body: String) {
        self.files.push((name.to_string(), body));
    }

    pub fn json(&mut self, name: &str, doc: &serde_json::Value) {
        let mut body = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
        body.push('\n');
        self.text(name, body);
    }

    /// Writes every file through a temporary in the target directory and a
    /// rename. Without a directory the first artifact goes to stdout.
    pub fn commit(self) -> Result<(), String> {
        let Some(dir) = self.dir else {
            if let Some((_, body)) = self.files.first() {
                print!("{body}");
            }
            return Ok(());
        };
        std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        for (name, body) in &self.files {
            let path = dir.join(name);
            let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            tmp.write_all(body.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))?;
            tmp.persist(&path).map_err(|e| format!("{}: {}", path.display(), e.error))?;
        }
        Ok(())
    }
}
