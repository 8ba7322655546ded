//! Artifact emission: documents are built in memory, staged to temp files
//! in the output directory, and renamed into place only after every file
//! of the run has been staged. A failure anywhere leaves no partial output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// One finished artifact, ready to stage.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub content: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, content: String) -> Self {
        Artifact {
            name: name.into(),
            content,
        }
    }
}

/// Writes all artifacts into `dir` atomically (temp file + rename, same
/// directory so the rename cannot cross filesystems). Returns the final
/// paths in emission order.
pub fn commit_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for artifact in artifacts {
        if artifact.name.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "artifact name {:?} must not contain path separators",
                artifact.name
            )));
        }
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(artifact.content.as_bytes())?;
        tmp.flush()?;
        staged.push((tmp, dir.join(&artifact.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path)
            .map_err(|e| Error::Io(e.error))?;
        written.push(path);
    }
    Ok(written)
}

/// Shortest round-tripping decimal form, scientific notation for extreme
/// magnitudes; '.' is always the decimal separator.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

/// CSV with a header row, comma separators, LF endings, trailing newline.
pub fn csv_document<I>(header: &str, rows: I) -> String
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut doc = String::with_capacity(256);
    doc.push_str(header);
    doc.push('\n');
    for row in rows {
        doc.push_str(row.as_ref());
        doc.push('\n');
    }
    doc
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_document<T: Serialize>(value: &T) -> Result<String> {
    let mut doc = serde_json::to_string_pretty(value)?;
    doc.push('\n');
    Ok(doc)
}
