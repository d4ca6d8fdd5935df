//! Artifact writing. Every file is written to a temporary sibling and
//! renamed into place, so an interrupted or failing run never leaves a
//! partial artifact behind. Numbers are formatted with Rust's default
//! float formatting: shortest round-trip form, always '.'-separated,
//! locale-independent, deterministic.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Create the output directory if needed and return its path.
pub fn prepare_dir(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Usage(format!("cannot create output dir '{}': {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Atomically write `content` to `dir/name` via temp-then-rename.
pub fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let tmp = dir.join(format!(".tmp-{name}"));
    let target = dir.join(name);
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Domain(format!("cannot write '{}': {e}", tmp.display())))?;
    std::fs::rename(&tmp, &target)
        .map_err(|e| CliError::Domain(format!("cannot rename to '{}': {e}", target.display())))?;
    Ok(())
}

/// CSV builder with a fixed header.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[CsvField<'_>]) {
        assert_eq!(fields.len(), self.columns, "CSV row width mismatch");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match f {
                CsvField::Num(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvField::Int(v) => {
                    let _ = write!(self.buf, "{v}");
                }
                CsvField::Str(s) => self.buf.push_str(s),
            }
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub enum CsvField<'a> {
    Num(f64),
    Int(i64),
    Str(&'a str),
}

pub use CsvField::{Int, Num, Str};
