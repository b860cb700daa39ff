use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pecam_core::RunConfig;

use crate::CliError;

/// Provenance line carried by every output file.
pub fn header(config: &RunConfig) -> String {
    format!("pecam {} config={} seed={}", env!("CARGO_PKG_VERSION"), config.hash(), config.seed)
}

/// Writes `body` under `dir/name` after a `# header` line, replacing any
/// previous file atomically.
pub fn write_output(config: &RunConfig, name: &str, body: &str) -> Result<PathBuf, CliError> {
    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let text = format!("# {}\n{body}", header(config));
    fs::write(&tmp, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, &path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn journal_path(config: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", config.out_dir.display())))?;
    Ok(config.out_dir.join(name))
}

/// CSV document from a header row and rows of cells.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[String]) -> Self {
        Self {
            text: columns.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&c);
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(v: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{v}");
    s
}

pub fn opt_num(v: Option<f64>) -> String {
    num(v.unwrap_or(f64::NAN))
}

pub fn show(path: &Path) {
    eprintln!("wrote {}", path.display());
}
