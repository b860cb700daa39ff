//! Line-delimited JSON history of evaluations.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::OptError;
use crate::opt::DesignEvalRecord;

/// Append-only journal. Lines starting with `#` are comments.
#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

/// Parses journal text; a truncated final line is dropped.
pub fn parse_journal(text: &str) -> Result<Vec<DesignEvalRecord>, OptError> {
    let lines: Vec<&str> = text.lines().collect();
    let complete = text.ends_with('\n');
    let mut records = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match serde_json::from_str::<DesignEvalRecord>(line) {
            Ok(r) => records.push(r),
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => return Err(OptError::Journal(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(records)
}

pub fn load_journal(path: &Path) -> Result<Vec<DesignEvalRecord>, OptError> {
    parse_journal(&fs::read_to_string(path)?)
}

pub fn record_line(record: &DesignEvalRecord) -> Result<String, OptError> {
    serde_json::to_string(record).map_err(|e| OptError::Journal(e.to_string()))
}

impl Journal {
    /// Opens `path` for appending and returns the records already in it.
    ///
    /// A new file starts with `header` as comment lines. An existing file
    /// must carry the same header; a truncated final record is discarded.
    pub fn open(path: &Path, header: &str) -> Result<(Self, Vec<DesignEvalRecord>), OptError> {
        let header = comment_block(header);
        let mut records = Vec::new();
        if path.exists() {
            let text = fs::read_to_string(path)?;
            let existing: String = BufReader::new(text.as_bytes())
                .lines()
                .map_while(Result::ok)
                .take_while(|l| l.starts_with('#'))
                .map(|l| l + "\n")
                .collect();
            if existing != header {
                return Err(OptError::Journal(format!(
                    "{} was written by a different run configuration",
                    path.display()
                )));
            }
            records = parse_journal(&text)?;
            let mut clean = header.clone();
            for r in &records {
                clean.push_str(&record_line(r)?);
                clean.push('\n');
            }
            if clean != text {
                fs::write(path, clean)?;
            }
        } else {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, &header)?;
        }
        let file = OpenOptions::new().append(true).open(path)?;
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            records,
        ))
    }

    pub fn append(&mut self, record: &DesignEvalRecord) -> Result<(), OptError> {
        let mut line = record_line(record)?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

fn comment_block(header: &str) -> String {
    header.lines().map(|l| format!("# {l}\n")).collect()
}
