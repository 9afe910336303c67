//! Atomic output: files are staged in a hidden directory inside the output
//! directory and renamed into place only once every file has been written.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

impl OutputFile {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            contents: contents.into(),
        }
    }
}

pub fn write_atomically(out_dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir)?;
    let staging = tempfile::Builder::new()
        .prefix(".su11sim-staging-")
        .tempdir_in(out_dir)?;
    for f in files {
        if f.name.contains(['/', '\\']) || f.name.starts_with('.') {
            return Err(CliError::Usage(format!("invalid output name `{}`", f.name)));
        }
        let mut handle = fs::File::create(staging.path().join(&f.name))?;
        handle.write_all(f.contents.as_bytes())?;
        handle.sync_all()?;
    }
    let mut written = Vec::with_capacity(files.len());
    for f in files {
        let target = out_dir.join(&f.name);
        fs::rename(staging.path().join(&f.name), &target)?;
        written.push(target);
    }
    Ok(written)
}
