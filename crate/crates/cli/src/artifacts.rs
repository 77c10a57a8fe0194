use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use pulsemu::Error;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

/// Error with the file it concerns, mapped to an exit code.
#[derive(Debug)]
pub struct CliError {
    pub file: Option<PathBuf>,
    pub inner: Error,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match &self.inner {
            Error::Parse { .. } | Error::Json(_) | Error::PlatformFormat(_) => EXIT_PARSE,
            Error::StepUnderflow { .. } | Error::StateInvariant { .. } => EXIT_SOLVER,
            Error::Io(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            // Parse errors already render as `line:col: message`.
            Some(p) => {
                write!(f, "{}:{}{}", p.display(), if matches!(self.inner, Error::Parse { .. }) { "" } else { " " }, self.inner)
            }
            None => write!(f, "{}", self.inner),
        }
    }
}

impl From<Error> for CliError {
    fn from(inner: Error) -> Self {
        Self { file: None, inner }
    }
}

pub trait WithFile<T> {
    fn at(self, file: &Path) -> Result<T, CliError>;
}

impl<T, E: Into<Error>> WithFile<T> for Result<T, E> {
    fn at(self, file: &Path) -> Result<T, CliError> {
        self.map_err(|e| CliError { file: Some(file.to_path_buf()), inner: e.into() })
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).at(path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

/// Writes artifacts into one directory and remembers their hashes.
pub struct OutDir {
    root: PathBuf,
    pub written: BTreeMap<String, ArtifactEntry>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).at(root)?;
        Ok(Self { root: root.to_path_buf(), written: BTreeMap::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, contents).at(&path)?;
        let key = name.rsplit_once('.').map_or(name, |(stem, _)| stem).to_string();
        self.written.insert(key, ArtifactEntry { path: name.to_string(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let s = serde_json::to_string_pretty(value).map_err(Error::from)? + "\n";
        self.write(name, &s)
    }
}
