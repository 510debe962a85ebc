use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// Sidecar metadata file written next to `output`.
pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Fails if any of `paths` exists and `force` is not set.
pub fn ensure_writable<'a, I>(paths: I, force: bool) -> Result<(), CliError>
where
    I: IntoIterator<Item = &'a Path>,
{
    for path in paths {
        if !force && path.exists() {
            return Err(CliError::OutputExists(path.to_path_buf()));
        }
    }
    Ok(())
}

/// Main output plus its metadata sidecar; stdout and stderr when no path is
/// given.
pub struct Destination {
    path: Option<PathBuf>,
}

impl Destination {
    pub fn new(path: Option<PathBuf>, force: bool) -> Result<Self, CliError> {
        if let Some(p) = &path {
            ensure_writable([p.as_path(), meta_path(p).as_path()], force)?;
        }
        Ok(Self { path })
    }

    pub fn label(&self) -> String {
        self.path
            .as_ref()
            .map_or("<stdout>".into(), |p| p.display().to_string())
    }

    /// Runs `body` against a buffered writer for the main output.
    pub fn write_with<T>(
        &self,
        body: impl FnOnce(&mut dyn Write) -> Result<T, CliError>,
    ) -> Result<T, CliError> {
        match &self.path {
            Some(path) => {
                let file = File::create(path).map_err(|e| CliError::io(path, e))?;
                let mut out = BufWriter::new(file);
                let value = body(&mut out)?;
                out.flush().map_err(|e| CliError::io(path, e))?;
                Ok(value)
            }
            None => {
                let stdout = io::stdout();
                let mut out = BufWriter::new(stdout.lock());
                let value = body(&mut out)?;
                out.flush()
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
                Ok(value)
            }
        }
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let path = self.path.clone().unwrap_or_else(|| "<stdout>".into());
        self.write_with(|out| {
            serde_json::to_writer_pretty(&mut *out, value)
                .map_err(|e| CliError::io(&path, e.into()))?;
            writeln!(out).map_err(|e| CliError::io(&path, e))
        })
    }

    /// Writes the run metadata as a sidecar file, or as one JSON line on
    /// stderr when the main output went to stdout.
    pub fn write_metadata(&self, metadata: &Value) -> Result<(), CliError> {
        match &self.path {
            Some(path) => write_json_file(&meta_path(path), metadata),
            None => {
                eprintln!("{metadata}");
                Ok(())
            }
        }
    }
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Common envelope of every metadata record.
pub fn metadata(command: &str, config: Value, summary: Value) -> Value {
    json!({
        "tool": "photocert",
        "version": photocert::VERSION,
        "command": command,
        "config": config,
        "summary": summary,
    })
}

pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("metadata serialises")
}
