//! Output helpers. Numbers are printed with the same formatter as the JSON
//! files, so every value on stdout appears verbatim in an output file.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;

/// Failure while running (exit code 1).
#[derive(Debug)]
pub struct RunError(pub String);

impl<E: std::fmt::Display> From<E> for RunError {
    fn from(e: E) -> Self {
        RunError(e.to_string())
    }
}

/// JSON rendering of a number (`1.0`, `1e-7`, `null` for non-finite).
pub fn num(x: f64) -> String {
    serde_json::Value::from(x).to_string()
}

pub fn print_value(key: &str, x: f64) {
    println!("{key} = {}", num(x));
}

pub fn print_count(key: &str, n: usize) {
    println!("{key} = {n}");
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    config: &'a RunConfig,
    result: &'a R,
}

/// Writes `{ "config": ..., "result": ... }` to `dir/name`.
pub fn write_json<R: Serialize>(dir: &Path, name: &str, config: &RunConfig, result: &R) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(&Envelope { config, result })?;
    std::fs::write(&path, text).map_err(|e| RunError(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| RunError(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_match_json() {
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(f64::NAN), "null");
        assert_eq!(serde_json::to_string(&0.628_078_225_336_670_7).unwrap(), num(0.628_078_225_336_670_7));
    }
}
