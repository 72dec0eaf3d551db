//! File and stream output. Data goes to `--out` or stdout; the resolved
//! config travels with it, embedded in JSON or as a `.config.json` sidecar
//! next to CSV (on stderr when the CSV goes to stdout).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Shortest representation that parses back to the same value, with an
/// exponent for very large or small magnitudes (`1e-16`, not `0.0000..1`).
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        format!("{x}")
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `path` with `suffix` appended to its file name: `a/run.csv` becomes
/// `a/run.csv.config.json`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn pretty(value: &impl Serialize) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("<stdout>", e))
}

pub fn stderr(text: &str) {
    let _ = std::io::stderr().lock().write_all(text.as_bytes());
}

/// Builds CSV text from a header and string records.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numeric(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes one data product. `csv` is used for CSV output; for JSON the
/// document is `{"config": config, key: json}`.
pub fn emit(
    out: Option<&Path>,
    format: Format,
    config: &impl Serialize,
    csv: impl FnOnce() -> CliResult<String>,
    key: &str,
    json: Value,
) -> CliResult<()> {
    match format {
        Format::Csv => {
            let text = csv()?;
            match out {
                Some(p) => {
                    write_file(p, &text)?;
                    write_file(&with_suffix(p, ".config.json"), &pretty(config)?)
                }
                None => {
                    stderr(&format!(
                        "config: {}\n",
                        serde_json::to_string(config).expect("config serializes")
                    ));
                    stdout(&text)
                }
            }
        }
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("config".into(), serde_json::to_value(config)?);
            doc.insert(key.into(), json);
            let text = pretty(&Value::Object(doc))?;
            match out {
                Some(p) => write_file(p, &text),
                None => stdout(&text),
            }
        }
    }
}
