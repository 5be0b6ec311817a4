//! Output sinks. Every artifact carries a [`Manifest`].

use crate::config::CliResult;
use critforest::manifest::Manifest;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Keys naming output destinations; they do not affect results, so they are
/// left out of the manifest and its hash.
const DESTINATION_KEYS: [&str; 4] = ["out", "path_out", "paths_out", "build_table"];

pub fn manifest<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> Manifest {
    let mut value = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
    if let Some(map) = value.as_object_mut() {
        for k in DESTINATION_KEYS {
            map.remove(k);
        }
    }
    Manifest::new(command, &value, seed)
}

/// Buffered file, or stdout for `None` and `-`.
pub fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// CSV with the manifest as leading `#` comment lines.
pub struct CsvOut {
    inner: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    pub fn create(path: Option<&Path>, manifest: &Manifest, header: &[&str]) -> CliResult<Self> {
        let mut w = sink(path)?;
        w.write_all(manifest.csv_comment().as_bytes())?;
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Shortest round-trip text for a float; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    manifest: &'a Manifest,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON `{ "manifest": ..., <body fields> }` followed by a newline.
pub fn write_json<T: Serialize>(path: Option<&Path>, manifest: &Manifest, body: &T) -> CliResult<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, &Wrapped { manifest, body })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
