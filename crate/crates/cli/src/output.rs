//! Manifests, JSON-lines record files and the S₆ scan CSV.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use arw_core::correlation::S6Row;
use arw_core::sampler::ExperimentRecord;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to re-run a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub artifact_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, params: &impl Serialize, outputs: Option<&Path>) -> Result<Self> {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Ok(RunManifest {
            command: command.to_string(),
            params: serde_json::to_value(params)?,
            artifact_version: ARTIFACT_VERSION.to_string(),
            timestamp,
            inputs: Vec::new(),
            outputs: outputs
                .map(|p| p.display().to_string())
                .into_iter()
                .collect(),
        })
    }

    pub fn params<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone())
            .with_context(|| format!("manifest parameters do not fit command `{}`", self.command))
    }
}

/// One line of a record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub record: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(manifest: RunManifest, record: T) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            manifest,
            record,
        }
    }

    pub fn to_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl Envelope<ExperimentRecord> {
    /// The line with `wall_time` zeroed; equal for reruns of the same manifest.
    pub fn timing_free_line(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.record.wall_time = 0.0;
        copy.to_line()
    }
}

/// Appends lines under one open handle so concurrent writers cannot interleave a record.
pub fn append_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut buf = String::new();
    for line in lines {
        buf.push_str(line);
        buf.push('\n');
    }
    file.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn parse_line<T: DeserializeOwned>(line: &str) -> Result<Envelope<T>> {
    let env: Envelope<T> = serde_json::from_str(line)?;
    if env.schema_version != SCHEMA_VERSION {
        bail!(
            "schema version {} is not supported (expected {SCHEMA_VERSION})",
            env.schema_version
        );
    }
    Ok(env)
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<Envelope<T>>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
struct S6CsvRow {
    n: u64,
    N: usize,
    s6: u64,
    s6_over_N4: f64,
    s6_over_N3: f64,
}

impl From<&S6Row> for S6CsvRow {
    fn from(r: &S6Row) -> Self {
        S6CsvRow {
            n: r.n,
            N: r.n_points,
            s6: r.s6,
            s6_over_N4: r.s6_over_n4,
            s6_over_N3: r.s6_over_n3,
        }
    }
}

impl From<S6CsvRow> for S6Row {
    fn from(r: S6CsvRow) -> Self {
        S6Row {
            n: r.n,
            n_points: r.N,
            s6: r.s6,
            s6_over_n4: r.s6_over_N4,
            s6_over_n3: r.s6_over_N3,
        }
    }
}

pub const S6_HEADER: &str = "n,N,s6,s6_over_N4,s6_over_N3";
const MANIFEST_PREFIX: &str = "# manifest ";

/// Manifest comment, header and rows.
pub fn s6_csv(manifest: Option<&RunManifest>, rows: &[S6Row], header: bool) -> Result<String> {
    let mut out = String::new();
    if let Some(m) = manifest {
        out.push_str(MANIFEST_PREFIX);
        out.push_str(&serde_json::to_string(m)?);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(S6CsvRow::from(r))?;
    }
    if header && rows.is_empty() {
        out.push_str(S6_HEADER);
        out.push('\n');
    }
    out.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(out)
}

pub fn read_s6_csv(path: &Path) -> Result<(Option<RunManifest>, Vec<S6Row>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_s6_csv(&text)
}

pub fn parse_s6_csv(text: &str) -> Result<(Option<RunManifest>, Vec<S6Row>)> {
    let manifest = match text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix(MANIFEST_PREFIX))
    {
        Some(json) => Some(serde_json::from_str(json)?),
        None => None,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    if rdr.headers()?.iter().collect::<Vec<_>>().join(",") != S6_HEADER {
        bail!("unexpected S6 header, expected `{S6_HEADER}`");
    }
    let rows = rdr
        .deserialize::<S6CsvRow>()
        .map(|r| r.map(S6Row::from).map_err(Into::into))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            command: "scan-s6".into(),
            params: serde_json::json!({"terms": 2}),
            artifact_version: ARTIFACT_VERSION.into(),
            timestamp: 1,
            inputs: vec![],
            outputs: vec!["x.csv".into()],
        }
    }

    #[test]
    fn s6_csv_round_trip() {
        let rows = vec![
            S6Row::compute(5, 64).unwrap(),
            S6Row::compute(65, 64).unwrap(),
        ];
        let text = s6_csv(Some(&manifest()), &rows, true).unwrap();
        assert!(text.lines().nth(1) == Some(S6_HEADER));
        let (m, back) = parse_s6_csv(&text).unwrap();
        assert_eq!(m, Some(manifest()));
        assert_eq!(back, rows);
        assert_eq!(s6_csv(m.as_ref(), &back, true).unwrap(), text);
    }

    #[test]
    fn envelope_round_trip() {
        let env = Envelope::new(manifest(), vec![0.1f64, 1.0 / 3.0, 2e-300]);
        let line = env.to_line().unwrap();
        let back: Envelope<Vec<f64>> = parse_line(&line).unwrap();
        assert_eq!(back, env);
        assert_eq!(back.to_line().unwrap(), line);
        let bad = line.replace("\"schema_version\":1", "\"schema_version\":9");
        assert!(parse_line::<Vec<f64>>(&bad).is_err());
    }
}
