//! CSV tables, JSON documents and the run manifest written next to every
//! output file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diophantine::{DensityRow, Witness};
use crate::error::{Error, Result};
use crate::fm::ScanRow;
use crate::gauss::GaussInt;
use crate::measure::{DecayReport, DecayShell};
use crate::stats::{DivisorStatRow, PrimeCountRow};

pub const SCHEMA_VERSION: u32 = 1;

/// Twelve significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.11e}")
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
}

/// A row type with a fixed column layout.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
    fn from_fields(f: &[&str]) -> Result<Self>;
}

impl CsvRecord for DecayShell {
    const HEADER: &'static [&'static str] = &["shell_lo", "shell_hi", "max_ratio", "argmax_x", "argmax_y", "samples"];

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_real(self.shell_lo),
            fmt_real(self.shell_hi),
            fmt_real(self.max_ratio),
            fmt_real(self.argmax_x),
            fmt_real(self.argmax_y),
            self.samples.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(DecayShell {
            shell_lo: parse_real(f[0])?,
            shell_hi: parse_real(f[1])?,
            max_ratio: parse_real(f[2])?,
            argmax_x: parse_real(f[3])?,
            argmax_y: parse_real(f[4])?,
            samples: parse_int(f[5])?,
        })
    }
}

impl CsvRecord for ScanRow {
    const HEADER: &'static [&'static str] = &["shell_lo", "shell_hi", "max_ratio", "argmax_re", "argmax_im", "count"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.shell_lo.to_string(),
            self.shell_hi.to_string(),
            fmt_real(self.max_ratio),
            self.argmax.re.to_string(),
            self.argmax.im.to_string(),
            self.count.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(ScanRow {
            shell_lo: parse_int(f[0])?,
            shell_hi: parse_int(f[1])?,
            max_ratio: parse_real(f[2])?,
            argmax: GaussInt::new(parse_int(f[3])?, parse_int(f[4])?),
            count: parse_int(f[5])?,
        })
    }
}

impl CsvRecord for DivisorStatRow {
    const HEADER: &'static [&'static str] = &["lo", "hi", "max_stat", "argmax_re", "argmax_im", "count"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.lo.to_string(),
            self.hi.to_string(),
            fmt_real(self.max_stat),
            self.argmax.re.to_string(),
            self.argmax.im.to_string(),
            self.count.to_string(),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(DivisorStatRow {
            lo: parse_int(f[0])?,
            hi: parse_int(f[1])?,
            max_stat: parse_real(f[2])?,
            argmax: GaussInt::new(parse_int(f[3])?, parse_int(f[4])?),
            count: parse_int(f[5])?,
        })
    }
}

impl CsvRecord for PrimeCountRow {
    const HEADER: &'static [&'static str] = &["M", "count", "ratio"];

    fn fields(&self) -> Vec<String> {
        vec![fmt_real(self.m), self.count.to_string(), fmt_real(self.ratio)]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(PrimeCountRow { m: parse_real(f[0])?, count: parse_int(f[1])?, ratio: parse_real(f[2])? })
    }
}

impl CsvRecord for DensityRow {
    const HEADER: &'static [&'static str] = &["M", "count", "eps", "ratio", "holds"];

    fn fields(&self) -> Vec<String> {
        vec![fmt_real(self.m), self.count.to_string(), fmt_real(self.eps), fmt_real(self.ratio), self.holds.to_string()]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(DensityRow {
            m: parse_real(f[0])?,
            count: parse_int(f[1])?,
            eps: parse_real(f[2])?,
            ratio: parse_real(f[3])?,
            holds: parse_int(f[4])?,
        })
    }
}

impl CsvRecord for Witness {
    const HEADER: &'static [&'static str] = &["q_re", "q_im", "r_re", "r_im", "defect"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.q.re.to_string(),
            self.q.im.to_string(),
            self.r.re.to_string(),
            self.r.im.to_string(),
            fmt_real(self.defect),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(Witness {
            q: GaussInt::new(parse_int(f[0])?, parse_int(f[1])?),
            r: GaussInt::new(parse_int(f[2])?, parse_int(f[3])?),
            defect: parse_real(f[4])?,
        })
    }
}

pub fn to_csv<R: CsvRecord>(rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_csv<R: CsvRecord>(text: &str) -> Result<Vec<R>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != R::HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}, wanted {:?}", R::HEADER)));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f: Vec<&str> = rec.iter().collect();
        if f.len() != R::HEADER.len() {
            return Err(Error::Parse(format!("row has {} fields, wanted {}", f.len(), R::HEADER.len())));
        }
        out.push(R::from_fields(&f)?);
    }
    Ok(out)
}

pub fn decay_report_csv(r: &DecayReport) -> Result<String> {
    to_csv(&r.shells)
}

pub fn parse_decay_report(text: &str) -> Result<DecayReport> {
    Ok(DecayReport { shells: from_csv(text)? })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpTiming {
    pub op: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    /// SHA-256 of the canonical JSON form of the parsed command.
    pub config_digest: String,
    pub seed: u64,
    pub output: String,
    pub output_sha256: String,
    pub wall_clock_seconds: f64,
    pub timings: Vec<OpTiming>,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config_json: &str, seed: u64) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command_line,
            config_digest: sha256_hex(config_json.as_bytes()),
            seed,
            output: String::new(),
            output_sha256: String::new(),
            wall_clock_seconds: 0.0,
            timings: Vec::new(),
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Write `contents` to `out` and its manifest beside it.
pub fn write_with_manifest(out: &Path, contents: &str, manifest: &RunManifest) -> Result<PathBuf> {
    fs::write(out, contents)?;
    let mut m = manifest.clone();
    m.output = out.display().to_string();
    m.output_sha256 = sha256_hex(contents.as_bytes());
    let mp = manifest_path(out);
    fs::write(&mp, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(mp)
}
