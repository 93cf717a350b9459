//! Slice and foliation files: CSV, JSON, and the foliation index.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use kruskal_cmc::foliation::LeafBranch;
use kruskal_cmc::slice::{Generator, SliceEnd};
use kruskal_cmc::{FoliationCurve, Hypersurface, Region, Sample, SliceKind};
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 6] = ["X", "T", "r", "region", "c", "H"];
pub const INDEX_FILE: &str = "index.json";
pub const PARTIAL_MANIFEST_FILE: &str = "index.partial.json";

/// Seventeen significant digits: enough to recover every binary64 value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_region(s: &str) -> Option<Region> {
    Region::ALL.into_iter().find(|r| r.as_str() == s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceMetadata {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub c: f64,
    pub kind: SliceKind,
    pub generator: Generator,
    pub end: SliceEnd,
    #[serde(rename = "T_intercept")]
    pub t_intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub r: f64,
    pub region: Region,
}

impl From<&Sample> for SampleRow {
    fn from(s: &Sample) -> Self {
        Self {
            x: s.x,
            t: s.t,
            r: s.r,
            region: s.region,
        }
    }
}

impl From<SampleRow> for Sample {
    fn from(s: SampleRow) -> Self {
        Sample {
            x: s.x,
            t: s.t,
            r: s.r,
            region: s.region,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFile {
    pub metadata: SliceMetadata,
    pub samples: Vec<SampleRow>,
}

impl SliceFile {
    pub fn new(s: &Hypersurface) -> Self {
        Self {
            metadata: SliceMetadata {
                m: s.params.m,
                h: s.params.h,
                c: s.params.c,
                kind: s.kind,
                generator: s.generator,
                end: s.end,
                t_intercept: s.t_intercept,
            },
            samples: s.samples.iter().map(SampleRow::from).collect(),
        }
    }
}

/// A slice read back from disk. CSV files do not carry `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSlice {
    pub m: Option<f64>,
    pub h: f64,
    pub c: f64,
    pub samples: Vec<Sample>,
}

pub fn slice_csv(s: &Hypersurface) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let (c, h) = (fmt_f64(s.params.c), fmt_f64(s.params.h));
    let csv_err = |e: csv::Error| CliError::Invalid(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for q in &s.samples {
        w.write_record([
            fmt_f64(q.x).as_str(),
            fmt_f64(q.t).as_str(),
            fmt_f64(q.r).as_str(),
            q.region.as_str(),
            c.as_str(),
            h.as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))
}

pub fn slice_json(s: &Hypersurface) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&SliceFile::new(s)).expect("slice metadata serializes");
    bytes.push(b'\n');
    bytes
}

pub fn encode_slice(s: &Hypersurface, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => slice_csv(s),
        Format::Json => Ok(slice_json(s)),
    }
}

pub fn parse_slice_csv(text: &str, path: &Path) -> Result<LoadedSlice> {
    let bad = |message: String| CliError::Parse {
        path: path.to_owned(),
        message,
    };
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut samples = Vec::new();
    let mut ch: Option<(f64, f64)> = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: {} = '{}' is not a number", i + 1, CSV_HEADER[k], &rec[k])))
        };
        let region = parse_region(&rec[3]).ok_or_else(|| bad(format!("row {}: unknown region '{}'", i + 1, &rec[3])))?;
        let (c, h) = (num(4)?, num(5)?);
        match ch {
            None => ch = Some((c, h)),
            Some(prev) if prev.0.to_bits() != c.to_bits() || prev.1.to_bits() != h.to_bits() => {
                return Err(bad(format!("row {}: (c, H) differs from the first row", i + 1)));
            }
            Some(_) => {}
        }
        samples.push(Sample {
            x: num(0)?,
            t: num(1)?,
            r: num(2)?,
            region,
        });
    }
    let (c, h) = ch.ok_or_else(|| bad("no samples".into()))?;
    Ok(LoadedSlice { m: None, h, c, samples })
}

pub fn parse_slice_json(text: &str, path: &Path) -> Result<LoadedSlice> {
    let f: SliceFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    Ok(LoadedSlice {
        m: Some(f.metadata.m),
        h: f.metadata.h,
        c: f.metadata.c,
        samples: f.samples.into_iter().map(Sample::from).collect(),
    })
}

/// Reads a slice file, choosing the parser by extension.
pub fn read_slice(path: &Path) -> Result<LoadedSlice> {
    let text = read_text(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => parse_slice_csv(&text, path),
        Some("json") => parse_slice_json(&text, path),
        _ => Err(CliError::Parse {
            path: path.to_owned(),
            message: "expected a .csv or .json slice file".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub p: f64,
    #[serde(rename = "C")]
    pub amplitude: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl From<&FoliationCurve> for CurveMeta {
    fn from(fc: &FoliationCurve) -> Self {
        Self {
            p: fc.p,
            amplitude: fc.amplitude,
            a: fc.a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub c: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub r: f64,
    pub branch: LeafBranch,
    #[serde(rename = "T_intercept")]
    pub t_intercept: f64,
    /// Relative to the index file.
    pub file: String,
}

/// Leaves sorted by ascending `c`, so `H` decreases down the list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    #[serde(rename = "M")]
    pub m: f64,
    /// Absent for families that are not generated by a curve.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curve: Option<CurveMeta>,
    pub leaves: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedLeaf {
    pub c: f64,
    pub error: String,
}

/// Written instead of the index when a leaf fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialManifest {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub curve: Option<CurveMeta>,
    pub completed: Vec<IndexEntry>,
    pub failed: FailedLeaf,
}

pub fn read_index(path: &Path) -> Result<Index> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

pub fn leaf_file_name(i: usize, format: Format) -> String {
    format!("leaf_{i:03}.{}", format.extension())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let werr = |source| CliError::Write {
        path: path.to_owned(),
        source,
    };
    let mut f = fs::File::create(path).map_err(werr)?;
    f.write_all(bytes).map_err(werr)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("value serializes");
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn create_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })?;
    Ok(path.to_owned())
}
