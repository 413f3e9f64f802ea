//! CSV ingestion and JSON/CSV result files.

use crate::compress::{CompressionTrace, Coreset};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelConfig};
use crate::points::PointSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Reads a header-driven CSV. A column named `y` becomes the labels; every
/// other column is a coordinate.
pub fn read_points_csv(path: &Path) -> Result<PointSet> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = rdr.headers()?.clone();
    let label_col = headers.iter().position(|h| h == "y");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Invalid(format!("{}: row {} column {c}: {field:?} is not a number", path.display(), line + 1)))?;
            if Some(c) == label_col {
                labels.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    let p = PointSet::new(rows)?;
    if label_col.is_some() {
        p.with_labels(labels)
    } else {
        Ok(p)
    }
}

/// Writes points with header `x1,...,xl[,y]`.
pub fn write_points_csv(path: &Path, points: &PointSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=points.dim()).map(|c| format!("x{c}")).collect();
    if points.labels().is_some() {
        header.push("y".into());
    }
    w.write_record(&header)?;
    for (i, r) in points.rows().enumerate() {
        let mut rec: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        if let Some(l) = points.labels() {
            rec.push(l[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_kernel_config(arg: &str) -> Result<Kernel> {
    let text = if Path::new(arg).is_file() { fs::read_to_string(arg)? } else { arg.to_string() };
    let cfg: KernelConfig = serde_json::from_str(&text)?;
    cfg.build()
}

/// On-disk coreset. Epsilon-net coresets carry their centers instead of
/// referring to sample points only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoresetFile {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub kernel: KernelConfig,
    pub n_source: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
}

impl CoresetFile {
    pub fn from_coreset(c: &Coreset, kernel: &Kernel) -> Result<Self> {
        Ok(Self {
            indices: c.indices.clone(),
            weights: c.weights.clone(),
            kernel: kernel_config(kernel)?,
            n_source: c.n_source,
            source_id: Some(c.source_id.clone()),
            centers: None,
        })
    }

    pub fn to_coreset(&self) -> Result<Coreset> {
        let c = Coreset {
            indices: self.indices.clone(),
            weights: self.weights.clone(),
            source_id: self.source_id.clone().unwrap_or_default(),
            n_source: self.n_source,
        };
        c.validate()?;
        Ok(c)
    }
}

pub fn kernel_config(kernel: &Kernel) -> Result<KernelConfig> {
    kernel
        .config()
        .ok_or_else(|| Error::Invalid(format!("kernel {} has no serializable configuration", kernel.id())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_trace_csv(path: &Path, trace: &CompressionTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "chosen_index", "step", "error_sq"])?;
    for s in &trace.steps {
        w.write_record([s.t.to_string(), s.chosen_index.to_string(), s.step.to_string(), s.error_sq.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows of serializable records with a header.
pub fn write_records_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputChecksum {
    pub path: String,
    pub sha256: String,
}

/// Run record written next to every output. Contains no timestamps so that
/// identical runs produce identical files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<InputChecksum>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(subcommand: &str, seed: u64, config: serde_json::Value, inputs: &[PathBuf]) -> Result<Self> {
        let inputs = inputs
            .iter()
            .map(|p| Ok(InputChecksum { path: p.display().to_string(), sha256: sha256_file(p)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed,
            config,
            inputs,
            outputs: Vec::new(),
        })
    }
}
