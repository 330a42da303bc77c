//! On-disk bundles: a JSON manifest describing a chart plus named field files.
//!
//! A bundle is a directory holding `manifest.json` and one file per field.
//! The manifest (versioned `"format": 1`) records the axes, each field's
//! component shape, relative path and encoding, and free-form provenance
//! metadata. Two encodings exist:
//!
//! * `raw` — little-endian IEEE-754 doubles, points in lexicographic order
//!   (last axis fastest), components row-major within each point; round-trips
//!   bitwise;
//! * `csv` — one text row per grid point, components comma-separated,
//!   17 significant digits, which is lossless for 64-bit floats.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chart::{Axis, GridChart};
use crate::error::{Error, Result};
use crate::field::TensorField;

/// Manifest schema version this library reads and writes.
pub const MANIFEST_FORMAT: u32 = 1;

/// How a field's samples are stored on disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Little-endian doubles; bitwise round-trip.
    Raw,
    /// Comma-separated text, one row per point, 17 significant digits.
    Csv,
}

impl Encoding {
    fn extension(self) -> &'static str {
        match self {
            Encoding::Raw => "raw",
            Encoding::Csv => "csv",
        }
    }
}

/// Where and how one field is stored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Component shape at each grid point (e.g. `[2, 2]` for a metric).
    pub shape: Vec<usize>,
    /// Path of the data file, relative to the manifest.
    pub path: String,
    /// Storage encoding.
    pub encoding: Encoding,
}

/// The manifest: chart geometry, field directory, provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    /// Schema version; must equal [`MANIFEST_FORMAT`].
    pub format: u32,
    /// Chart dimension; must equal `axes.len()`.
    pub dim: usize,
    /// Coordinate intervals and sample counts.
    pub axes: Vec<Axis>,
    /// Named fields stored next to the manifest.
    pub fields: BTreeMap<String, FieldSpec>,
    /// Free-form provenance (generator name, parameters, tool version).
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Manifest {
    /// Rebuild the chart the fields live on.
    ///
    /// # Errors
    ///
    /// Chart validation failures (degenerate axes, too few samples).
    pub fn chart(&self) -> Result<GridChart> {
        GridChart::new(self.axes.clone())
    }
}

/// A fully loaded bundle.
#[derive(Clone, Debug)]
pub struct Bundle {
    /// The common chart.
    pub chart: GridChart,
    /// All fields, keyed by manifest name.
    pub fields: BTreeMap<String, TensorField>,
    /// Manifest metadata, verbatim.
    pub metadata: BTreeMap<String, String>,
}

/// Write fields sharing one chart into `dir` (created if missing) and return
/// the manifest path.
///
/// # Errors
///
/// `ChartMismatch` when a field lives on a different chart; I/O failures.
pub fn write_bundle(
    dir: &Path,
    chart: &GridChart,
    fields: &[(String, TensorField)],
    metadata: &BTreeMap<String, String>,
    encoding: Encoding,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut specs = BTreeMap::new();
    for (name, field) in fields {
        chart.check_same(field.chart())?;
        let file_name = format!("{name}.{}", encoding.extension());
        let file_path = dir.join(&file_name);
        match encoding {
            Encoding::Raw => write_raw(&file_path, field)?,
            Encoding::Csv => write_csv(&file_path, field)?,
        }
        specs.insert(
            name.clone(),
            FieldSpec {
                shape: field.comp_shape().to_vec(),
                path: file_name,
                encoding,
            },
        );
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        dim: chart.dim(),
        axes: chart.axes().to_vec(),
        fields: specs,
        metadata: metadata.clone(),
    };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::BadManifest(e.to_string()))?;
    fs::write(&manifest_path, text)?;
    Ok(manifest_path)
}

/// Load a bundle, validating the manifest against the files it references.
///
/// # Errors
///
/// `BadManifest` for unparsable JSON, unsupported format version, dimension
/// mismatch, wrong byte counts or unparsable/non-finite samples; I/O failures
/// for missing files.
pub fn read_bundle(manifest_path: &Path) -> Result<Bundle> {
    let text = fs::read_to_string(manifest_path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::BadManifest(e.to_string()))?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(Error::BadManifest(format!(
            "unsupported format version {} (this tool reads {MANIFEST_FORMAT})",
            manifest.format
        )));
    }
    if manifest.dim != manifest.axes.len() {
        return Err(Error::BadManifest(format!(
            "dim says {} but {} axes are listed",
            manifest.dim,
            manifest.axes.len()
        )));
    }
    let chart = manifest.chart()?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));

    let mut fields = BTreeMap::new();
    for (name, field_spec) in &manifest.fields {
        let comps: usize = field_spec.shape.iter().product();
        let expected = chart.point_count() * comps;
        let file_path = base.join(&field_spec.path);
        let data = match field_spec.encoding {
            Encoding::Raw => read_raw(&file_path, name, expected)?,
            Encoding::Csv => read_csv(&file_path, name, expected)?,
        };
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadManifest(format!(
                "field `{name}` contains the non-finite sample {bad}"
            )));
        }
        fields.insert(name.clone(), TensorField::from_data(chart.clone(), &field_spec.shape, data)?);
    }
    Ok(Bundle {
        chart,
        fields,
        metadata: manifest.metadata,
    })
}

fn write_raw(path: &Path, field: &TensorField) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for lin in 0..field.chart().point_count() {
        for &v in field.comps_at(lin) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn read_raw(path: &Path, name: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != expected * 8 {
        return Err(Error::BadManifest(format!(
            "field `{name}` holds {} bytes but its shape needs {}",
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks_exact yields 8 bytes")))
        .collect())
}

fn write_csv(path: &Path, field: &TensorField) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for lin in 0..field.chart().point_count() {
        let row: Vec<String> = field
            .comps_at(lin)
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn read_csv(path: &Path, name: &str, expected: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut data = Vec::with_capacity(expected);
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::BadManifest(format!(
                    "field `{name}` line {}: cannot parse `{cell}` as a number",
                    line_no + 1
                ))
            })?;
            data.push(v);
        }
    }
    if data.len() != expected {
        return Err(Error::BadManifest(format!(
            "field `{name}` holds {} samples but its shape needs {expected}",
            data.len()
        )));
    }
    Ok(data)
}
