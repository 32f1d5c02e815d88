//! Dataset directories: `manifest.json` plus one raw little-endian binary per
//! array (`.f64`, or `.c128` as interleaved re/im pairs), row-major, no header.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    ChiMap, ChiMode, ColumnAxis, CorrelationMap, Metadata, Scale, Series, Spectrogram, TimeTrace, TraceData,
};
use crate::error::{Error, Result};
use crate::floquet::FloquetSweep;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    TimeTrace,
    Spectrogram,
    G2Map,
    ChiMap,
    FloquetSpectrum,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dtype {
    F64,
    C128,
}

impl Dtype {
    fn width(self) -> u64 {
        match self {
            Dtype::F64 => 8,
            Dtype::C128 => 16,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            Dtype::F64 => "f64",
            Dtype::C128 => "c128",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dtype::F64 => "f64",
            Dtype::C128 => "c128",
        }
    }
}

/// Axis stored either as a uniform grid or as explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Uniform { name: String, unit: String, start: f64, step: f64, count: usize },
    Values { name: String, unit: String, values: Vec<f64> },
}

impl AxisSpec {
    /// Uniform encoding when it regenerates `values` bit for bit.
    pub fn from_values(name: &str, unit: &str, values: &[f64]) -> Self {
        let n = values.len();
        if n >= 1 {
            let step = if n > 1 { (values[n - 1] - values[0]) / (n - 1) as f64 } else { 0.0 };
            let uniform = Self::Uniform { name: name.into(), unit: unit.into(), start: values[0], step, count: n };
            if uniform.values() == values {
                return uniform;
            }
        }
        Self::Values { name: name.into(), unit: unit.into(), values: values.to_vec() }
    }

    pub fn name(&self) -> &str {
        match self {
            AxisSpec::Uniform { name, .. } | AxisSpec::Values { name, .. } => name,
        }
    }

    pub fn unit(&self) -> &str {
        match self {
            AxisSpec::Uniform { unit, .. } | AxisSpec::Values { unit, .. } => unit,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AxisSpec::Uniform { count, .. } => *count,
            AxisSpec::Values { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::Uniform { start, step, count, .. } => (0..*count).map(|i| start + i as f64 * step).collect(),
            AxisSpec::Values { values, .. } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub file: String,
    pub shape: Vec<u64>,
    pub dtype: Dtype,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub kind: DatasetKind,
    #[serde(default)]
    pub producer: String,
    pub axes: Vec<AxisSpec>,
    pub arrays: Vec<ArraySpec>,
    /// Typed fields of the stored object that are not arrays or axes.
    #[serde(default)]
    pub attributes: Metadata,
    /// Free-form: plan echo, seeds, defaults in effect.
    #[serde(default)]
    pub provenance: Metadata,
}

impl Manifest {
    pub fn axis(&self, name: &str) -> Option<&AxisSpec> {
        self.axes.iter().find(|a| a.name() == name)
    }
}

/// Any object that persists as a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    TimeTrace(TimeTrace),
    Spectrogram(Spectrogram),
    /// Stored as `chi_map` when χ″ is present, else `g2_map`.
    Correlation(CorrelationMap),
    Floquet(FloquetSweep),
    Series(Series),
}

impl Dataset {
    pub fn kind(&self) -> DatasetKind {
        match self {
            Dataset::TimeTrace(_) => DatasetKind::TimeTrace,
            Dataset::Spectrogram(_) => DatasetKind::Spectrogram,
            Dataset::Correlation(c) if c.chi.is_some() => DatasetKind::ChiMap,
            Dataset::Correlation(_) => DatasetKind::G2Map,
            Dataset::Floquet(_) => DatasetKind::FloquetSpectrum,
            Dataset::Series(_) => DatasetKind::Series,
        }
    }
}

impl From<TimeTrace> for Dataset {
    fn from(v: TimeTrace) -> Self {
        Dataset::TimeTrace(v)
    }
}

impl From<Spectrogram> for Dataset {
    fn from(v: Spectrogram) -> Self {
        Dataset::Spectrogram(v)
    }
}

impl From<CorrelationMap> for Dataset {
    fn from(v: CorrelationMap) -> Self {
        Dataset::Correlation(v)
    }
}

impl From<FloquetSweep> for Dataset {
    fn from(v: FloquetSweep) -> Self {
        Dataset::Floquet(v)
    }
}

impl From<Series> for Dataset {
    fn from(v: Series) -> Self {
        Dataset::Series(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct WriteOptions {
    /// Replace an existing target directory.
    pub force: bool,
    /// Merged into the manifest provenance, after the object's own metadata.
    pub provenance: Metadata,
}

enum Payload<'a> {
    Real(&'a [f64]),
    Complex(&'a [Complex64]),
    Owned(Vec<f64>),
}

struct Pending<'a> {
    name: &'static str,
    shape: Vec<u64>,
    payload: Payload<'a>,
}

fn real<'a>(name: &'static str, shape: &[usize], v: &'a [f64]) -> Pending<'a> {
    Pending { name, shape: shape.iter().map(|&s| s as u64).collect(), payload: Payload::Real(v) }
}

fn owned(name: &'static str, shape: &[usize], v: Vec<f64>) -> Pending<'static> {
    Pending { name, shape: shape.iter().map(|&s| s as u64).collect(), payload: Payload::Owned(v) }
}

fn attr<T: Serialize>(m: &mut Metadata, key: &str, v: T) -> Result<()> {
    m.insert(key.into(), serde_json::to_value(v)?);
    Ok(())
}

/// Writes `obj` under the directory `path` (created; must not exist unless forced).
pub fn write_dataset(obj: &Dataset, path: &Path, opts: &WriteOptions) -> Result<Manifest> {
    let mut axes = Vec::new();
    let mut attributes = Metadata::new();
    let mut provenance = Metadata::new();
    let arrays: Vec<Pending> = match obj {
        Dataset::TimeTrace(t) => {
            t.validate()?;
            axes.push(AxisSpec::Uniform { name: "time".into(), unit: "s".into(), start: t.t0, step: t.dt, count: t.len() });
            attr(&mut attributes, "trace_kind", t.data.kind_name())?;
            match &t.data {
                TraceData::Iq(v) => {
                    vec![Pending { name: "samples", shape: vec![v.len() as u64], payload: Payload::Complex(v) }]
                }
                TraceData::Amplitude(v) | TraceData::Intensity(v) => vec![real("samples", &[v.len()], v)],
            }
        }
        Dataset::Spectrogram(s) => {
            s.validate()?;
            axes.push(AxisSpec::from_values("drive_frequency", "Hz", &s.row_axis));
            axes.push(match s.col_kind {
                ColumnAxis::Time => AxisSpec::from_values("time", "s", &s.col_axis),
                ColumnAxis::Frequency => AxisSpec::from_values("frequency", "Hz", &s.col_axis),
            });
            attr(&mut attributes, "col_kind", s.col_kind)?;
            attr(&mut attributes, "scale", s.scale)?;
            attr(&mut attributes, "pulse_off_index", s.pulse_off_index)?;
            provenance.extend(s.metadata.clone());
            vec![real("values", &[s.rows(), s.cols()], &s.values)]
        }
        Dataset::Correlation(c) => {
            c.validate()?;
            axes.push(AxisSpec::from_values("drive_frequency", "Hz", &c.row_axis));
            axes.push(AxisSpec::from_values("lag", "s", &c.lag_axis));
            provenance.extend(c.metadata.clone());
            let (r, l) = (c.rows(), c.lags());
            let mut v = vec![
                real("g2", &[r, l], &c.g2),
                real("correlation", &[r, l], &c.correlation),
                real("mean_intensity", &[r], &c.mean_intensity),
                owned("valid", &[r], c.valid.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()),
            ];
            if let Some(chi) = &c.chi {
                axes.push(AxisSpec::from_values("chi_frequency", "Hz", &chi.freq_axis));
                attr(&mut attributes, "chi_mode", chi.mode)?;
                v.push(real("chi", &[r, chi.freq_axis.len()], &chi.values));
            }
            v
        }
        Dataset::Floquet(f) => {
            crate::analysis::check_axis("drive frequency axis", &f.drive_freqs)?;
            let (r, d) = (f.drive_freqs.len(), f.levels());
            if f.quasi_energies.len() != r * d || f.convergence_error.len() != r || f.harmonics.len() != r {
                return Err(Error::InvalidParameter("Floquet sweep arrays do not match the frequency axis".into()));
            }
            axes.push(AxisSpec::from_values("drive_frequency", "Hz", &f.drive_freqs));
            axes.push(AxisSpec::Uniform { name: "level".into(), unit: "index".into(), start: 0.0, step: 1.0, count: d });
            vec![
                real("quasi_energies", &[r, d], &f.quasi_energies),
                real("convergence_error", &[r], &f.convergence_error),
                owned("harmonics", &[r], f.harmonics.iter().map(|&h| h as f64).collect()),
            ]
        }
        Dataset::Series(s) => {
            crate::analysis::check_axis("series axis", &s.axis)?;
            if s.values.len() != s.axis.len() {
                return Err(Error::DimensionMismatch { expected: s.axis.len(), found: s.values.len() });
            }
            axes.push(AxisSpec::from_values(&s.axis_name, &s.axis_unit, &s.axis));
            attr(&mut attributes, "name", &s.name)?;
            attr(&mut attributes, "unit", &s.unit)?;
            provenance.extend(s.metadata.clone());
            vec![real("values", &[s.values.len()], &s.values)]
        }
    };
    provenance.extend(opts.provenance.clone());

    prepare_target(path, opts.force)?;
    let mut specs = Vec::with_capacity(arrays.len());
    for a in &arrays {
        let (dtype, bytes) = match &a.payload {
            Payload::Real(v) => (Dtype::F64, f64_bytes(v)),
            Payload::Owned(v) => (Dtype::F64, f64_bytes(v)),
            Payload::Complex(v) => (Dtype::C128, c128_bytes(v)),
        };
        let file = format!("{}.{}", a.name, dtype.extension());
        let p = path.join(&file);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        specs.push(ArraySpec { name: a.name.into(), file, shape: a.shape.clone(), dtype });
    }
    let manifest = Manifest {
        version: FORMAT_VERSION,
        kind: obj.kind(),
        producer: concat!("tlsring ", env!("CARGO_PKG_VERSION")).into(),
        axes,
        arrays: specs,
        attributes,
        provenance,
    };
    let p = path.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    Ok(manifest)
}

fn prepare_target(path: &Path, force: bool) -> Result<()> {
    if path.exists() {
        if !force {
            return Err(Error::AlreadyExists(path.to_path_buf()));
        }
        if path.is_dir() {
            fs::remove_dir_all(path).map_err(|e| Error::io(path, e))?;
        } else {
            fs::remove_file(path).map_err(|e| Error::io(path, e))?;
        }
    }
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn f64_bytes(v: &[f64]) -> Vec<u8> {
    v.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn c128_bytes(v: &[Complex64]) -> Vec<u8> {
    v.iter().flat_map(|c| c.re.to_le_bytes().into_iter().chain(c.im.to_le_bytes())).collect()
}

/// Parses and checks `manifest.json` without loading arrays.
pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let p = path.join(MANIFEST_FILE);
    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Schema { path: p.clone(), message: e.to_string() })?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Schema { path: p.clone(), message: "missing integer 'version'".into() })?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::UnsupportedVersion(version.min(u32::MAX as u64) as u32));
    }
    let m: Manifest =
        serde_json::from_value(value).map_err(|e| Error::Schema { path: p.clone(), message: e.to_string() })?;
    for a in &m.axes {
        if let AxisSpec::Uniform { step, count, .. } = a {
            if *count > 1 && !(*step > 0.0) {
                return Err(Error::Schema { path: p, message: format!("axis '{}' has non-positive step", a.name()) });
            }
        }
    }
    Ok(m)
}

struct Loader<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
}

impl Loader<'_> {
    fn schema(&self, message: String) -> Error {
        Error::Schema { path: self.dir.join(MANIFEST_FILE), message }
    }

    fn spec(&self, name: &str) -> Result<&ArraySpec> {
        self.manifest
            .arrays
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| self.schema(format!("missing array '{name}'")))
    }

    fn has(&self, name: &str) -> bool {
        self.manifest.arrays.iter().any(|a| a.name == name)
    }

    fn axis(&self, name: &str) -> Result<Vec<f64>> {
        self.manifest
            .axis(name)
            .map(|a| a.values())
            .ok_or_else(|| self.schema(format!("missing axis '{name}'")))
    }

    fn bytes(&self, spec: &ArraySpec, dtype: Dtype, shape: &[usize]) -> Result<Vec<u8>> {
        if spec.dtype != dtype {
            return Err(Error::DtypeMismatch {
                array: spec.name.clone(),
                expected: dtype.name().into(),
                found: spec.dtype.name().into(),
            });
        }
        let declared: Vec<usize> = spec.shape.iter().map(|&s| s as usize).collect();
        if declared != shape {
            return Err(self.schema(format!(
                "array '{}' declares shape {:?} but its axes imply {:?}",
                spec.name, declared, shape
            )));
        }
        if spec.file.contains(['/', '\\']) || spec.file.starts_with("..") {
            return Err(self.schema(format!("array file '{}' must be a plain file name", spec.file)));
        }
        let count = shape.iter().try_fold(1u64, |acc, &s| acc.checked_mul(s as u64));
        let expected = count
            .and_then(|c| c.checked_mul(dtype.width()))
            .ok_or_else(|| self.schema(format!("array '{}' shape overflows", spec.name)))?;
        let p: PathBuf = self.dir.join(&spec.file);
        let meta = fs::metadata(&p).map_err(|e| Error::io(&p, e))?;
        if meta.len() != expected {
            return Err(Error::ShapeMismatch { array: spec.name.clone(), expected, found: meta.len() });
        }
        fs::read(&p).map_err(|e| Error::io(&p, e))
    }

    fn f64s(&self, name: &str, shape: &[usize]) -> Result<Vec<f64>> {
        let spec = self.spec(name)?;
        let b = self.bytes(spec, Dtype::F64, shape)?;
        Ok(b.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn c128s(&self, name: &str, shape: &[usize]) -> Result<Vec<Complex64>> {
        let spec = self.spec(name)?;
        let b = self.bytes(spec, Dtype::C128, shape)?;
        Ok(b.chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect())
    }

    fn attr<T: serde::de::DeserializeOwned>(&self, key: &str) -> Result<T> {
        let v = self.manifest.attributes.get(key).cloned().unwrap_or(serde_json::Value::Null);
        serde_json::from_value(v).map_err(|e| self.schema(format!("attribute '{key}': {e}")))
    }

    fn invalid(&self, e: Error) -> Error {
        match e {
            Error::InvalidParameter(m) => self.schema(m),
            Error::DimensionMismatch { expected, found } => {
                self.schema(format!("dimension mismatch: expected {expected}, found {found}"))
            }
            other => other,
        }
    }
}

/// Reads a dataset directory back into its typed object.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let manifest = read_manifest(path)?;
    let l = Loader { dir: path, manifest: &manifest };
    let prov = manifest.provenance.clone();
    match manifest.kind {
        DatasetKind::TimeTrace => {
            let (t0, dt, n) = match manifest.axis("time") {
                Some(AxisSpec::Uniform { start, step, count, .. }) => (*start, *step, *count),
                _ => return Err(l.schema("time trace needs a uniform 'time' axis".into())),
            };
            let kind: String = l.attr("trace_kind")?;
            let data = match kind.as_str() {
                "iq" => TraceData::Iq(l.c128s("samples", &[n])?),
                "amplitude" => TraceData::Amplitude(l.f64s("samples", &[n])?),
                "intensity" => TraceData::Intensity(l.f64s("samples", &[n])?),
                other => return Err(l.schema(format!("unknown trace kind '{other}'"))),
            };
            Ok(Dataset::TimeTrace(TimeTrace::new(t0, dt, data).map_err(|e| l.invalid(e))?))
        }
        DatasetKind::Spectrogram => {
            let col_kind: ColumnAxis = l.attr("col_kind")?;
            let rows = l.axis("drive_frequency")?;
            let cols = l.axis(match col_kind {
                ColumnAxis::Time => "time",
                ColumnAxis::Frequency => "frequency",
            })?;
            let values = l.f64s("values", &[rows.len(), cols.len()])?;
            let scale: Scale = l.attr("scale")?;
            let off: Option<usize> = l.attr("pulse_off_index")?;
            let s = Spectrogram::new(rows, cols, col_kind, values, scale, off).map_err(|e| l.invalid(e))?;
            Ok(Dataset::Spectrogram(Spectrogram { metadata: prov, ..s }))
        }
        DatasetKind::G2Map | DatasetKind::ChiMap => {
            let rows = l.axis("drive_frequency")?;
            let lags = l.axis("lag")?;
            let (r, n) = (rows.len(), lags.len());
            let chi = if manifest.kind == DatasetKind::ChiMap || l.has("chi") {
                let freq_axis = l.axis("chi_frequency")?;
                let values = l.f64s("chi", &[r, freq_axis.len()])?;
                let mode: ChiMode = l.attr("chi_mode")?;
                Some(ChiMap { freq_axis, values, mode })
            } else {
                None
            };
            let valid = l.f64s("valid", &[r])?.into_iter().map(|v| v != 0.0).collect();
            let c = CorrelationMap {
                g2: l.f64s("g2", &[r, n])?,
                correlation: l.f64s("correlation", &[r, n])?,
                mean_intensity: l.f64s("mean_intensity", &[r])?,
                valid,
                row_axis: rows,
                lag_axis: lags,
                chi,
                metadata: prov,
            };
            c.validate().map_err(|e| l.invalid(e))?;
            Ok(Dataset::Correlation(c))
        }
        DatasetKind::FloquetSpectrum => {
            let freqs = l.axis("drive_frequency")?;
            let levels = l.axis("level")?.len();
            let r = freqs.len();
            Ok(Dataset::Floquet(FloquetSweep {
                quasi_energies: l.f64s("quasi_energies", &[r, levels])?,
                convergence_error: l.f64s("convergence_error", &[r])?,
                harmonics: l.f64s("harmonics", &[r])?.into_iter().map(|h| h as usize).collect(),
                drive_freqs: freqs,
            }))
        }
        DatasetKind::Series => {
            let axis = manifest.axes.first().ok_or_else(|| l.schema("series needs one axis".into()))?;
            let values = l.f64s("values", &[axis.len()])?;
            Ok(Dataset::Series(Series {
                axis: axis.values(),
                axis_name: axis.name().into(),
                axis_unit: axis.unit().into(),
                values,
                name: l.attr("name")?,
                unit: l.attr("unit")?,
                metadata: prov,
            }))
        }
    }
}

/// Reads a dataset that must hold a spectrogram.
pub fn read_spectrogram(path: &Path) -> Result<Spectrogram> {
    match read_dataset(path)? {
        Dataset::Spectrogram(s) => Ok(s),
        other => Err(Error::Schema {
            path: path.join(MANIFEST_FILE),
            message: format!("expected a spectrogram, found {:?}", other.kind()),
        }),
    }
}
