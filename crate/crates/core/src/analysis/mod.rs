//! Post-processing of ring-down records: homodyne amplitude and intensity,
//! spectra, intensity correlations, χ″ and lifetime fits.

mod correlation;
mod fit;
mod spectral;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use correlation::{
    chi_imag, chi_zero_crossings, g2_map, ChiMap, ChiMode, ChiOptions, CorrelationMap, G2Options, ZeroCrossing,
};
pub use fit::{fit_lifetime, LifetimeFit, LifetimeOptions};
pub use spectral::{
    dominant_ridge, half_power_root, next_pow2_at_least, pulse_bandwidth, ridge_fwhm, ringdown_fft, FftOptions,
    FftWindow, Ridge, Taper, HALF_POWER_ROOT, LOG_FLOOR,
};

/// Free-form provenance attached to maps.
pub type Metadata = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "samples", rename_all = "snake_case")]
pub enum TraceData {
    /// Complex in-phase/quadrature record, I + iQ.
    Iq(Vec<Complex64>),
    Amplitude(Vec<f64>),
    Intensity(Vec<f64>),
}

impl TraceData {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TraceData::Iq(_) => "iq",
            TraceData::Amplitude(_) => "amplitude",
            TraceData::Intensity(_) => "intensity",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TraceData::Iq(v) => v.len(),
            TraceData::Amplitude(v) | TraceData::Intensity(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Uniformly sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub t0: f64,
    pub dt: f64,
    pub data: TraceData,
}

impl TimeTrace {
    pub fn new(t0: f64, dt: f64, data: TraceData) -> Result<Self> {
        let t = Self { t0, dt, data };
        t.validate()?;
        Ok(t)
    }

    pub fn iq(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(t0, dt, TraceData::Iq(samples))
    }

    pub fn amplitude(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(t0, dt, TraceData::Amplitude(samples))
    }

    pub fn intensity(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        Self::new(t0, dt, TraceData::Intensity(samples))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() || !self.t0.is_finite() {
            return Err(Error::InvalidParameter(format!("trace needs finite t0 and dt > 0 (dt = {})", self.dt)));
        }
        let finite = match &self.data {
            TraceData::Iq(v) => v.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            TraceData::Amplitude(v) | TraceData::Intensity(v) => v.iter().all(|x| x.is_finite()),
        };
        if !finite {
            return Err(Error::InvalidParameter("trace samples must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Real samples of an amplitude or intensity trace.
    pub fn real_samples(&self) -> Option<&[f64]> {
        match &self.data {
            TraceData::Amplitude(v) | TraceData::Intensity(v) => Some(v),
            TraceData::Iq(_) => None,
        }
    }
}

/// A(t) = sqrt(I² + Q²).
pub fn homodyne_amplitude(trace: &TimeTrace) -> Result<TimeTrace> {
    match &trace.data {
        TraceData::Iq(v) => TimeTrace::amplitude(trace.t0, trace.dt, v.iter().map(|c| c.re.hypot(c.im)).collect()),
        other => Err(Error::WrongTraceKind { expected: "iq", found: other.kind_name() }),
    }
}

/// 𝓘(t) = A(t)².
pub fn intensity(trace: &TimeTrace) -> Result<TimeTrace> {
    match &trace.data {
        TraceData::Amplitude(v) => TimeTrace::intensity(trace.t0, trace.dt, v.iter().map(|a| a * a).collect()),
        other => Err(Error::WrongTraceKind { expected: "amplitude", found: other.kind_name() }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnAxis {
    Time,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    LogMagnitude,
}

/// Drive-frequency × (time | Fourier frequency) map, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// Drive frequencies (Hz).
    pub row_axis: Vec<f64>,
    /// Times (s) or Fourier frequencies (Hz).
    pub col_axis: Vec<f64>,
    pub col_kind: ColumnAxis,
    pub values: Vec<f64>,
    pub scale: Scale,
    /// First column after the drive has switched off.
    pub pulse_off_index: Option<usize>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl Spectrogram {
    pub fn new(
        row_axis: Vec<f64>,
        col_axis: Vec<f64>,
        col_kind: ColumnAxis,
        values: Vec<f64>,
        scale: Scale,
        pulse_off_index: Option<usize>,
    ) -> Result<Self> {
        let s = Self { row_axis, col_axis, col_kind, values, scale, pulse_off_index, metadata: Metadata::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis("row axis", &self.row_axis)?;
        check_axis("column axis", &self.col_axis)?;
        let expected = self.rows() * self.cols();
        if self.values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.values.len() });
        }
        if let Some(k) = self.pulse_off_index {
            if k >= self.cols() {
                return Err(Error::InvalidParameter(format!(
                    "pulse-off index {k} outside {} columns",
                    self.cols()
                )));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.row_axis.len()
    }

    pub fn cols(&self) -> usize {
        self.col_axis.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    pub fn with_metadata(mut self, key: &str, value: serde_json::Value) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }

    pub(crate) fn same_axes(&self, other: &Spectrogram) -> bool {
        self.row_axis == other.row_axis && self.col_axis == other.col_axis && self.col_kind == other.col_kind
    }

    /// Column spacing, assuming a uniform column axis.
    pub fn col_step(&self) -> f64 {
        if self.cols() > 1 {
            (self.col_axis[self.cols() - 1] - self.col_axis[0]) / (self.cols() - 1) as f64
        } else {
            0.0
        }
    }
}

pub(crate) fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} is empty")));
    }
    if axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(format!("{name} must be finite and strictly increasing")));
    }
    Ok(())
}

/// One value per drive frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub axis: Vec<f64>,
    pub axis_name: String,
    pub axis_unit: String,
    pub values: Vec<f64>,
    pub name: String,
    pub unit: String,
    #[serde(default)]
    pub metadata: Metadata,
}

/// a − b on identical axes.
pub fn diff_map(a: &Spectrogram, b: &Spectrogram) -> Result<Spectrogram> {
    if !a.same_axes(b) || a.scale != b.scale {
        return Err(Error::AxisMismatch("difference needs identical axes, column kind and scale".into()));
    }
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    let mut out = Spectrogram {
        values,
        metadata: Metadata::new(),
        pulse_off_index: if a.pulse_off_index == b.pulse_off_index { a.pulse_off_index } else { None },
        ..a.clone()
    };
    out.metadata.insert("operation".into(), "difference".into());
    out.metadata.insert("minuend".into(), serde_json::to_value(&a.metadata)?);
    out.metadata.insert("subtrahend".into(), serde_json::to_value(&b.metadata)?);
    Ok(out)
}

/// Mean of each row over the in-pulse columns `[0, pulse_off_index)`.
pub fn mean_driven_response(map: &Spectrogram) -> Result<Series> {
    if map.col_kind != ColumnAxis::Time {
        return Err(Error::InvalidParameter("driven response needs a time-domain map".into()));
    }
    let off = map
        .pulse_off_index
        .ok_or_else(|| Error::InvalidParameter("map has no pulse-off index".into()))?;
    if off == 0 {
        return Err(Error::InvalidParameter("pulse-off index 0 leaves no driven columns".into()));
    }
    let values = (0..map.rows())
        .map(|i| map.row(i)[..off].iter().sum::<f64>() / off as f64)
        .collect();
    let mut metadata = Metadata::new();
    metadata.insert("driven_columns".into(), off.into());
    Ok(Series {
        axis: map.row_axis.clone(),
        axis_name: "drive_frequency".into(),
        axis_unit: "Hz".into(),
        values,
        name: "mean_driven_response".into(),
        unit: "arb".into(),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(values: Vec<f64>, rows: usize, cols: usize) -> Spectrogram {
        Spectrogram::new(
            (0..rows).map(|i| 3e9 + i as f64 * 1e8).collect(),
            (0..cols).map(|j| j as f64 * 1e-9).collect(),
            ColumnAxis::Time,
            values,
            Scale::Linear,
            Some(cols / 2),
        )
        .unwrap()
    }

    #[test]
    fn amplitude_examples() {
        let t = TimeTrace::iq(0.0, 1e-9, vec![Complex64::new(3.0, 4.0); 4]).unwrap();
        let a = homodyne_amplitude(&t).unwrap();
        assert_eq!(a.real_samples().unwrap(), &[5.0; 4]);
        assert_eq!((a.t0, a.dt), (0.0, 1e-9));
        let t = TimeTrace::iq(0.0, 1e-9, vec![Complex64::new(-2.5, 0.0)]).unwrap();
        assert_eq!(homodyne_amplitude(&t).unwrap().real_samples().unwrap(), &[2.5]);
        assert!(matches!(homodyne_amplitude(&a), Err(Error::WrongTraceKind { .. })));
    }

    #[test]
    fn intensity_examples() {
        let a = TimeTrace::amplitude(0.0, 1.0, vec![2.0, 0.0]).unwrap();
        assert_eq!(intensity(&a).unwrap().real_samples().unwrap(), &[4.0, 0.0]);
        let i = intensity(&a).unwrap();
        assert!(matches!(intensity(&i), Err(Error::WrongTraceKind { .. })));
    }

    proptest! {
        #[test]
        fn amplitude_squared_is_iq_power(iq in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..64)) {
            let s: Vec<_> = iq.iter().map(|&(i, q)| Complex64::new(i, q)).collect();
            let a = homodyne_amplitude(&TimeTrace::iq(0.0, 1.0, s.clone()).unwrap()).unwrap();
            for (x, c) in a.real_samples().unwrap().iter().zip(&s) {
                let p = c.re * c.re + c.im * c.im;
                prop_assert!((x * x - p).abs() <= 1e-12 * p.max(1.0));
            }
        }

        #[test]
        fn intensity_scales_quadratically(v in prop::collection::vec(0.0f64..10.0, 1..32), c in 0.1f64..10.0) {
            let a = TimeTrace::amplitude(0.0, 1.0, v.clone()).unwrap();
            let b = TimeTrace::amplitude(0.0, 1.0, v.iter().map(|x| c * x).collect()).unwrap();
            let ia = intensity(&a).unwrap();
            let ib = intensity(&b).unwrap();
            for (x, y) in ia.real_samples().unwrap().iter().zip(ib.real_samples().unwrap()) {
                prop_assert!((y - c * c * x).abs() <= 1e-12 * y.abs().max(1e-300));
            }
        }

        #[test]
        fn diff_is_antisymmetric(v in prop::collection::vec(-5.0f64..5.0, 12), w in prop::collection::vec(-5.0f64..5.0, 12)) {
            let a = map(v, 3, 4);
            let b = map(w, 3, 4);
            let ab = diff_map(&a, &b).unwrap();
            let ba = diff_map(&b, &a).unwrap();
            for (x, y) in ab.values.iter().zip(&ba.values) {
                prop_assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn diff_examples() {
        let a = map((0..12).map(|x| x as f64).collect(), 3, 4);
        assert!(diff_map(&a, &a).unwrap().values.iter().all(|&x| x == 0.0));
        let ac = map(a.values.iter().map(|x| x + 0.5).collect(), 3, 4);
        assert!(diff_map(&ac, &a).unwrap().values.iter().all(|&x| x == 0.5));
        let other = map(vec![0.0; 8], 2, 4);
        assert!(matches!(diff_map(&a, &other), Err(Error::AxisMismatch(_))));
    }

    #[test]
    fn driven_response_examples() {
        let m = map(vec![1.25; 12], 3, 4);
        assert_eq!(mean_driven_response(&m).unwrap().values, vec![1.25; 3]);
        let mut z = map(vec![0.0, 0.0, 7.0, 7.0].repeat(3), 3, 4);
        assert_eq!(mean_driven_response(&z).unwrap().values, vec![0.0; 3]);
        z.pulse_off_index = None;
        assert!(mean_driven_response(&z).is_err());
    }

    #[test]
    fn spectrogram_validation() {
        let bad = Spectrogram::new(vec![1.0, 1.0], vec![0.0], ColumnAxis::Time, vec![0.0; 2], Scale::Linear, None);
        assert!(bad.is_err());
        let bad = Spectrogram::new(vec![1.0], vec![0.0, 1.0], ColumnAxis::Time, vec![0.0; 3], Scale::Linear, None);
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }
}
