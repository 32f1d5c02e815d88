use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{ColumnAxis, Metadata, Scale, Spectrogram};
use crate::error::{Error, Result};

/// Relative floor added before taking log10 of a map.
pub const LOG_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FftWindow {
    /// Columns from the pulse-off index onwards.
    PostPulse,
    /// All columns.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    Hann,
    /// Rectangular; used for energy checks.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FftOptions {
    pub window: FftWindow,
    pub log_input: bool,
    pub taper: Taper,
}

impl Default for FftOptions {
    fn default() -> Self {
        Self { window: FftWindow::PostPulse, log_input: false, taper: Taper::Hann }
    }
}

/// Smallest power of two that is >= `n`.
pub fn next_pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / (len - 1) as f64).cos()).collect()
}

/// One-sided |DFT| of every row over the selected columns.
///
/// Each row is optionally mapped through log10(v + floor) with
/// floor = 1e-6 × map maximum, mean-subtracted, tapered, and zero-padded to
/// the next power of two at or above four times its length.
pub fn ringdown_fft(map: &Spectrogram, opts: &FftOptions) -> Result<Spectrogram> {
    if map.col_kind != ColumnAxis::Time {
        return Err(Error::InvalidParameter("ring-down spectrum needs a time-domain map".into()));
    }
    let start = match opts.window {
        FftWindow::Full => 0,
        FftWindow::PostPulse => map
            .pulse_off_index
            .ok_or_else(|| Error::InvalidParameter("post-pulse window needs a pulse-off index".into()))?,
    };
    let len = map.cols() - start;
    if len < 2 {
        return Err(Error::InvalidParameter("spectral window holds fewer than two samples".into()));
    }
    let dt = map.col_step();
    let floor = if opts.log_input {
        let max = map.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(Error::Numeric("log spectrum of a map without positive values".into()));
        }
        LOG_FLOOR * max
    } else {
        0.0
    };
    let nfft = next_pow2_at_least(4 * len);
    let taper = match opts.taper {
        Taper::Hann => hann(len),
        Taper::None => vec![1.0; len],
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let half = nfft / 2 + 1;
    let mut values = Vec::with_capacity(map.rows() * half);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for i in 0..map.rows() {
        let seg: Vec<f64> = map.row(i)[start..]
            .iter()
            .map(|&v| if opts.log_input { (v.max(0.0) + floor).log10() } else { v })
            .collect();
        let mean = seg.iter().sum::<f64>() / len as f64;
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (j, (&v, &w)) in seg.iter().zip(&taper).enumerate() {
            buf[j] = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        values.extend(buf[..half].iter().map(|c| c.norm()));
    }
    let col_axis = (0..half).map(|k| k as f64 / (nfft as f64 * dt)).collect();
    let mut metadata = Metadata::new();
    metadata.insert("operation".into(), "ringdown_fft".into());
    metadata.insert("options".into(), serde_json::to_value(opts)?);
    metadata.insert("nfft".into(), nfft.into());
    metadata.insert("window_start_column".into(), start.into());
    metadata.insert("source".into(), serde_json::to_value(&map.metadata)?);
    if opts.log_input {
        metadata.insert("log_floor".into(), floor.into());
    }
    let mut out = Spectrogram::new(map.row_axis.clone(), col_axis, ColumnAxis::Frequency, values, Scale::Linear, None)?;
    out.metadata = metadata;
    Ok(out)
}

/// Root of sin x = x/2 on (0, π): the half-maximum point of |sin x / x|.
pub fn half_power_root() -> f64 {
    static ROOT: OnceLock<f64> = OnceLock::new();
    *ROOT.get_or_init(|| {
        let f = |x: f64| x.sin() - 0.5 * x;
        let (mut lo, mut hi) = (1.0_f64, 2.5_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Approximate value of [`half_power_root`], for documentation and tests.
pub const HALF_POWER_ROOT: f64 = 1.895_494_267;

/// FWHM (Hz) of the amplitude spectrum of a rectangular pulse of length `duration`.
pub fn pulse_bandwidth(duration: f64) -> Result<f64> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!("pulse duration must be > 0, got {duration}")));
    }
    Ok(2.0 * half_power_root() / (PI * duration))
}

/// Largest value of one row inside a column band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub row: usize,
    pub col: usize,
    /// Column-axis coordinate of the maximum, refined by a three-point parabola.
    pub position: f64,
    pub value: f64,
}

/// Per-row maximum of `map` restricted to column coordinates in `[lo, hi]`.
pub fn dominant_ridge(map: &Spectrogram, lo: f64, hi: f64) -> Vec<Option<Ridge>> {
    (0..map.rows())
        .map(|i| {
            let row = map.row(i);
            let (col, value) = map
                .col_axis
                .iter()
                .enumerate()
                .filter(|(_, &x)| x >= lo && x <= hi)
                .map(|(j, _)| (j, row[j]))
                .max_by(|a, b| a.1.total_cmp(&b.1))?;
            let mut position = map.col_axis[col];
            if col > 0 && col + 1 < map.cols() {
                let (a, b, c) = (row[col - 1], row[col], row[col + 1]);
                let denom = a - 2.0 * b + c;
                if denom < 0.0 {
                    let shift = 0.5 * (a - c) / denom;
                    position += shift.clamp(-0.5, 0.5) * (map.col_axis[col + 1] - map.col_axis[col]);
                }
            }
            Some(Ridge { row: i, col, position, value })
        })
        .collect()
}

/// Center and full width at half maximum of the peak of `profile` around
/// its largest sample, with linearly interpolated crossings. `None` when the
/// peak does not drop below half on both sides.
pub fn ridge_fwhm(axis: &[f64], profile: &[f64]) -> Option<(f64, f64)> {
    let (k, &peak) = profile.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if !(peak > 0.0) {
        return None;
    }
    let half = 0.5 * peak;
    let mut l = k;
    while l > 0 && profile[l] > half {
        l -= 1;
    }
    let mut r = k;
    while r + 1 < profile.len() && profile[r] > half {
        r += 1;
    }
    if profile[l] > half || profile[r] > half {
        return None;
    }
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (profile[a], profile[b]);
        axis[a] + (half - ya) / (yb - ya) * (axis[b] - axis[a])
    };
    let left = cross(l, l + 1);
    let right = cross(r - 1, r);
    Some((axis[k], right - left))
}
