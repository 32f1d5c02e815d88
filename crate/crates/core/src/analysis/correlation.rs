use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::spectral::{next_pow2_at_least, FftWindow};
use super::{ColumnAxis, Metadata, Spectrogram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Options {
    /// Largest lag (s).
    pub max_lag: f64,
    #[serde(default = "post_pulse")]
    pub window: FftWindow,
    /// Rows whose squared mean intensity falls below this fraction of the
    /// largest row's are masked.
    #[serde(default = "default_floor_rel")]
    pub floor_rel: f64,
}

fn post_pulse() -> FftWindow {
    FftWindow::PostPulse
}

fn default_floor_rel() -> f64 {
    1e-12
}

impl G2Options {
    pub fn new(max_lag: f64) -> Self {
        Self { max_lag, window: post_pulse(), floor_rel: default_floor_rel() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiMode {
    /// Causal transform over τ′ ≥ 0.
    OneSided,
    /// Mirror-extended correlation; the result vanishes for real even input.
    TwoSidedEven,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChiOptions {
    pub mode: ChiMode,
}

impl Default for ChiOptions {
    fn default() -> Self {
        Self { mode: ChiMode::OneSided }
    }
}

/// χ″ rows on a Fourier-frequency grid (Hz), arbitrary units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiMap {
    pub freq_axis: Vec<f64>,
    pub values: Vec<f64>,
    pub mode: ChiMode,
}

impl ChiMap {
    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.freq_axis.len();
        &self.values[i * c..(i + 1) * c]
    }
}

/// Per-drive-frequency intensity correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub row_axis: Vec<f64>,
    /// τ′ (s), starting at 0.
    pub lag_axis: Vec<f64>,
    /// Normalized g²; zero on masked rows.
    pub g2: Vec<f64>,
    /// Unnormalized ⟨𝓘(t)𝓘(t+τ′)⟩.
    pub correlation: Vec<f64>,
    /// ⟨𝓘⟩ per row.
    pub mean_intensity: Vec<f64>,
    /// False where the row was masked.
    pub valid: Vec<bool>,
    pub chi: Option<ChiMap>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl CorrelationMap {
    pub fn rows(&self) -> usize {
        self.row_axis.len()
    }

    pub fn lags(&self) -> usize {
        self.lag_axis.len()
    }

    pub fn g2_row(&self, i: usize) -> &[f64] {
        &self.g2[i * self.lags()..(i + 1) * self.lags()]
    }

    pub fn correlation_row(&self, i: usize) -> &[f64] {
        &self.correlation[i * self.lags()..(i + 1) * self.lags()]
    }

    pub fn validate(&self) -> Result<()> {
        super::check_axis("row axis", &self.row_axis)?;
        super::check_axis("lag axis", &self.lag_axis)?;
        if self.lag_axis[0] != 0.0 {
            return Err(Error::InvalidParameter("lag axis must start at 0".into()));
        }
        let n = self.rows() * self.lags();
        for (name, len) in [("g2", self.g2.len()), ("correlation", self.correlation.len())] {
            if len != n {
                return Err(Error::InvalidParameter(format!("{name} has {len} values, expected {n}")));
            }
        }
        if self.valid.len() != self.rows() || self.mean_intensity.len() != self.rows() {
            return Err(Error::InvalidParameter("per-row vectors do not match the row axis".into()));
        }
        if let Some(chi) = &self.chi {
            super::check_axis("chi frequency axis", &chi.freq_axis)?;
            if chi.values.len() != self.rows() * chi.freq_axis.len() {
                return Err(Error::InvalidParameter("chi values do not match their axes".into()));
            }
        }
        Ok(())
    }
}

/// g²(τ′) = ⟨𝓘(t)𝓘(t+τ′)⟩_t / ⟨𝓘⟩² per row, with the lag average taken over
/// the pairs that fit inside the window.
pub fn g2_map(map: &Spectrogram, opts: &G2Options) -> Result<CorrelationMap> {
    if map.col_kind != ColumnAxis::Time {
        return Err(Error::InvalidParameter("g2 needs a time-domain intensity map".into()));
    }
    let start = match opts.window {
        FftWindow::Full => 0,
        FftWindow::PostPulse => map
            .pulse_off_index
            .ok_or_else(|| Error::InvalidParameter("post-pulse window needs a pulse-off index".into()))?,
    };
    let len = map.cols() - start;
    let dt = map.col_step();
    if !(opts.max_lag >= 0.0) {
        return Err(Error::InvalidParameter("max_lag must be >= 0".into()));
    }
    let lags = if dt > 0.0 { (opts.max_lag / dt + 1e-9).floor() as usize } else { 0 };
    if lags >= len {
        return Err(Error::InvalidParameter(format!(
            "max_lag {:e} s spans {lags} samples but the window holds {len}",
            opts.max_lag
        )));
    }
    let peak = map.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if map.values.iter().any(|&v| v < -1e-8 * peak.max(1e-300)) {
        return Err(Error::InvalidParameter("intensities must be non-negative".into()));
    }
    let n_lag = lags + 1;
    let mut correlation = Vec::with_capacity(map.rows() * n_lag);
    let mut means = Vec::with_capacity(map.rows());
    for i in 0..map.rows() {
        let x: Vec<f64> = map.row(i)[start..].iter().map(|v| v.max(0.0)).collect();
        // shifted mean and deviations: a constant row gives e = 0 exactly
        let m = x[0] + x.iter().map(|v| v - x[0]).sum::<f64>() / len as f64;
        let e: Vec<f64> = x.iter().map(|v| v - m).collect();
        means.push(m);
        for k in 0..n_lag {
            let n = (len - k) as f64;
            let ea = e[..len - k].iter().sum::<f64>() / n;
            let eb = e[k..].iter().sum::<f64>() / n;
            let cov = e[..len - k].iter().zip(&e[k..]).map(|(a, b)| a * b).sum::<f64>() / n;
            correlation.push((ea + eb, cov));
        }
    }
    let top = means.iter().fold(0.0_f64, |m, v| m.max(v * v));
    let valid: Vec<bool> = means.iter().map(|m| top > 0.0 && m * m > opts.floor_rel * top).collect();
    let mut g2 = Vec::with_capacity(correlation.len());
    let correlation: Vec<f64> = correlation
        .chunks(n_lag)
        .zip(means.iter().zip(&valid))
        .flat_map(|(c, (&m, &ok))| {
            g2.extend(c.iter().map(|&(lin, cov)| if ok { 1.0 + lin / m + cov / (m * m) } else { 0.0 }));
            c.iter().map(move |&(lin, cov)| m * m + m * lin + cov).collect::<Vec<_>>()
        })
        .collect();
    let mut metadata = Metadata::new();
    metadata.insert("operation".into(), "g2".into());
    metadata.insert("options".into(), serde_json::to_value(opts)?);
    metadata.insert("window_start_column".into(), start.into());
    metadata.insert("source".into(), serde_json::to_value(&map.metadata)?);
    Ok(CorrelationMap {
        row_axis: map.row_axis.clone(),
        lag_axis: (0..n_lag).map(|k| k as f64 * dt).collect(),
        g2,
        correlation,
        mean_intensity: means,
        valid,
        chi: None,
        metadata,
    })
}

/// χ″(f) ∝ Im ∫ e^{i2πfτ′} C(τ′) dτ′ from the unnormalized correlation.
///
/// The one-sided mode tapers C with the falling half of a Hann window,
/// w(τ′) = (1 + cos(πτ′/τ_max))/2, zero-pads to the next power of two at or
/// above four times the lag count, and evaluates the sum as a rectangle rule.
/// χ″ > 0 at f₁ for C = e^{−γτ′} sin(2πf₁τ′).
pub fn chi_imag(corr: &CorrelationMap, opts: &ChiOptions) -> Result<CorrelationMap> {
    let l = corr.lags();
    if l < 2 || corr.rows() == 0 {
        return Err(Error::InvalidParameter("correlation needs at least two lags".into()));
    }
    let dtau = corr.lag_axis[1] - corr.lag_axis[0];
    let w: Vec<f64> = (0..l).map(|j| 0.5 * (1.0 + (PI * j as f64 / (l - 1) as f64).cos())).collect();
    let n = match opts.mode {
        ChiMode::OneSided => next_pow2_at_least(4 * l),
        ChiMode::TwoSidedEven => next_pow2_at_least(4 * (2 * l - 1)),
    };
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let half = n / 2 + 1;
    let mut values = Vec::with_capacity(corr.rows() * half);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..corr.rows() {
        if !corr.valid[i] {
            values.extend(std::iter::repeat(0.0).take(half));
            continue;
        }
        let c = corr.correlation_row(i);
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for j in 0..l {
            buf[j] = Complex64::new(w[j] * c[j], 0.0);
            if opts.mode == ChiMode::TwoSidedEven && j > 0 {
                buf[n - j] = buf[j];
            }
        }
        fft.process(&mut buf);
        values.extend(buf[..half].iter().map(|x| -x.im * dtau));
    }
    let mut out = corr.clone();
    out.chi = Some(ChiMap {
        freq_axis: (0..half).map(|k| k as f64 / (n as f64 * dtau)).collect(),
        values,
        mode: opts.mode,
    });
    Ok(out)
}

/// Sign change of χ″ along one row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossing {
    pub drive_freq: f64,
    pub freq: f64,
}

/// Linearly interpolated zero crossings of χ″, row by row.
pub fn chi_zero_crossings(corr: &CorrelationMap) -> Result<Vec<ZeroCrossing>> {
    let chi = corr
        .chi
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("correlation map has no χ″ values".into()))?;
    let mut out = Vec::new();
    for i in 0..corr.rows() {
        if !corr.valid[i] {
            continue;
        }
        let row = chi.row(i);
        for k in 0..row.len() - 1 {
            let (a, b) = (row[k], row[k + 1]);
            if a * b < 0.0 {
                let f = chi.freq_axis[k] + a / (a - b) * (chi.freq_axis[k + 1] - chi.freq_axis[k]);
                out.push(ZeroCrossing { drive_freq: corr.row_axis[i], freq: f });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Scale;
    use proptest::prelude::*;

    fn intensity_map(rows: Vec<Vec<f64>>, dt: f64) -> Spectrogram {
        let cols = rows[0].len();
        Spectrogram::new(
            (0..rows.len()).map(|i| 3e9 + i as f64 * 1e7).collect(),
            (0..cols).map(|j| j as f64 * dt).collect(),
            ColumnAxis::Time,
            rows.concat(),
            Scale::Linear,
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn constant_intensity_gives_unity() {
        let m = intensity_map(vec![vec![0.7; 50]], 1e-9);
        let c = g2_map(&m, &G2Options::new(20e-9)).unwrap();
        assert!(c.g2_row(0).iter().all(|&g| g == 1.0));
        assert_eq!(c.lag_axis[0], 0.0);
    }

    #[test]
    fn alternating_toy_sequence() {
        let m = intensity_map(vec![[2.0, 0.0].repeat(10)], 1e-9);
        let c = g2_map(&m, &G2Options::new(1e-9)).unwrap();
        assert_eq!(c.g2_row(0), &[2.0, 0.0]);
    }

    #[test]
    fn masking_and_errors() {
        let m = intensity_map(vec![vec![1.0; 10], vec![0.0; 10]], 1e-9);
        let c = g2_map(&m, &G2Options::new(3e-9)).unwrap();
        assert_eq!(c.valid, vec![true, false]);
        assert!(c.g2_row(1).iter().all(|&g| g == 0.0 && g.is_finite()));
        assert!(g2_map(&m, &G2Options::new(10e-9)).is_err());
        let neg = intensity_map(vec![vec![1.0, -1.0, 1.0, 1.0]], 1e-9);
        assert!(g2_map(&neg, &G2Options::new(1e-9)).is_err());
    }

    proptest! {
        #[test]
        fn g2_invariant_under_scaling(v in prop::collection::vec(0.01f64..5.0, 40), c in 1e-3f64..1e3) {
            let a = g2_map(&intensity_map(vec![v.clone()], 1e-9), &G2Options::new(15e-9)).unwrap();
            let b = g2_map(&intensity_map(vec![v.iter().map(|x| c * x).collect()], 1e-9), &G2Options::new(15e-9)).unwrap();
            for (x, y) in a.g2.iter().zip(&b.g2) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs());
            }
        }
    }

    fn corr_from(c: Vec<f64>, dtau: f64) -> CorrelationMap {
        let l = c.len();
        CorrelationMap {
            row_axis: vec![4e9],
            lag_axis: (0..l).map(|k| k as f64 * dtau).collect(),
            g2: c.clone(),
            correlation: c,
            mean_intensity: vec![1.0],
            valid: vec![true],
            chi: None,
            metadata: Metadata::new(),
        }
    }

    #[test]
    fn even_correlation_has_no_imaginary_part() {
        let c: Vec<f64> = (0..300).map(|k| (-(k as f64) * 0.01).exp() * (k as f64 * 0.2).cos()).collect();
        let out = chi_imag(&corr_from(c, 1e-10), &ChiOptions { mode: ChiMode::TwoSidedEven }).unwrap();
        let chi = out.chi.unwrap();
        let scale: f64 = 300.0 * 1e-10;
        assert!(chi.values.iter().all(|v| v.abs() <= 1e-10 * scale));
    }

    /// Composite Gauss–Legendre quadrature of ∫₀^T w(τ) e^{−γτ} sin(ω₁τ) sin(ωτ) dτ.
    fn oracle(gamma: f64, w1: f64, t_max: f64, omega: f64) -> f64 {
        let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let panels = 4000;
        let h = t_max / panels as f64;
        let f = |t: f64| 0.5 * (1.0 + (PI * t / t_max).cos()) * (-gamma * t).exp() * (w1 * t).sin() * (omega * t).sin();
        let mut s = 0.0;
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(&weights) {
                s += w * f(mid + 0.5 * h * x);
            }
        }
        s * 0.5 * h
    }

    #[test]
    fn damped_sine_matches_quadrature() {
        let dtau = 0.1e-9;
        let (gamma, f1) = (1.0 / 150e-9, 60e6);
        let l = 4000;
        let c: Vec<f64> = (0..l).map(|k| { let t = k as f64 * dtau; (-gamma * t).exp() * (2.0 * PI * f1 * t).sin() }).collect();
        let t_max = (l - 1) as f64 * dtau;
        let out = chi_imag(&corr_from(c, dtau), &ChiOptions::default()).unwrap();
        let chi = out.chi.unwrap();
        let peak = chi.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in (0..chi.freq_axis.len()).step_by(97).take(60) {
            let want = oracle(gamma, 2.0 * PI * f1, t_max, 2.0 * PI * chi.freq_axis[k]);
            assert!((chi.values[k] - want).abs() <= 1e-6 * peak, "bin {k}: {} vs {want}", chi.values[k]);
        }
        let k1 = chi.freq_axis.iter().position(|&f| f >= f1).unwrap();
        assert!(chi.values[k1] > 0.0);
    }

    #[test]
    fn zero_crossings_are_interpolated() {
        let mut c = corr_from(vec![1.0, 0.5], 1e-9);
        c.chi = Some(ChiMap { freq_axis: vec![0.0, 1.0, 2.0, 3.0], values: vec![0.0, 1.0, -1.0, -2.0], mode: ChiMode::OneSided });
        let z = chi_zero_crossings(&c).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].freq - 1.5).abs() < 1e-15);
    }
}
