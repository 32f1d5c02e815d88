//! Ideal rectangular-waveguide modes and drive-amplitude flattening.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GainTable;

/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideGeometry {
    /// Broad-wall width (m).
    pub a: f64,
    /// Narrow-wall height (m).
    pub b: f64,
}

impl WaveguideGeometry {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        let g = Self { a, b };
        g.validate()?;
        Ok(g)
    }

    /// WR-229: 58.17 mm × 29.08 mm.
    pub fn wr229() -> Self {
        Self { a: 58.17e-3, b: 29.08e-3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !(self.a >= self.b) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "waveguide needs a >= b > 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Cutoff wavenumber k_c (rad/m) of mode (m, n).
    pub fn cutoff_wavenumber(&self, m: u32, n: u32) -> f64 {
        (m as f64 * PI / self.a).hypot(n as f64 * PI / self.b)
    }

    pub fn cutoff_frequency(&self, m: u32, n: u32) -> f64 {
        C / TAU * self.cutoff_wavenumber(m, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeCutoff {
    pub m: u32,
    pub n: u32,
    /// Hz.
    pub f_c: f64,
}

/// Cutoffs of all modes with m ≤ m_max, n ≤ n_max except (0, 0), ascending.
pub fn mode_cutoffs(geom: &WaveguideGeometry, m_max: u32, n_max: u32) -> Result<Vec<ModeCutoff>> {
    geom.validate()?;
    if m_max < 1 || n_max < 1 {
        return Err(Error::InvalidParameter("m_max and n_max must be >= 1".into()));
    }
    let mut out: Vec<ModeCutoff> = (0..=m_max)
        .flat_map(|m| (0..=n_max).map(move |n| (m, n)))
        .filter(|&(m, n)| (m, n) != (0, 0))
        .map(|(m, n)| ModeCutoff { m, n, f_c: geom.cutoff_frequency(m, n) })
        .collect();
    out.sort_by(|x, y| x.f_c.total_cmp(&y.f_c).then(x.m.cmp(&y.m)).then(x.n.cmp(&y.n)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    /// |β| (rad/m); the attenuation constant when evanescent.
    pub beta: f64,
    pub evanescent: bool,
}

/// β = sqrt(k² − k_c²) with k = 2πf/c.
pub fn propagation_constant(geom: &WaveguideGeometry, f: f64, m: u32, n: u32) -> Result<Propagation> {
    geom.validate()?;
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::InvalidParameter(format!("frequency must be > 0, got {f}")));
    }
    let k = TAU * f / C;
    let kc = geom.cutoff_wavenumber(m, n);
    // (k − k_c)(k + k_c) avoids cancellation near cutoff
    let d = (k - kc) * (k + kc);
    Ok(Propagation { beta: d.abs().sqrt(), evanescent: d < 0.0 })
}

/// Tabulated mean field over the sample plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile {
    pub freq_hz: Vec<f64>,
    pub mean_field: Vec<f64>,
    /// Field level the gains flatten to.
    pub target: f64,
}

impl FieldProfile {
    pub fn new(freq_hz: Vec<f64>, mean_field: Vec<f64>, target: f64) -> Result<Self> {
        let p = Self { freq_hz, mean_field, target };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.freq_hz.is_empty() || self.freq_hz.len() != self.mean_field.len() {
            return Err(Error::InvalidParameter("field profile needs matching, non-empty columns".into()));
        }
        crate::analysis::check_axis("profile frequency axis", &self.freq_hz)?;
        if self.mean_field.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("field profile values must be strictly positive".into()));
        }
        if !(self.target > 0.0) || !self.target.is_finite() {
            return Err(Error::InvalidParameter("flattening target must be > 0".into()));
        }
        Ok(())
    }

    /// Profile after multiplying by `gains` at the tabulated points.
    pub fn apply(&self, gains: &GainTable) -> Result<FieldProfile> {
        let field = self.freq_hz.iter().zip(&self.mean_field).map(|(&f, &v)| v * gains.at(f)).collect();
        FieldProfile::new(self.freq_hz.clone(), field, self.target)
    }
}

/// scale(f) = target / mean_field(f) at the tabulated frequencies.
pub fn flatten_gain(profile: &FieldProfile) -> Result<GainTable> {
    profile.validate()?;
    let gain = profile.mean_field.iter().map(|v| profile.target / v).collect();
    GainTable::new(profile.freq_hz.clone(), gain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wr229_te10() {
        let g = WaveguideGeometry::wr229();
        let modes = mode_cutoffs(&g, 3, 2).unwrap();
        assert_eq!((modes[0].m, modes[0].n), (1, 0));
        // oracle: c / (2a)
        let want = C / (2.0 * 58.17e-3);
        assert!((modes[0].f_c - want).abs() < 1e-3);
        assert!((modes[0].f_c - 2.577e9).abs() < 1e6);
        assert!(modes.iter().all(|m| (m.m, m.n) != (0, 0)));
        assert!(modes.windows(2).all(|w| w[0].f_c <= w[1].f_c));
    }

    #[test]
    fn te20_doubles_te10() {
        let g = WaveguideGeometry::wr229();
        assert_eq!(g.cutoff_frequency(2, 0), 2.0 * g.cutoff_frequency(1, 0));
    }

    #[test]
    fn geometry_rejected() {
        assert!(WaveguideGeometry::new(0.01, 0.02).is_err());
        assert!(WaveguideGeometry::new(0.01, 0.0).is_err());
        assert!(mode_cutoffs(&WaveguideGeometry::wr229(), 0, 1).is_err());
    }

    #[test]
    fn beta_limits() {
        let g = WaveguideGeometry::wr229();
        let fc = g.cutoff_frequency(1, 0);
        let p = propagation_constant(&g, fc, 1, 0).unwrap();
        assert!(p.beta.abs() < 1e-6 * TAU * fc / C);
        let f = 1e15;
        let p = propagation_constant(&g, f, 1, 0).unwrap();
        assert!((p.beta / (TAU * f / C) - 1.0).abs() < 1e-9);
        let p = propagation_constant(&g, 2e9, 1, 0).unwrap();
        assert!(p.evanescent);
        let kc = PI / g.a;
        let k = TAU * 2e9 / C;
        let alpha = (kc * kc - k * k).sqrt();
        assert!((p.beta - alpha).abs() < 1e-12 * alpha);
        assert!((1.0 / p.beta).is_finite());
        assert!(propagation_constant(&g, 0.0, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn dispersion_relation(f in 2.6e9f64..40e9, m in 0u32..3, n in 0u32..3) {
            let g = WaveguideGeometry::wr229();
            let kc = g.cutoff_wavenumber(m, n);
            let k = TAU * f / C;
            prop_assume!(k > kc);
            let p = propagation_constant(&g, f, m, n).unwrap();
            prop_assert!(!p.evanescent);
            prop_assert!((p.beta * p.beta + kc * kc - k * k).abs() <= 1e-12 * k * k);
        }

        #[test]
        fn cutoff_monotone(a in 0.01f64..0.1, ratio in 0.2f64..1.0, m in 0u32..5, n in 0u32..5) {
            let g = WaveguideGeometry::new(a, a * ratio).unwrap();
            prop_assert!(g.cutoff_frequency(m + 1, n) >= g.cutoff_frequency(m, n));
            prop_assert!(g.cutoff_frequency(m, n + 1) >= g.cutoff_frequency(m, n));
        }

        #[test]
        fn reflattening_gives_unit_gain(field in prop::collection::vec(0.05f64..20.0, 2..40), target in 0.1f64..10.0) {
            let freqs = (0..field.len()).map(|k| 3e9 + k as f64 * 5e7).collect();
            let p = FieldProfile::new(freqs, field, target).unwrap();
            let flat = p.apply(&flatten_gain(&p).unwrap()).unwrap();
            let max = flat.mean_field.iter().cloned().fold(f64::MIN, f64::max);
            let min = flat.mean_field.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!((max / min - 1.0).abs() <= 1e-12);
            let again = flatten_gain(&flat).unwrap();
            prop_assert!(again.gain.iter().all(|g| (g - 1.0).abs() <= 1e-12));
        }
    }

    #[test]
    fn reciprocal_gains() {
        let p = FieldProfile::new(vec![3e9, 4e9, 5e9], vec![1.0, 2.0, 4.0], 1.0).unwrap();
        assert_eq!(flatten_gain(&p).unwrap().gain, vec![1.0, 0.5, 0.25]);
        let c = FieldProfile::new(vec![3e9, 4e9], vec![2.0, 2.0], 1.0).unwrap();
        assert_eq!(flatten_gain(&c).unwrap().gain, vec![0.5, 0.5]);
        assert!(FieldProfile::new(vec![3e9, 4e9], vec![1.0, 0.0], 1.0).is_err());
    }
}
