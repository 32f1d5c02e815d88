//! Floquet quasi-energies of the in-pulse Hamiltonian
//! H(t) = H0 + V e^{iΩt} + V† e^{−iΩt} in the extended (Sambe) space.
//!
//! A Floquet state is ψ(t) = e^{−iEt} u(t) with u(t) = Σ_m e^{imΩt} u^m.
//! The extended Hamiltonian acts on (…, u^{−1}, u^0, u^1, …) with diagonal
//! blocks H0 + mΩ, block (m, m−1) = V and block (m−1, m) = V†.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_dense, OperatorMatrix, ZERO};
use crate::model::{build_polarization_operator, build_static_hamiltonian, DrivePulse, EnsembleSpec};
use crate::special::bessel_j;

pub const DEFAULT_M_MAX: usize = 12;
/// Convergence tolerance on quasi-energies (Hz).
pub const DEFAULT_TOLERANCE: f64 = 0.1e6;
/// Default Lorentzian broadening of the response (Hz).
pub const DEFAULT_ETA: f64 = 1e6;
const DOUBLINGS: usize = 2;
const REPLICA_OVERLAP: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSpectrum {
    pub drive_freq: f64,
    /// Harmonic truncation M; modes m ∈ [−M, M].
    pub harmonics: usize,
    /// Folded into (−Ω/2, Ω/2], ascending (Hz).
    pub quasi_energies: Vec<f64>,
    /// Largest shift of any quasi-energy between truncations M and M − 1 (Hz).
    pub convergence_error: f64,
}

/// Extended Hamiltonian of dimension (2M+1)·dim. `h0` and `v` are in rad/s,
/// `drive_freq` in Hz.
pub fn build_extended_hamiltonian(
    h0: &OperatorMatrix,
    v: &OperatorMatrix,
    drive_freq: f64,
    m_max: usize,
) -> Result<OperatorMatrix> {
    if m_max < 1 {
        return Err(Error::InvalidParameter("m_max must be >= 1".into()));
    }
    if h0.dim() != v.dim() {
        return Err(Error::DimensionMismatch { expected: h0.dim(), found: v.dim() });
    }
    let d = h0.dim();
    let blocks = 2 * m_max + 1;
    let omega = TAU * drive_freq;
    let n = blocks * d;
    let mut out = OperatorMatrix::zeros(n);
    for b in 0..blocks {
        let m = b as f64 - m_max as f64;
        for i in 0..d {
            for j in 0..d {
                let mut h = h0.get(i, j);
                if i == j {
                    h += m * omega;
                }
                out.set(b * d + i, b * d + j, h);
                if b + 1 < blocks {
                    // row block b+1 (harmonic m+1) couples to column block b through V
                    out.set((b + 1) * d + i, b * d + j, v.get(i, j));
                    out.set(b * d + j, (b + 1) * d + i, v.get(i, j).conj());
                }
            }
        }
    }
    out.refresh_flag();
    Ok(out)
}

/// Coupling V of the drive term −E(t)·P = V e^{iΩt} + V† e^{−iΩt}, rad/s.
fn drive_coupling(spec: &EnsembleSpec, pulse: &DrivePulse) -> Result<OperatorMatrix> {
    Ok(build_polarization_operator(spec)?.scale(-0.5 * TAU * pulse.effective_amplitude()))
}

/// One representative per replica class with its Fourier components.
#[derive(Debug, Clone)]
pub struct FloquetModes {
    pub drive_freq: f64,
    pub harmonics: usize,
    dim: usize,
    /// Unfolded quasi-energies of the representatives (rad/s).
    energies: Vec<f64>,
    /// Extended-space eigenvectors, blocks ordered m = −M..M.
    vectors: Vec<Vec<Complex64>>,
}

impl FloquetModes {
    pub fn compute(spec: &EnsembleSpec, pulse: &DrivePulse, m_max: usize) -> Result<Self> {
        pulse.validate()?;
        let h0 = build_static_hamiltonian(spec)?;
        let v = drive_coupling(spec, pulse)?;
        let ext = build_extended_hamiltonian(&h0, &v, pulse.carrier, m_max)?;
        let d = h0.dim();
        let m = DMatrix::from_row_slice(ext.dim(), ext.dim(), ext.entries());
        let (vals, vecs) = eigh_dense(&m);
        let n = ext.dim();
        let omega = TAU * pulse.carrier;
        let col = |k: usize| -> Vec<Complex64> { (0..n).map(|i| vecs.get(i, k)).collect() };
        let center = |u: &[Complex64]| -> f64 { u[m_max * d..(m_max + 1) * d].iter().map(|c| c.norm_sqr()).sum() };

        let mut order: Vec<usize> = (0..n).collect();
        let weights: Vec<f64> = (0..n).map(|k| center(&col(k))).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));

        let mut energies = Vec::with_capacity(d);
        let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        for &k in &order {
            if energies.len() == d {
                break;
            }
            let u = col(k);
            let is_replica = energies.iter().zip(&vectors).any(|(&e, a): (&f64, &Vec<Complex64>)| {
                let shift = ((vals[k] - e) / omega).round();
                if (vals[k] - e - shift * omega).abs() > 1e-6 * omega {
                    return false;
                }
                shifted_overlap(a, &u, shift as i64, d) > REPLICA_OVERLAP
            });
            if !is_replica {
                energies.push(vals[k]);
                vectors.push(u);
            }
        }
        if energies.len() < d {
            return Err(Error::Numeric("could not isolate one Floquet state per replica class".into()));
        }
        Ok(Self { drive_freq: pulse.carrier, harmonics: m_max, dim: d, energies, vectors })
    }

    /// Folded quasi-energies in Hz, ascending.
    pub fn folded(&self) -> Vec<f64> {
        let omega = TAU * self.drive_freq;
        let mut out: Vec<f64> = self.energies.iter().map(|&e| fold(e, omega) / TAU).collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Unfolded quasi-energies of the representatives (Hz).
    pub fn energies(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e / TAU).collect()
    }

    /// Fourier component u^m_α, or `None` outside the truncation.
    fn component(&self, alpha: usize, m: i64) -> Option<&[Complex64]> {
        let b = m + self.harmonics as i64;
        if b < 0 || b > 2 * self.harmonics as i64 {
            return None;
        }
        let b = b as usize;
        Some(&self.vectors[alpha][b * self.dim..(b + 1) * self.dim])
    }

    /// d^k_{αβ} = (1/T)∫ e^{ikΩt} ⟨u_α(t)|P|u_β(t)⟩ dt = Σ_m ⟨u^m_α|P|u^{m−k}_β⟩.
    pub fn dipole_element(&self, p: &OperatorMatrix, k: i64, alpha: usize, beta: usize) -> Complex64 {
        let mm = self.harmonics as i64;
        let mut s = ZERO;
        for m in -mm..=mm {
            let (Some(ua), Some(ub)) = (self.component(alpha, m), self.component(beta, m - k)) else { continue };
            let pu = p.apply(ub);
            s += ua.iter().zip(&pu).map(|(a, b)| a.conj() * b).sum::<Complex64>();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// |⟨S_k a|b⟩| where (S_k a)^m = a^{m−k}.
fn shifted_overlap(a: &[Complex64], b: &[Complex64], k: i64, d: usize) -> f64 {
    let blocks = (a.len() / d) as i64;
    let mut s = ZERO;
    for mb in 0..blocks {
        let ma = mb - k;
        if ma < 0 || ma >= blocks {
            continue;
        }
        let (ma, mb) = (ma as usize, mb as usize);
        s += a[ma * d..(ma + 1) * d].iter().zip(&b[mb * d..(mb + 1) * d]).map(|(x, y)| x.conj() * y).sum::<Complex64>();
    }
    s.norm()
}

/// Folds into (−Ω/2, Ω/2].
pub fn fold(e: f64, omega: f64) -> f64 {
    let mut x = e - omega * (e / omega).round();
    if x <= -0.5 * omega {
        x += omega;
    }
    if x > 0.5 * omega {
        x -= omega;
    }
    x
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Largest distance from any value in one set to the nearest value of the other, on the circle.
fn matched_error(a: &[f64], b: &[f64], period: f64) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&p| y.iter().map(|&q| circular_distance(p, q, period)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Converged Floquet modes, doubling the truncation up to twice.
pub fn converged_modes(
    spec: &EnsembleSpec,
    pulse: &DrivePulse,
    m_max: usize,
    tol: f64,
) -> Result<(FloquetModes, f64)> {
    if m_max < 2 {
        return Err(Error::InvalidParameter("m_max must be >= 2".into()));
    }
    let mut m = m_max;
    let mut last_err = f64::INFINITY;
    for attempt in 0..=DOUBLINGS {
        let hi = FloquetModes::compute(spec, pulse, m)?;
        let lo = FloquetModes::compute(spec, pulse, m - 1)?;
        last_err = matched_error(&hi.folded(), &lo.folded(), pulse.carrier);
        if last_err <= tol {
            return Ok((hi, last_err));
        }
        if attempt < DOUBLINGS {
            m *= 2;
        }
    }
    Err(Error::FloquetNotConverged { drive_freq: pulse.carrier, error: last_err, m_max: m })
}

pub fn quasi_energies(spec: &EnsembleSpec, pulse: &DrivePulse, m_max: usize) -> Result<FloquetSpectrum> {
    quasi_energies_with_tol(spec, pulse, m_max, DEFAULT_TOLERANCE)
}

pub fn quasi_energies_with_tol(
    spec: &EnsembleSpec,
    pulse: &DrivePulse,
    m_max: usize,
    tol: f64,
) -> Result<FloquetSpectrum> {
    let (modes, err) = converged_modes(spec, pulse, m_max, tol)?;
    Ok(FloquetSpectrum {
        drive_freq: pulse.carrier,
        harmonics: modes.harmonics,
        quasi_energies: modes.folded(),
        convergence_error: err,
    })
}

/// Effective n-photon coupling 2A·J_n(2A/Ω) (Hz), with Ω/2π = `drive_freq`.
pub fn n_photon_coupling(amplitude: f64, drive_freq: f64, n: i32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter(format!("photon number must be >= 1, got {n}")));
    }
    if !(drive_freq > 0.0) {
        return Err(Error::InvalidParameter(format!("drive frequency must be > 0, got {drive_freq}")));
    }
    Ok(2.0 * amplitude * bessel_j(n, 2.0 * amplitude / drive_freq))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetResponse {
    /// Hz.
    pub omega_grid: Vec<f64>,
    /// χ_nm on the grid, arbitrary units.
    pub chi_nm: Vec<Complex64>,
    /// Hz.
    pub eta: f64,
    pub n: i64,
    pub m: i64,
    /// Pole positions E_α − E_β − lΩ carrying nonzero weight (Hz).
    pub poles: Vec<f64>,
}

/// χ_nm(ω) = Σ_{α,β,l} d^l_{αβ} d^{m−n−l}_{βα} / (ω − (E_α − E_β − lΩ) + iη).
///
/// The pole term d^l_{αβ} multiplies e^{i(E_α−E_β−lΩ)t} in ⟨ψ_α(t)|P|ψ_β(t)⟩,
/// which keeps the sum unchanged when a representative is swapped for a
/// replica shifted by a multiple of Ω.
pub fn floquet_response(
    spec: &EnsembleSpec,
    pulse: &DrivePulse,
    m_max: usize,
    omega_grid: &[f64],
    eta: f64,
    n: i64,
    m: i64,
) -> Result<FloquetResponse> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    let (modes, _) = converged_modes(spec, pulse, m_max, DEFAULT_TOLERANCE)?;
    let p = build_polarization_operator(spec)?;
    let e = modes.energies();
    let big_m = modes.harmonics as i64;
    let omega = pulse.carrier;
    let mut terms: Vec<(f64, Complex64)> = Vec::new();
    for a in 0..modes.len() {
        for b in 0..modes.len() {
            for l in -big_m..=big_m {
                let w = modes.dipole_element(&p, l, a, b) * modes.dipole_element(&p, m - n - l, b, a);
                if w.norm() > 1e-14 {
                    terms.push((e[a] - e[b] - l as f64 * omega, w));
                }
            }
        }
    }
    let chi_nm = omega_grid
        .iter()
        .map(|&w| terms.iter().map(|&(pole, weight)| weight / Complex64::new(w - pole, eta)).sum())
        .collect();
    let mut poles: Vec<f64> = terms.iter().map(|t| t.0).collect();
    poles.sort_by(f64::total_cmp);
    poles.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * omega);
    Ok(FloquetResponse { omega_grid: omega_grid.to_vec(), chi_nm, eta, n, m, poles })
}

/// Quasi-energies over a set of drive frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloquetSweep {
    pub drive_freqs: Vec<f64>,
    /// Row-major, one row of 2^N folded quasi-energies per drive frequency (Hz).
    pub quasi_energies: Vec<f64>,
    pub convergence_error: Vec<f64>,
    pub harmonics: Vec<usize>,
}

impl FloquetSweep {
    pub fn levels(&self) -> usize {
        if self.drive_freqs.is_empty() {
            0
        } else {
            self.quasi_energies.len() / self.drive_freqs.len()
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let l = self.levels();
        &self.quasi_energies[i * l..(i + 1) * l]
    }
}

/// Quasi-energies at each frequency, computed on the current rayon pool and
/// assembled in input order.
pub fn floquet_sweep(spec: &EnsembleSpec, pulse: &DrivePulse, freqs: &[f64], m_max: usize) -> Result<FloquetSweep> {
    let rows: Vec<Result<FloquetSpectrum>> = freqs
        .par_iter()
        .map(|&f| {
            quasi_energies(spec, &pulse.with_carrier(f), m_max)
                .map_err(|e| Error::SweepPoint { freq: f, source: Box::new(e) })
        })
        .collect();
    let mut out = FloquetSweep {
        drive_freqs: freqs.to_vec(),
        quasi_energies: Vec::new(),
        convergence_error: Vec::new(),
        harmonics: Vec::new(),
    };
    for r in rows {
        let s = r?;
        out.quasi_energies.extend(s.quasi_energies);
        out.convergence_error.push(s.convergence_error);
        out.harmonics.push(s.harmonics);
    }
    Ok(out)
}
