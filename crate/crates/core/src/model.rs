//! TLS ensemble description and operator construction.
//!
//! User-facing quantities are linear frequencies in Hz. Every operator built
//! here is expressed in angular units (rad/s), i.e. already multiplied by 2π,
//! so that it can be fed straight into the equations of motion.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{pauli, OperatorMatrix};

pub const DEFAULT_MAX_DEFECTS: usize = 8;

/// A single tunneling defect: asymmetry `epsilon`, tunneling amplitude `delta`
/// (both Hz) and a dimensionless dipole weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlsParams {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default = "default_dipole")]
    pub dipole: f64,
}

fn default_dipole() -> f64 {
    1.0
}

impl TlsParams {
    pub fn new(epsilon: f64, delta: f64) -> Self {
        Self { epsilon, delta, dipole: 1.0 }
    }

    /// A defect with level splitting `freq` and a purely transverse dipole
    /// (symmetric double well, θ = π/2).
    pub fn transverse(freq: f64) -> Self {
        Self::new(0.0, freq)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || !self.delta.is_finite() || !self.dipole.is_finite() {
            return Err(Error::InvalidParameter("TLS parameters must be finite".into()));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tunneling amplitude must be >= 0, got {}",
                self.delta
            )));
        }
        if self.epsilon == 0.0 && self.delta == 0.0 {
            return Err(Error::InvalidParameter("(epsilon, delta) = (0, 0) has no splitting".into()));
        }
        Ok(())
    }

    pub fn splitting(&self) -> f64 {
        self.epsilon.hypot(self.delta)
    }

    pub fn mixing_angle(&self) -> f64 {
        self.delta.atan2(self.epsilon)
    }
}

/// Level splitting and mixing angle of one defect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splitting {
    /// E = sqrt(ε² + Δ²), Hz.
    pub energy: f64,
    /// θ = atan2(Δ, ε), radians.
    pub theta: f64,
}

pub fn tls_splitting(p: &TlsParams) -> Result<Splitting> {
    p.validate()?;
    Ok(Splitting { energy: p.splitting(), theta: p.mixing_angle() })
}

/// Description of a random ensemble. Ranges are in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disorder {
    /// Range of the drawn level splittings.
    pub epsilon_range: [f64; 2],
    pub j_range: [f64; 2],
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub defects: Vec<TlsParams>,
    /// Symmetric N x N coupling matrix J_ij in Hz with zero diagonal. May be
    /// left empty for an uncoupled ensemble.
    #[serde(default)]
    pub couplings: Vec<Vec<f64>>,
    /// Collective decay rate Γ in Hz.
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<Disorder>,
    #[serde(default = "default_max_defects")]
    pub max_defects: usize,
}

fn default_max_defects() -> usize {
    DEFAULT_MAX_DEFECTS
}

impl EnsembleSpec {
    pub fn new(defects: Vec<TlsParams>) -> Self {
        Self {
            defects,
            couplings: Vec::new(),
            gamma: 0.0,
            disorder: None,
            max_defects: DEFAULT_MAX_DEFECTS,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Sets J_ij = J_ji = `value` (Hz).
    pub fn with_coupling(mut self, i: usize, j: usize, value: f64) -> Self {
        let n = self.defects.len();
        if self.couplings.is_empty() {
            self.couplings = vec![vec![0.0; n]; n];
        }
        self.couplings[i][j] = value;
        self.couplings[j][i] = value;
        self
    }

    pub fn with_disorder(mut self, disorder: Disorder) -> Self {
        self.disorder = Some(disorder);
        self
    }

    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.defects.len()
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if self.couplings.is_empty() {
            0.0
        } else {
            self.couplings[i][j]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.defects.len();
        if n == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one defect".into()));
        }
        if n > self.max_defects {
            return Err(Error::DimensionCap { defects: n, cap: self.max_defects });
        }
        for d in &self.defects {
            d.validate()?;
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !self.couplings.is_empty() {
            if self.couplings.len() != n || self.couplings.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidParameter(format!("couplings must be {n} x {n}")));
            }
            for i in 0..n {
                if self.couplings[i][i] != 0.0 {
                    return Err(Error::InvalidParameter("couplings must have zero diagonal".into()));
                }
                for j in 0..i {
                    let (a, b) = (self.couplings[i][j], self.couplings[j][i]);
                    if !a.is_finite() || a != b {
                        return Err(Error::InvalidParameter(format!(
                            "couplings must be symmetric and finite (J[{i}][{j}] = {a}, J[{j}][{i}] = {b})"
                        )));
                    }
                }
            }
        }
        if let Some(d) = &self.disorder {
            for (name, r) in [("epsilon_range", d.epsilon_range), ("j_range", d.j_range)] {
                if !(r[0] <= r[1]) || !r[0].is_finite() || !r[1].is_finite() {
                    return Err(Error::InvalidParameter(format!("{name} must satisfy lo <= hi, got {r:?}")));
                }
            }
        }
        Ok(())
    }

    /// Single-defect level splittings E_j in Hz.
    pub fn splittings(&self) -> Vec<f64> {
        self.defects.iter().map(TlsParams::splitting).collect()
    }
}

/// H0 = Σ_j (E_j/2) σz^(j) + Σ_{i<j} J_ij σx^(i) σx^(j), in rad/s.
pub fn build_static_hamiltonian(spec: &EnsembleSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let n = spec.len();
    let mut h = OperatorMatrix::zeros(spec.dim());
    let sz = pauli::sigma_z();
    let sx = pauli::sigma_x();
    for (j, d) in spec.defects.iter().enumerate() {
        h = h.add(&pauli::embed(&sz, j, n).scale(0.5 * TAU * d.splitting()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let jij = spec.coupling(i, j);
            if jij != 0.0 {
                let xx = pauli::embed(&sx, i, n).matmul(&pauli::embed(&sx, j, n));
                h = h.add(&xx.scale(TAU * jij));
            }
        }
    }
    h.refresh_flag();
    Ok(h)
}

/// Collective polarization P = Σ_j p_j (cos θ_j σz^(j) + sin θ_j σx^(j)).
/// Dimensionless: the drive amplitude carries the frequency scale.
pub fn build_polarization_operator(spec: &EnsembleSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let n = spec.len();
    let mut p = OperatorMatrix::zeros(spec.dim());
    for (j, d) in spec.defects.iter().enumerate() {
        let theta = d.mixing_angle();
        let local = pauli::sigma_z()
            .scale(theta.cos())
            .add(&pauli::sigma_x().scale(theta.sin()))
            .scale(d.dipole);
        p = p.add(&pauli::embed(&local, j, n));
    }
    p.refresh_flag();
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperators {
    pub s_minus: OperatorMatrix,
    pub s_plus: OperatorMatrix,
}

/// S± = Σ_j σ±^(j).
pub fn build_collective_jump_operators(spec: &EnsembleSpec) -> Result<JumpOperators> {
    spec.validate()?;
    let n = spec.len();
    let mut s_minus = OperatorMatrix::zeros(spec.dim());
    for j in 0..n {
        s_minus = s_minus.add(&pauli::embed(&pauli::sigma_minus(), j, n));
    }
    s_minus.refresh_flag();
    let s_plus = s_minus.adjoint();
    Ok(JumpOperators { s_minus, s_plus })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Envelope {
    Square,
    /// Constant-amplitude cosine carrier gated by a rectangular window.
    SquareCosine,
}

/// Frequency-dependent amplitude scale, linearly interpolated and clamped to
/// the end values outside the tabulated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainTable {
    pub freq_hz: Vec<f64>,
    pub gain: Vec<f64>,
}

impl GainTable {
    pub fn new(freq_hz: Vec<f64>, gain: Vec<f64>) -> Result<Self> {
        let t = Self { freq_hz, gain };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.freq_hz.is_empty() || self.freq_hz.len() != self.gain.len() {
            return Err(Error::InvalidParameter("gain table needs matching, non-empty columns".into()));
        }
        if self.freq_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("gain table frequencies must be strictly increasing".into()));
        }
        if self.gain.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter("gain table entries must be strictly positive".into()));
        }
        Ok(())
    }

    pub fn at(&self, f: f64) -> f64 {
        let xs = &self.freq_hz;
        let ys = &self.gain;
        if f <= xs[0] {
            return ys[0];
        }
        let last = xs.len() - 1;
        if f >= xs[last] {
            return ys[last];
        }
        let k = xs.partition_point(|&x| x <= f) - 1;
        let w = (f - xs[k]) / (xs[k + 1] - xs[k]);
        ys[k] + w * (ys[k + 1] - ys[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivePulse {
    /// Carrier frequency Ω/2π, Hz.
    pub carrier: f64,
    /// Drive amplitude A, Hz.
    pub amplitude: f64,
    /// Pulse length τ_p, s.
    pub duration: f64,
    #[serde(default = "default_envelope")]
    pub envelope: Envelope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_table: Option<GainTable>,
}

fn default_envelope() -> Envelope {
    Envelope::SquareCosine
}

impl DrivePulse {
    pub fn new(carrier: f64, amplitude: f64, duration: f64) -> Self {
        Self { carrier, amplitude, duration, envelope: Envelope::SquareCosine, gain_table: None }
    }

    pub fn with_carrier(&self, carrier: f64) -> Self {
        Self { carrier, ..self.clone() }
    }

    pub fn with_duration(&self, duration: f64) -> Self {
        Self { duration, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier > 0.0) || !self.carrier.is_finite() {
            return Err(Error::InvalidParameter(format!("carrier must be > 0, got {}", self.carrier)));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!("duration must be > 0, got {}", self.duration)));
        }
        if let Some(t) = &self.gain_table {
            t.validate()?;
        }
        Ok(())
    }

    /// Amplitude after the gain table has been applied at the carrier (Hz).
    pub fn effective_amplitude(&self) -> f64 {
        let g = self.gain_table.as_ref().map_or(1.0, |t| t.at(self.carrier));
        self.amplitude * g
    }

    /// Field E(t) in Hz: A_eff cos(Ω t) inside [0, τ_p], zero afterwards.
    pub fn field(&self, t: f64) -> f64 {
        if t <= self.duration {
            self.effective_amplitude() * (TAU * self.carrier * t).cos()
        } else {
            0.0
        }
    }
}

/// H(t) = H0 − P·E(t) in rad/s (lab frame, no rotating-wave approximation).
pub fn driven_hamiltonian_at(spec: &EnsembleSpec, pulse: &DrivePulse, t: f64) -> Result<OperatorMatrix> {
    pulse.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be >= 0, got {t}")));
    }
    let h0 = build_static_hamiltonian(spec)?;
    let field = pulse.field(t);
    if field == 0.0 {
        return Ok(h0);
    }
    let p = build_polarization_operator(spec)?;
    Ok(h0.sub(&p.scale(TAU * field)))
}

/// Draws a concrete ensemble from `spec.disorder`.
///
/// Level splittings are drawn from `epsilon_range` and assigned so that each
/// template defect keeps its mixing angle: a template with Δ = 0 receives the
/// draw as its asymmetry ε, a symmetric-well template (ε = 0) receives it as Δ.
/// Couplings J_ij (i < j) are drawn from `j_range` and symmetrized. The draw
/// order is all splittings first, then couplings in row-major upper-triangle
/// order, from a ChaCha8 stream seeded with `seed`.
pub fn sample_disorder(spec: &EnsembleSpec) -> Result<EnsembleSpec> {
    let disorder = spec
        .disorder
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("ensemble has no disorder description".into()))?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(disorder.seed);
    let n = spec.len();
    let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| if r[0] == r[1] { r[0] } else { rng.gen_range(r[0]..r[1]) };
    let defects = spec
        .defects
        .iter()
        .map(|d| {
            let e = draw(&mut rng, disorder.epsilon_range);
            let theta = d.mixing_angle();
            // exact zeros for the two common orientations
            let (eps, delta) = if d.delta == 0.0 {
                (e, 0.0)
            } else if d.epsilon == 0.0 {
                (0.0, e.abs())
            } else {
                (e * theta.cos(), (e * theta.sin()).abs())
            };
            TlsParams { epsilon: eps, delta, dipole: d.dipole }
        })
        .collect();
    let mut couplings = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = draw(&mut rng, disorder.j_range);
            couplings[i][j] = v;
            couplings[j][i] = v;
        }
    }
    let out = EnsembleSpec {
        defects,
        couplings,
        gamma: spec.gamma,
        disorder: None,
        max_defects: spec.max_defects,
    };
    out.validate()?;
    Ok(out)
}

/// Returns the ensemble to simulate: the disorder draw when a description is
/// present, the spec itself otherwise.
pub fn concretize(spec: &EnsembleSpec) -> Result<EnsembleSpec> {
    if spec.disorder.is_some() {
        sample_disorder(spec)
    } else {
        spec.validate()?;
        Ok(spec.clone())
    }
}

/// Single-excitation transition frequencies of H0 (Hz): E_k − E_ground for the
/// N eigenstates above the ground state that carry one excitation in the
/// uncoupled limit. These are the frequencies the ring-down features converge to.
pub fn bare_transition_frequencies(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    let h0 = build_static_hamiltonian(spec)?;
    let (vals, vecs) = h0.eigh();
    let n = spec.len();
    let dim = spec.dim();
    // Excitation number of basis index b: number of zero bits (bit 1 = ground).
    let exc = |b: usize| n - (b.count_ones() as usize);
    let mut single = Vec::new();
    for k in 0..dim {
        let w1: f64 = (0..dim).filter(|&b| exc(b) == 1).map(|b| vecs.get(b, k).norm_sqr()).sum();
        if w1 > 0.5 {
            single.push((vals[k] - vals[0]) / TAU);
        }
    }
    single.sort_by(f64::total_cmp);
    Ok(single)
}

/// Eigenvalues of H0 in Hz, ascending.
pub fn eigenfrequencies(spec: &EnsembleSpec) -> Result<Vec<f64>> {
    let (vals, _) = build_static_hamiltonian(spec)?.eigh();
    Ok(vals.into_iter().map(|v| v / TAU).collect())
}

/// Ground state |g...g> as a state vector.
pub fn all_ground_vector(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[dim - 1] = Complex64::new(1.0, 0.0);
    v
}
