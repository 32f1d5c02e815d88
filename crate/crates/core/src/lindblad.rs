//! Density-matrix propagation under the collective-decay Lindblad equation
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Γ (2 S₋ρS₊ − S₊S₋ρ − ρS₊S₋)
//! ```
//!
//! integrated with fixed-step classical RK4 in the lab frame.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::TimeTrace;
use crate::error::{Error, Result};
use crate::linalg::{matmul_into, OperatorMatrix, I, ZERO};
use crate::model::{
    build_collective_jump_operators, build_polarization_operator, build_static_hamiltonian, DrivePulse,
    EnsembleSpec,
};

/// Steps per carrier period used when no step is given.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 50.0;
/// Coarsest accepted step, in steps per carrier period.
pub const MIN_STEPS_PER_PERIOD: f64 = 20.0;
/// Target spacing of recorded observables (s).
pub const DEFAULT_RECORD_SPACING: f64 = 0.1e-9;
/// Steps between Hermitian re-symmetrizations of ρ.
pub const RESYMMETRIZE_EVERY: usize = 1000;

const TRACE_TOL: f64 = 1e-8;
const HERMITIAN_STATE_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_operator(m: OperatorMatrix) -> Self {
        let dim = m.dim();
        Self { dim, entries: m.into_entries() }
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// |ψ><ψ| for a normalized state vector.
    pub fn pure(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        Self { dim, entries }
    }

    /// Computational basis state |b><b|.
    pub fn basis(dim: usize, b: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        entries[b * dim + b] = Complex64::new(1.0, 0.0);
        Self { dim, entries }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, entries }
    }

    /// Lowest eigenvector of H0.
    pub fn ground_state(spec: &EnsembleSpec) -> Result<Self> {
        let (_, vecs) = build_static_hamiltonian(spec)?.eigh();
        let psi: Vec<_> = (0..spec.dim()).map(|i| vecs.get(i, 0)).collect();
        Ok(Self::pure(&psi))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn to_operator(&self) -> OperatorMatrix {
        OperatorMatrix::from_entries(self.dim, self.entries.clone()).expect("square by construction")
    }

    /// Tr(O ρ).
    pub fn expectation(&self, op: &OperatorMatrix) -> Complex64 {
        trace_product(op.entries(), &self.entries, self.dim)
    }
}

/// Tr(A B) for row-major n x n matrices.
fn trace_product(a: &[Complex64], b: &[Complex64], n: usize) -> Complex64 {
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..n {
            s += a[i * n + k] * b[k * n + i];
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateReport {
    pub fn is_physical(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.hermiticity_error <= HERMITIAN_STATE_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

pub fn validate_state(rho: &DensityMatrix) -> StateReport {
    let n = rho.dim;
    let tr: Complex64 = (0..n).map(|i| rho.entries[i * n + i]).sum();
    let mut herm = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((rho.get(i, j) - rho.get(j, i).conj()).norm());
        }
    }
    let sym = OperatorMatrix::from_fn(n, |i, j| 0.5 * (rho.get(i, j) + rho.get(j, i).conj()));
    let (vals, _) = sym.eigh();
    StateReport {
        trace_error: (tr - 1.0).norm(),
        hermiticity_error: herm,
        min_eigenvalue: vals[0],
    }
}

/// Reference evaluation of the generator with dense products (Γ in Hz).
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &OperatorMatrix,
    s_minus: &OperatorMatrix,
    s_plus: &OperatorMatrix,
    gamma: f64,
) -> Result<OperatorMatrix> {
    let n = rho.dim();
    for d in [h.dim(), s_minus.dim(), s_plus.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let r = rho.to_operator();
    let g = TAU * gamma;
    let comm = h.matmul(&r).sub(&r.matmul(h)).scale_complex(-I);
    let n_op = s_plus.matmul(s_minus);
    let jump = s_minus.matmul(&r).matmul(s_plus).scale(2.0);
    let anti = n_op.matmul(&r).add(&r.matmul(&n_op));
    Ok(comm.add(&jump.sub(&anti).scale(g)))
}

/// Options for [`evolve`].
#[derive(Debug, Clone, Default)]
pub struct EvolveOptions {
    /// Requested step (s); defaults to 1/(50·carrier). The step actually used
    /// is shrunk so that the pulse length is a whole number of steps.
    pub dt: Option<f64>,
    /// Steps between recorded samples; defaults to max(1, floor(0.1 ns / dt)).
    pub record_stride: Option<usize>,
    pub record_dipole: bool,
    /// Initial state; defaults to the ground state of H0.
    pub rho0: Option<DensityMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Tr(S₊S₋ ρ(t)).
    pub population: Vec<f64>,
    /// Tr(P ρ(t)), when requested.
    pub dipole: Option<Vec<f64>>,
    pub final_state: DensityMatrix,
    /// Integration step actually used (s).
    pub dt: f64,
    pub record_stride: usize,
    /// Index into `times` of the sample closest to the end of the pulse.
    pub pulse_off_index: usize,
}

impl EvolutionResult {
    /// Population record as an intensity trace.
    pub fn population_trace(&self) -> Result<TimeTrace> {
        TimeTrace::intensity(0.0, self.dt * self.record_stride as f64, self.population.clone())
    }
}

/// Fixed time grid of one propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub pulse_steps: usize,
    pub total_steps: usize,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(pulse: &DrivePulse, t_end: f64, dt: Option<f64>, stride: Option<usize>) -> Result<Self> {
        pulse.validate()?;
        if !(t_end >= pulse.duration) {
            return Err(Error::InvalidParameter(format!(
                "t_end ({t_end:e} s) must not be shorter than the pulse ({:e} s)",
                pulse.duration
            )));
        }
        let max_dt = 1.0 / (MIN_STEPS_PER_PERIOD * pulse.carrier);
        let requested = dt.unwrap_or(1.0 / (DEFAULT_STEPS_PER_PERIOD * pulse.carrier));
        if !(requested > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {requested}")));
        }
        if requested > max_dt * (1.0 + 1e-12) {
            return Err(Error::StepTooCoarse { dt: requested, max: max_dt });
        }
        let pulse_steps = ((pulse.duration / requested) - 1e-9).ceil().max(1.0) as usize;
        let dt = pulse.duration / pulse_steps as f64;
        let total_steps = ((t_end / dt) - 1e-9).ceil().max(pulse_steps as f64) as usize;
        let stride = match stride {
            Some(0) => return Err(Error::InvalidParameter("record stride must be >= 1".into())),
            Some(s) => s,
            None => ((DEFAULT_RECORD_SPACING / dt) + 1e-9).floor().max(1.0) as usize,
        };
        Ok(Self { dt, pulse_steps, total_steps, stride })
    }

    pub fn sample_count(&self) -> usize {
        self.total_steps / self.stride + 1
    }

    pub fn sample_spacing(&self) -> f64 {
        self.dt * self.stride as f64
    }

    pub fn pulse_off_index(&self) -> usize {
        (self.pulse_steps as f64 / self.stride as f64).round() as usize
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.sample_count()).map(|k| (k * self.stride) as f64 * self.dt).collect()
    }
}

/// Precomputed operators of one ensemble, reusable across drive settings.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    /// H0 − iΓ S₊S₋ (rad/s).
    h_eff: Vec<Complex64>,
    /// Polarization operator.
    p: Vec<Complex64>,
    /// S₊S₋.
    number: Vec<Complex64>,
    /// Nonzeros of S₋ by row: (column, value).
    s_minus_rows: Vec<Vec<(usize, Complex64)>>,
    /// Angular collective rate.
    gamma: f64,
    ground: DensityMatrix,
}

impl Propagator {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        let h0 = build_static_hamiltonian(spec)?;
        let p = build_polarization_operator(spec)?;
        let jumps = build_collective_jump_operators(spec)?;
        let gamma = TAU * spec.gamma;
        let number = jumps.s_plus.matmul(&jumps.s_minus);
        let h_eff = h0.sub(&number.scale_complex(Complex64::new(0.0, gamma)));
        let dim = spec.dim();
        let s_minus_rows = (0..dim)
            .map(|a| {
                (0..dim)
                    .filter_map(|c| {
                        let v = jumps.s_minus.get(a, c);
                        (v != ZERO).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            dim,
            h_eff: h_eff.into_entries(),
            p: p.into_entries(),
            number: number.into_entries(),
            s_minus_rows,
            gamma,
            ground: DensityMatrix::ground_state(spec)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ground_state(&self) -> &DensityMatrix {
        &self.ground
    }

    /// Generator with H = H0 − field·P (`field` in rad/s); result lands in `ws.k`.
    fn rhs(&self, rho: &[Complex64], field: f64, ws: &mut Workspace) {
        let n = self.dim;
        let h = if field == 0.0 {
            &self.h_eff
        } else {
            for ((o, &a), &b) in ws.h.iter_mut().zip(&self.h_eff).zip(&self.p) {
                *o = a - b * field;
            }
            &ws.h
        };
        matmul_into(h, rho, &mut ws.x, n);
        // jump term: y = S₋ρ
        if self.gamma != 0.0 {
            for a in 0..n {
                let row = &mut ws.y[a * n..(a + 1) * n];
                row.iter_mut().for_each(|v| *v = ZERO);
                for &(c, s) in &self.s_minus_rows[a] {
                    let rrow = &rho[c * n..(c + 1) * n];
                    for (v, &r) in row.iter_mut().zip(rrow) {
                        *v += s * r;
                    }
                }
            }
        }
        let g2 = 2.0 * self.gamma;
        let out = &mut ws.k;
        for i in 0..n {
            for j in 0..n {
                let xij = ws.x[i * n + j];
                let xji = ws.x[j * n + i];
                // −i x_ij + i conj(x_ji)
                let mut v = Complex64::new(xij.im + xji.im, -xij.re + xji.re);
                if self.gamma != 0.0 {
                    let mut jump = ZERO;
                    for &(d, s) in &self.s_minus_rows[j] {
                        jump += ws.y[i * n + d] * s.conj();
                    }
                    v += jump * g2;
                }
                out[i * n + j] = v;
            }
        }
    }

    /// Propagates `pulse` up to `t_end` on `grid` and records observables.
    pub fn run_on_grid(
        &self,
        pulse: &DrivePulse,
        grid: &TimeGrid,
        rho0: Option<&DensityMatrix>,
        record_dipole: bool,
    ) -> Result<EvolutionResult> {
        let n = self.dim;
        let rho0 = rho0.unwrap_or(&self.ground);
        if rho0.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rho0.dim() });
        }
        let report = validate_state(rho0);
        if !report.is_physical() {
            return Err(Error::NonPhysicalState(format!("{report:?}")));
        }
        let mut rho = rho0.entries.clone();
        let mut ws = Workspace::new(n);
        let mut acc = vec![ZERO; n * n];
        let mut tmp = vec![ZERO; n * n];

        let amp = TAU * pulse.effective_amplitude();
        let omega = TAU * pulse.carrier;
        let dt = grid.dt;
        let samples = grid.sample_count();
        let mut times = Vec::with_capacity(samples);
        let mut population = Vec::with_capacity(samples);
        let mut dipole = record_dipole.then(|| Vec::with_capacity(samples));

        let mut record = |k: usize, rho: &[Complex64]| {
            times.push(k as f64 * dt);
            population.push(trace_product(&self.number, rho, n).re);
            if let Some(d) = dipole.as_mut() {
                d.push(trace_product(&self.p, rho, n).re);
            }
        };
        record(0, &rho);

        for step in 0..grid.total_steps {
            let t = step as f64 * dt;
            // H(t) = H0 − 2π E(t) P, so the coefficient of P removed from h_eff is 2π E(t)
            let (f0, fh, f1) = if step < grid.pulse_steps && amp != 0.0 {
                (
                    amp * (omega * t).cos(),
                    amp * (omega * (t + 0.5 * dt)).cos(),
                    amp * (omega * (t + dt)).cos(),
                )
            } else {
                (0.0, 0.0, 0.0)
            };

            self.rhs(&rho, f0, &mut ws);
            for i in 0..n * n {
                acc[i] = ws.k[i];
                tmp[i] = rho[i] + ws.k[i] * (0.5 * dt);
            }
            self.rhs(&tmp, fh, &mut ws);
            for i in 0..n * n {
                acc[i] += ws.k[i] * 2.0;
                tmp[i] = rho[i] + ws.k[i] * (0.5 * dt);
            }
            self.rhs(&tmp, fh, &mut ws);
            for i in 0..n * n {
                acc[i] += ws.k[i] * 2.0;
                tmp[i] = rho[i] + ws.k[i] * dt;
            }
            self.rhs(&tmp, f1, &mut ws);
            let w = dt / 6.0;
            for i in 0..n * n {
                rho[i] += (acc[i] + ws.k[i]) * w;
            }

            let done = step + 1;
            if done % RESYMMETRIZE_EVERY == 0 {
                resymmetrize(&mut rho, n);
            }
            if done % grid.stride == 0 {
                record(done, &rho);
            }
        }
        if rho.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numeric("density matrix diverged".into()));
        }
        Ok(EvolutionResult {
            times,
            population,
            dipole,
            final_state: DensityMatrix { dim: n, entries: rho },
            dt,
            record_stride: grid.stride,
            pulse_off_index: grid.pulse_off_index(),
        })
    }
}

fn resymmetrize(rho: &mut [Complex64], n: usize) {
    for i in 0..n {
        rho[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (rho[i * n + j] + rho[j * n + i].conj());
            rho[i * n + j] = avg;
            rho[j * n + i] = avg.conj();
        }
    }
}

struct Workspace {
    h: Vec<Complex64>,
    x: Vec<Complex64>,
    y: Vec<Complex64>,
    k: Vec<Complex64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { h: vec![ZERO; n * n], x: vec![ZERO; n * n], y: vec![ZERO; n * n], k: vec![ZERO; n * n] }
    }
}

/// Propagates `spec` driven by `pulse` from t = 0 to `t_end`.
pub fn evolve(spec: &EnsembleSpec, pulse: &DrivePulse, t_end: f64, opts: &EvolveOptions) -> Result<EvolutionResult> {
    let grid = TimeGrid::new(pulse, t_end, opts.dt, opts.record_stride)?;
    let prop = Propagator::new(spec)?;
    prop.run_on_grid(pulse, &grid, opts.rho0.as_ref(), opts.record_dipole)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TlsParams, build_static_hamiltonian};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GHZ: f64 = 1e9;
    const MHZ: f64 = 1e6;

    fn random_state(dim: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = OperatorMatrix::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = a.matmul(&a.adjoint());
        let tr = m.trace().re;
        DensityMatrix::from_operator(m.scale(1.0 / tr))
    }

    #[test]
    fn ground_state_is_stationary() {
        let spec = EnsembleSpec::new(vec![TlsParams::transverse(4.0 * GHZ), TlsParams::transverse(3.0 * GHZ)])
            .with_gamma(2.0 * MHZ);
        let h0 = build_static_hamiltonian(&spec).unwrap();
        let ops = build_collective_jump_operators(&spec).unwrap();
        let rho = DensityMatrix::basis(4, 3);
        let r = lindblad_rhs(&rho, &h0, &ops.s_minus, &ops.s_plus, spec.gamma).unwrap();
        assert!(r.max_abs() < 1e-6);
    }

    #[test]
    fn single_spin_decay_rate() {
        let spec = EnsembleSpec::new(vec![TlsParams::transverse(4.0 * GHZ)]).with_gamma(MHZ);
        let ops = build_collective_jump_operators(&spec).unwrap();
        let rho = DensityMatrix::basis(2, 0);
        let r = lindblad_rhs(&rho, &OperatorMatrix::zeros(2), &ops.s_minus, &ops.s_plus, spec.gamma).unwrap();
        let n_op = ops.s_plus.matmul(&ops.s_minus);
        let rate = trace_product(n_op.entries(), r.entries(), 2).re;
        assert!((rate + 2.0 * TAU * MHZ).abs() < 1e-6);
    }

    #[test]
    fn generator_is_traceless_and_fast_path_agrees() {
        let spec = EnsembleSpec::new(vec![
            TlsParams::new(3.0 * GHZ, 1.0 * GHZ),
            TlsParams::transverse(4.0 * GHZ),
            TlsParams::transverse(5.0 * GHZ),
        ])
        .with_coupling(0, 1, 30.0 * MHZ)
        .with_coupling(1, 2, -20.0 * MHZ)
        .with_gamma(3.0 * MHZ);
        let prop = Propagator::new(&spec).unwrap();
        let h0 = build_static_hamiltonian(&spec).unwrap();
        let p = build_polarization_operator(&spec).unwrap();
        let ops = build_collective_jump_operators(&spec).unwrap();
        for seed in 0..4 {
            let rho = random_state(8, seed);
            let field = 1e9 * seed as f64;
            let h = h0.sub(&p.scale(field));
            let reference = lindblad_rhs(&rho, &h, &ops.s_minus, &ops.s_plus, spec.gamma).unwrap();
            assert!(reference.trace().norm() < 1e-6 * reference.max_abs());
            let mut ws = Workspace::new(8);
            prop.rhs(rho.entries(), field, &mut ws);
            let fast = OperatorMatrix::from_entries(8, ws.k.clone()).unwrap();
            assert!(fast.max_abs_diff(&reference) < 1e-12 * reference.max_abs());
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        let m4 = OperatorMatrix::zeros(4);
        let m2 = OperatorMatrix::zeros(2);
        assert!(matches!(lindblad_rhs(&rho, &m4, &m2, &m2, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn state_reports() {
        let r = validate_state(&DensityMatrix::maximally_mixed(4));
        assert!(r.trace_error < 1e-15 && r.hermiticity_error == 0.0);
        assert!((r.min_eigenvalue - 0.25).abs() < 1e-15);
        let r = validate_state(&DensityMatrix::basis(4, 3));
        assert!(r.min_eigenvalue.abs() < 1e-15);
        let bad = DensityMatrix::from_entries(2, vec![Complex64::new(1.5, 0.0), ZERO, ZERO, Complex64::new(-0.5, 0.0)]).unwrap();
        assert!(!validate_state(&bad).is_physical());
    }

    #[test]
    fn grid_rules() {
        let pulse = DrivePulse::new(4.0 * GHZ, 0.0, 100e-9);
        let g = TimeGrid::new(&pulse, 700e-9, None, None).unwrap();
        assert_eq!(g.pulse_steps, 20_000);
        assert_eq!(g.stride, 20);
        assert!((g.times()[g.pulse_off_index()] - 100e-9).abs() <= 0.5 * g.sample_spacing());
        assert!(matches!(
            TimeGrid::new(&pulse, 700e-9, Some(1.0 / (10.0 * 4.0 * GHZ)), None),
            Err(Error::StepTooCoarse { .. })
        ));
        assert!(TimeGrid::new(&pulse, 50e-9, None, None).is_err());
    }

    #[test]
    fn non_physical_start_rejected() {
        let spec = EnsembleSpec::new(vec![TlsParams::transverse(4.0 * GHZ)]);
        let pulse = DrivePulse::new(4.0 * GHZ, 0.0, 1e-9);
        let bad = DensityMatrix::from_entries(2, vec![Complex64::new(2.0, 0.0), ZERO, ZERO, ZERO]).unwrap();
        let opts = EvolveOptions { rho0: Some(bad), ..Default::default() };
        assert!(matches!(evolve(&spec, &pulse, 1e-9, &opts), Err(Error::NonPhysicalState(_))));
    }

    proptest::proptest! {
        #[test]
        fn generator_preserves_trace_and_hermiticity(
            e1 in 1.0f64..6.0, e2 in 1.0f64..6.0, eps in -2.0f64..2.0,
            j in -100.0f64..100.0, gamma in 0.0f64..10.0, field in -1.0f64..1.0, seed in 0u64..1000,
        ) {
            let spec = EnsembleSpec::new(vec![TlsParams::new(eps * GHZ, e1 * GHZ), TlsParams::transverse(e2 * GHZ)])
                .with_coupling(0, 1, j * MHZ)
                .with_gamma(gamma * MHZ);
            let h = build_static_hamiltonian(&spec).unwrap().sub(&build_polarization_operator(&spec).unwrap().scale(field * 1e9));
            let ops = build_collective_jump_operators(&spec).unwrap();
            let r = lindblad_rhs(&random_state(4, seed), &h, &ops.s_minus, &ops.s_plus, spec.gamma).unwrap();
            let scale = r.max_abs().max(1.0);
            proptest::prop_assert!(r.trace().norm() <= 1e-9 * scale);
            proptest::prop_assert!(r.max_abs_diff(&r.adjoint()) <= 1e-9 * scale);
        }

        #[test]
        fn short_evolution_stays_physical(a in 0.0f64..300.0, carrier in 3.5f64..4.5, seed in 0u64..1000) {
            let spec = EnsembleSpec::new(vec![TlsParams::transverse(4.0 * GHZ)]).with_gamma(5.0 * MHZ);
            let opts = EvolveOptions { rho0: Some(random_state(2, seed)), ..Default::default() };
            let r = evolve(&spec, &DrivePulse::new(carrier * GHZ, a * MHZ, 5e-9), 8e-9, &opts).unwrap();
            let rep = validate_state(&r.final_state);
            proptest::prop_assert!(rep.trace_error < 1e-8, "{:?}", rep);
            proptest::prop_assert!(rep.min_eigenvalue > -1e-8, "{:?}", rep);
        }
    }
}
