//! Fast invariant checks behind `tlsring selftest`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::analysis::{chi_imag, g2_map, ChiMode, ChiOptions, ColumnAxis, G2Options, Scale, Spectrogram};
use crate::floquet::{fold, quasi_energies};
use crate::io::{read_dataset, write_dataset, Dataset, WriteOptions};
use crate::lindblad::{evolve, DensityMatrix, EvolveOptions};
use crate::model::{eigenfrequencies, DrivePulse, EnsembleSpec, TlsParams};
use crate::waveguide::{propagation_constant, WaveguideGeometry, C};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        check("single-spin decay", single_spin_decay),
        check("dark state", dark_state),
        check("g2 oracles", g2_oracles),
        check("chi even correlation", chi_even),
        check("floquet zero drive", floquet_zero_drive),
        check("waveguide TE10", waveguide_te10),
        check("dataset round trip", round_trip),
    ]
}

fn single_spin_decay() -> crate::Result<(bool, String)> {
    let gamma = 1e6;
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(4e9)]).with_gamma(gamma);
    let pulse = DrivePulse::new(4e9, 0.0, 1e-9);
    let rate = 2.0 * TAU * gamma;
    let opts = EvolveOptions { rho0: Some(DensityMatrix::basis(2, 0)), ..Default::default() };
    let r = evolve(&spec, &pulse, 1.05 / rate, &opts)?;
    let dt = r.dt * r.record_stride as f64;
    let mut worst: f64 = 0.0;
    for (k, p) in r.population.iter().enumerate() {
        let want = (-rate * k as f64 * dt).exp();
        worst = worst.max((p / want - 1.0).abs());
    }
    Ok((worst < 1e-6, format!("max relative error {worst:.2e}")))
}

fn singlet() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    DensityMatrix::pure(&[z, Complex64::new(s, 0.0), Complex64::new(-s, 0.0), z])
}

fn dark_state() -> crate::Result<(bool, String)> {
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(4e9); 2]).with_gamma(2e6).with_coupling(0, 1, 50e6);
    let pulse = DrivePulse::new(4e9, 0.0, 1e-9);
    let opts = EvolveOptions { rho0: Some(singlet()), ..Default::default() };
    let r = evolve(&spec, &pulse, 500e-9, &opts)?;
    let drift = r.population.iter().fold(0.0_f64, |m, p| m.max((p - r.population[0]).abs()));
    Ok((drift < 1e-6, format!("collective population drift {drift:.2e}")))
}

fn map(rows: Vec<Vec<f64>>) -> crate::Result<Spectrogram> {
    let cols = rows[0].len();
    Spectrogram::new(
        (0..rows.len()).map(|i| 4e9 + i as f64 * 1e6).collect(),
        (0..cols).map(|j| j as f64 * 1e-9).collect(),
        ColumnAxis::Time,
        rows.concat(),
        Scale::Linear,
        Some(0),
    )
}

fn g2_oracles() -> crate::Result<(bool, String)> {
    let flat = g2_map(&map(vec![vec![0.3; 64]])?, &G2Options::new(10e-9))?;
    let ones = flat.g2.iter().all(|&g| g == 1.0);
    let toy = g2_map(&map(vec![[2.0, 0.0].repeat(16)])?, &G2Options::new(1e-9))?;
    let alt = toy.g2 == [2.0, 0.0];
    Ok((ones && alt, format!("constant -> 1: {ones}, alternating -> [2, 0]: {alt} ({:?})", toy.g2)))
}

fn chi_even() -> crate::Result<(bool, String)> {
    let row: Vec<f64> = (0..200).map(|k| 1.0 + 0.5 * (-(k as f64) / 40.0).exp()).collect();
    let g = g2_map(&map(vec![row])?, &G2Options::new(100e-9))?;
    let c = chi_imag(&g, &ChiOptions { mode: ChiMode::TwoSidedEven })?;
    let worst = c.chi.as_ref().unwrap().values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok((worst <= 1e-10, format!("max |chi''| {worst:.2e}")))
}

fn floquet_zero_drive() -> crate::Result<(bool, String)> {
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(3.5e9), TlsParams::transverse(4.5e9)])
        .with_coupling(0, 1, 50e6);
    let omega = 1.3e9;
    let q = quasi_energies(&spec, &DrivePulse::new(omega, 0.0, 100e-9), 4)?;
    let mut want: Vec<f64> = eigenfrequencies(&spec)?.iter().map(|&e| fold(e, omega)).collect();
    want.sort_by(f64::total_cmp);
    let mut got = q.quasi_energies.clone();
    got.sort_by(f64::total_cmp);
    let worst = got.iter().zip(&want).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / omega));
    Ok((worst <= 1e-9, format!("max deviation {worst:.2e} of the drive frequency")))
}

fn waveguide_te10() -> crate::Result<(bool, String)> {
    let g = WaveguideGeometry::wr229();
    let fc = g.cutoff_frequency(1, 0);
    let ok_fc = (fc - C / (2.0 * g.a)).abs() < 1.0 && (fc - 2.577e9).abs() < 1e6;
    let beta = propagation_constant(&g, fc, 1, 0)?.beta;
    Ok((ok_fc && beta < 1e-6, format!("f_c = {:.6} GHz, beta(f_c) = {beta:.1e}", fc * 1e-9)))
}

fn round_trip() -> crate::Result<(bool, String)> {
    let dir = std::env::temp_dir().join(format!("tlsring-selftest-{}", std::process::id()));
    let s = map(vec![vec![0.1, 0.25, 1.0 / 3.0], vec![2.0, f64::MIN_POSITIVE, 1e300]])?;
    let result = (|| {
        write_dataset(&s.clone().into(), &dir, &WriteOptions { force: true, ..Default::default() })?;
        read_dataset(&dir)
    })();
    let _ = std::fs::remove_dir_all(&dir);
    let same = result? == Dataset::Spectrogram(s);
    Ok((same, format!("bit-exact: {same}")))
}
