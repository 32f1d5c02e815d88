//! Measured-data path: an IQ CSV is imported, turned into intensity, and
//! fed through the FFT, g², χ″ and lifetime stages.

use std::f64::consts::TAU;

use num_complex::Complex64;
use tlsring::analysis::{
    chi_imag, chi_zero_crossings, fit_lifetime, g2_map, intensity, ringdown_fft, ChiOptions, ColumnAxis, FftOptions,
    G2Options, LifetimeOptions, Scale, Spectrogram, TimeTrace, TraceData,
};
use tlsring::io::{import_iq_csv, write_iq_csv};

fn main() -> tlsring::Result<()> {
    let dir = std::env::temp_dir().join("tlsring-ringdown-example");
    std::fs::create_dir_all(&dir).expect("temporary directory");
    let dt = 0.5e-9;
    let mut rows = Vec::new();
    let drives: Vec<f64> = (0..5).map(|k| 3.9e9 + k as f64 * 50e6).collect();
    for (i, &drive) in drives.iter().enumerate() {
        // two beating modes decaying with a 120 ns lifetime
        let beat = 20e6 + 10e6 * i as f64;
        let samples: Vec<Complex64> = (0..1600)
            .map(|k| {
                let t = k as f64 * dt;
                let env = (-t / 240e-9).exp();
                Complex64::new(env * (1.0 + 0.5 * (TAU * beat * t).cos()), env * 0.3 * (TAU * beat * t).sin())
            })
            .collect();
        let path = dir.join(format!("trace_{i}.csv"));
        write_iq_csv(&TimeTrace::iq(0.0, dt, samples)?, &path)?;
        let trace = intensity(&import_iq_csv(&path, dt, 0.0)?)?;
        if let TraceData::Intensity(v) = &trace.data {
            rows.push(v.clone());
        }
        let fit = fit_lifetime(&trace, 0.0, 700e-9, &LifetimeOptions { envelope_width: 1.0 / beat, floor: 0.0 })?;
        println!("drive {:.2} GHz: intensity lifetime {:.1} ns", drive * 1e-9, fit.tau * 1e9);
    }
    let cols = rows[0].len();
    let map = Spectrogram::new(drives, (0..cols).map(|k| k as f64 * dt).collect(), ColumnAxis::Time, rows.concat(), Scale::Linear, Some(0))?;

    let fft = ringdown_fft(&map, &FftOptions::default())?;
    for i in 0..fft.rows() {
        let row = fft.row(i);
        let k = (1..row.len()).max_by(|a, b| row[*a].total_cmp(&row[*b])).unwrap_or(0);
        println!("row {i}: strongest FFT bin {:.1} MHz", fft.col_axis[k] * 1e-6);
    }
    let corr = chi_imag(&g2_map(&map, &G2Options::new(200e-9))?, &ChiOptions::default())?;
    println!("g2(0) per row: {:?}", (0..corr.rows()).map(|i| (corr.g2_row(i)[0] * 1e3).round() / 1e3).collect::<Vec<_>>());
    println!("chi'' sign changes: {}", chi_zero_crossings(&corr)?.len());
    Ok(())
}
