//! Mode table of the WR-229 guide and a gain table that flattens a tabulated
//! field profile.

use tlsring::waveguide::{flatten_gain, mode_cutoffs, propagation_constant, FieldProfile, WaveguideGeometry};

fn main() -> tlsring::Result<()> {
    let g = WaveguideGeometry::wr229();
    for m in mode_cutoffs(&g, 2, 1)? {
        println!("TE{}{}: cutoff {:.4} GHz", m.m, m.n, m.f_c * 1e-9);
    }
    for f in [2.0e9, 3.0e9, 4.0e9, 5.0e9] {
        let p = propagation_constant(&g, f, 1, 0)?;
        let kind = if p.evanescent { "evanescent" } else { "propagating" };
        println!("{:.1} GHz: |beta| {:.2} rad/m ({kind})", f * 1e-9, p.beta);
    }

    let freq: Vec<f64> = (0..7).map(|k| 3e9 + k as f64 * 0.25e9).collect();
    let field = vec![0.8, 1.1, 1.6, 1.2, 0.7, 0.9, 1.3];
    let profile = FieldProfile::new(freq, field, 1.0)?;
    let gains = flatten_gain(&profile)?;
    let flat = profile.apply(&gains)?;
    for ((f, g), v) in gains.freq_hz.iter().zip(&gains.gain).zip(&flat.mean_field) {
        println!("{:.2} GHz: gain {g:.4} -> field {v:.6}", f * 1e-9);
    }
    Ok(())
}
