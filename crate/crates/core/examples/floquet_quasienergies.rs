//! Quasi-energies of the driven pair across the sweep band, and the
//! n-photon couplings at the drive amplitude.

use tlsring::floquet::{floquet_sweep, n_photon_coupling, DEFAULT_M_MAX};
use tlsring::model::{DrivePulse, EnsembleSpec, TlsParams};

fn main() -> tlsring::Result<()> {
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(3.5e9), TlsParams::transverse(4.5e9)])
        .with_coupling(0, 1, 50e6);
    let pulse = DrivePulse::new(4e9, 100e6, 100e-9);
    let freqs: Vec<f64> = (0..21).map(|k| 3e9 + k as f64 * 100e6).collect();
    let s = floquet_sweep(&spec, &pulse, &freqs, DEFAULT_M_MAX)?;
    for (i, f) in s.drive_freqs.iter().enumerate() {
        let q: Vec<String> = s.row(i).iter().map(|e| format!("{:8.2}", e * 1e-6)).collect();
        println!("{:.2} GHz  M={:<3} [{}] MHz", f * 1e-9, s.harmonics[i], q.join(" "));
    }
    for n in 1..=3 {
        println!("{n}-photon coupling at 4 GHz: {:.4} MHz", n_photon_coupling(100e6, 4e9, n)? * 1e-6);
    }
    Ok(())
}
