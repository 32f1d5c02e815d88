//! Two coupled defects swept across 3-5 GHz with a 100 ns pulse, then the
//! full-record FFT of every row.
//!
//! cargo run --release --example fig8_sweep [points]

use tlsring::analysis::{dominant_ridge, ringdown_fft, FftOptions, FftWindow};
use tlsring::model::{bare_transition_frequencies, DrivePulse, EnsembleSpec, TlsParams};
use tlsring::sweep::{run_frequency_sweep, Executor, FreqAxis, SweepPlan};

fn main() -> tlsring::Result<()> {
    let points = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(41);
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(3.5e9), TlsParams::transverse(4.5e9)])
        .with_gamma(2e6)
        .with_coupling(0, 1, 50e6);
    let pulse = DrivePulse::new(4e9, 100e6, 100e-9);
    let mut plan = SweepPlan::new(spec.clone(), pulse, FreqAxis { start: 3e9, stop: 5e9, count: points });
    plan.t_end = Some(700e-9);

    let exec = Executor::from_env()?;
    let r = run_frequency_sweep(&plan, &exec)?;
    let fft = ringdown_fft(&r.population, &FftOptions { window: FftWindow::Full, ..Default::default() })?;
    println!("bare transitions (GHz): {:?}", bare_transition_frequencies(&spec)?.iter().map(|f| f * 1e-9).collect::<Vec<_>>());
    println!("{:>12} {:>16}", "drive (GHz)", "ridge (MHz)");
    for ridge in dominant_ridge(&fft, 60e6, 600e6).into_iter().flatten() {
        println!("{:>12.3} {:>16.1}", fft.row_axis[ridge.row] * 1e-9, ridge.position * 1e-6);
    }
    Ok(())
}
