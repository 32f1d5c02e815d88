//! Four disordered defects driven with 20, 50 and 200 ns pulses. Prints the
//! post-pulse spectral weight along the drive axis and its width.
//!
//! cargo run --release --example fig9_durations [points]

use tlsring::analysis::{ridge_fwhm, ringdown_fft, FftOptions};
use tlsring::model::{bare_transition_frequencies, concretize, Disorder, DrivePulse, EnsembleSpec, TlsParams};
use tlsring::sweep::{run_duration_series, Executor, FreqAxis, SweepPlan};

fn main() -> tlsring::Result<()> {
    let points = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(21);
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(4e9); 4])
        .with_gamma(1e6)
        .with_disorder(Disorder { epsilon_range: [3e9, 5e9], j_range: [-50e6, 50e6], seed: 7 });
    let mut plan = SweepPlan::new(spec.clone(), DrivePulse::new(4e9, 400e6, 200e-9), FreqAxis { start: 3e9, stop: 5e9, count: points });
    plan.durations = vec![20e-9, 50e-9, 200e-9];
    plan.t_end = Some(800e-9);

    let bare = bare_transition_frequencies(&concretize(&spec)?)?;
    println!("bare transitions (GHz): {:?}", bare.iter().map(|f| f * 1e-9).collect::<Vec<_>>());
    for r in run_duration_series(&plan, &Executor::from_env()?)? {
        let fft = ringdown_fft(&r.population, &FftOptions::default())?;
        let profile: Vec<f64> = (0..fft.rows())
            .map(|i| fft.row(i).iter().zip(&fft.col_axis).filter(|(_, &f)| f >= 20e6).map(|(v, _)| v).sum())
            .collect();
        match ridge_fwhm(&fft.row_axis, &profile) {
            Some((c, w)) => println!("{:>5.0} ns: peak at {:.3} GHz, FWHM {:.1} MHz", r.duration * 1e9, c * 1e-9, w * 1e-6),
            None => println!("{:>5.0} ns: no isolated peak", r.duration * 1e9),
        }
    }
    Ok(())
}
