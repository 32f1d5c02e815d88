//! One excited defect decaying into the shared channel.
//!
//! cargo run --release --example single_spin_decay

use std::f64::consts::TAU;

use tlsring::lindblad::{evolve, validate_state, DensityMatrix, EvolveOptions};
use tlsring::model::{DrivePulse, EnsembleSpec, TlsParams};

fn main() -> tlsring::Result<()> {
    let gamma = 1e6;
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(4e9)]).with_gamma(gamma);
    // zero amplitude: the pulse only fixes the carrier used for the default step
    let pulse = DrivePulse::new(4e9, 0.0, 1e-9);
    let opts = EvolveOptions { rho0: Some(DensityMatrix::basis(2, 0)), ..Default::default() };
    let rate = 2.0 * TAU * gamma;
    let r = evolve(&spec, &pulse, 1.0 / rate, &opts)?;

    println!("{:>10} {:>14} {:>14}", "t (ns)", "population", "exp(-2Γt)");
    let every = r.times.len() / 10;
    for k in (0..r.times.len()).step_by(every.max(1)) {
        let t = r.times[k];
        println!("{:>10.2} {:>14.10} {:>14.10}", t * 1e9, r.population[k], (-rate * t).exp());
    }
    let report = validate_state(&r.final_state);
    println!("final state: trace error {:.1e}, physical: {}", report.trace_error, report.is_physical());
    Ok(())
}
