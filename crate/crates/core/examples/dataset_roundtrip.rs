//! Writes a simulated population map as a dataset directory and reads it back.

use tlsring::io::{read_dataset, read_manifest, write_dataset, Dataset, WriteOptions};
use tlsring::model::{DrivePulse, EnsembleSpec, TlsParams};
use tlsring::sweep::{run_frequency_sweep, Executor, FreqAxis, SweepPlan};

fn main() -> tlsring::Result<()> {
    let spec = EnsembleSpec::new(vec![TlsParams::transverse(4e9)]).with_gamma(2e6);
    let mut plan = SweepPlan::new(spec, DrivePulse::new(4e9, 50e6, 20e-9), FreqAxis { start: 3.9e9, stop: 4.1e9, count: 5 });
    plan.t_end = Some(100e-9);
    let r = run_frequency_sweep(&plan, &Executor::new(1)?)?;

    let dir = std::env::temp_dir().join("tlsring-example.ds");
    let written: Dataset = r.population.clone().into();
    write_dataset(&written, &dir, &WriteOptions { force: true, ..Default::default() })?;
    let manifest = read_manifest(&dir)?;
    println!("{}: kind {:?}, arrays {:?}", dir.display(), manifest.kind, manifest.arrays.iter().map(|a| &a.name).collect::<Vec<_>>());
    println!("bit-exact: {}", read_dataset(&dir)? == written);
    Ok(())
}
