//! Drive-frequency sweeps, pulse-duration series and disorder averaging.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{ColumnAxis, Metadata, Scale, Spectrogram};
use crate::error::{Error, Result};
use crate::lindblad::{Propagator, TimeGrid, DEFAULT_STEPS_PER_PERIOD};
use crate::model::{concretize, DrivePulse, EnsembleSpec};

/// Ring-down recorded after the longest pulse when `t_end` is not given (s).
pub const DEFAULT_RINGDOWN: f64 = 600e-9;
/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "TLSRING_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqAxis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FreqAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Realizations {
    pub count: usize,
    /// Seed of realization r is `base_seed + r`.
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub spec: EnsembleSpec,
    pub pulse: DrivePulse,
    pub freq_axis: FreqAxis,
    /// Pulse lengths (s); empty means the template's duration.
    #[serde(default)]
    pub durations: Vec<f64>,
    /// End of the record (s); defaults to the longest pulse + 600 ns.
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Requested step (s); defaults to 1/(50 · highest carrier), shared by every point.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub record_stride: Option<usize>,
    #[serde(default)]
    pub realizations: Option<Realizations>,
    #[serde(default)]
    pub record_dipole: bool,
}

impl SweepPlan {
    pub fn new(spec: EnsembleSpec, pulse: DrivePulse, freq_axis: FreqAxis) -> Self {
        Self {
            spec,
            pulse,
            freq_axis,
            durations: Vec::new(),
            t_end: None,
            dt: None,
            record_stride: None,
            realizations: None,
            record_dipole: false,
        }
    }

    pub fn durations(&self) -> Vec<f64> {
        if self.durations.is_empty() {
            vec![self.pulse.duration]
        } else {
            self.durations.clone()
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or_else(|| self.durations().iter().cloned().fold(0.0, f64::max) + DEFAULT_RINGDOWN)
    }

    /// Step requested for every point of the sweep.
    pub fn step(&self) -> f64 {
        let f_max = self.freq_axis.start.max(self.freq_axis.stop);
        self.dt.unwrap_or(1.0 / (DEFAULT_STEPS_PER_PERIOD * f_max))
    }

    pub fn seeds(&self) -> Vec<u64> {
        match (&self.realizations, &self.spec.disorder) {
            (Some(r), Some(_)) => (0..r.count as u64).map(|k| r.base_seed.wrapping_add(k)).collect(),
            (None, Some(d)) => vec![d.seed],
            (_, None) => vec![0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.pulse.validate()?;
        let a = &self.freq_axis;
        if a.count < 1 || !(a.start > 0.0) || !a.stop.is_finite() || (a.count > 1 && !(a.start < a.stop)) {
            return Err(Error::InvalidParameter(format!(
                "frequency axis needs count >= 1 and 0 < start < stop, got {a:?}"
            )));
        }
        let durations = self.durations();
        if durations.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidParameter("durations must be > 0".into()));
        }
        if let Some(r) = &self.realizations {
            if r.count < 1 {
                return Err(Error::InvalidParameter("realization count must be >= 1".into()));
            }
        }
        let t_end = self.t_end();
        for &d in &durations {
            TimeGrid::new(&self.pulse.with_carrier(a.start.max(a.stop)).with_duration(d), t_end, Some(self.step()), self.record_stride)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// ⟨S₊S₋⟩, rows = drive frequency, columns = time.
    pub population: Spectrogram,
    /// ⟨P⟩ when recorded.
    pub dipole: Option<Spectrogram>,
    pub duration: f64,
    pub seeds: Vec<u64>,
    /// Wall time per row (s). Not part of the persisted map.
    pub wall_times: Vec<f64>,
}

/// Worker pool for sweeps; results never depend on its size.
pub struct Executor {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Executor {
    pub fn new(workers: usize) -> Result<Self> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { pool, workers })
    }

    /// Worker count from the environment, else the number of CPUs.
    pub fn from_env() -> Result<Self> {
        let workers = match std::env::var(WORKERS_ENV) {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::new(workers)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

/// One realization at one pulse duration.
fn sweep_one(plan: &SweepPlan, spec: &EnsembleSpec, seed: u64, duration: f64, exec: &Executor) -> Result<SweepResult> {
    let freqs = plan.freq_axis.values();
    let prop = Propagator::new(spec)?;
    let t_end = plan.t_end();
    let dt = plan.step();
    let template = plan.pulse.with_duration(duration);
    let rows: Vec<Result<(crate::lindblad::EvolutionResult, f64)>> = exec.install(|| {
        freqs
            .par_iter()
            .map(|&f| {
                let started = Instant::now();
                let pulse = template.with_carrier(f);
                let grid = TimeGrid::new(&pulse, t_end, Some(dt), plan.record_stride)?;
                let r = prop.run_on_grid(&pulse, &grid, None, plan.record_dipole);
                r.map(|r| (r, started.elapsed().as_secs_f64()))
                    .map_err(|e| Error::SweepPoint { freq: f, source: Box::new(e) })
            })
            .collect()
    });
    let mut population = Vec::new();
    let mut dipole = Vec::new();
    let mut wall_times = Vec::with_capacity(freqs.len());
    let mut times = Vec::new();
    let mut off = 0;
    let mut used_dt = dt;
    let mut stride = 1;
    for row in rows {
        let (r, wall) = row?;
        if times.is_empty() {
            times = r.times.clone();
            off = r.pulse_off_index;
            used_dt = r.dt;
            stride = r.record_stride;
        }
        population.extend_from_slice(&r.population);
        if let Some(d) = &r.dipole {
            dipole.extend_from_slice(d);
        }
        wall_times.push(wall);
    }
    let mut metadata = Metadata::new();
    metadata.insert("observable".into(), "collective_population".into());
    metadata.insert("plan".into(), serde_json::to_value(plan)?);
    metadata.insert("ensemble".into(), serde_json::to_value(spec)?);
    metadata.insert("seed".into(), seed.into());
    metadata.insert("duration".into(), duration.into());
    metadata.insert("t_end".into(), t_end.into());
    metadata.insert("dt".into(), used_dt.into());
    metadata.insert("record_stride".into(), stride.into());
    metadata.insert("initial_state".into(), "ground state of H0".into());
    metadata.insert("integrator".into(), "fixed-step RK4".into());
    let population =
        Spectrogram::new(freqs.clone(), times.clone(), ColumnAxis::Time, population, Scale::Linear, Some(off))?;
    let population = Spectrogram { metadata: metadata.clone(), ..population };
    let dipole = if plan.record_dipole {
        let mut md = metadata;
        md.insert("observable".into(), "polarization".into());
        let d = Spectrogram::new(freqs, times, ColumnAxis::Time, dipole, Scale::Linear, Some(off))?;
        Some(Spectrogram { metadata: md, ..d })
    } else {
        None
    };
    Ok(SweepResult { population, dipole, duration, seeds: vec![seed], wall_times })
}

fn realization_spec(plan: &SweepPlan, seed: u64) -> Result<EnsembleSpec> {
    let mut spec = plan.spec.clone();
    if let Some(d) = spec.disorder.as_mut() {
        d.seed = seed;
    }
    concretize(&spec)
}

/// Sweep of the first realization at the first duration.
pub fn run_frequency_sweep(plan: &SweepPlan, exec: &Executor) -> Result<SweepResult> {
    plan.validate()?;
    let seed = plan.seeds()[0];
    let spec = realization_spec(plan, seed)?;
    sweep_one(plan, &spec, seed, plan.durations()[0], exec)
}

/// One sweep per duration, all on the first disorder realization.
pub fn run_duration_series(plan: &SweepPlan, exec: &Executor) -> Result<Vec<SweepResult>> {
    plan.validate()?;
    let seed = plan.seeds()[0];
    let spec = realization_spec(plan, seed)?;
    plan.durations().into_iter().map(|d| sweep_one(plan, &spec, seed, d, exec)).collect()
}

/// Every duration, averaged over every realization of the plan.
pub fn run_plan(plan: &SweepPlan, exec: &Executor) -> Result<Vec<SweepResult>> {
    plan.validate()?;
    let seeds = plan.seeds();
    let specs = seeds.iter().map(|&s| realization_spec(plan, s)).collect::<Result<Vec<_>>>()?;
    plan.durations()
        .into_iter()
        .map(|d| {
            let runs = seeds
                .iter()
                .zip(&specs)
                .map(|(&s, spec)| sweep_one(plan, spec, s, d, exec))
                .collect::<Result<Vec<_>>>()?;
            average_realizations(&runs)
        })
        .collect()
}

fn mean_map(maps: &[&Spectrogram]) -> Result<Spectrogram> {
    let first = maps[0];
    for m in &maps[1..] {
        if !first.same_axes(m) || m.pulse_off_index != first.pulse_off_index {
            return Err(Error::AxisMismatch("realizations do not share axes".into()));
        }
    }
    let n = maps.len() as f64;
    let mut values = first.values.clone();
    for m in &maps[1..] {
        values.iter_mut().zip(&m.values).for_each(|(a, b)| *a += b);
    }
    if maps.len() > 1 {
        values.iter_mut().for_each(|v| *v /= n);
    }
    Ok(Spectrogram { values, ..first.clone() })
}

/// Pointwise mean over realizations.
pub fn average_realizations(results: &[SweepResult]) -> Result<SweepResult> {
    let first = results.first().ok_or_else(|| Error::InvalidParameter("nothing to average".into()))?;
    if results.len() == 1 {
        return Ok(first.clone());
    }
    let mut population = mean_map(&results.iter().map(|r| &r.population).collect::<Vec<_>>())?;
    let dipole = if results.iter().all(|r| r.dipole.is_some()) {
        Some(mean_map(&results.iter().map(|r| r.dipole.as_ref().unwrap()).collect::<Vec<_>>())?)
    } else {
        None
    };
    let seeds: Vec<u64> = results.iter().flat_map(|r| r.seeds.iter().copied()).collect();
    population.metadata.insert("averaged_seeds".into(), serde_json::to_value(&seeds)?);
    population.metadata.remove("seed");
    population.metadata.remove("ensemble");
    let dipole = dipole.map(|mut d| {
        d.metadata = population.metadata.clone();
        d.metadata.insert("observable".into(), "polarization".into());
        d
    });
    let mut wall_times = first.wall_times.clone();
    for r in &results[1..] {
        wall_times.iter_mut().zip(&r.wall_times).for_each(|(a, b)| *a += b);
    }
    Ok(SweepResult { population, dipole, duration: first.duration, seeds, wall_times })
}
