//! JSON run configuration for the command-line front end.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ChiOptions, FftOptions, G2Options, LifetimeOptions, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::floquet::{DEFAULT_M_MAX, DEFAULT_TOLERANCE};
use crate::io::RenderOptions;
use crate::lindblad::{DEFAULT_RECORD_SPACING, DEFAULT_STEPS_PER_PERIOD, MIN_STEPS_PER_PERIOD, RESYMMETRIZE_EVERY};
use crate::model::{DrivePulse, EnsembleSpec};
use crate::sweep::{FreqAxis, Realizations, SweepPlan, DEFAULT_RINGDOWN};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub freq_axis: FreqAxis,
    #[serde(default)]
    pub durations: Vec<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub record_stride: Option<usize>,
    #[serde(default)]
    pub realizations: Option<Realizations>,
    #[serde(default)]
    pub record_dipole: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetSection {
    /// Defaults to the sweep axis.
    #[serde(default)]
    pub freq_axis: Option<FreqAxis>,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
}

fn default_m_max() -> usize {
    DEFAULT_M_MAX
}

/// Post-processing applied to every simulated population map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub fft: Option<FftOptions>,
    #[serde(default)]
    pub g2: Option<G2Options>,
    /// Requires `g2`.
    #[serde(default)]
    pub chi: Option<ChiOptions>,
    #[serde(default)]
    pub mean_driven: bool,
    #[serde(default)]
    pub lifetime: Option<LifetimeOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Output directory; relative paths resolve against the working directory.
    pub output: PathBuf,
    pub ensemble: EnsembleSpec,
    pub pulse: DrivePulse,
    pub sweep: SweepSection,
    #[serde(default)]
    pub floquet: Option<FloquetSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    /// Images are written next to the datasets when present.
    #[serde(default)]
    pub render: Option<RenderOptions>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("not valid JSON: {e}")))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == CONFIG_VERSION as u64 => {}
            Some(v) => return Err(Error::Config(format!("unsupported config version {v}"))),
            None => return Err(Error::Config("missing integer 'version'".into())),
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn plan(&self) -> SweepPlan {
        let s = &self.sweep;
        SweepPlan {
            spec: self.ensemble.clone(),
            pulse: self.pulse.clone(),
            freq_axis: s.freq_axis,
            durations: s.durations.clone(),
            t_end: s.t_end,
            dt: s.dt,
            record_stride: s.record_stride,
            realizations: s.realizations,
            record_dipole: s.record_dipole,
        }
    }

    pub fn floquet_axis(&self) -> FreqAxis {
        self.floquet.as_ref().and_then(|f| f.freq_axis).unwrap_or(self.sweep.freq_axis)
    }

    pub fn m_max(&self) -> usize {
        self.floquet.as_ref().map_or(DEFAULT_M_MAX, |f| f.m_max)
    }

    /// Everything checkable without running a simulation.
    pub fn validate(&self) -> Result<()> {
        if self.output.as_os_str().is_empty() {
            return Err(Error::Config("output directory must not be empty".into()));
        }
        self.plan().validate().map_err(as_config)?;
        if self.analysis.chi.is_some() && self.analysis.g2.is_none() {
            return Err(Error::Config("analysis.chi needs analysis.g2".into()));
        }
        if let Some(g) = &self.analysis.g2 {
            if !(g.max_lag > 0.0) {
                return Err(Error::Config("analysis.g2.max_lag must be > 0".into()));
            }
        }
        if let Some(f) = &self.floquet {
            if f.m_max < 1 {
                return Err(Error::Config("floquet.m_max must be >= 1".into()));
            }
            if let Some(a) = f.freq_axis {
                SweepPlan { freq_axis: a, ..self.plan() }.validate().map_err(as_config)?;
            }
        }
        if let Some(r) = &self.render {
            if let Some(p) = r.clip_percentile {
                if !(50.0..=100.0).contains(&p) {
                    return Err(Error::Config(format!("render.clip_percentile must lie in [50, 100], got {p}")));
                }
            }
        }
        Ok(())
    }

    /// Resolved parameters, including every default in effect.
    pub fn resolved(&self) -> Result<serde_json::Value> {
        let plan = self.plan();
        Ok(serde_json::json!({
            "config": self,
            "resolved": {
                "durations": plan.durations(),
                "t_end": plan.t_end(),
                "dt": plan.step(),
                "seeds": plan.seeds(),
                "drive_frequencies": plan.freq_axis.values(),
                "floquet_m_max": self.m_max(),
            },
            "defaults": defaults(),
        }))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidParameter(m) => Error::Config(m),
        Error::DimensionCap { .. } | Error::StepTooCoarse { .. } => Error::Config(e.to_string()),
        other => other,
    }
}

/// Numeric defaults of the library, echoed into provenance.
pub fn defaults() -> serde_json::Value {
    serde_json::json!({
        "steps_per_period": DEFAULT_STEPS_PER_PERIOD,
        "min_steps_per_period": MIN_STEPS_PER_PERIOD,
        "record_spacing": DEFAULT_RECORD_SPACING,
        "ringdown": DEFAULT_RINGDOWN,
        "resymmetrize_every": RESYMMETRIZE_EVERY,
        "floquet_m_max": DEFAULT_M_MAX,
        "floquet_tolerance": DEFAULT_TOLERANCE,
        "log_floor": LOG_FLOOR,
        "fft": FftOptions::default(),
        "chi": ChiOptions::default(),
        "initial_state": "ground state of H0",
        "integrator": "fixed-step RK4",
    })
}
