//! Command-line front end. `dispatch` maps argv to an exit code.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    chi_imag, diff_map, fit_lifetime, g2_map, intensity, mean_driven_response, pulse_bandwidth, ringdown_fft,
    ChiMode, ChiOptions, FftOptions, FftWindow, G2Options, LifetimeOptions, Metadata, Series, Spectrogram, Taper,
    TimeTrace,
};
use crate::config::{defaults, RunConfig};
use crate::error::{Error, Result};
use crate::floquet::floquet_sweep;
use crate::io::{
    import_iq_csv, read_dataset, read_field_profile, render_floquet, render_heatmap, render_series, write_dataset, write_gain_table,
    Colormap, Dataset, Heatmap, Markers, RenderOptions, WriteOptions,
};
use crate::model::{bare_transition_frequencies, concretize};
use crate::sweep::{run_plan, Executor, SweepResult, WORKERS_ENV};
use crate::waveguide::{flatten_gain, mode_cutoffs, propagation_constant, WaveguideGeometry};

/// Exit code for unknown subcommands or flags.
pub const USAGE_EXIT: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "tlsring", version, about = "Driven TLS ensembles: ring-down simulation, Floquet spectra, transient analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sweep plan of a config and write spectrogram datasets.
    Simulate(RunArgs),
    /// Quasi-energy sweep over the drive frequency.
    Floquet(RunArgs),
    /// Signal processing on datasets.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Rectangular-waveguide calculators.
    #[command(subcommand)]
    Waveguide(Waveguide),
    /// Render a dataset as a heatmap or line cut (.png or .svg).
    Render(RenderArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the configured output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Parallel workers; output does not depend on it.
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Validate and print the execution plan without computing.
    #[arg(long)]
    pub dry_run: bool,
    /// Replace existing datasets.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    PostPulse,
    Full,
}

impl From<WindowArg> for FftWindow {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::PostPulse => FftWindow::PostPulse,
            WindowArg::Full => FftWindow::Full,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Ring-down FFT of a time-domain spectrogram.
    Fft {
        #[arg(long, value_enum, default_value = "post-pulse")]
        window: WindowArg,
        /// Transform log10(v + floor) instead of v.
        #[arg(long)]
        log_input: bool,
        #[arg(long)]
        no_taper: bool,
        #[command(flatten)]
        io: InOut,
    },
    /// Intensity autocorrelation g².
    G2 {
        #[arg(long)]
        max_lag_ns: f64,
        #[arg(long, value_enum, default_value = "post-pulse")]
        window: WindowArg,
        #[command(flatten)]
        io: InOut,
    },
    /// χ″ from a g² dataset.
    Chi {
        #[arg(long)]
        two_sided_even: bool,
        #[command(flatten)]
        io: InOut,
    },
    /// Exponential envelope fit; prints JSON.
    Lifetime {
        #[arg(long)]
        t_start_ns: f64,
        #[arg(long)]
        t_stop_ns: f64,
        #[arg(long, default_value_t = 0.0)]
        envelope_ns: f64,
        /// Row of a spectrogram input.
        #[arg(long, default_value_t = 0)]
        row: usize,
        input: PathBuf,
    },
    /// Pointwise difference `a − b` of two maps on identical axes.
    Diff {
        a: PathBuf,
        b: PathBuf,
        output: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Mean response during the drive, per drive frequency.
    MeanDriven {
        #[command(flatten)]
        io: InOut,
    },
    /// Homodyne CSV (`i,q` or `t,i,q`) to an IQ time-trace dataset.
    ImportIq {
        csv: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        dt_ns: f64,
        #[arg(long, default_value_t = 0.0)]
        t0_ns: f64,
        #[arg(long)]
        force: bool,
    },
    /// IQ trace to intensity I² + Q².
    Intensity {
        #[command(flatten)]
        io: InOut,
    },
}

#[derive(Debug, Args)]
pub struct InOut {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct Geometry {
    #[arg(long, default_value_t = 58.17)]
    pub a_mm: f64,
    #[arg(long, default_value_t = 29.08)]
    pub b_mm: f64,
}

impl Geometry {
    fn build(&self) -> Result<WaveguideGeometry> {
        WaveguideGeometry::new(self.a_mm * 1e-3, self.b_mm * 1e-3)
    }
}

#[derive(Debug, Subcommand)]
pub enum Waveguide {
    /// Cutoff frequencies, ascending.
    Modes {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long, default_value_t = 2)]
        m_max: u32,
        #[arg(long, default_value_t = 2)]
        n_max: u32,
    },
    /// Propagation constant of one mode.
    Beta {
        #[command(flatten)]
        geometry: Geometry,
        #[arg(long)]
        freq_ghz: f64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Gain table that flattens a tabulated field profile (`freq_hz,field`).
    Flatten {
        profile: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        target: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MapArg {
    G2,
    Chi,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "viridis")]
    pub colormap: ColormapArg,
    #[arg(long)]
    pub clip_percentile: Option<f64>,
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub pulse_off: bool,
    /// Bandwidth bar at Δf of this pulse length (ns).
    #[arg(long)]
    pub bandwidth_of_ns: Option<f64>,
    /// Dashed lines at these drive frequencies (GHz), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bare_ghz: Vec<f64>,
    /// Dashed lines at the bare transition frequencies of this config's ensemble.
    #[arg(long)]
    pub bare_from: Option<PathBuf>,
    /// Which map of a correlation dataset.
    #[arg(long, value_enum, default_value = "g2")]
    pub map: MapArg,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, default_value_t = 900)]
    pub width: u32,
    #[arg(long, default_value_t = 600)]
    pub height: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ColormapArg {
    Viridis,
    Grayscale,
    Bone,
    Copper,
    Vulcano,
}

impl From<ColormapArg> for Colormap {
    fn from(c: ColormapArg) -> Self {
        match c {
            ColormapArg::Viridis => Colormap::Viridis,
            ColormapArg::Grayscale => Colormap::Grayscale,
            ColormapArg::Bone => Colormap::Bone,
            ColormapArg::Copper => Colormap::Copper,
            ColormapArg::Vulcano => Colormap::Vulcano,
        }
    }
}

/// Parses argv (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.category().exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Floquet(a) => floquet(&a),
        Command::Analyze(a) => analyze(a),
        Command::Waveguide(w) => waveguide(w),
        Command::Render(r) => render(&r),
        Command::Selftest => selftest(),
    }
}

fn write_opts(force: bool, provenance: Metadata) -> WriteOptions {
    WriteOptions { force, provenance }
}

fn tool_provenance() -> Metadata {
    let mut m = Metadata::new();
    m.insert("tool".into(), concat!("tlsring ", env!("CARGO_PKG_VERSION")).into());
    m
}

fn ns_label(d: f64) -> String {
    let ns = d * 1e9;
    if (ns - ns.round()).abs() < 1e-6 {
        format!("{}ns", ns.round() as i64)
    } else {
        format!("{ns}ns")
    }
}

fn executor(workers: Option<usize>) -> Result<Executor> {
    match workers {
        Some(k) => Executor::new(k),
        None => Executor::from_env(),
    }
}

fn output_dir(a: &RunArgs, cfg: &RunConfig) -> PathBuf {
    a.output.clone().unwrap_or_else(|| cfg.output.clone())
}

fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn simulate(a: &RunArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = output_dir(a, &cfg);
    let plan = cfg.plan();
    let resolved = cfg.resolved()?;
    if a.dry_run {
        let points = plan.freq_axis.count * plan.durations().len() * plan.seeds().len();
        let steps = ((plan.t_end() / plan.step()).ceil() as u64).saturating_mul(points as u64);
        println!("{}", serde_json::to_string_pretty(&resolved)?);
        println!(
            "plan: {} drive frequencies x {} durations x {} realizations = {points} evolutions, ~{steps} RK4 steps, output {}",
            plan.freq_axis.count,
            plan.durations().len(),
            plan.seeds().len(),
            out.display()
        );
        return Ok(());
    }
    let exec = executor(a.workers)?;
    prepare_output(&out)?;
    write_json(&out.join("plan.json"), &resolved)?;
    let started = Instant::now();
    let results = run_plan(&plan, &exec)?;
    let mut timing = Vec::new();
    for r in &results {
        let label = ns_label(r.duration);
        write_products(&cfg, r, &out, &label, a.force, &resolved)?;
        timing.push(serde_json::json!({"duration": r.duration, "point_seconds": r.wall_times}));
        println!("wrote {}", out.join(format!("population_{label}.ds")).display());
    }
    write_json(
        &out.join("timing.json"),
        &serde_json::json!({
            "workers": exec.workers(),
            "total_seconds": started.elapsed().as_secs_f64(),
            "runs": timing,
        }),
    )
}

fn write_products(
    cfg: &RunConfig,
    r: &SweepResult,
    out: &Path,
    label: &str,
    force: bool,
    resolved: &serde_json::Value,
) -> Result<()> {
    let mut prov = tool_provenance();
    prov.insert("run".into(), resolved.clone());
    let w = write_opts(force, prov);
    let path = |stem: &str| out.join(format!("{stem}_{label}.ds"));
    write_dataset(&r.population.clone().into(), &path("population"), &w)?;
    if let Some(d) = &r.dipole {
        write_dataset(&d.clone().into(), &path("dipole"), &w)?;
    }
    let an = &cfg.analysis;
    let bare = bare_transition_frequencies(&concretize_first(cfg)?)?;
    let render_opts = cfg.render.clone().map(|o| RenderOptions {
        markers: Markers { bare_frequencies: bare.clone(), ..o.markers.clone() },
        ..o
    });
    if let Some(o) = &render_opts {
        let o = RenderOptions { markers: Markers { pulse_off: true, ..o.markers.clone() }, ..o.clone() };
        render_heatmap(&Heatmap::from_spectrogram(&r.population)?, &out.join(format!("population_{label}.png")), &o)?;
    }
    if let Some(opts) = &an.fft {
        let fft = ringdown_fft(&r.population, opts)?;
        write_dataset(&fft.clone().into(), &path("fft"), &w)?;
        if let Some(o) = &render_opts {
            let bw = pulse_bandwidth(r.duration)?;
            let o = RenderOptions { markers: Markers { bandwidth: Some(bw), ..o.markers.clone() }, ..o.clone() };
            render_heatmap(&Heatmap::from_spectrogram(&fft)?, &out.join(format!("fft_{label}.png")), &o)?;
        }
    }
    if let Some(g) = &an.g2 {
        let c = g2_map(&r.population, g)?;
        write_dataset(&c.clone().into(), &path("g2"), &w)?;
        if let Some(chi) = &an.chi {
            let c = chi_imag(&c, chi)?;
            write_dataset(&c.into(), &path("chi"), &w)?;
        }
    }
    if an.mean_driven {
        let s = mean_driven_response(&r.population)?;
        write_dataset(&s.clone().into(), &path("mean_driven"), &w)?;
        if let Some(o) = &render_opts {
            render_series(&s, &out.join(format!("mean_driven_{label}.png")), o)?;
        }
    }
    if let Some(opts) = &an.lifetime {
        let s = lifetime_series(&r.population, opts)?;
        write_dataset(&s.into(), &path("lifetime"), &w)?;
    }
    Ok(())
}

fn concretize_first(cfg: &RunConfig) -> Result<crate::model::EnsembleSpec> {
    let mut spec = cfg.ensemble.clone();
    let seed = cfg.plan().seeds()[0];
    if let Some(d) = spec.disorder.as_mut() {
        d.seed = seed;
    }
    concretize(&spec)
}

/// Post-pulse decay time per drive frequency; NaN where the fit is rejected.
fn lifetime_series(map: &Spectrogram, opts: &LifetimeOptions) -> Result<Series> {
    let off = map.pulse_off_index.unwrap_or(0);
    let dt = map.col_step();
    let t_start = map.col_axis[off.min(map.cols() - 1)];
    let t_stop = map.col_axis[map.cols() - 1];
    let mut values = Vec::with_capacity(map.rows());
    for i in 0..map.rows() {
        let trace = TimeTrace::intensity(map.col_axis[0], dt, map.row(i).to_vec())?;
        values.push(fit_lifetime(&trace, t_start, t_stop, opts).map_or(f64::NAN, |f| f.tau));
    }
    let mut metadata = Metadata::new();
    metadata.insert("operation".into(), "lifetime".into());
    metadata.insert("options".into(), serde_json::to_value(opts)?);
    metadata.insert("window".into(), serde_json::json!([t_start, t_stop]));
    Ok(Series {
        axis: map.row_axis.clone(),
        axis_name: "drive_frequency".into(),
        axis_unit: "Hz".into(),
        values,
        name: "lifetime".into(),
        unit: "s".into(),
        metadata,
    })
}

fn floquet(a: &RunArgs) -> Result<()> {
    let cfg = RunConfig::load(&a.config)?;
    let out = output_dir(a, &cfg);
    let axis = cfg.floquet_axis();
    if a.dry_run {
        println!("{}", serde_json::to_string_pretty(&cfg.resolved()?)?);
        println!(
            "plan: Floquet sweep over {} drive frequencies, m_max {}, output {}",
            axis.count,
            cfg.m_max(),
            out.join("floquet.ds").display()
        );
        return Ok(());
    }
    let exec = executor(a.workers)?;
    let spec = concretize_first(&cfg)?;
    let started = Instant::now();
    let sweep = exec.install(|| floquet_sweep(&spec, &cfg.pulse, &axis.values(), cfg.m_max()))?;
    prepare_output(&out)?;
    let mut prov = tool_provenance();
    prov.insert("run".into(), cfg.resolved()?);
    prov.insert("ensemble".into(), serde_json::to_value(&spec)?);
    let path = out.join("floquet.ds");
    write_dataset(&sweep.into(), &path, &write_opts(a.force, prov))?;
    write_json(
        &out.join("floquet_timing.json"),
        &serde_json::json!({"workers": exec.workers(), "total_seconds": started.elapsed().as_secs_f64()}),
    )?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_map(path: &Path) -> Result<Spectrogram> {
    match read_dataset(path)? {
        Dataset::Spectrogram(s) => Ok(s),
        other => Err(Error::InvalidParameter(format!("{} holds {:?}, expected a spectrogram", path.display(), other.kind()))),
    }
}

fn analyze(a: Analyze) -> Result<()> {
    match a {
        Analyze::Fft { window, log_input, no_taper, io } => {
            let opts = FftOptions {
                window: window.into(),
                log_input,
                taper: if no_taper { Taper::None } else { Taper::Hann },
            };
            let s = ringdown_fft(&read_map(&io.input)?, &opts)?;
            finish(s.into(), &io.output, io.force)
        }
        Analyze::G2 { max_lag_ns, window, io } => {
            let opts = G2Options { window: window.into(), ..G2Options::new(max_lag_ns * 1e-9) };
            finish(g2_map(&read_map(&io.input)?, &opts)?.into(), &io.output, io.force)
        }
        Analyze::Chi { two_sided_even, io } => {
            let Dataset::Correlation(c) = read_dataset(&io.input)? else {
                return Err(Error::InvalidParameter("chi needs a g2 dataset".into()));
            };
            let mode = if two_sided_even { ChiMode::TwoSidedEven } else { ChiMode::OneSided };
            finish(chi_imag(&c, &ChiOptions { mode })?.into(), &io.output, io.force)
        }
        Analyze::Lifetime { t_start_ns, t_stop_ns, envelope_ns, row, input } => {
            let trace = match read_dataset(&input)? {
                Dataset::TimeTrace(t) => match t.data {
                    crate::analysis::TraceData::Iq(_) => intensity(&t)?,
                    _ => t,
                },
                Dataset::Spectrogram(s) => {
                    if row >= s.rows() {
                        return Err(Error::InvalidParameter(format!("row {row} out of range ({} rows)", s.rows())));
                    }
                    TimeTrace::intensity(s.col_axis[0], s.col_step(), s.row(row).to_vec())?
                }
                _ => return Err(Error::InvalidParameter("lifetime needs a time trace or spectrogram".into())),
            };
            let opts = LifetimeOptions { envelope_width: envelope_ns * 1e-9, floor: 0.0 };
            let fit = fit_lifetime(&trace, t_start_ns * 1e-9, t_stop_ns * 1e-9, &opts)?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(())
        }
        Analyze::Diff { a, b, output, force } => {
            finish(diff_map(&read_map(&a)?, &read_map(&b)?)?.into(), &output, force)
        }
        Analyze::MeanDriven { io } => finish(mean_driven_response(&read_map(&io.input)?)?.into(), &io.output, io.force),
        Analyze::ImportIq { csv, output, dt_ns, t0_ns, force } => {
            finish(import_iq_csv(&csv, dt_ns * 1e-9, t0_ns * 1e-9)?.into(), &output, force)
        }
        Analyze::Intensity { io } => {
            let Dataset::TimeTrace(t) = read_dataset(&io.input)? else {
                return Err(Error::InvalidParameter("intensity needs a time trace".into()));
            };
            finish(intensity(&t)?.into(), &io.output, io.force)
        }
    }
}

fn finish(d: Dataset, out: &Path, force: bool) -> Result<()> {
    let mut prov = tool_provenance();
    prov.insert("defaults".into(), defaults());
    write_dataset(&d, out, &write_opts(force, prov))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn waveguide(w: Waveguide) -> Result<()> {
    match w {
        Waveguide::Modes { geometry, m_max, n_max } => {
            let g = geometry.build()?;
            println!("mode   cutoff (GHz)");
            for m in mode_cutoffs(&g, m_max, n_max)? {
                // TE exists for every (m, n) but (0, 0); TM needs both indices
                let kind = if m.m > 0 && m.n > 0 { "TE/TM" } else { "TE" };
                println!("{kind}{}{}  {:.4}", m.m, m.n, m.f_c * 1e-9);
            }
            Ok(())
        }
        Waveguide::Beta { geometry, freq_ghz, m, n } => {
            let p = propagation_constant(&geometry.build()?, freq_ghz * 1e9, m, n)?;
            if p.evanescent {
                println!("evanescent: alpha = {:.6} rad/m (1/e length {:.4} mm)", p.beta, 1e3 / p.beta);
            } else {
                println!("beta = {:.6} rad/m", p.beta);
            }
            Ok(())
        }
        Waveguide::Flatten { profile, output, target } => {
            let p = read_field_profile(&profile, target)?;
            let g = flatten_gain(&p)?;
            write_gain_table(&g, &output)?;
            println!("wrote {}", output.display());
            Ok(())
        }
    }
}

fn render(r: &RenderArgs) -> Result<()> {
    let mut bare: Vec<f64> = r.bare_ghz.iter().map(|g| g * 1e9).collect();
    if let Some(cfg) = &r.bare_from {
        bare.extend(bare_transition_frequencies(&concretize_first(&RunConfig::load(cfg)?)?)?);
    }
    let opts = RenderOptions {
        colormap: r.colormap.into(),
        clip_percentile: r.clip_percentile,
        log: r.log,
        width: r.width,
        height: r.height,
        title: r.title.clone(),
        markers: Markers {
            pulse_off: r.pulse_off,
            bandwidth: r.bandwidth_of_ns.map(|ns| pulse_bandwidth(ns * 1e-9)).transpose()?,
            bare_frequencies: bare,
        },
    };
    match read_dataset(&r.input)? {
        Dataset::Spectrogram(s) => render_heatmap(&Heatmap::from_spectrogram(&s)?, &r.output, &opts)?,
        Dataset::Correlation(c) => {
            let h = match r.map {
                MapArg::G2 => Heatmap::from_g2(&c)?,
                MapArg::Chi => Heatmap::from_chi(&c)?,
            };
            render_heatmap(&h, &r.output, &opts)?
        }
        Dataset::Series(s) => render_series(&s, &r.output, &opts)?,
        Dataset::TimeTrace(t) => {
            let values = match &t.data {
                crate::analysis::TraceData::Iq(_) => intensity(&t)?.real_samples().unwrap().to_vec(),
                _ => t.real_samples().unwrap().to_vec(),
            };
            let s = Series {
                axis: t.times(),
                axis_name: "time".into(),
                axis_unit: "s".into(),
                values,
                name: t.data.kind_name().into(),
                unit: String::new(),
                metadata: Metadata::new(),
            };
            render_series(&s, &r.output, &opts)?
        }
        Dataset::Floquet(f) => render_floquet(&f, &r.output, &opts)?,
    }
    println!("wrote {}", r.output.display());
    Ok(())
}

fn selftest() -> Result<()> {
    let checks = crate::selftest::run_all();
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Error::Numeric(format!("{failed} of {} self-test checks failed", checks.len())));
    }
    println!("all {} checks passed", checks.len());
    Ok(())
}
