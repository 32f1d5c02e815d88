//! Heatmap and line-cut rendering. PNG or SVG, chosen by file extension.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use plotters::prelude::*;
use plotters::style::FontStyle;
use plotters_backend::{BackendColor, BackendCoord, DrawingErrorKind};
use serde::{Deserialize, Serialize};

use crate::analysis::{ColumnAxis, CorrelationMap, Series, Spectrogram, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::floquet::FloquetSweep;

/// Environment variable naming a TrueType font used for labels.
pub const FONT_ENV: &str = "TLSRING_FONT";

const FONT_CANDIDATES: &[&str] = &[
    "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/truetype/DejaVuSans.ttf",
    "/usr/share/fonts/TTF/DejaVuSans.ttf",
    "/usr/share/fonts/dejavu/DejaVuSans.ttf",
    "/usr/share/fonts/truetype/liberation/LiberationSans-Regular.ttf",
    "/Library/Fonts/Arial.ttf",
    "/System/Library/Fonts/Supplemental/Arial.ttf",
    "C:\\Windows\\Fonts\\arial.ttf",
];

/// Cells drawn per axis at most; denser maps are block-averaged for display.
const MAX_CELLS: usize = 600;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Colormap {
    #[default]
    Viridis,
    Grayscale,
    Bone,
    Copper,
    Vulcano,
}

impl Colormap {
    fn color(self, h: f64) -> RGBColor {
        let h = h.clamp(0.0, 1.0);
        match self {
            Colormap::Viridis => ViridisRGB.get_color(h),
            Colormap::Grayscale => BlackWhite.get_color(h),
            Colormap::Bone => Bone.get_color(h),
            Colormap::Copper => Copper.get_color(h),
            Colormap::Vulcano => {
                let (r, g, b) = VulcanoHSL.get_color(h).to_backend_color().rgb;
                RGBColor(r, g, b)
            }
        }
    }
}

/// Overlays drawn in white on top of the map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Markers {
    /// Horizontal line at the pulse-off column of a time-domain map.
    pub pulse_off: bool,
    /// Pulse bandwidth Δf (Hz): horizontal bar at Δf on a frequency-domain map.
    pub bandwidth: Option<f64>,
    /// Vertical dashed lines at these drive frequencies (Hz).
    pub bare_frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    pub colormap: Colormap,
    /// Color range becomes [P(100 − p), P(p)] of the displayed values.
    pub clip_percentile: Option<f64>,
    /// Display log10(max(v, floor)).
    pub log: bool,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
    pub markers: Markers,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            colormap: Colormap::Viridis,
            clip_percentile: None,
            log: false,
            width: 900,
            height: 600,
            title: None,
            markers: Markers::default(),
        }
    }
}

/// Display-ready map: x is the row axis of the source, y its column axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major over x, then y.
    pub values: Vec<f64>,
    pub x_unit: AxisUnit,
    pub y_unit: AxisUnit,
    pub x_label: String,
    pub y_label: String,
    /// y value of the pulse-off marker, if known.
    pub pulse_off: Option<f64>,
    pub y_is_frequency: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisUnit {
    GHz,
    MHz,
    Ns,
}

impl AxisUnit {
    fn scale(self) -> f64 {
        match self {
            AxisUnit::GHz => 1e-9,
            AxisUnit::MHz => 1e-6,
            AxisUnit::Ns => 1e9,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AxisUnit::GHz => "GHz",
            AxisUnit::MHz => "MHz",
            AxisUnit::Ns => "ns",
        }
    }
}

impl Heatmap {
    pub fn from_spectrogram(s: &Spectrogram) -> Result<Self> {
        s.validate()?;
        let (y_unit, y_label, freq) = match s.col_kind {
            ColumnAxis::Time => (AxisUnit::Ns, "Time", false),
            ColumnAxis::Frequency => (AxisUnit::MHz, "Frequency", true),
        };
        Ok(Self {
            x: s.row_axis.clone(),
            y: s.col_axis.clone(),
            values: s.values.clone(),
            x_unit: AxisUnit::GHz,
            y_unit,
            x_label: "Drive frequency".into(),
            y_label: y_label.into(),
            pulse_off: s.pulse_off_index.filter(|_| !freq).and_then(|k| s.col_axis.get(k).copied()),
            y_is_frequency: freq,
        })
    }

    /// g² over (drive frequency, lag).
    pub fn from_g2(c: &CorrelationMap) -> Result<Self> {
        c.validate()?;
        Ok(Self {
            x: c.row_axis.clone(),
            y: c.lag_axis.clone(),
            values: c.g2.clone(),
            x_unit: AxisUnit::GHz,
            y_unit: AxisUnit::Ns,
            x_label: "Drive frequency".into(),
            y_label: "Lag".into(),
            pulse_off: None,
            y_is_frequency: false,
        })
    }

    /// χ″ over (drive frequency, response frequency).
    pub fn from_chi(c: &CorrelationMap) -> Result<Self> {
        c.validate()?;
        let chi = c
            .chi
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("correlation map carries no χ″".into()))?;
        Ok(Self {
            x: c.row_axis.clone(),
            y: chi.freq_axis.clone(),
            values: chi.values.clone(),
            x_unit: AxisUnit::GHz,
            y_unit: AxisUnit::MHz,
            x_label: "Drive frequency".into(),
            y_label: "Frequency".into(),
            pulse_off: None,
            y_is_frequency: true,
        })
    }

    fn display_values(&self, log: bool) -> Vec<f64> {
        if log {
            self.values.iter().map(|v| v.max(LOG_FLOOR).log10()).collect()
        } else {
            self.values.clone()
        }
    }
}

/// Linear-interpolated percentile (0..=100) of finite values.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let pos = (p.clamp(0.0, 100.0) / 100.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Color-scale limits of the displayed values under `opts`.
pub fn color_range(values: &[f64], opts: &RenderOptions) -> Result<(f64, f64)> {
    let shown: Vec<f64> = if opts.log {
        values.iter().map(|v| v.max(LOG_FLOOR).log10()).collect()
    } else {
        values.to_vec()
    };
    let (lo, hi) = match opts.clip_percentile {
        Some(p) => {
            if !(50.0..=100.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("clip percentile must lie in [50, 100], got {p}")));
            }
            (percentile(&shown, 100.0 - p), percentile(&shown, p))
        }
        None => (percentile(&shown, 0.0), percentile(&shown, 100.0)),
    };
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err(Error::Render("map has no finite values".into())),
    }
}

fn ensure_font() -> Result<()> {
    static FONT: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    FONT.get_or_init(|| {
        let env = std::env::var(FONT_ENV).ok();
        let paths = env.iter().map(String::as_str).chain(FONT_CANDIDATES.iter().copied());
        for p in paths {
            if let Ok(bytes) = fs::read(p) {
                let bytes: &'static [u8] = Box::leak(bytes.into_boxed_slice());
                if plotters::style::register_font("sans-serif", FontStyle::Normal, bytes).is_ok() {
                    return Ok(());
                }
            }
        }
        Err(format!("no usable TrueType font found; set {FONT_ENV} to a .ttf file"))
    })
    .clone()
    .map_err(Error::Render)
}

/// Pixel buffer backend for PNG output.
struct Raster<'a> {
    img: &'a mut image::RgbImage,
}

impl DrawingBackend for Raster<'_> {
    type ErrorType = std::io::Error;

    fn get_size(&self) -> (u32, u32) {
        self.img.dimensions()
    }

    fn ensure_prepared(&mut self) -> std::result::Result<(), DrawingErrorKind<Self::ErrorType>> {
        Ok(())
    }

    fn present(&mut self) -> std::result::Result<(), DrawingErrorKind<Self::ErrorType>> {
        Ok(())
    }

    fn draw_pixel(
        &mut self,
        (x, y): BackendCoord,
        color: BackendColor,
    ) -> std::result::Result<(), DrawingErrorKind<Self::ErrorType>> {
        let (w, h) = self.img.dimensions();
        if x < 0 || y < 0 || x as u32 >= w || y as u32 >= h || color.alpha <= 0.0 {
            return Ok(());
        }
        let a = color.alpha.min(1.0);
        let px = self.img.get_pixel_mut(x as u32, y as u32);
        for (c, new) in px.0.iter_mut().zip([color.rgb.0, color.rgb.1, color.rgb.2]) {
            *c = (new as f64 * a + *c as f64 * (1.0 - a)).round() as u8;
        }
        Ok(())
    }
}

enum Format {
    Png,
    Svg,
}

fn format_of(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(Format::Png),
        Some("svg") => Ok(Format::Svg),
        _ => Err(Error::Render(format!("{}: extension must be .png or .svg", path.display()))),
    }
}

fn draw_error<E: std::fmt::Debug>(e: E) -> Error {
    Error::Render(format!("{e:?}"))
}


/// Cell boundaries around axis centers.
fn edges(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    if n == 1 {
        let half = if axis[0] != 0.0 { 0.005 * axis[0].abs() } else { 0.5 };
        return vec![axis[0] - half, axis[0] + half];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(axis[0] - 0.5 * (axis[1] - axis[0]));
    e.extend(axis.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    e.push(axis[n - 1] + 0.5 * (axis[n - 1] - axis[n - 2]));
    e
}

/// Index ranges of at most `MAX_CELLS` display bins.
fn bins(n: usize) -> Vec<(usize, usize)> {
    let k = n.min(MAX_CELLS);
    (0..k).map(|b| (b * n / k, (b + 1) * n / k)).collect()
}

fn draw_heatmap<DB>(root: DrawingArea<DB, plotters::coord::Shift>, map: &Heatmap, opts: &RenderOptions) -> Result<()>
where
    DB: DrawingBackend,
    DB::ErrorType: 'static,
{
    let (lo, hi) = color_range(&map.values, opts)?;
    let shown = map.display_values(opts.log);
    let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
    let (sx, sy) = (map.x_unit.scale(), map.y_unit.scale());
    let xe: Vec<f64> = edges(&map.x).into_iter().map(|v| v * sx).collect();
    let ye: Vec<f64> = edges(&map.y).into_iter().map(|v| v * sy).collect();
    let (x0, x1) = (xe[0], xe[xe.len() - 1]);
    let (y0, y1) = (ye[0], ye[ye.len() - 1]);

    root.fill(&WHITE).map_err(draw_error)?;
    let (main, bar) = root.split_horizontally(opts.width.saturating_sub(120));
    let mut builder = ChartBuilder::on(&main);
    builder.margin(15).x_label_area_size(50).y_label_area_size(70);
    if let Some(t) = &opts.title {
        builder.caption(t, ("sans-serif", 20));
    }
    let mut chart = builder.build_cartesian_2d(x0..x1, y0..y1).map_err(draw_error)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc(format!("{} ({})", map.x_label, map.x_unit.name()))
        .y_desc(format!("{} ({})", map.y_label, map.y_unit.name()))
        .label_style(("sans-serif", 14))
        .axis_desc_style(("sans-serif", 16))
        .draw()
        .map_err(draw_error)?;

    let ny = map.y.len();
    let (xb, yb) = (bins(map.x.len()), bins(ny));
    let mut cells = Vec::with_capacity(xb.len() * yb.len());
    for &(ia, ib) in &xb {
        for &(ja, jb) in &yb {
            let mut sum = 0.0;
            for i in ia..ib {
                sum += shown[i * ny + ja..i * ny + jb].iter().sum::<f64>();
            }
            let v = sum / ((ib - ia) * (jb - ja)) as f64;
            let color = opts.colormap.color(norm(v));
            cells.push(Rectangle::new([(xe[ia], ye[ja]), (xe[ib], ye[jb])], color.filled()));
        }
    }
    chart.draw_series(cells).map_err(draw_error)?;

    let white = WHITE.stroke_width(2);
    if opts.markers.pulse_off {
        if let Some(t) = map.pulse_off {
            let y = t * sy;
            chart.draw_series(LineSeries::new([(x0, y), (x1, y)], white)).map_err(draw_error)?;
        }
    }
    if let (Some(df), true) = (opts.markers.bandwidth, map.y_is_frequency) {
        let y = df * sy;
        if y >= y0 && y <= y1 {
            chart.draw_series(LineSeries::new([(x0, y), (x1, y)], white)).map_err(draw_error)?;
        }
    }
    for &f in &opts.markers.bare_frequencies {
        let x = f * sx;
        if x >= x0 && x <= x1 {
            chart
                .draw_series(DashedLineSeries::new([(x, y0), (x, y1)], 8, 6, white))
                .map_err(draw_error)?;
        }
    }

    let (c0, c1) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let mut cb = ChartBuilder::on(&bar)
        .margin_top(15)
        .margin_bottom(65)
        .margin_right(10)
        .y_label_area_size(70)
        .build_cartesian_2d(0.0..1.0, c0..c1)
        .map_err(draw_error)?;
    cb.configure_mesh()
        .disable_mesh()
        .disable_x_axis()
        .y_desc(if opts.log { "log10 value" } else { "value" })
        .label_style(("sans-serif", 12))
        .draw()
        .map_err(draw_error)?;
    let steps = 128;
    cb.draw_series((0..steps).map(|k| {
        let a = c0 + (c1 - c0) * k as f64 / steps as f64;
        let b = c0 + (c1 - c0) * (k + 1) as f64 / steps as f64;
        Rectangle::new([(0.0, a), (1.0, b)], opts.colormap.color(norm(0.5 * (a + b))).filled())
    }))
    .map_err(draw_error)?;
    root.present().map_err(draw_error)
}

fn draw_series<DB>(root: DrawingArea<DB, plotters::coord::Shift>, s: &Series, opts: &RenderOptions) -> Result<()>
where
    DB: DrawingBackend,
    DB::ErrorType: 'static,
{
    let (xmin, xmax) = (s.axis[0], s.axis[s.axis.len() - 1]);
    let finite = s.values.iter().copied().filter(|v| v.is_finite());
    let ymin = finite.clone().fold(f64::INFINITY, f64::min);
    let ymax = finite.fold(f64::NEG_INFINITY, f64::max);
    if !ymin.is_finite() {
        return Err(Error::Render("series has no finite values".into()));
    }
    let pad = if ymax > ymin { 0.05 * (ymax - ymin) } else { 0.5 * ymin.abs().max(1.0) };
    let xpad = if xmax > xmin { 0.0 } else { 0.5 * xmin.abs().max(1.0) };
    root.fill(&WHITE).map_err(draw_error)?;
    let mut builder = ChartBuilder::on(&root);
    builder.margin(15).x_label_area_size(50).y_label_area_size(80);
    if let Some(t) = &opts.title {
        builder.caption(t, ("sans-serif", 20));
    }
    let mut chart = builder
        .build_cartesian_2d(xmin - xpad..xmax + xpad, ymin - pad..ymax + pad)
        .map_err(draw_error)?;
    let unit = |u: &str| if u.is_empty() { String::new() } else { format!(" ({u})") };
    chart
        .configure_mesh()
        .x_desc(format!("{}{}", s.axis_name, unit(&s.axis_unit)))
        .y_desc(format!("{}{}", s.name, unit(&s.unit)))
        .label_style(("sans-serif", 14))
        .axis_desc_style(("sans-serif", 16))
        .draw()
        .map_err(draw_error)?;
    let pts: Vec<(f64, f64)> =
        s.axis.iter().zip(&s.values).filter(|(_, v)| v.is_finite()).map(|(&x, &y)| (x, y)).collect();
    chart.draw_series(LineSeries::new(pts, BLUE.stroke_width(2))).map_err(draw_error)?;
    for &f in &opts.markers.bare_frequencies {
        if f >= xmin && f <= xmax {
            chart
                .draw_series(DashedLineSeries::new([(f, ymin - pad), (f, ymax + pad)], 8, 6, BLACK.stroke_width(1)))
                .map_err(draw_error)?;
        }
    }
    root.present().map_err(draw_error)
}

fn draw_floquet<DB>(root: DrawingArea<DB, plotters::coord::Shift>, f: &FloquetSweep, opts: &RenderOptions) -> Result<()>
where
    DB: DrawingBackend,
    DB::ErrorType: 'static,
{
    let x: Vec<f64> = f.drive_freqs.iter().map(|v| v * 1e-9).collect();
    let half = 0.5 * f.drive_freqs.iter().cloned().fold(0.0, f64::max) * 1e-6;
    let pad = if x.len() > 1 { 0.0 } else { 0.01 * x[0].max(1e-3) };
    root.fill(&WHITE).map_err(draw_error)?;
    let mut builder = ChartBuilder::on(&root);
    builder.margin(15).x_label_area_size(50).y_label_area_size(80);
    if let Some(t) = &opts.title {
        builder.caption(t, ("sans-serif", 20));
    }
    let mut chart = builder
        .build_cartesian_2d(x[0] - pad..x[x.len() - 1] + pad, -half..half)
        .map_err(draw_error)?;
    chart
        .configure_mesh()
        .x_desc("Drive frequency (GHz)")
        .y_desc("Quasi-energy (MHz)")
        .label_style(("sans-serif", 14))
        .axis_desc_style(("sans-serif", 16))
        .draw()
        .map_err(draw_error)?;
    let pts: Vec<(f64, f64)> = (0..x.len())
        .flat_map(|i| f.row(i).iter().map(move |&e| (i, e)))
        .map(|(i, e)| (x[i], e * 1e-6))
        .collect();
    chart
        .draw_series(pts.into_iter().map(|p| Circle::new(p, 2, BLUE.filled())))
        .map_err(draw_error)?;
    for &b in &opts.markers.bare_frequencies {
        let bx = b * 1e-9;
        if bx >= x[0] - pad && bx <= x[x.len() - 1] + pad {
            chart
                .draw_series(DashedLineSeries::new([(bx, -half), (bx, half)], 8, 6, BLACK.stroke_width(1)))
                .map_err(draw_error)?;
        }
    }
    root.present().map_err(draw_error)
}

/// Writes `draw` output as PNG or SVG according to the extension of `path`.
fn render_with<F1, F2>(path: &Path, opts: &RenderOptions, png: F1, svg: F2) -> Result<()>
where
    F1: FnOnce(DrawingArea<Raster<'_>, plotters::coord::Shift>) -> Result<()>,
    F2: FnOnce(DrawingArea<SVGBackend<'_>, plotters::coord::Shift>) -> Result<()>,
{
    if opts.width < 200 || opts.height < 150 {
        return Err(Error::InvalidParameter("image must be at least 200 x 150 pixels".into()));
    }
    let format = format_of(path)?;
    ensure_font()?;
    match format {
        Format::Png => {
            let mut img = image::RgbImage::from_pixel(opts.width, opts.height, image::Rgb([255, 255, 255]));
            png(Raster { img: &mut img }.into_drawing_area())?;
            let mut buf = std::io::Cursor::new(Vec::new());
            img.write_to(&mut buf, image::ImageFormat::Png).map_err(draw_error)?;
            fs::write(path, buf.into_inner()).map_err(|e| Error::io(path, e))
        }
        Format::Svg => {
            let mut text = String::new();
            svg(SVGBackend::with_string(&mut text, (opts.width, opts.height)).into_drawing_area())?;
            fs::write(path, text).map_err(|e| Error::io(path, e))
        }
    }
}

/// Renders a map as PNG or SVG (by extension) with labeled axes and a color bar.
pub fn render_heatmap(map: &Heatmap, path: &Path, opts: &RenderOptions) -> Result<()> {
    if map.x.is_empty() || map.y.is_empty() || map.values.is_empty() {
        return Err(Error::Render("cannot render an empty map".into()));
    }
    if map.values.len() != map.x.len() * map.y.len() {
        return Err(Error::DimensionMismatch { expected: map.x.len() * map.y.len(), found: map.values.len() });
    }
    render_with(path, opts, |a| draw_heatmap(a, map, opts), |a| draw_heatmap(a, map, opts))
}

pub fn render_spectrogram(s: &Spectrogram, path: &Path, opts: &RenderOptions) -> Result<()> {
    if s.rows() == 0 || s.cols() == 0 {
        return Err(Error::Render("cannot render an empty map".into()));
    }
    render_heatmap(&Heatmap::from_spectrogram(s)?, path, opts)
}

/// Folded quasi-energies against drive frequency.
pub fn render_floquet(f: &FloquetSweep, path: &Path, opts: &RenderOptions) -> Result<()> {
    if f.drive_freqs.is_empty() || f.levels() == 0 {
        return Err(Error::Render("cannot render an empty Floquet sweep".into()));
    }
    render_with(path, opts, |a| draw_floquet(a, f, opts), |a| draw_floquet(a, f, opts))
}

/// Line cut of a series.
pub fn render_series(s: &Series, path: &Path, opts: &RenderOptions) -> Result<()> {
    if s.axis.is_empty() || s.values.len() != s.axis.len() {
        return Err(Error::Render("cannot render an empty or ragged series".into()));
    }
    render_with(path, opts, |a| draw_series(a, s, opts), |a| draw_series(a, s, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Scale;
    use tempfile::tempdir;

    fn map(rows: usize, cols: usize) -> Spectrogram {
        let r = (0..rows).map(|i| 3e9 + i as f64 * 25e6).collect();
        let c = (0..cols).map(|j| j as f64 * 0.1e-9).collect();
        let v = (0..rows * cols).map(|k| ((k * 7919) % 101) as f64).collect();
        Spectrogram::new(r, c, ColumnAxis::Time, v, Scale::Linear, Some(cols / 2)).unwrap()
    }

    #[test]
    fn small_map_renders_both_formats() {
        let dir = tempdir().unwrap();
        let s = map(2, 2);
        for name in ["m.png", "m.svg"] {
            let p = dir.path().join(name);
            render_spectrogram(&s, &p, &RenderOptions::default()).unwrap();
            assert!(fs::metadata(&p).unwrap().len() > 0);
        }
        let svg = fs::read_to_string(dir.path().join("m.svg")).unwrap();
        assert!(svg.contains("Drive frequency (GHz)"));
        assert!(svg.contains("Time (ns)"));
    }

    #[test]
    fn clip_range_is_percentile_pair() {
        let v: Vec<f64> = (0..=1000).map(|k| (k as f64).powi(2)).collect();
        let opts = RenderOptions { clip_percentile: Some(99.0), ..Default::default() };
        let (lo, hi) = color_range(&v, &opts).unwrap();
        assert_eq!(lo, percentile(&v, 1.0).unwrap());
        assert_eq!(hi, percentile(&v, 99.0).unwrap());
        assert_eq!((lo, hi), (100.0, 980_100.0));
        assert_eq!(color_range(&v, &RenderOptions::default()).unwrap(), (0.0, 1e6));
    }

    #[test]
    fn renders_are_byte_identical_and_pure() {
        let dir = tempdir().unwrap();
        let s = map(9, 40);
        let before = s.clone();
        let opts = RenderOptions {
            clip_percentile: Some(95.0),
            log: true,
            markers: Markers { pulse_off: true, bandwidth: None, bare_frequencies: vec![3.1e9] },
            ..Default::default()
        };
        for ext in ["png", "svg"] {
            let a = dir.path().join(format!("a.{ext}"));
            let b = dir.path().join(format!("b.{ext}"));
            render_spectrogram(&s, &a, &opts).unwrap();
            render_spectrogram(&s, &b, &opts).unwrap();
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
        }
        assert_eq!(s, before);
    }

    #[test]
    fn bare_frequency_markers_are_dashed() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("m.svg");
        let opts = RenderOptions {
            markers: Markers { bare_frequencies: vec![3.05e9, 3.15e9], ..Default::default() },
            ..Default::default()
        };
        render_spectrogram(&map(9, 20), &p, &opts).unwrap();
        let plain = dir.path().join("plain.svg");
        render_spectrogram(&map(9, 20), &plain, &RenderOptions::default()).unwrap();
        let count = |p: &Path| fs::read_to_string(p).unwrap().matches("<polyline").count();
        assert!(count(&p) > count(&plain) + 2);
    }

    #[test]
    fn rejects_empty_and_bad_extension() {
        let dir = tempdir().unwrap();
        let empty = Heatmap {
            x: vec![],
            y: vec![],
            values: vec![],
            x_unit: AxisUnit::GHz,
            y_unit: AxisUnit::Ns,
            x_label: "x".into(),
            y_label: "y".into(),
            pulse_off: None,
            y_is_frequency: false,
        };
        assert!(matches!(
            render_heatmap(&empty, &dir.path().join("e.png"), &RenderOptions::default()),
            Err(Error::Render(_))
        ));
        assert!(render_spectrogram(&map(2, 2), &dir.path().join("m.jpg"), &RenderOptions::default()).is_err());
    }

    #[test]
    fn series_line_cut() {
        let dir = tempdir().unwrap();
        let s = Series {
            axis: vec![3e9, 3.5e9, 4e9],
            axis_name: "drive frequency".into(),
            axis_unit: "Hz".into(),
            values: vec![0.1, 0.5, 0.2],
            name: "population".into(),
            unit: String::new(),
            metadata: Default::default(),
        };
        let p = dir.path().join("s.png");
        render_series(&s, &p, &RenderOptions::default()).unwrap();
        assert!(fs::metadata(&p).unwrap().len() > 0);
    }
}
