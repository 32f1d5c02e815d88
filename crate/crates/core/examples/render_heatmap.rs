//! Renders a synthetic ring-down map to PNG and SVG with markers.
//!
//! cargo run --example render_heatmap [output-dir]

use std::f64::consts::TAU;

use tlsring::analysis::{ColumnAxis, Scale, Spectrogram};
use tlsring::io::{render_spectrogram, Colormap, Markers, RenderOptions};

fn main() -> tlsring::Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let drives: Vec<f64> = (0..81).map(|k| 3e9 + k as f64 * 25e6).collect();
    let times: Vec<f64> = (0..700).map(|k| k as f64 * 1e-9).collect();
    let off = 100;
    let mut values = Vec::new();
    for &d in &drives {
        let delta = d - 4e9;
        let rabi = (delta * delta + 1e16).sqrt();
        for (k, &t) in times.iter().enumerate() {
            let v = if k < off {
                1e16 / (rabi * rabi) * (0.5 * TAU * rabi * t).sin().powi(2)
            } else {
                let p = 1e16 / (rabi * rabi) * (0.5 * TAU * rabi * times[off]).sin().powi(2);
                p * (-(t - times[off]) / 150e-9).exp()
            };
            values.push(v);
        }
    }
    let map = Spectrogram::new(drives, times, ColumnAxis::Time, values, Scale::Linear, Some(off))?;
    let opts = RenderOptions {
        colormap: Colormap::Viridis,
        clip_percentile: Some(99.5),
        title: Some("synthetic ring-down".into()),
        markers: Markers { pulse_off: true, bandwidth: None, bare_frequencies: vec![4e9] },
        ..Default::default()
    };
    for name in ["ringdown.png", "ringdown.svg"] {
        let path = out.join(name);
        render_spectrogram(&map, &path, &opts)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
