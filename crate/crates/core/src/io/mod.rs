//! Dataset persistence, measurement ingestion and rendering.

pub mod csv;
pub mod dataset;
pub mod render;

pub use self::csv::{import_iq_csv, read_field_profile, read_gain_table, write_gain_table, write_iq_csv};
pub use dataset::{
    read_dataset, read_manifest, read_spectrogram, write_dataset, ArraySpec, AxisSpec, Dataset, DatasetKind, Dtype,
    Manifest, WriteOptions, FORMAT_VERSION, MANIFEST_FILE,
};
pub use render::{render_floquet, render_heatmap, render_series, render_spectrogram, Colormap, Heatmap, Markers, RenderOptions};
