//! File formats, run configuration, the result ledger and the batch pipeline.

pub mod commands;
mod config;
mod image;
mod ledger;
mod pipeline;
mod plot;
mod report;
mod spectrum_csv;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use config::{FitModeSetting, RunConfig, SpectrumSource};
pub use image::{format_pgm, parse_image, read_image};
pub use ledger::{append_ledger, digest_outputs, sha256_hex, LedgerEntry, OutputRecord};
pub use pipeline::{derive_seed, run_pipeline, NReport, PipelineReport, PointReport};
pub use plot::emit_plot_data;
pub use report::{ErrorReport, FitReport, TwoLevelReport, WaistReport};
pub use spectrum_csv::{format_spectrum, parse_spectrum, read_spectrum, write_spectrum, DetuningUnit, SpectrumFile};

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("output path `{}` has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}
