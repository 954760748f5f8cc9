//! Wavefield archive: raw little-endian f64 matrix plus a TOML sidecar.

use super::excitation::{ExcitationSpec, Window};
use super::synth::{MeasurementPath, WavefieldRecord};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveMeta {
    pub l_mes_mm: f64,
    pub dl_mm: f64,
    #[serde(rename = "sample_rate_Hz")]
    pub sample_rate_hz: f64,
    pub duration_ms: f64,
    pub d_mm: f64,
    pub n_points: usize,
    pub n_samples: usize,
    #[serde(rename = "f_start_Hz")]
    pub f_start_hz: f64,
    #[serde(rename = "f_step_Hz")]
    pub f_step_hz: f64,
    #[serde(rename = "f_max_Hz")]
    pub f_max_hz: f64,
    pub n_shifts: usize,
    #[serde(rename = "shift_Hz")]
    pub shift_hz: f64,
    pub window: Window,
    /// Row-major `[point][sample]`.
    pub layout: String,
}

impl ArchiveMeta {
    pub fn spec(&self) -> ExcitationSpec {
        ExcitationSpec {
            f_start: self.f_start_hz,
            f_step: self.f_step_hz,
            f_max: self.f_max_hz,
            n_shifts: self.n_shifts,
            shift: self.shift_hz,
            duration: self.duration_ms * 1e-3,
            window: self.window,
        }
    }
}

const LAYOUT: &str = "f64le point-major";

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("bin"), stem.with_extension("toml"))
}

/// Writes `<stem>.bin` and `<stem>.toml`.
pub fn write_archive(
    stem: &Path,
    rec: &WavefieldRecord,
    spec: &ExcitationSpec,
    path: &MeasurementPath,
    d: f64,
) -> Result<()> {
    rec.validate()?;
    let (bin, side) = paths(stem);
    let meta = ArchiveMeta {
        l_mes_mm: path.l_mes * 1e3,
        dl_mm: path.dl * 1e3,
        sample_rate_hz: rec.sample_rate,
        duration_ms: rec.duration * 1e3,
        d_mm: d * 1e3,
        n_points: rec.v.len(),
        n_samples: rec.n_samples(),
        f_start_hz: spec.f_start,
        f_step_hz: spec.f_step,
        f_max_hz: spec.f_max,
        n_shifts: spec.n_shifts,
        shift_hz: spec.shift,
        window: spec.window,
        layout: LAYOUT.into(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Schema(e.to_string()))?;
    std::fs::write(side, text)?;
    let mut w = BufWriter::new(File::create(bin)?);
    for row in &rec.v {
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_archive(stem: &Path) -> Result<(WavefieldRecord, ArchiveMeta)> {
    let (bin, side) = paths(stem);
    let meta: ArchiveMeta = toml::from_str(&std::fs::read_to_string(&side)?)
        .map_err(|e| Error::Schema(format!("{}: {e}", side.display())))?;
    if meta.layout != LAYOUT {
        return Err(Error::Schema(format!("unsupported layout '{}'", meta.layout)));
    }
    let expected = (meta.n_points * meta.n_samples * 8) as u64;
    let got = std::fs::metadata(&bin)?.len();
    if got != expected {
        return Err(Error::Schema(format!("{}: {got} bytes, sidecar implies {expected}", bin.display())));
    }
    let mut r = BufReader::new(File::open(&bin)?);
    let mut v = Vec::with_capacity(meta.n_points);
    let mut b = [0u8; 8];
    for _ in 0..meta.n_points {
        let mut row = Vec::with_capacity(meta.n_samples);
        for _ in 0..meta.n_samples {
            r.read_exact(&mut b)?;
            row.push(f64::from_le_bytes(b));
        }
        v.push(row);
    }
    let dl = meta.dl_mm * 1e-3;
    let rec = WavefieldRecord {
        v,
        x_positions: (0..meta.n_points).map(|i| i as f64 * dl).collect(),
        sample_rate: meta.sample_rate_hz,
        duration: meta.duration_ms * 1e-3,
    };
    rec.validate()?;
    Ok((rec, meta))
}
