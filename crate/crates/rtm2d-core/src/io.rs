//! On-disk artifact formats.
//!
//! Every binary artifact is little-endian IEEE-754 f64 with a JSON sidecar
//! carrying geometry, provenance, a format version, and a SHA-256 digest of
//! the binary payload:
//!
//! * datasets — `(re, im)` pairs per complex vector component, row-major in
//!   `(source, receiver, polarization, component)` order;
//! * images — values row-major in `(iy, ix)` order;
//! * cross-sections — CSV with a `coordinate,value` header;
//! * identity reports — one JSON object per line.
//!
//! Writes are atomic: a temporary file in the target directory is renamed
//! into place.

use crate::error::{Error, Result};
use crate::forward::{NoiseRecord, ScatterDataSet};
use crate::geometry::{Aperture, SamplingGrid};
use crate::green::WaveConfig;
use crate::rtm::{CrossSection, ImageGrid, Provenance};
use crate::verify::IdentityReport;
use crate::C64;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const DATASET_FORMAT_VERSION: u32 = 1;
pub const IMAGE_FORMAT_VERSION: u32 = 1;

/// Writes bytes via a temporary file and rename, so readers never observe a
/// partial artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(bytes).map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json_pretty<T: Serialize>(value: &T, path: &Path) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Metadata {
        path: path.display().to_string(),
        source,
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// JSON sidecar of a dataset artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub format_version: u32,
    pub kind: String,
    pub sources: usize,
    pub receivers: usize,
    pub polarizations: Vec<[f64; 2]>,
    pub aperture: Aperture,
    pub wave: WaveConfig,
    pub scene_digest: String,
    pub noise: Option<NoiseRecord>,
    pub data_digest: String,
    pub layout: String,
}

/// Writes `<stem>.bin` and `<stem>.json` for a dataset.
pub fn save_dataset(data: &ScatterDataSet, stem: &Path) -> Result<()> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let bytes = data.to_le_bytes();
    let sidecar = DatasetSidecar {
        format_version: DATASET_FORMAT_VERSION,
        kind: "scatter-dataset".to_string(),
        sources: data.aperture.n_src,
        receivers: data.aperture.n_rec,
        polarizations: data.polarizations.iter().map(|p| [p.x, p.y]).collect(),
        aperture: data.aperture.clone(),
        wave: data.wave,
        scene_digest: data.scene_digest.clone(),
        noise: data.noise,
        data_digest: data.data_digest(),
        layout: "little-endian f64 (re,im) pairs, row-major (s, r, p, component)".to_string(),
    };
    atomic_write(&bin_path, &bytes)?;
    atomic_write(&json_path, &to_json_pretty(&sidecar, &json_path)?)
}

/// Loads a dataset from `<stem>.bin` + `<stem>.json`, checking sizes and the
/// payload digest.
pub fn load_dataset(stem: &Path) -> Result<ScatterDataSet> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let sidecar: DatasetSidecar =
        serde_json::from_slice(&read_file(&json_path)?).map_err(|source| Error::Metadata {
            path: json_path.display().to_string(),
            source,
        })?;
    if sidecar.format_version != DATASET_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported dataset format version {}",
            sidecar.format_version
        )));
    }
    let bytes = read_file(&bin_path)?;
    let n_entries = sidecar.sources * sidecar.receivers * sidecar.polarizations.len();
    if bytes.len() != n_entries * 32 {
        return Err(Error::Format(format!(
            "dataset payload is {} bytes, expected {}",
            bytes.len(),
            n_entries * 32
        )));
    }
    let mut data = ScatterDataSet::zeros(
        sidecar.aperture.clone(),
        sidecar.wave,
        sidecar
            .polarizations
            .iter()
            .map(|p| Vector2::new(p[0], p[1]))
            .collect(),
        sidecar.scene_digest.clone(),
    );
    data.noise = sidecar.noise;
    let mut f64s = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for entry in data.values_mut() {
        for component in entry.iter_mut() {
            let re = f64s.next().unwrap();
            let im = f64s.next().unwrap();
            *component = C64::new(re, im);
        }
    }
    if data.data_digest() != sidecar.data_digest {
        return Err(Error::Format(
            "dataset payload does not match its sidecar digest".to_string(),
        ));
    }
    Ok(data)
}

/// JSON sidecar of an image artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub format_version: u32,
    pub kind: String,
    pub grid: SamplingGrid,
    pub provenance: Provenance,
    pub data_digest: String,
    pub layout: String,
}

/// Writes `<stem>.bin` and `<stem>.json` for an image.
pub fn save_image(img: &ImageGrid, stem: &Path) -> Result<()> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let sidecar = ImageSidecar {
        format_version: IMAGE_FORMAT_VERSION,
        kind: "image-grid".to_string(),
        grid: img.grid.clone(),
        provenance: img.provenance.clone(),
        data_digest: img.data_digest(),
        layout: "little-endian f64, row-major (iy, ix)".to_string(),
    };
    atomic_write(&bin_path, &img.to_le_bytes())?;
    atomic_write(&json_path, &to_json_pretty(&sidecar, &json_path)?)
}

/// Loads an image from `<stem>.bin` + `<stem>.json`.
pub fn load_image(stem: &Path) -> Result<ImageGrid> {
    let bin_path = stem.with_extension("bin");
    let json_path = stem.with_extension("json");
    let sidecar: ImageSidecar =
        serde_json::from_slice(&read_file(&json_path)?).map_err(|source| Error::Metadata {
            path: json_path.display().to_string(),
            source,
        })?;
    if sidecar.format_version != IMAGE_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported image format version {}",
            sidecar.format_version
        )));
    }
    let bytes = read_file(&bin_path)?;
    if bytes.len() != sidecar.grid.len() * 8 {
        return Err(Error::Format(format!(
            "image payload is {} bytes, expected {}",
            bytes.len(),
            sidecar.grid.len() * 8
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let img = ImageGrid {
        grid: sidecar.grid,
        values,
        provenance: sidecar.provenance,
    };
    if img.data_digest() != sidecar.data_digest {
        return Err(Error::Format(
            "image payload does not match its sidecar digest".to_string(),
        ));
    }
    Ok(img)
}

/// Writes a cross-section as CSV (`coordinate,value` with a header).
pub fn save_cross_section_csv(cs: &CrossSection, path: &Path) -> Result<()> {
    let mut out = String::from("coordinate,value\n");
    for (c, v) in cs.coords.iter().zip(&cs.values) {
        out.push_str(&format!("{c:.17e},{v:.17e}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Writes identity reports as JSON lines.
pub fn save_reports_jsonl(reports: &[IdentityReport], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for report in reports {
        let line = serde_json::to_vec(report).map_err(|source| Error::Metadata {
            path: path.display().to_string(),
            source,
        })?;
        out.extend_from_slice(&line);
        out.push(b'\n');
    }
    atomic_write(path, &out)
}
