//! Dataset generation: per-sample signal synthesis → transform → PNG, with a
//! JSONL manifest written atomically after all images exist.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{GridSection, TftSection};
use super::scenario::ScenarioCase;
use super::seed::sample_seed;
use crate::channel::simulate_received_frame;
use crate::error::{JamError, Result};
use crate::imaging::{render, save_png, TfrImage};
use crate::jamming::JammerClass;
use crate::lte_phy::GridConfig;
use crate::tft::{choi_williams, gabor_scalogram, stft_spectrogram, TfrKind, TftParams};

/// Manifest format version.
pub const MANIFEST_VERSION: u32 = 1;

/// One generated image.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRecord {
    /// Image path relative to the manifest's directory.
    pub path: String,
    /// Jammer class name.
    pub class: String,
    /// Scenario case id.
    pub case: String,
    /// Transform name.
    pub transform: String,
    /// Per-sample RNG seed.
    pub seed: u64,
    /// Sample index within its class.
    pub index: usize,
}

/// Manifest header: format version plus the generator configuration snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestHeader {
    /// Format version.
    pub version: u32,
    /// Global seed the per-sample seeds were derived from.
    pub seed: u64,
    /// Scenario case.
    pub case: ScenarioCase,
    /// Transform name.
    pub transform: String,
    /// Samples per class.
    pub n_per_class: usize,
    /// Grid parameters.
    pub grid: GridSection,
    /// Transform parameters.
    pub tft: TftSection,
}

/// A generated (or reloaded) dataset: header plus one record per image.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    /// Generation snapshot.
    pub header: ManifestHeader,
    /// Per-image records.
    pub records: Vec<ManifestRecord>,
    /// Directory the record paths are relative to.
    pub root: PathBuf,
}

impl DatasetManifest {
    /// Absolute path of a record's image.
    pub fn image_path(&self, rec: &ManifestRecord) -> PathBuf {
        self.root.join(&rec.path)
    }
}

/// Manifest file path for `(case, transform)` under `out_dir`.
pub fn manifest_path(out_dir: &Path, case_id: &str, kind: TfrKind) -> PathBuf {
    out_dir.join(format!("{case_id}_{kind}_manifest.jsonl"))
}

/// Compute the selected transform of a received frame.
pub fn transform_signal(
    rx: &crate::lte_phy::BasebandSignal,
    kind: TfrKind,
    tft: &TftParams,
) -> Result<crate::tft::Tfr> {
    match kind {
        TfrKind::Spec => stft_spectrogram(rx, tft),
        TfrKind::Cw => choi_williams(rx, tft),
        TfrKind::Gabor => gabor_scalogram(rx, tft),
    }
}

/// Synthesize one sample end to end: grid → jam → channel → transform →
/// rendered image.
pub fn generate_sample(
    case: &ScenarioCase,
    class: JammerClass,
    kind: TfrKind,
    seed: u64,
    grid: &GridConfig,
    tft: &TftParams,
) -> Result<TfrImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_tx, rx) = simulate_received_frame(case, class, grid, &mut rng)?;
    let tfr = transform_signal(&rx, kind, tft)?;
    let mut img = render(&tfr)?;
    img.label = class;
    img.case_id = Some(case.id.clone());
    Ok(img)
}

/// Generate a dataset of `n_per_class` images per jammer class, write the
/// PNGs under `out_dir/<case>/<class>/`, and finally write the manifest
/// atomically (temp file + rename). On error all images written by this call
/// are removed.
pub fn generate_dataset(
    case: &ScenarioCase,
    kind: TfrKind,
    n_per_class: usize,
    seed: u64,
    out_dir: &Path,
    grid_section: &GridSection,
    tft_section: &TftSection,
) -> Result<DatasetManifest> {
    if n_per_class == 0 {
        return Err(JamError::Domain("n_per_class must be ≥ 1".into()));
    }
    let grid = grid_section.to_grid()?;
    let tft = tft_section.to_params()?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<Vec<ManifestRecord>> {
        let mut records = Vec::with_capacity(4 * n_per_class);
        for class in JammerClass::ALL {
            let dir = out_dir.join(&case.id).join(class.as_str());
            fs::create_dir_all(&dir)?;
            for index in 0..n_per_class {
                let s = sample_seed(seed, &case.id, class, index);
                let img = generate_sample(case, class, kind, s, &grid, &tft)?;
                let rel = format!("{}/{}/{s:016x}_{kind}.png", case.id, class.as_str());
                let path = out_dir.join(&rel);
                save_png(&img, &path)?;
                written.push(path);
                records.push(ManifestRecord {
                    path: rel,
                    class: class.as_str().to_string(),
                    case: case.id.clone(),
                    transform: kind.as_str().to_string(),
                    seed: s,
                    index,
                });
            }
        }
        Ok(records)
    })();
    let records = match result {
        Ok(r) => r,
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
    };
    let header = ManifestHeader {
        version: MANIFEST_VERSION,
        seed,
        case: case.clone(),
        transform: kind.as_str().to_string(),
        n_per_class,
        grid: grid_section.clone(),
        tft: tft_section.clone(),
    };
    let manifest = DatasetManifest { header, records, root: out_dir.to_path_buf() };
    write_manifest(&manifest, &manifest_path(out_dir, &case.id, kind))?;
    Ok(manifest)
}

/// Serialize the manifest as JSONL (header line, then one record per line),
/// atomically via a temp file in the same directory.
pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string(&manifest.header)
        .map_err(|e| JamError::Format(format!("manifest header: {e}")))?;
    text.push('\n');
    for rec in &manifest.records {
        text.push_str(
            &serde_json::to_string(rec).map_err(|e| JamError::Format(format!("record: {e}")))?,
        );
        text.push('\n');
    }
    let tmp = path.with_extension("jsonl.tmp");
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Load a manifest and verify every referenced image exists.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path)
        .map_err(|e| JamError::Format(format!("manifest {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| JamError::Format(format!("manifest {} is empty", path.display())))?;
    let header: ManifestHeader = serde_json::from_str(header_line)
        .map_err(|e| JamError::Format(format!("manifest header: {e}")))?;
    if header.version != MANIFEST_VERSION {
        return Err(JamError::Format(format!("unsupported manifest version {}", header.version)));
    }
    let mut records = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str::<ManifestRecord>(line)
                .map_err(|e| JamError::Format(format!("manifest record: {e}")))?,
        );
    }
    let root = path
        .parent()
        .ok_or_else(|| JamError::Structural("manifest path has no parent directory".into()))?
        .to_path_buf();
    let manifest = DatasetManifest { header, records, root };
    for rec in &manifest.records {
        let p = manifest.image_path(rec);
        if !p.exists() {
            return Err(JamError::Structural(format!(
                "manifest {} references missing image {}",
                path.display(),
                p.display()
            )));
        }
    }
    Ok(manifest)
}
