//! TOML experiment configuration capturing the full parameter table: grid,
//! transform, dataset sizes, and classifier hyperparameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cnn::TrainConfig;
use crate::error::{JamError, Result};
use crate::lte_phy::GridConfig;
use crate::tft::TftParams;

/// Grid parameters (serializable mirror of [`GridConfig`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    /// Subcarrier count K.
    pub k: usize,
    /// Cyclic-prefix length in samples.
    pub k_cp: usize,
    /// Subframes per frame.
    pub subframes: usize,
    /// Sampling frequency in Hz.
    pub f_s: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridConfig::default();
        GridSection { k: g.k, k_cp: g.k_cp, subframes: g.subframes, f_s: g.f_s }
    }
}

impl GridSection {
    /// Convert into the runtime grid configuration.
    pub fn to_grid(&self) -> Result<GridConfig> {
        let cfg = GridConfig {
            k: self.k,
            k_cp: self.k_cp,
            subframes: self.subframes,
            f_s: self.f_s,
            ..GridConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Transform parameters (serializable mirror of [`TftParams`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TftSection {
    /// STFT/CW analysis window length in samples.
    pub window_len: usize,
    /// DFT length.
    pub fft_len: usize,
    /// Hop between analysis positions in samples.
    pub hop: usize,
    /// Choi-Williams kernel parameter σ.
    pub sigma_cw: f64,
    /// Gabor wavelet width parameter γ.
    pub gamma: f64,
    /// Gabor scalogram row count.
    pub f_rows: usize,
}

impl Default for TftSection {
    fn default() -> Self {
        let p = TftParams::default();
        TftSection {
            window_len: p.window_len,
            fft_len: p.fft_len,
            hop: p.hop,
            sigma_cw: p.sigma_cw,
            gamma: p.gamma,
            f_rows: p.f_rows,
        }
    }
}

impl TftSection {
    /// Convert into the runtime transform parameters.
    pub fn to_params(&self) -> Result<TftParams> {
        let p = TftParams {
            window_len: self.window_len,
            fft_len: self.fft_len,
            hop: self.hop,
            sigma_cw: self.sigma_cw,
            gamma: self.gamma,
            f_rows: self.f_rows,
        };
        p.validate()?;
        Ok(p)
    }
}

/// PCA+SVM hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSection {
    /// Requested principal component count (clipped by sample count).
    pub pca_components: usize,
    /// Error-term penalty λ.
    pub lambda: f64,
    /// Subgradient-descent epochs.
    pub epochs: usize,
}

impl Default for SvmSection {
    fn default() -> Self {
        SvmSection { pca_components: 1000, lambda: 1.0, epochs: 200 }
    }
}

/// CNN hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CnnSection {
    /// Training epochs.
    pub epochs: usize,
    /// SGD learning rate.
    pub lr: f64,
    /// Mini-batch size.
    pub batch: usize,
}

impl Default for CnnSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        CnnSection { epochs: t.epochs, lr: t.lr, batch: t.batch }
    }
}

impl CnnSection {
    /// Convert into the runtime training configuration.
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig { epochs: self.epochs, lr: self.lr, batch: self.batch }
    }
}

/// Full experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Global RNG seed.
    pub seed: u64,
    /// Scenario cases to run (subset of C1–C6).
    pub cases: Vec<String>,
    /// Transforms to run (`spec`, `cw`, `gabor`).
    pub transforms: Vec<String>,
    /// Classifiers to run (`svm`, `cnn`).
    pub classifiers: Vec<String>,
    /// Training images per class per case.
    pub n_train: usize,
    /// Test images per class per case.
    pub n_test: usize,
    /// Dataset root directory.
    pub data_dir: PathBuf,
    /// Report/model output directory.
    pub out_dir: PathBuf,
    /// Grid parameters.
    pub grid: GridSection,
    /// Transform parameters.
    pub tft: TftSection,
    /// PCA+SVM parameters.
    pub svm: SvmSection,
    /// CNN parameters.
    pub cnn: CnnSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            cases: (1..=6).map(|i| format!("C{i}")).collect(),
            transforms: vec!["spec".into(), "cw".into(), "gabor".into()],
            classifiers: vec!["svm".into(), "cnn".into()],
            n_train: 200,
            n_test: 100,
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            grid: GridSection::default(),
            tft: TftSection::default(),
            svm: SvmSection::default(),
            cnn: CnnSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Samples generated per class (train + test).
    pub fn n_per_class(&self) -> usize {
        self.n_train + self.n_test
    }

    /// Load from a TOML file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| JamError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Save as TOML.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| JamError::Config(format!("serialize: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Check the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(JamError::Config("n_train and n_test must be positive".into()));
        }
        for c in &self.cases {
            crate::harness::ScenarioCase::standard(c)?;
        }
        for t in &self.transforms {
            crate::tft::TfrKind::parse(t)?;
        }
        for c in &self.classifiers {
            if c != "svm" && c != "cnn" {
                return Err(JamError::Config(format!("unknown classifier {c:?}")));
            }
        }
        self.grid.to_grid()?;
        self.tft.to_params()?;
        Ok(())
    }
}
