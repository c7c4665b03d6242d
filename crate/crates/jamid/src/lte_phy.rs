//! LTE downlink physical layer: resource-grid construction (PSS/SSS/RS/message
//! mapping) and OFDM modulation / demodulation.
//!
//! The grid is a `K × Lframe` matrix of resource elements `a_{k,l}`. The
//! primary synchronization signal (PSS, Zadoff-Chu root 10) occupies the last
//! symbol of the first slot of subframes 0 and 5 on the 62 central
//! subcarriers; the secondary synchronization signal (SSS, root 0) sits one
//! symbol earlier. Cell-specific reference signals (RS) are QPSK pilots on
//! the lattice `{0,7,14,...} × {0,7,14,...}`; everything else carries random
//! QPSK message symbols.

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::error::{JamError, Result};
use crate::jamming::JammerClass;

/// The four QPSK constellation points `(±1±j)/√2`.
pub const QPSK: [Complex64; 4] = [
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2),
    Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2),
];

/// Static parameters of the downlink frame.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridConfig {
    /// Subcarrier count K.
    pub k: usize,
    /// OFDM symbols per slot (7 under normal cyclic prefix).
    pub symbols_per_slot: usize,
    /// Subframes per frame (10).
    pub subframes: usize,
    /// Cyclic-prefix length in samples.
    pub k_cp: usize,
    /// Sampling frequency in Hz.
    pub f_s: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { k: 128, symbols_per_slot: 7, subframes: 10, k_cp: 9, f_s: 1.92e6 }
    }
}

impl GridConfig {
    /// Total OFDM symbols per frame: `subframes × 2 × L`.
    pub fn lframe(&self) -> usize {
        self.subframes * 2 * self.symbols_per_slot
    }

    /// Subcarrier spacing in Hz.
    pub fn delta_f(&self) -> f64 {
        self.f_s / self.k as f64
    }

    /// Time samples per OFDM symbol including the cyclic prefix.
    pub fn samples_per_symbol(&self) -> usize {
        self.k + self.k_cp
    }

    /// Time samples per frame.
    pub fn frame_samples(&self) -> usize {
        self.lframe() * self.samples_per_symbol()
    }

    /// Check the configuration invariants.
    pub fn validate(&self) -> Result<()> {
        if self.k < 128 || self.k > 2048 {
            return Err(JamError::Config(format!("K = {} outside [128, 2048]", self.k)));
        }
        if self.symbols_per_slot != 7 {
            return Err(JamError::Config("normal CP requires 7 symbols per slot".into()));
        }
        if self.k_cp >= self.k {
            return Err(JamError::Config(format!("K_cp = {} must be < K = {}", self.k_cp, self.k)));
        }
        if self.subframes == 0 {
            return Err(JamError::Config("subframes must be positive".into()));
        }
        if !(self.f_s.is_finite() && self.f_s > 0.0) {
            return Err(JamError::Config("f_s must be positive and finite".into()));
        }
        Ok(())
    }

    /// Symbol indices carrying the PSS (last symbol of the first slot of
    /// subframes 0 and 5).
    pub fn pss_symbols(&self) -> [usize; 2] {
        let l = self.symbols_per_slot;
        [l - 1, (5 * 2 + 1) * l - 1]
    }

    /// Symbol indices carrying the SSS (one symbol before each PSS).
    pub fn sss_symbols(&self) -> [usize; 2] {
        let p = self.pss_symbols();
        [p[0] - 1, p[1] - 1]
    }

    /// The 62 synchronization subcarriers `k_s = m − 31 + K/2`, m = 0..61.
    pub fn sync_subcarriers(&self) -> Vec<usize> {
        (0..62).map(|m| m + self.k / 2 - 31).collect()
    }

    /// RS lattice subcarriers `{0, 7, 14, ...}`.
    pub fn rs_subcarriers(&self) -> Vec<usize> {
        (0..self.k).step_by(7).collect()
    }

    /// RS lattice symbols `{0, 7, 14, ...}`.
    pub fn rs_symbols(&self) -> Vec<usize> {
        (0..self.lframe()).step_by(7).collect()
    }
}

/// Role of a resource element within the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CellRole {
    /// Primary synchronization signal.
    Pss,
    /// Secondary synchronization signal.
    Sss,
    /// Cell-specific reference signal (pilot).
    Rs,
    /// Message (data) symbol.
    Msg,
    /// Unoccupied element.
    Empty,
}

/// Complex resource-element matrix with per-cell role labels.
///
/// Storage is column-major: element `(k, l)` lives at index `k + l·K`.
#[derive(Debug, Clone)]
pub struct ResourceGrid {
    /// Resource-element values `a_{k,l}`.
    pub cells: Vec<Complex64>,
    /// Role label per element.
    pub roles: Vec<CellRole>,
    /// Frame parameters the grid was built with.
    pub config: GridConfig,
}

impl ResourceGrid {
    /// All-zero grid with every role `Empty`.
    pub fn zeros(config: GridConfig) -> Self {
        let n = config.k * config.lframe();
        ResourceGrid { cells: vec![Complex64::new(0.0, 0.0); n], roles: vec![CellRole::Empty; n], config }
    }

    /// Linear index of element `(k, l)`.
    #[inline]
    pub fn idx(&self, k: usize, l: usize) -> usize {
        debug_assert!(k < self.config.k && l < self.config.lframe());
        k + l * self.config.k
    }

    /// Value at `(k, l)`.
    #[inline]
    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.cells[k + l * self.config.k]
    }

    /// Mutable value at `(k, l)`.
    #[inline]
    pub fn at_mut(&mut self, k: usize, l: usize) -> &mut Complex64 {
        &mut self.cells[k + l * self.config.k]
    }

    /// Role at `(k, l)`.
    #[inline]
    pub fn role(&self, k: usize, l: usize) -> CellRole {
        self.roles[k + l * self.config.k]
    }

    /// Apply the standard role layout (PSS/SSS/RS/MSG) without touching values.
    pub fn assign_standard_roles(&mut self) {
        self.roles.fill(CellRole::Msg);
        let cfg = self.config;
        for &k in &cfg.rs_subcarriers() {
            for &l in &cfg.rs_symbols() {
                self.roles[k + l * cfg.k] = CellRole::Rs;
            }
        }
        // Synchronization signals win any collision with the RS lattice.
        for &k in &cfg.sync_subcarriers() {
            for &l in &cfg.sss_symbols() {
                self.roles[k + l * cfg.k] = CellRole::Sss;
            }
            for &l in &cfg.pss_symbols() {
                self.roles[k + l * cfg.k] = CellRole::Pss;
            }
        }
    }
}

/// Complex baseband time series with provenance metadata.
#[derive(Debug, Clone)]
pub struct BasebandSignal {
    /// Time samples.
    pub samples: Vec<Complex64>,
    /// Sampling frequency in Hz.
    pub f_s: f64,
    /// Jammer class carried by (or mixed into) this signal.
    pub label: JammerClass,
    /// Scenario case identifier, when generated by the harness.
    pub case_id: Option<String>,
    /// RNG seed used to generate the signal, when applicable.
    pub seed: Option<u64>,
}

impl BasebandSignal {
    /// Bare signal with no provenance metadata.
    pub fn new(samples: Vec<Complex64>, f_s: f64) -> Self {
        BasebandSignal { samples, f_s, label: JammerClass::None, case_id: None, seed: None }
    }

    /// Mean per-sample power `Σ|x|²/n`.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|x| x.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }
}

/// Zadoff-Chu sequence element `d_u(m)` for the 62-element LTE mapping.
///
/// `exp(−jπ·u·m(m+1)/63)` for `m ≤ 30`, `exp(−jπ·u·(m+1)(m+2)/63)` for
/// `31 ≤ m ≤ 61`.
pub fn zadoff_chu(u: u32, m: u32) -> Result<Complex64> {
    if m > 61 {
        return Err(JamError::Domain(format!("Zadoff-Chu index m = {m} outside 0..61")));
    }
    let (u, m) = (u as f64, m as f64);
    let phase = if m <= 30.0 {
        -std::f64::consts::PI * u * m * (m + 1.0) / 63.0
    } else {
        -std::f64::consts::PI * u * (m + 1.0) * (m + 2.0) / 63.0
    };
    Ok(Complex64::from_polar(1.0, phase))
}

/// Build a full downlink resource grid: PSS/SSS from Zadoff-Chu roots 10/0,
/// random QPSK reference signals, random QPSK message symbols elsewhere.
pub fn build_resource_grid<R: Rng>(cfg: &GridConfig, rng: &mut R) -> Result<ResourceGrid> {
    cfg.validate()?;
    let mut grid = ResourceGrid::zeros(*cfg);

    // Message fill over the whole grid, then pilots, then sync overwrite.
    for v in grid.cells.iter_mut() {
        *v = QPSK[rng.gen_range(0..4usize)];
    }
    for &k in &cfg.rs_subcarriers() {
        for &l in &cfg.rs_symbols() {
            *grid.at_mut(k, l) = QPSK[rng.gen_range(0..4usize)];
        }
    }
    for (m, &k) in cfg.sync_subcarriers().iter().enumerate() {
        let pss = zadoff_chu(10, m as u32)?;
        let sss = zadoff_chu(0, m as u32)?;
        for &l in &cfg.pss_symbols() {
            *grid.at_mut(k, l) = pss;
        }
        for &l in &cfg.sss_symbols() {
            *grid.at_mut(k, l) = sss;
        }
    }
    grid.assign_standard_roles();
    Ok(grid)
}

/// OFDM-modulate a resource grid: per symbol, inverse DFT of the K subcarrier
/// values scaled by `1/√K`, prefixed with its cyclic prefix (the last `K_cp`
/// time samples), symbols concatenated in time order.
pub fn ofdm_modulate(grid: &ResourceGrid) -> BasebandSignal {
    let cfg = grid.config;
    let k = cfg.k;
    let fft = FftPlanner::new().plan_fft_inverse(k);
    let scale = 1.0 / (k as f64).sqrt();
    let mut samples = Vec::with_capacity(cfg.frame_samples());
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for l in 0..cfg.lframe() {
        buf.copy_from_slice(&grid.cells[l * k..(l + 1) * k]);
        fft.process(&mut buf);
        for v in buf.iter_mut() {
            *v *= scale;
        }
        samples.extend_from_slice(&buf[k - cfg.k_cp..]);
        samples.extend_from_slice(&buf);
    }
    BasebandSignal::new(samples, cfg.f_s)
}

/// Invert [`ofdm_modulate`]: per symbol, drop the cyclic prefix and apply the
/// forward DFT scaled by `1/√K`. Roles are reconstructed from the standard
/// layout.
pub fn ofdm_demodulate(sig: &BasebandSignal, cfg: &GridConfig) -> Result<ResourceGrid> {
    cfg.validate()?;
    if sig.samples.len() != cfg.frame_samples() {
        return Err(JamError::Structural(format!(
            "signal length {} does not match one frame ({} samples)",
            sig.samples.len(),
            cfg.frame_samples()
        )));
    }
    let k = cfg.k;
    let sps = cfg.samples_per_symbol();
    let fft = FftPlanner::new().plan_fft_forward(k);
    let scale = 1.0 / (k as f64).sqrt();
    let mut grid = ResourceGrid::zeros(*cfg);
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for l in 0..cfg.lframe() {
        let start = l * sps + cfg.k_cp;
        buf.copy_from_slice(&sig.samples[start..start + k]);
        fft.process(&mut buf);
        for (dst, v) in grid.cells[l * k..(l + 1) * k].iter_mut().zip(buf.iter()) {
            *dst = v * scale;
        }
    }
    grid.assign_standard_roles();
    Ok(grid)
}
