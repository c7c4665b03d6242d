//! Jammer signal generation: barrage (BJ), synchronization-signal (SSJ), and
//! reference-signal (RSJ) jammers.
//!
//! BJ is band-limited complex Gaussian noise across the whole frame. SSJ and
//! RSJ are smart jammers: they build a resource grid that is nonzero only on
//! the PSS/SSS (resp. RS) cell positions of the legitimate frame and
//! OFDM-modulate it with the same pipeline, frame-synchronous with the eNodeB.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{JamError, Result};
use crate::lte_phy::{ofdm_modulate, BasebandSignal, CellRole, GridConfig, ResourceGrid};

/// Jammer class attached to every generated sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum JammerClass {
    /// No jammer present.
    None,
    /// Barrage jammer: wideband Gaussian noise.
    Bj,
    /// Synchronization-signal jammer: energy on PSS/SSS cells only.
    Ssj,
    /// Reference-signal jammer: energy on RS cells only.
    Rsj,
}

impl JammerClass {
    /// All four classes in canonical label order.
    pub const ALL: [JammerClass; 4] = [JammerClass::None, JammerClass::Bj, JammerClass::Ssj, JammerClass::Rsj];

    /// Stable class index 0..3 (label order NONE, BJ, SSJ, RSJ).
    pub fn index(self) -> usize {
        match self {
            JammerClass::None => 0,
            JammerClass::Bj => 1,
            JammerClass::Ssj => 2,
            JammerClass::Rsj => 3,
        }
    }

    /// Inverse of [`JammerClass::index`].
    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| JamError::Domain(format!("class index {i} outside 0..3")))
    }

    /// Canonical short name used in file paths and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            JammerClass::None => "none",
            JammerClass::Bj => "bj",
            JammerClass::Ssj => "ssj",
            JammerClass::Rsj => "rsj",
        }
    }

    /// Parse the canonical short name (case-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(JammerClass::None),
            "bj" => Ok(JammerClass::Bj),
            "ssj" => Ok(JammerClass::Ssj),
            "rsj" => Ok(JammerClass::Rsj),
            other => Err(JamError::Format(format!("unknown jammer class {other:?}"))),
        }
    }
}

impl std::fmt::Display for JammerClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Variance of the jammer's resource-element (or noise-sample) values.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JamPower {
    /// Linear power σ² of each active jammer value.
    pub sigma_sq: f64,
}

impl JamPower {
    /// Construct, requiring a positive finite power.
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(JamError::Domain(format!("jam power σ² = {sigma_sq} must be positive")));
        }
        Ok(JamPower { sigma_sq })
    }
}

/// Draw one circular complex Gaussian CN(0, σ²) value.
#[inline]
pub(crate) fn complex_gaussian<R: Rng>(sigma_sq: f64, rng: &mut R) -> Complex64 {
    let s = (sigma_sq / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Barrage jammer: `n` i.i.d. samples from CN(0, σ_j²).
pub fn gen_barrage<R: Rng>(n: usize, p: JamPower, rng: &mut R) -> Result<BasebandSignal> {
    if n == 0 {
        return Err(JamError::Domain("barrage sample count must be positive".into()));
    }
    JamPower::new(p.sigma_sq)?;
    let samples = (0..n).map(|_| complex_gaussian(p.sigma_sq, rng)).collect();
    let mut sig = BasebandSignal::new(samples, GridConfig::default().f_s);
    sig.label = JammerClass::Bj;
    Ok(sig)
}

/// Build a jammer grid with CN(0, σ²) values on every cell matching `target`
/// in the standard layout, zeros elsewhere.
fn jam_grid<R: Rng>(cfg: &GridConfig, sigma_sq: f64, target: &[CellRole], rng: &mut R) -> ResourceGrid {
    let mut grid = ResourceGrid::zeros(*cfg);
    grid.assign_standard_roles();
    let roles = grid.roles.clone();
    for (cell, role) in grid.cells.iter_mut().zip(roles.iter()) {
        if target.contains(role) {
            *cell = complex_gaussian(sigma_sq, rng);
        }
    }
    // The grid carries jammer values; its own role labels stay at the layout
    // so callers can identify the support.
    grid
}

/// Synchronization-signal jammer: CN(0, σ_s²) on exactly the PSS and SSS cell
/// positions, OFDM-modulated frame-synchronous with the legitimate signal.
pub fn gen_ssj<R: Rng>(cfg: &GridConfig, p: JamPower, rng: &mut R) -> Result<BasebandSignal> {
    cfg.validate()?;
    JamPower::new(p.sigma_sq)?;
    let grid = jam_grid(cfg, p.sigma_sq, &[CellRole::Pss, CellRole::Sss], rng);
    let mut sig = ofdm_modulate(&grid);
    sig.label = JammerClass::Ssj;
    Ok(sig)
}

/// Reference-signal jammer: CN(0, σ_r²) on exactly the RS cell positions,
/// OFDM-modulated frame-synchronous with the legitimate signal.
pub fn gen_rsj<R: Rng>(cfg: &GridConfig, p: JamPower, rng: &mut R) -> Result<BasebandSignal> {
    cfg.validate()?;
    JamPower::new(p.sigma_sq)?;
    let grid = jam_grid(cfg, p.sigma_sq, &[CellRole::Rs], rng);
    let mut sig = ofdm_modulate(&grid);
    sig.label = JammerClass::Rsj;
    Ok(sig)
}

/// Number of resource elements a smart jammer of the given class occupies.
pub fn support_cell_count(class: JammerClass, cfg: &GridConfig) -> Result<usize> {
    let mut grid = ResourceGrid::zeros(*cfg);
    grid.assign_standard_roles();
    let count = |roles: &[CellRole]| grid.roles.iter().filter(|r| roles.contains(r)).count();
    match class {
        JammerClass::Ssj => Ok(count(&[CellRole::Pss, CellRole::Sss])),
        JammerClass::Rsj => Ok(count(&[CellRole::Rs])),
        other => Err(JamError::Domain(format!("{other} has no cell support"))),
    }
}

/// Per-cell variance that concentrates a transmit power budget `P_j`
/// (time-average over the frame) onto the jammer's support cells.
///
/// With the `1/√K`-scaled OFDM modulator, a grid holding `N` active cells of
/// variance σ² produces a mean time power of `N·σ²/(K·Lframe)`; inverting
/// gives `σ² = P_j·K·Lframe/N`.
pub fn concentrated_cell_power(class: JammerClass, cfg: &GridConfig, p_j: f64) -> Result<JamPower> {
    if !(p_j.is_finite() && p_j > 0.0) {
        return Err(JamError::Domain(format!("jammer power P_j = {p_j} must be positive")));
    }
    let n = support_cell_count(class, cfg)? as f64;
    JamPower::new(p_j * (cfg.k * cfg.lframe()) as f64 / n)
}
