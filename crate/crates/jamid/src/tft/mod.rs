//! Time-frequency transforms of a received baseband signal: spectrogram,
//! Choi-Williams distribution, and Gabor wavelet scalogram.

mod choi_williams;
mod gabor;
mod spectrogram;

pub use choi_williams::{choi_williams, choi_williams_reference};
pub use gabor::{gabor_kernel, gabor_scalogram};
pub use spectrogram::stft_spectrogram;

use crate::error::{JamError, Result};

/// Which transform produced a [`Tfr`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TfrKind {
    /// Short-time Fourier transform magnitude squared.
    Spec,
    /// Choi-Williams distribution magnitude squared.
    Cw,
    /// Gabor wavelet scalogram.
    Gabor,
}

impl TfrKind {
    /// All kinds in canonical order.
    pub const ALL: [TfrKind; 3] = [TfrKind::Spec, TfrKind::Cw, TfrKind::Gabor];

    /// Canonical short name used in file paths and reports.
    pub fn as_str(self) -> &'static str {
        match self {
            TfrKind::Spec => "spec",
            TfrKind::Cw => "cw",
            TfrKind::Gabor => "gabor",
        }
    }

    /// Parse the canonical short name (a few aliases accepted).
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spec" | "spectrogram" | "stft" => Ok(TfrKind::Spec),
            "cw" | "choi-williams" | "choi_williams" => Ok(TfrKind::Cw),
            "gabor" | "scalogram" => Ok(TfrKind::Gabor),
            other => Err(JamError::Format(format!("unknown transform {other:?}"))),
        }
    }
}

impl std::fmt::Display for TfrKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Transform parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TftParams {
    /// Analysis window length l̃ in samples (spectrogram / Choi-Williams).
    pub window_len: usize,
    /// DFT length L in samples.
    pub fft_len: usize,
    /// Hop between successive analysis positions in samples.
    pub hop: usize,
    /// Choi-Williams kernel parameter σ.
    pub sigma_cw: f64,
    /// Gabor quality factor γ (sets the time resolution γ/f).
    pub gamma: f64,
    /// Number of Gabor frequency rows F.
    pub f_rows: usize,
}

impl Default for TftParams {
    fn default() -> Self {
        TftParams { window_len: 512, fft_len: 512, hop: 128, sigma_cw: 100.0, gamma: 3.221, f_rows: 256 }
    }
}

impl TftParams {
    /// Check parameter invariants.
    pub fn validate(&self) -> Result<()> {
        if self.window_len == 0 || self.window_len > self.fft_len {
            return Err(JamError::Config(format!(
                "window length {} must be in 1..=fft length {}",
                self.window_len, self.fft_len
            )));
        }
        if self.hop == 0 {
            return Err(JamError::Config("hop must be ≥ 1".into()));
        }
        if !(self.sigma_cw.is_finite() && self.sigma_cw > 0.0) {
            return Err(JamError::Config("sigma_cw must be positive".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(JamError::Config("gamma must be positive".into()));
        }
        if self.f_rows == 0 {
            return Err(JamError::Config("F must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Real nonnegative time-frequency matrix, row-major `rows × cols`
/// (frequency/scale rows, time columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Tfr {
    /// Magnitude-squared values, index `row·cols + col`.
    pub values: Vec<f64>,
    /// Frequency / scale row count.
    pub rows: usize,
    /// Time column count.
    pub cols: usize,
    /// Producing transform.
    pub kind: TfrKind,
    /// Time advance per column, in seconds.
    pub time_step: f64,
}

impl Tfr {
    /// Value at `(row, col)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Row index with the largest value in the given column.
    pub fn col_argmax(&self, col: usize) -> usize {
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for row in 0..self.rows {
            let v = self.at(row, col);
            if v > best_v {
                best_v = v;
                best = row;
            }
        }
        best
    }

    /// Assert every value is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.rows * self.cols {
            return Err(JamError::Structural("Tfr value count does not match shape".into()));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(JamError::Degenerate("Tfr contains negative or non-finite values".into()));
        }
        Ok(())
    }
}

/// Number of analysis columns for a signal of `n` samples.
pub(crate) fn num_columns(n: usize, p: &TftParams) -> Result<usize> {
    if n < p.window_len {
        return Err(JamError::Structural(format!(
            "signal of {n} samples shorter than analysis window {}",
            p.window_len
        )));
    }
    Ok((n - p.window_len) / p.hop + 1)
}
