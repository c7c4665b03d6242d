//! Short-time Fourier transform spectrogram with a rectangular window.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{num_columns, Tfr, TfrKind, TftParams};
use crate::error::Result;
use crate::lte_phy::BasebandSignal;

/// Magnitude-squared STFT with a rectangular window.
///
/// For each hop position `c`, the `L`-point DFT of the `l̃`-sample segment
/// starting at `c·hop` (zero-padded to `L` when `l̃ < L`) is scaled by
/// `1/√(2π)` and squared. Rows are the `L` DFT bins, columns the hop
/// positions; the per-column time resolution is `δ_t = (l̃−1)/(2·f_s)`.
pub fn stft_spectrogram(r: &BasebandSignal, p: &TftParams) -> Result<Tfr> {
    p.validate()?;
    let cols = num_columns(r.samples.len(), p)?;
    let l = p.fft_len;
    let fft = FftPlanner::new().plan_fft_forward(l);
    let scale_sq = 1.0 / (2.0 * std::f64::consts::PI);
    let mut values = vec![0.0f64; l * cols];
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for c in 0..cols {
        let start = c * p.hop;
        buf.fill(Complex64::new(0.0, 0.0));
        buf[..p.window_len].copy_from_slice(&r.samples[start..start + p.window_len]);
        fft.process(&mut buf);
        for (row, v) in buf.iter().enumerate() {
            values[row * cols + c] = v.norm_sqr() * scale_sq;
        }
    }
    Ok(Tfr { values, rows: l, cols, kind: TfrKind::Spec, time_step: p.hop as f64 / r.f_s })
}
