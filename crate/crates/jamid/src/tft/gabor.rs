//! Gabor wavelet scalogram.
//!
//! Row `f = 1..F` maps linearly onto `(0, f_s/2]`: its normalized frequency
//! is `a = f/(2F)` cycles per sample. The analysis atom is
//!
//! `Ψ_f(c) = (f/(γ√π)) · exp(−a²c²/γ²) · exp(j·2π·a·c)`
//!
//! (the Gaussian envelope must decay, so the exponent is negative), truncated
//! where the envelope falls below 1e−8 of its peak. Each row is the squared
//! magnitude of the linear convolution of the signal with its atom, giving a
//! per-row time resolution proportional to `γ/f`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Tfr, TfrKind, TftParams};
use crate::error::Result;
use crate::lte_phy::BasebandSignal;

/// Truncated Gabor atom for row `f`; `kernel[i]` holds `Ψ_f(i − C)` where
/// `C` is the truncation half-width.
pub fn gabor_kernel(f: usize, p: &TftParams) -> (Vec<Complex64>, usize) {
    let a = f as f64 / (2.0 * p.f_rows as f64);
    let amp = f as f64 / (p.gamma * std::f64::consts::PI.sqrt());
    let half_width = (p.gamma * (1e8f64.ln()).sqrt() / a).floor() as usize;
    let mut kernel = Vec::with_capacity(2 * half_width + 1);
    for i in 0..=2 * half_width {
        let c = i as f64 - half_width as f64;
        let env = (-a * a * c * c / (p.gamma * p.gamma)).exp();
        kernel.push(Complex64::from_polar(amp * env, 2.0 * std::f64::consts::PI * a * c));
    }
    (kernel, half_width)
}

type KernelKey = (usize, usize, usize, u64);
type KernelCache = Mutex<HashMap<KernelKey, Arc<Vec<Complex64>>>>;

fn kernel_spectrum_cache() -> &'static KernelCache {
    static CACHE: OnceLock<KernelCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// FFT of the atom for row `f`, zero-padded to `fft_size`, cached across
/// calls (the atoms depend only on the parameters, not on the signal).
fn kernel_spectrum(f: usize, fft_size: usize, p: &TftParams) -> Arc<Vec<Complex64>> {
    let key: KernelKey = (fft_size, f, p.f_rows, p.gamma.to_bits());
    if let Some(hit) = kernel_spectrum_cache().lock().unwrap().get(&key) {
        return hit.clone();
    }
    let (kernel, _) = gabor_kernel(f, p);
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
    buf[..kernel.len()].copy_from_slice(&kernel);
    FftPlanner::new().plan_fft_forward(fft_size).process(&mut buf);
    let arc = Arc::new(buf);
    kernel_spectrum_cache().lock().unwrap().insert(key, arc.clone());
    arc
}

/// Gabor wavelet scalogram: `F` rows of `|r ∗ Ψ_f|²`, one column per signal
/// sample ("same" alignment, borders zero-padded).
pub fn gabor_scalogram(r: &BasebandSignal, p: &TftParams) -> Result<Tfr> {
    p.validate()?;
    let n = r.samples.len();
    if n == 0 {
        return Err(crate::error::JamError::Structural("empty signal".into()));
    }
    let mut values = vec![0.0f64; p.f_rows * n];

    // The convolutions run through FFTs; group rows by the padded size they
    // need so the signal spectrum is computed once per size.
    let mut size_of_row = Vec::with_capacity(p.f_rows);
    for f in 1..=p.f_rows {
        let a = f as f64 / (2.0 * p.f_rows as f64);
        let half_width = (p.gamma * (1e8f64.ln()).sqrt() / a).floor() as usize;
        let need = n + 2 * half_width;
        size_of_row.push(need.next_power_of_two());
    }
    let mut planner = FftPlanner::new();
    let mut signal_spectra: HashMap<usize, Vec<Complex64>> = HashMap::new();
    for f in 1..=p.f_rows {
        let m = size_of_row[f - 1];
        let spectrum = signal_spectra.entry(m).or_insert_with(|| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            buf[..n].copy_from_slice(&r.samples);
            planner.plan_fft_forward(m).process(&mut buf);
            buf
        });
        let kernel = kernel_spectrum(f, m, p);
        let mut buf: Vec<Complex64> =
            spectrum.iter().zip(kernel.iter()).map(|(s, k)| s * k).collect();
        planner.plan_fft_inverse(m).process(&mut buf);
        let scale = 1.0 / m as f64;
        let a = f as f64 / (2.0 * p.f_rows as f64);
        let half_width = (p.gamma * (1e8f64.ln()).sqrt() / a).floor() as usize;
        let row = &mut values[(f - 1) * n..f * n];
        for (t, dst) in row.iter_mut().enumerate() {
            // Linear-convolution index t + C holds the "same"-aligned output.
            *dst = (buf[t + half_width] * scale).norm_sqr();
        }
    }
    Ok(Tfr { values, rows: p.f_rows, cols: n, kind: TfrKind::Gabor, time_step: 1.0 / r.f_s })
}
