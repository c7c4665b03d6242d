//! Choi-Williams distribution.
//!
//! For each analysis position `c` (segment centers, spaced by `hop`), the
//! kernel sum over the smoothing variable ν is
//!
//! `S(c,l) = Σ_ν  w(l) · exp(−(ν−1)²·σ/(4π²)) · r(c+ν+l) · r*(c+ν−l)`
//!
//! with lag weight `w(l) = 1/√(4π·max(l²,1)/σ)` (the printed kernel is
//! singular at zero lag; `l² → max(l², 1)` regularizes it) and ν ranging over
//! `−L/2 ..= L/2`. Sample indices outside the signal are treated as zero.
//! Lags are wrapped into a length-2L sequence `S′` (positive lags at the
//! front, a zero at `L`, negative lags — the conjugate mirror — at the back),
//! transformed with a 2L-point DFT, doubled, and squared.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{num_columns, Tfr, TfrKind, TftParams};
use crate::error::Result;
use crate::lte_phy::BasebandSignal;

#[inline]
fn sample(r: &[Complex64], i: isize) -> Complex64 {
    if i >= 0 && (i as usize) < r.len() {
        r[i as usize]
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[inline]
fn lag_weight(l: isize, sigma: f64) -> f64 {
    let l_sq = ((l * l).max(1)) as f64;
    1.0 / (4.0 * std::f64::consts::PI * l_sq / sigma).sqrt()
}

#[inline]
fn nu_kernel(nu: isize, sigma: f64) -> f64 {
    let d = (nu - 1) as f64;
    (-d * d * sigma / (4.0 * std::f64::consts::PI * std::f64::consts::PI)).exp()
}

/// Kernel sum `S(c,l)` over a given ν range.
fn kernel_sum(r: &[Complex64], c: isize, l: isize, nu_lo: isize, nu_hi: isize, sigma: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for nu in nu_lo..=nu_hi {
        let k = nu_kernel(nu, sigma);
        acc += k * sample(r, c + nu + l) * sample(r, c + nu - l).conj();
    }
    acc * lag_weight(l, sigma)
}

/// Choi-Williams distribution, fast implementation.
///
/// The ν sum is truncated where the Gaussian kernel falls below 1e−16 of its
/// peak (the dropped tail is orders of magnitude below the 1e−8 agreement
/// required against the exhaustive reference), negative lags are obtained
/// from the conjugate symmetry `S(c,−l) = S*(c,l)`, and the 2L-point DFT
/// runs through an FFT.
pub fn choi_williams(r: &BasebandSignal, p: &TftParams) -> Result<Tfr> {
    p.validate()?;
    let cols = num_columns(r.samples.len(), p)?;
    let l_max = p.fft_len as isize;
    let half = l_max / 2;
    // exp(−t²σ/4π²) = 1e−16  →  t = 2π√(ln 1e16 / σ)
    let tail = 2.0 * std::f64::consts::PI * (1e16f64.ln() / p.sigma_cw).sqrt();
    let nu_lo = (1.0 - tail).ceil() as isize;
    let nu_hi = (1.0 + tail).floor() as isize;
    let nu_lo = nu_lo.max(-half);
    let nu_hi = nu_hi.min(half);

    let rows = 2 * p.fft_len;
    let fft = FftPlanner::new().plan_fft_forward(rows);
    let mut values = vec![0.0f64; rows * cols];
    let mut s_prime = vec![Complex64::new(0.0, 0.0); rows];
    for col in 0..cols {
        let c = (col * p.hop + p.window_len / 2) as isize;
        s_prime.fill(Complex64::new(0.0, 0.0));
        for l in 0..l_max {
            let s = kernel_sum(&r.samples, c, l, nu_lo, nu_hi, p.sigma_cw);
            s_prime[l as usize] = s;
            if l > 0 {
                s_prime[(2 * l_max - l) as usize] = s.conj();
            }
        }
        fft.process(&mut s_prime);
        for (row, v) in s_prime.iter().enumerate() {
            values[row * cols + col] = (2.0 * v).norm_sqr();
        }
    }
    Ok(Tfr { values, rows, cols, kind: TfrKind::Cw, time_step: p.hop as f64 / r.f_s })
}

/// Exhaustive reference implementation: full ν range, negative lags evaluated
/// directly from the kernel-sum definition, naive 2L-point DFT. Intended for
/// cross-checking [`choi_williams`] on short signals.
pub fn choi_williams_reference(r: &BasebandSignal, p: &TftParams) -> Result<Tfr> {
    p.validate()?;
    let cols = num_columns(r.samples.len(), p)?;
    let l_max = p.fft_len as isize;
    let half = l_max / 2;
    let rows = 2 * p.fft_len;
    let mut values = vec![0.0f64; rows * cols];
    for col in 0..cols {
        let c = (col * p.hop + p.window_len / 2) as isize;
        let mut s_prime = vec![Complex64::new(0.0, 0.0); rows];
        for idx in 0..rows as isize {
            // Wrap: front half holds lags 0..L−1, index L stays zero, the
            // back half holds negative lags idx−2L.
            let l = if idx <= l_max - 1 {
                idx
            } else if idx == l_max {
                continue;
            } else {
                idx - 2 * l_max
            };
            s_prime[idx as usize] = kernel_sum(&r.samples, c, l, -half, half, p.sigma_cw);
        }
        for row in 0..rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, s) in s_prime.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * row as f64 * idx as f64 / rows as f64;
                acc += s * Complex64::from_polar(1.0, phase);
            }
            values[row * cols + col] = (2.0 * acc).norm_sqr();
        }
    }
    Ok(Tfr { values, rows, cols, kind: TfrKind::Cw, time_step: p.hop as f64 / r.f_s })
}
