//! Layer primitives: 3×3 valid convolution (im2col + GEMM), batch
//! normalization, 2×2 max pooling, dense layers, dropout, softmax and
//! cross-entropy. Every layer exposes an explicit backward pass.

use ndarray::{Array1, Array2, Array4, ArrayView3, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{tf, CnnFloat};
use crate::error::{JamError, Result};

/// Convolution kernel side length (fixed 3×3 valid convolutions).
pub const KERNEL: usize = 3;

/// Batch-normalization variance floor.
pub const BN_EPS: f64 = 1e-5;

/// Running-statistics momentum.
pub const BN_MOMENTUM: f64 = 0.9;

/// Unfold one `(C, H, W)` sample into the `(C·9, OH·OW)` patch matrix of a
/// 3×3 valid convolution.
pub fn im2col<T: CnnFloat>(x: &ArrayView3<'_, T>, k: usize) -> Array2<T> {
    let (c, h, w) = x.dim();
    let oh = h - k + 1;
    let ow = w - k + 1;
    let mut col = Array2::<T>::zeros((c * k * k, oh * ow));
    for ch in 0..c {
        let plane = x.index_axis(ndarray::Axis(0), ch);
        for dy in 0..k {
            for dx in 0..k {
                let row = ch * k * k + dy * k + dx;
                let mut dst = col.row_mut(row);
                let dst = dst.as_slice_mut().expect("col rows are contiguous");
                for oy in 0..oh {
                    let src = plane
                        .index_axis(ndarray::Axis(0), oy + dy)
                        .to_slice()
                        .expect("input rows are contiguous");
                    dst[oy * ow..(oy + 1) * ow].copy_from_slice(&src[dx..dx + ow]);
                }
            }
        }
    }
    col
}

/// Fold a `(C·9, OH·OW)` patch-gradient matrix back onto the `(C, H, W)`
/// input (scatter-add adjoint of [`im2col`]).
fn col2im<T: CnnFloat>(col: &Array2<T>, c: usize, h: usize, w: usize, k: usize) -> ndarray::Array3<T> {
    let oh = h - k + 1;
    let ow = w - k + 1;
    let mut x = ndarray::Array3::<T>::zeros((c, h, w));
    for ch in 0..c {
        let mut plane = x.index_axis_mut(ndarray::Axis(0), ch);
        for dy in 0..k {
            for dx in 0..k {
                let row = col.row(ch * k * k + dy * k + dx);
                let src = row.to_slice().expect("col rows are contiguous");
                for oy in 0..oh {
                    let mut dst = plane.index_axis_mut(ndarray::Axis(0), oy + dy);
                    let dst = dst.as_slice_mut().expect("rows are contiguous");
                    for (d, s) in dst[dx..dx + ow].iter_mut().zip(&src[oy * ow..(oy + 1) * ow]) {
                        *d = *d + *s;
                    }
                }
            }
        }
    }
    x
}

/// 3×3 valid convolution layer.
#[derive(Debug, Clone)]
pub struct ConvLayer<T> {
    /// Weights, `(out_channels, in_channels·9)`.
    pub w: Array2<T>,
    /// Per-output-channel biases.
    pub b: Array1<T>,
    /// Input channel count.
    pub in_c: usize,
    /// Output channel count.
    pub out_c: usize,
}

impl<T: CnnFloat> ConvLayer<T> {
    /// He-normal initialization.
    pub fn new<R: Rng>(in_c: usize, out_c: usize, rng: &mut R) -> Self {
        let fan_in = in_c * KERNEL * KERNEL;
        let std = (2.0 / fan_in as f64).sqrt();
        let w = Array2::from_shape_fn((out_c, fan_in), |_| {
            tf::<T>(std * rng.sample::<f64, _>(StandardNormal))
        });
        ConvLayer { w, b: Array1::zeros(out_c), in_c, out_c }
    }

    /// Forward pass: `(N, C, H, W) → (N, out_c, H−2, W−2)`.
    pub fn forward(&self, x: &Array4<T>) -> Array4<T> {
        let (n, _, h, w) = x.dim();
        let oh = h - KERNEL + 1;
        let ow = w - KERNEL + 1;
        let mut out = Array4::<T>::zeros((n, self.out_c, oh, ow));
        for i in 0..n {
            let col = im2col(&x.index_axis(Axis(0), i), KERNEL);
            let mut y = self.w.dot(&col);
            for (mut row, &bv) in y.rows_mut().into_iter().zip(self.b.iter()) {
                row.mapv_inplace(|v| v + bv);
            }
            out.index_axis_mut(Axis(0), i)
                .assign(&y.into_shape_with_order((self.out_c, oh, ow)).unwrap());
        }
        out
    }

    /// Backward pass; returns `(dx, dw, db)`. Patch matrices are recomputed
    /// from the cached input instead of being stored.
    pub fn backward(&self, x: &Array4<T>, dout: &Array4<T>) -> (Array4<T>, Array2<T>, Array1<T>) {
        let (n, c, h, w) = x.dim();
        let (_, _, oh, ow) = dout.dim();
        let mut dx = Array4::<T>::zeros((n, c, h, w));
        let mut dw = Array2::<T>::zeros(self.w.dim());
        let mut db = Array1::<T>::zeros(self.out_c);
        for i in 0..n {
            let col = im2col(&x.index_axis(Axis(0), i), KERNEL);
            let dmat = dout
                .index_axis(Axis(0), i)
                .to_owned()
                .into_shape_with_order((self.out_c, oh * ow))
                .unwrap();
            dw = dw + dmat.dot(&col.t());
            for (acc, row) in db.iter_mut().zip(dmat.rows()) {
                *acc = *acc + row.sum();
            }
            let dcol = self.w.t().dot(&dmat);
            dx.index_axis_mut(Axis(0), i).assign(&col2im(&dcol, c, h, w, KERNEL));
        }
        (dx, dw, db)
    }
}

/// Cache of one batch-normalization forward pass in training mode.
#[derive(Debug)]
pub struct BnCache<T> {
    /// Normalized activations.
    pub xhat: Array4<T>,
    /// Per-channel `1/√(var + ε)`.
    pub inv_std: Array1<T>,
}

/// Per-channel batch normalization over `(N, H, W)`.
#[derive(Debug, Clone)]
pub struct BatchNorm<T> {
    /// Learned scale.
    pub gamma: Array1<T>,
    /// Learned shift.
    pub beta: Array1<T>,
    /// Running mean (inference statistics).
    pub running_mean: Array1<T>,
    /// Running variance (inference statistics).
    pub running_var: Array1<T>,
}

impl<T: CnnFloat> BatchNorm<T> {
    /// Identity-initialized layer for `channels` feature maps.
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            gamma: Array1::from_elem(channels, T::one()),
            beta: Array1::zeros(channels),
            running_mean: Array1::zeros(channels),
            running_var: Array1::from_elem(channels, T::one()),
        }
    }

    /// Training-mode forward pass over the batch; updates running statistics.
    /// Requires at least 2 samples (batch variance is undefined otherwise).
    pub fn forward_train(&mut self, x: &Array4<T>) -> Result<(Array4<T>, BnCache<T>)> {
        let (n, c, h, w) = x.dim();
        if n < 2 {
            return Err(JamError::Domain(format!(
                "batch normalization needs a batch of at least 2 samples, got {n}"
            )));
        }
        let m = tf::<T>((n * h * w) as f64);
        let mut xhat = Array4::<T>::zeros((n, c, h, w));
        let mut inv_std = Array1::<T>::zeros(c);
        let mut out = Array4::<T>::zeros((n, c, h, w));
        for ch in 0..c {
            let lane = x.index_axis(Axis(1), ch);
            let mean = lane.sum() / m;
            let var = lane.mapv(|v| (v - mean) * (v - mean)).sum() / m;
            let is = T::one() / (var + tf::<T>(BN_EPS)).sqrt();
            inv_std[ch] = is;
            let mom = tf::<T>(BN_MOMENTUM);
            self.running_mean[ch] = mom * self.running_mean[ch] + (T::one() - mom) * mean;
            self.running_var[ch] = mom * self.running_var[ch] + (T::one() - mom) * var;
            let mut xh = xhat.index_axis_mut(Axis(1), ch);
            xh.assign(&lane.mapv(|v| (v - mean) * is));
            out.index_axis_mut(Axis(1), ch)
                .assign(&xh.mapv(|v| self.gamma[ch] * v + self.beta[ch]));
        }
        Ok((out, BnCache { xhat, inv_std }))
    }

    /// Inference-mode forward pass using the running statistics.
    pub fn forward_infer(&self, x: &Array4<T>) -> Array4<T> {
        let (n, c, h, w) = x.dim();
        let mut out = Array4::<T>::zeros((n, c, h, w));
        for ch in 0..c {
            let is = T::one() / (self.running_var[ch] + tf::<T>(BN_EPS)).sqrt();
            let mean = self.running_mean[ch];
            out.index_axis_mut(Axis(1), ch).assign(
                &x.index_axis(Axis(1), ch)
                    .mapv(|v| self.gamma[ch] * (v - mean) * is + self.beta[ch]),
            );
        }
        out
    }

    /// Backward pass; returns `(dx, dgamma, dbeta)`.
    pub fn backward(&self, cache: &BnCache<T>, dout: &Array4<T>) -> (Array4<T>, Array1<T>, Array1<T>) {
        let (n, c, h, w) = dout.dim();
        let m = tf::<T>((n * h * w) as f64);
        let mut dx = Array4::<T>::zeros((n, c, h, w));
        let mut dgamma = Array1::<T>::zeros(c);
        let mut dbeta = Array1::<T>::zeros(c);
        for ch in 0..c {
            let xh = cache.xhat.index_axis(Axis(1), ch);
            let dy = dout.index_axis(Axis(1), ch);
            let sum_dy = dy.sum();
            let sum_dy_xh = (&dy * &xh).sum();
            dgamma[ch] = sum_dy_xh;
            dbeta[ch] = sum_dy;
            let k = self.gamma[ch] * cache.inv_std[ch] / m;
            dx.index_axis_mut(Axis(1), ch).assign(
                &ndarray::Zip::from(&dy)
                    .and(&xh)
                    .map_collect(|&g, &x| k * (m * g - sum_dy - x * sum_dy_xh)),
            );
        }
        (dx, dgamma, dbeta)
    }
}

/// 2×2 max pooling with stride 2; trailing odd rows/columns are dropped.
#[derive(Debug, Clone, Copy)]
pub struct MaxPool;

impl MaxPool {
    /// Forward pass; returns the pooled activations and, per output element,
    /// the flat `(h·W + w)` index of the winning input inside its sample and
    /// channel.
    pub fn forward<T: CnnFloat>(x: &Array4<T>) -> (Array4<T>, Array4<u32>) {
        let (n, c, h, w) = x.dim();
        let oh = h / 2;
        let ow = w / 2;
        let mut out = Array4::<T>::zeros((n, c, oh, ow));
        let mut arg = Array4::<u32>::zeros((n, c, oh, ow));
        for i in 0..n {
            for ch in 0..c {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut best = x[(i, ch, 2 * oy, 2 * ox)];
                        let mut idx = (2 * oy * w + 2 * ox) as u32;
                        for dy in 0..2 {
                            for dx in 0..2 {
                                let v = x[(i, ch, 2 * oy + dy, 2 * ox + dx)];
                                if v > best {
                                    best = v;
                                    idx = ((2 * oy + dy) * w + 2 * ox + dx) as u32;
                                }
                            }
                        }
                        out[(i, ch, oy, ox)] = best;
                        arg[(i, ch, oy, ox)] = idx;
                    }
                }
            }
        }
        (out, arg)
    }

    /// Backward pass: route each gradient to the cached argmax position.
    pub fn backward<T: CnnFloat>(
        dout: &Array4<T>,
        arg: &Array4<u32>,
        in_shape: (usize, usize, usize, usize),
    ) -> Array4<T> {
        let (_, _, _, w) = in_shape;
        let mut dx = Array4::<T>::zeros(in_shape);
        for ((i, ch, oy, ox), &g) in dout.indexed_iter() {
            let flat = arg[(i, ch, oy, ox)] as usize;
            let (y, x) = (flat / w, flat % w);
            dx[(i, ch, y, x)] = dx[(i, ch, y, x)] + g;
        }
        dx
    }
}

/// Fully connected layer `y = x·Wᵀ + b`.
#[derive(Debug, Clone)]
pub struct DenseLayer<T> {
    /// Weights, `(out_features, in_features)`.
    pub w: Array2<T>,
    /// Biases.
    pub b: Array1<T>,
}

impl<T: CnnFloat> DenseLayer<T> {
    /// He-normal initialization.
    pub fn new<R: Rng>(in_f: usize, out_f: usize, rng: &mut R) -> Self {
        let std = (2.0 / in_f as f64).sqrt();
        let w = Array2::from_shape_fn((out_f, in_f), |_| {
            tf::<T>(std * rng.sample::<f64, _>(StandardNormal))
        });
        DenseLayer { w, b: Array1::zeros(out_f) }
    }

    /// Forward pass on a `(N, in_features)` batch.
    pub fn forward(&self, x: &Array2<T>) -> Array2<T> {
        let mut y = x.dot(&self.w.t());
        for mut row in y.rows_mut() {
            row.zip_mut_with(&self.b, |v, &bv| *v = *v + bv);
        }
        y
    }

    /// Backward pass; returns `(dx, dw, db)`.
    pub fn backward(&self, x: &Array2<T>, dout: &Array2<T>) -> (Array2<T>, Array2<T>, Array1<T>) {
        let dw = dout.t().dot(x);
        let db = dout.sum_axis(Axis(0));
        let dx = dout.dot(&self.w);
        (dx, dw, db)
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax<T: CnnFloat>(logits: &Array2<T>) -> Array2<T> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().cloned().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Mean cross-entropy of softmax probabilities against integer labels, with
/// probabilities clipped to `[1e−12, 1]`.
pub fn cross_entropy<T: CnnFloat>(probs: &Array2<T>, labels: &[usize]) -> f64 {
    let mut acc = 0.0;
    for (row, &y) in probs.rows().into_iter().zip(labels.iter()) {
        let p = row[y].to_f64().unwrap().clamp(1e-12, 1.0);
        acc -= p.ln();
    }
    acc / labels.len() as f64
}
