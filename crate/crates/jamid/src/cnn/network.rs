//! Network assembly, backpropagation, and mini-batch SGD training.

use ndarray::{Array1, Array2, Array4, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use super::layers::{
    cross_entropy, softmax, BatchNorm, BnCache, ConvLayer, DenseLayer, MaxPool, KERNEL,
};
use super::{tf, CnnFloat};
use crate::error::{JamError, Result};

/// One convolutional stage: 3×3 conv → batch norm → ReLU → optional 2×2 pool.
#[derive(Debug, Clone, Copy)]
pub struct ConvBlock {
    /// Output channel count of the convolution.
    pub out_channels: usize,
    /// Whether a 2×2 max pool follows the ReLU.
    pub pool: bool,
}

/// Network architecture.
#[derive(Debug, Clone)]
pub struct CnnArch {
    /// Input shape `(channels, height, width)`.
    pub input: (usize, usize, usize),
    /// Convolutional stages, applied in order.
    pub conv: Vec<ConvBlock>,
    /// Hidden dense layer widths (ReLU between them; dropout after the
    /// first one).
    pub dense: Vec<usize>,
    /// Output class count.
    pub n_classes: usize,
    /// Dropout rate applied after the first hidden dense layer.
    pub dropout: f64,
}

impl CnnArch {
    /// The production architecture for 128×128 RGB time-frequency images.
    pub fn standard() -> Self {
        CnnArch {
            input: (3, 128, 128),
            conv: vec![
                ConvBlock { out_channels: 32, pool: true },
                ConvBlock { out_channels: 64, pool: true },
                ConvBlock { out_channels: 128, pool: false },
            ],
            dense: vec![128, 64],
            n_classes: 4,
            dropout: 0.4,
        }
    }

    /// Spatial shape after each convolutional stage.
    pub fn conv_shapes(&self) -> Result<Vec<(usize, usize, usize)>> {
        let (_, mut h, mut w) = self.input;
        let mut c;
        let mut shapes = Vec::with_capacity(self.conv.len());
        for block in &self.conv {
            if h < KERNEL || w < KERNEL {
                return Err(JamError::Structural(format!(
                    "feature map {h}×{w} too small for a {KERNEL}×{KERNEL} convolution"
                )));
            }
            c = block.out_channels;
            h -= KERNEL - 1;
            w -= KERNEL - 1;
            if block.pool {
                h /= 2;
                w /= 2;
            }
            shapes.push((c, h, w));
        }
        Ok(shapes)
    }

    /// Feature count entering the dense head.
    pub fn flatten_dim(&self) -> Result<usize> {
        let (c, h, w) = *self.conv_shapes()?.last().ok_or_else(|| {
            JamError::Structural("architecture needs at least one convolutional stage".into())
        })?;
        Ok(c * h * w)
    }

    fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(JamError::Domain(format!("need ≥ 2 classes, got {}", self.n_classes)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(JamError::Domain(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        self.flatten_dim().map(|_| ())
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Pass count over the training set.
    pub epochs: usize,
    /// SGD learning rate.
    pub lr: f64,
    /// Mini-batch size.
    pub batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 40, lr: 0.1, batch: 64 }
    }
}

/// Per-epoch training diagnostics.
#[derive(Debug, Clone, Default)]
pub struct TrainHistory {
    /// Mean cross-entropy per epoch.
    pub loss: Vec<f64>,
    /// Training accuracy per epoch.
    pub accuracy: Vec<f64>,
}

struct ConvCache<T> {
    x: Array4<T>,
    bn: BnCache<T>,
    mask: Array4<u8>,
    pool: Option<(Array4<u32>, (usize, usize, usize, usize))>,
}

struct Cache<T> {
    convs: Vec<ConvCache<T>>,
    dense_inputs: Vec<Array2<T>>,
    relu_masks: Vec<Array2<u8>>,
    dropout_mask: Option<Array2<T>>,
    probs: Array2<T>,
}

/// Parameter gradients, mirroring the layer layout of [`Cnn`].
pub struct Grads<T> {
    /// Convolution weight gradients, one per stage.
    pub conv_w: Vec<Array2<T>>,
    /// Convolution bias gradients.
    pub conv_b: Vec<Array1<T>>,
    /// Batch-normalization scale gradients.
    pub gamma: Vec<Array1<T>>,
    /// Batch-normalization shift gradients.
    pub beta: Vec<Array1<T>>,
    /// Dense weight gradients.
    pub dense_w: Vec<Array2<T>>,
    /// Dense bias gradients.
    pub dense_b: Vec<Array1<T>>,
}

/// Convolutional classifier.
#[derive(Debug, Clone)]
pub struct Cnn<T> {
    /// Architecture description.
    pub arch: CnnArch,
    /// Convolution layers, one per stage.
    pub convs: Vec<ConvLayer<T>>,
    /// Batch-normalization layers, one per stage.
    pub bns: Vec<BatchNorm<T>>,
    /// Dense layers: hidden widths followed by the output layer.
    pub denses: Vec<DenseLayer<T>>,
}

impl<T: CnnFloat> Cnn<T> {
    /// Initialize a network with He-normal weights.
    pub fn new<R: Rng>(arch: CnnArch, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let mut convs = Vec::new();
        let mut bns = Vec::new();
        let mut in_c = arch.input.0;
        for block in &arch.conv {
            convs.push(ConvLayer::new(in_c, block.out_channels, rng));
            bns.push(BatchNorm::new(block.out_channels));
            in_c = block.out_channels;
        }
        let mut denses = Vec::new();
        let mut in_f = arch.flatten_dim()?;
        for &width in &arch.dense {
            denses.push(DenseLayer::new(in_f, width, rng));
            in_f = width;
        }
        denses.push(DenseLayer::new(in_f, arch.n_classes, rng));
        Ok(Cnn { arch, convs, bns, denses })
    }

    fn check_input(&self, x: &Array4<T>) -> Result<()> {
        let (_, c, h, w) = x.dim();
        if (c, h, w) != self.arch.input {
            return Err(JamError::Structural(format!(
                "input {c}×{h}×{w} does not match the architecture {:?}",
                self.arch.input
            )));
        }
        Ok(())
    }

    fn forward_train<R: Rng>(&mut self, x: &Array4<T>, rng: &mut R) -> Result<(Array2<T>, Cache<T>)> {
        self.check_input(x)?;
        let n = x.dim().0;
        let mut convs = Vec::with_capacity(self.convs.len());
        let mut act = x.clone();
        for (conv, bn, block) in zip3_mut(&self.convs, &mut self.bns, &self.arch.conv) {
            let z = conv.forward(&act);
            let (mut y, bn_cache) = bn.forward_train(&z)?;
            let mask = y.mapv(|v| u8::from(v > T::zero()));
            y.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
            let (next, pool) = if block.pool {
                let shape = y.dim();
                let (p, arg) = MaxPool::forward(&y);
                (p, Some((arg, shape)))
            } else {
                (y, None)
            };
            convs.push(ConvCache { x: act, bn: bn_cache, mask, pool });
            act = next;
        }
        let flat_dim = self.arch.flatten_dim()?;
        let mut dense_in = act.into_shape_with_order((n, flat_dim)).unwrap();
        let mut dense_inputs = Vec::new();
        let mut relu_masks = Vec::new();
        let mut dropout_mask = None;
        let hidden = self.arch.dense.len();
        for (i, layer) in self.denses.iter().enumerate() {
            dense_inputs.push(dense_in.clone());
            let mut z = layer.forward(&dense_in);
            if i < hidden {
                relu_masks.push(z.mapv(|v| u8::from(v > T::zero())));
                z.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
                if i == 0 && self.arch.dropout > 0.0 {
                    let keep = 1.0 - self.arch.dropout;
                    let mask = Array2::from_shape_simple_fn(z.dim(), || {
                        if rng.gen::<f64>() < keep { tf::<T>(1.0 / keep) } else { T::zero() }
                    });
                    z = &z * &mask;
                    dropout_mask = Some(mask);
                }
            }
            dense_in = z;
        }
        let probs = softmax(&dense_in);
        Ok((probs.clone(), Cache { convs, dense_inputs, relu_masks, dropout_mask, probs }))
    }

    /// Inference-mode class probabilities.
    pub fn forward_infer(&self, x: &Array4<T>) -> Result<Array2<T>> {
        self.check_input(x)?;
        let n = x.dim().0;
        let mut act = x.clone();
        for (conv, bn, block) in self.convs.iter().zip(&self.bns).zip(&self.arch.conv).map(|((a, b), c)| (a, b, c)) {
            let z = conv.forward(&act);
            let mut y = bn.forward_infer(&z);
            y.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
            act = if block.pool { MaxPool::forward(&y).0 } else { y };
        }
        let mut dense_in = act.into_shape_with_order((n, self.arch.flatten_dim()?)).unwrap();
        let hidden = self.arch.dense.len();
        for (i, layer) in self.denses.iter().enumerate() {
            let mut z = layer.forward(&dense_in);
            if i < hidden {
                z.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
            }
            dense_in = z;
        }
        Ok(softmax(&dense_in))
    }

    /// Predicted labels (argmax, lowest index on ties).
    pub fn predict(&self, x: &Array4<T>) -> Result<Vec<usize>> {
        let probs = self.forward_infer(x)?;
        Ok(probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (i, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect())
    }

    fn backward(&self, cache: &Cache<T>, labels: &[usize]) -> Grads<T> {
        let n = labels.len();
        let inv_n = tf::<T>(1.0 / n as f64);
        // Softmax + cross-entropy gradient: (p − onehot)/N.
        let mut dz = cache.probs.clone();
        for (mut row, &y) in dz.rows_mut().into_iter().zip(labels.iter()) {
            row[y] = row[y] - T::one();
            row.mapv_inplace(|v| v * inv_n);
        }
        let mut dense_w = vec![Array2::zeros((0, 0)); self.denses.len()];
        let mut dense_b = vec![Array1::zeros(0); self.denses.len()];
        let mut dflat = dz;
        for i in (0..self.denses.len()).rev() {
            let (dx, dw, db) = self.denses[i].backward(&cache.dense_inputs[i], &dflat);
            dense_w[i] = dw;
            dense_b[i] = db;
            dflat = dx;
            if i > 0 {
                let prev = i - 1;
                if prev == 0 {
                    if let Some(mask) = &cache.dropout_mask {
                        dflat = &dflat * mask;
                    }
                }
                dflat = ndarray::Zip::from(&dflat)
                    .and(&cache.relu_masks[prev])
                    .map_collect(|&g, &m| if m == 1 { g } else { T::zero() });
            }
        }
        let last_shape = *self.arch.conv_shapes().unwrap().last().unwrap();
        let mut dact = dflat
            .into_shape_with_order((n, last_shape.0, last_shape.1, last_shape.2))
            .unwrap();
        let stages = self.convs.len();
        let mut conv_w = vec![Array2::zeros((0, 0)); stages];
        let mut conv_b = vec![Array1::zeros(0); stages];
        let mut gamma = vec![Array1::zeros(0); stages];
        let mut beta = vec![Array1::zeros(0); stages];
        for i in (0..stages).rev() {
            let cc = &cache.convs[i];
            if let Some((arg, shape)) = &cc.pool {
                dact = MaxPool::backward(&dact, arg, *shape);
            }
            let drelu = ndarray::Zip::from(&dact)
                .and(&cc.mask)
                .map_collect(|&g, &m| if m == 1 { g } else { T::zero() });
            let (dbn, dg, db) = self.bns[i].backward(&cc.bn, &drelu);
            gamma[i] = dg;
            beta[i] = db;
            let (dx, dw, dbias) = self.convs[i].backward(&cc.x, &dbn);
            conv_w[i] = dw;
            conv_b[i] = dbias;
            dact = dx;
        }
        Grads { conv_w, conv_b, gamma, beta, dense_w, dense_b }
    }

    /// One training-mode forward/backward pass over a batch; returns the
    /// mean cross-entropy and the parameter gradients without updating any
    /// weights. Useful for external gradient verification.
    pub fn loss_and_grads<R: Rng>(
        &mut self,
        x: &Array4<T>,
        y: &[usize],
        rng: &mut R,
    ) -> Result<(f64, Grads<T>)> {
        let (probs, cache) = self.forward_train(x, rng)?;
        let loss = cross_entropy(&probs, y);
        Ok((loss, self.backward(&cache, y)))
    }

    fn sgd_step(&mut self, g: &Grads<T>, lr: f64) {
        let lr = tf::<T>(lr);
        for (layer, (dw, db)) in self.convs.iter_mut().zip(g.conv_w.iter().zip(&g.conv_b)) {
            layer.w.zip_mut_with(dw, |p, &d| *p = *p - lr * d);
            layer.b.zip_mut_with(db, |p, &d| *p = *p - lr * d);
        }
        for (bn, (dg, db)) in self.bns.iter_mut().zip(g.gamma.iter().zip(&g.beta)) {
            bn.gamma.zip_mut_with(dg, |p, &d| *p = *p - lr * d);
            bn.beta.zip_mut_with(db, |p, &d| *p = *p - lr * d);
        }
        for (layer, (dw, db)) in self.denses.iter_mut().zip(g.dense_w.iter().zip(&g.dense_b)) {
            layer.w.zip_mut_with(dw, |p, &d| *p = *p - lr * d);
            layer.b.zip_mut_with(db, |p, &d| *p = *p - lr * d);
        }
    }

    /// Mini-batch SGD over `(x, y)`. A trailing batch of a single sample is
    /// skipped (batch normalization needs at least 2).
    pub fn train<R: Rng>(
        &mut self,
        x: &Array4<T>,
        y: &[usize],
        cfg: &TrainConfig,
        rng: &mut R,
    ) -> Result<TrainHistory> {
        self.check_input(x)?;
        let n = x.dim().0;
        if n != y.len() {
            return Err(JamError::Structural(format!("{n} samples but {} labels", y.len())));
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= self.arch.n_classes) {
            return Err(JamError::Domain(format!(
                "label {bad} out of range for {} classes",
                self.arch.n_classes
            )));
        }
        if cfg.batch < 2 || cfg.lr <= 0.0 {
            return Err(JamError::Config(format!(
                "batch size {} and learning rate {} must be ≥ 2 and > 0",
                cfg.batch, cfg.lr
            )));
        }
        let mut history = TrainHistory::default();
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            let mut loss_acc = 0.0;
            let mut correct = 0usize;
            let mut seen = 0usize;
            for batch in order.chunks(cfg.batch) {
                if batch.len() < 2 {
                    continue;
                }
                let xb = batch_select(x, batch);
                let yb: Vec<usize> = batch.iter().map(|&i| y[i]).collect();
                let (probs, cache) = self.forward_train(&xb, rng)?;
                loss_acc += cross_entropy(&probs, &yb) * batch.len() as f64;
                for (row, &label) in probs.rows().into_iter().zip(&yb) {
                    let mut best = 0;
                    for (i, &v) in row.iter().enumerate() {
                        if v > row[best] {
                            best = i;
                        }
                    }
                    if best == label {
                        correct += 1;
                    }
                }
                seen += batch.len();
                let grads = self.backward(&cache, &yb);
                self.sgd_step(&grads, cfg.lr);
            }
            history.loss.push(loss_acc / seen as f64);
            history.accuracy.push(correct as f64 / seen as f64);
        }
        Ok(history)
    }
}

fn batch_select<T: CnnFloat>(x: &Array4<T>, idx: &[usize]) -> Array4<T> {
    let (_, c, h, w) = x.dim();
    let mut out = Array4::<T>::zeros((idx.len(), c, h, w));
    for (j, &i) in idx.iter().enumerate() {
        out.index_axis_mut(Axis(0), j).assign(&x.index_axis(Axis(0), i));
    }
    out
}

fn zip3_mut<'a, A, B, C>(
    a: &'a [A],
    b: &'a mut [B],
    c: &'a [C],
) -> impl Iterator<Item = (&'a A, &'a mut B, &'a C)> {
    a.iter().zip(b.iter_mut()).zip(c.iter()).map(|((x, y), z)| (x, y, z))
}
