//! Linear soft-margin SVM trained one-vs-rest with deterministic mini-batch
//! subgradient descent on the primal hinge-loss objective
//! `½‖w‖² + λ·Σ_p ξ_p`, using averaged iterates.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{JamError, Result};

/// Mini-batch size of the subgradient updates.
pub const SVM_BATCH: usize = 64;

/// One-vs-rest linear SVM.
#[derive(Debug, Clone)]
pub struct SvmModel {
    /// Per-class weight vectors, row-major `n_classes × n_features`.
    pub weights: Vec<Vec<f64>>,
    /// Per-class biases.
    pub biases: Vec<f64>,
    /// Error-term penalty λ.
    pub lambda: f64,
}

impl SvmModel {
    /// Number of classes.
    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    /// Feature dimension.
    pub fn n_features(&self) -> usize {
        self.weights.first().map(|w| w.len()).unwrap_or(0)
    }
}

/// Primal objective `½‖w‖² + λ·Σ_p max(0, 1 − y_p(wᵀx_p + b))` of one binary
/// problem.
pub fn svm_objective(w: &[f64], b: f64, x: &Array2<f64>, y: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .rows()
        .into_iter()
        .zip(y.iter())
        .map(|(row, &yy)| {
            let score: f64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + b;
            (1.0 - yy * score).max(0.0)
        })
        .sum();
    reg + lambda * hinge
}

/// Train one binary problem with Pegasos-style mini-batch subgradient descent
/// and iterate averaging. Deterministic given the RNG.
fn train_binary<R: Rng>(
    x: &Array2<f64>,
    y: &[f64],
    lambda: f64,
    epochs: usize,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let m = x.nrows();
    let d = x.ncols();
    // The objective λ·Σξ is m·λ times the mean hinge loss, so the Pegasos
    // regularization constant is 1/(λ·m).
    let lam_peg = 1.0 / (lambda * m as f64);
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; d];
    let mut b_avg = 0.0f64;
    let mut steps = 0u64;
    // Suffix averaging: only iterates from the second half of the schedule
    // enter the average (removes the O(log T / T) bias of full averaging).
    let total_steps = (epochs * m.div_ceil(SVM_BATCH)) as u64;
    let avg_start = total_steps / 2;
    let mut averaged = 0u64;
    let mut order: Vec<usize> = (0..m).collect();
    for _ in 0..epochs {
        order.shuffle(rng);
        for batch in order.chunks(SVM_BATCH) {
            steps += 1;
            let eta = 1.0 / (lam_peg * steps as f64);
            let mut grad_w = vec![0.0f64; d];
            let mut grad_b = 0.0f64;
            for &p in batch {
                let row = x.row(p);
                let score: f64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + b;
                if y[p] * score < 1.0 {
                    for (g, v) in grad_w.iter_mut().zip(row.iter()) {
                        *g += y[p] * v;
                    }
                    grad_b += y[p];
                }
            }
            let inv = 1.0 / batch.len() as f64;
            for (wv, g) in w.iter_mut().zip(grad_w.iter()) {
                *wv = (1.0 - eta * lam_peg) * *wv + eta * inv * g;
            }
            b += eta * inv * grad_b;
            if steps > avg_start {
                averaged += 1;
                let t = averaged as f64;
                for (a, v) in w_avg.iter_mut().zip(w.iter()) {
                    *a += (v - *a) / t;
                }
                b_avg += (b - b_avg) / t;
            }
        }
    }
    if averaged == 0 {
        return (w, b);
    }
    (w_avg, b_avg)
}

/// Train a one-vs-rest SVM over the class labels in `y` (0-based, dense).
pub fn svm_train_ovr<R: Rng>(
    x: &Array2<f64>,
    y: &[usize],
    lambda: f64,
    epochs: usize,
    rng: &mut R,
) -> Result<SvmModel> {
    if x.nrows() != y.len() {
        return Err(JamError::Structural(format!(
            "{} samples but {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(JamError::Domain(format!("λ = {lambda} must be positive")));
    }
    let n_classes = y.iter().map(|&c| c + 1).max().unwrap_or(0);
    let distinct = {
        let mut seen = vec![false; n_classes];
        for &c in y {
            seen[c] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        return Err(JamError::Domain("SVM training needs at least 2 distinct classes".into()));
    }
    let mut weights = Vec::with_capacity(n_classes);
    let mut biases = Vec::with_capacity(n_classes);
    for k in 0..n_classes {
        let yk: Vec<f64> = y.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect();
        let (w, b) = train_binary(x, &yk, lambda, epochs, rng);
        weights.push(w);
        biases.push(b);
    }
    Ok(SvmModel { weights, biases, lambda })
}

/// Predicted class (argmax of per-class scores, lowest index on ties) and the
/// score vector `w_kᵀx + b_k`.
pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<(usize, Vec<f64>)> {
    if x.len() != model.n_features() {
        return Err(JamError::Structural(format!(
            "feature dimension {} does not match model ({})",
            x.len(),
            model.n_features()
        )));
    }
    let scores: Vec<f64> = model
        .weights
        .iter()
        .zip(model.biases.iter())
        .map(|(w, &b)| w.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + b)
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((best, scores))
}
