//! Principal component analysis via the Gram-matrix (snapshot) method.
//!
//! The sample count (hundreds) is far below the feature count (49152 pixels),
//! so the eigendecomposition runs on the n×n Gram matrix of the centered
//! data; feature-space components are recovered by back-projection and
//! re-orthonormalized with modified Gram-Schmidt so the orthonormality
//! invariant holds to 1e−8 even for directions with tiny variance.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, Axis};

use crate::error::{JamError, Result};

/// Fitted PCA model.
#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Feature-wise mean of the training data.
    pub mean: Vec<f64>,
    /// Orthonormal principal directions (`n_components × n_features` rows,
    /// descending explained variance).
    pub components: Array2<f64>,
    /// Explained variance per component.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Retained component count.
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Feature dimension.
    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }
}

/// Fit a PCA model on `x` (`n_samples × n_features`, each row one sample).
/// The retained component count is `min(requested, n_samples − 1, n_features)`.
pub fn pca_fit(x: &Array2<f32>, n_components: usize) -> Result<PcaModel> {
    let n = x.nrows();
    let d = x.ncols();
    if n < 2 {
        return Err(JamError::Domain(format!("PCA needs at least 2 samples, got {n}")));
    }
    let keep = n_components.min(n - 1).min(d);

    let mean64: Vec<f64> = (0..d)
        .map(|j| x.column(j).iter().map(|&v| v as f64).sum::<f64>() / n as f64)
        .collect();
    let mut xc = Array2::<f64>::zeros((n, d));
    for (i, row) in x.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            xc[(i, j)] = *v as f64 - mean64[j];
        }
    }

    let gram_nd = xc.dot(&xc.t());
    let gram = DMatrix::<f64>::from_fn(n, n, |i, j| gram_nd[(i, j)]);
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut u_keep = Array2::<f64>::zeros((n, keep));
    let mut explained = Vec::with_capacity(keep);
    for (c, &idx) in order.iter().take(keep).enumerate() {
        explained.push(eig.eigenvalues[idx].max(0.0) / (n as f64 - 1.0));
        for i in 0..n {
            u_keep[(i, c)] = eig.eigenvectors[(i, idx)];
        }
    }
    // Back-project the Gram eigenvectors into feature space, then modified
    // Gram-Schmidt to pin down orthonormality.
    let mut components = u_keep.t().dot(&xc);
    for c in 0..keep {
        for prev in 0..c {
            let (done, mut rest) = components.view_mut().split_at(Axis(0), c);
            let p = done.row(prev);
            let mut row = rest.row_mut(0);
            let dot = p.dot(&row);
            for (r, v) in row.iter_mut().zip(p.iter()) {
                *r -= dot * v;
            }
        }
        let mut row = components.row_mut(c);
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }

    Ok(PcaModel { mean: mean64, components, explained_variance: explained })
}

/// Project samples onto the principal directions: `(X − mean)·Vᵀ`.
pub fn pca_transform(model: &PcaModel, x: &Array2<f32>) -> Result<Array2<f64>> {
    if x.ncols() != model.n_features() {
        return Err(JamError::Structural(format!(
            "feature dimension {} does not match model ({})",
            x.ncols(),
            model.n_features()
        )));
    }
    let n = x.nrows();
    let d = model.n_features();
    let mut xc = Array2::<f64>::zeros((n, d));
    for (i, row) in x.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            xc[(i, j)] = *v as f64 - model.mean[j];
        }
    }
    Ok(xc.dot(&model.components.t()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rank_one_data_recovers_direction() {
        let mut x = Array2::<f32>::zeros((10, 2));
        for i in 0..10 {
            let t = i as f32 - 4.5;
            x[(i, 0)] = t;
            x[(i, 1)] = t;
        }
        let m = pca_fit(&x, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m.components[(0, 0)].abs() - s).abs() < 1e-9);
        assert!((m.components[(0, 1)].abs() - s).abs() < 1e-9);
        assert!(m.explained_variance[1].abs() < 1e-9);
    }

    #[test]
    fn reconstruction_with_all_components() {
        let x = array![
            [1.0f32, 2.0, 0.5],
            [0.0, 1.0, -0.5],
            [2.0, -1.0, 0.25],
            [0.5, 0.5, 1.0],
        ];
        let m = pca_fit(&x, 3).unwrap();
        let z = pca_transform(&m, &x).unwrap();
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                let mut acc = m.mean[j];
                for c in 0..m.n_components() {
                    acc += z[(i, c)] * m.components[(c, j)];
                }
                assert!((acc - x[(i, j)] as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn component_count_clipped_by_rank_bound() {
        let mut x = Array2::<f32>::zeros((40, 100));
        let mut state = 7u64;
        for v in x.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = ((state >> 33) as f32 / 2.0_f32.powi(31)) - 0.5;
        }
        let m = pca_fit(&x, 1000).unwrap();
        assert_eq!(m.n_components(), 39);
    }

    #[test]
    fn orthonormal_rows() {
        let mut x = Array2::<f32>::zeros((30, 64));
        let mut state = 99u64;
        for v in x.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = ((state >> 33) as f32 / 2.0_f32.powi(31)) - 0.5;
        }
        let m = pca_fit(&x, 29).unwrap();
        let vvt = m.components.dot(&m.components.t());
        for a in 0..m.n_components() {
            for b in 0..m.n_components() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((vvt[(a, b)] - expect).abs() <= 1e-8, "V·Vᵀ[{a},{b}] = {}", vvt[(a, b)]);
            }
        }
    }

    #[test]
    fn transform_basics() {
        let x = array![[1.0f32, 0.0], [3.0, 2.0], [5.0, -2.0], [7.0, 0.0]];
        let m = pca_fit(&x, 2).unwrap();
        // The mean maps to the origin.
        let mean32 = Array2::from_shape_vec((1, 2), m.mean.iter().map(|&v| v as f32).collect()).unwrap();
        let z = pca_transform(&m, &mean32).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-6));
        // Variance ordering of the transformed coordinates.
        let z = pca_transform(&m, &x).unwrap();
        let var = |c: usize| z.column(c).iter().map(|v| v * v).sum::<f64>();
        assert!(var(0) >= var(1));
        // Linearity of the projection (zero-mean model): T(2a) = 2·T(a).
        let m0 = PcaModel { mean: vec![0.0, 0.0], ..m.clone() };
        let za = pca_transform(&m0, &x).unwrap();
        let doubled = x.mapv(|v| v * 2.0);
        let zb = pca_transform(&m0, &doubled).unwrap();
        for (a, b) in za.iter().zip(zb.iter()) {
            assert!((2.0 * a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let x = Array2::<f32>::zeros((1, 4));
        assert!(matches!(pca_fit(&x, 2), Err(JamError::Domain(_))));
        let x = Array2::<f32>::zeros((4, 4));
        let m = pca_fit(&x, 2).unwrap();
        let bad = Array2::<f32>::zeros((2, 5));
        assert!(matches!(pca_transform(&m, &bad), Err(JamError::Structural(_))));
    }
}
