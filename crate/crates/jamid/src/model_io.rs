//! Versioned binary model checkpoints.
//!
//! Layout: 4-byte magic `JMDL`, little-endian `u32` format version, one
//! `u8` model kind (1 = PCA+SVM, 2 = CNN), then the kind-specific payload.
//! All multi-byte values are little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use crate::classify::{PcaModel, SvmModel};
use crate::cnn::{BatchNorm, Cnn, CnnArch, ConvBlock, ConvLayer, DenseLayer};
use crate::error::{JamError, Result};

const MAGIC: &[u8; 4] = b"JMDL";
const VERSION: u32 = 1;
const KIND_PCA_SVM: u8 = 1;
const KIND_CNN: u8 = 2;

fn write_header(w: &mut impl Write, kind: u8) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u8(kind)?;
    Ok(())
}

fn read_header(r: &mut impl Read, expected_kind: u8) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(JamError::Format(format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(JamError::Format(format!("unsupported checkpoint version {version}")));
    }
    let kind = r.read_u8()?;
    if kind != expected_kind {
        return Err(JamError::Format(format!(
            "checkpoint kind {kind} does not match expected {expected_kind}"
        )));
    }
    Ok(())
}

fn write_f64s(w: &mut impl Write, vals: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in vals {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0f64; n];
    r.read_f64_into::<LittleEndian>(&mut out)?;
    Ok(out)
}

fn write_f32s(w: &mut impl Write, vals: impl IntoIterator<Item = f32>) -> Result<()> {
    for v in vals {
        w.write_f32::<LittleEndian>(v)?;
    }
    Ok(())
}

fn read_f32s(r: &mut impl Read, n: usize) -> Result<Vec<f32>> {
    let mut out = vec![0.0f32; n];
    r.read_f32_into::<LittleEndian>(&mut out)?;
    Ok(out)
}

/// Save a fitted PCA model and the SVM trained on its features.
pub fn save_pca_svm(path: &Path, pca: &PcaModel, svm: &SvmModel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, KIND_PCA_SVM)?;
    w.write_u64::<LittleEndian>(pca.n_components() as u64)?;
    w.write_u64::<LittleEndian>(pca.n_features() as u64)?;
    write_f64s(&mut w, pca.mean.iter().copied())?;
    write_f64s(&mut w, pca.components.iter().copied())?;
    write_f64s(&mut w, pca.explained_variance.iter().copied())?;
    w.write_u64::<LittleEndian>(svm.n_classes() as u64)?;
    w.write_u64::<LittleEndian>(svm.n_features() as u64)?;
    w.write_f64::<LittleEndian>(svm.lambda)?;
    for wk in &svm.weights {
        write_f64s(&mut w, wk.iter().copied())?;
    }
    write_f64s(&mut w, svm.biases.iter().copied())?;
    w.flush()?;
    Ok(())
}

/// Load a PCA+SVM checkpoint saved by [`save_pca_svm`].
pub fn load_pca_svm(path: &Path) -> Result<(PcaModel, SvmModel)> {
    let mut r = BufReader::new(File::open(path)?);
    read_header(&mut r, KIND_PCA_SVM)?;
    let n_comp = r.read_u64::<LittleEndian>()? as usize;
    let n_feat = r.read_u64::<LittleEndian>()? as usize;
    let mean = read_f64s(&mut r, n_feat)?;
    let components = Array2::from_shape_vec((n_comp, n_feat), read_f64s(&mut r, n_comp * n_feat)?)
        .map_err(|e| JamError::Format(format!("component matrix: {e}")))?;
    let explained_variance = read_f64s(&mut r, n_comp)?;
    let pca = PcaModel { mean, components, explained_variance };
    let n_classes = r.read_u64::<LittleEndian>()? as usize;
    let svm_feat = r.read_u64::<LittleEndian>()? as usize;
    let lambda = r.read_f64::<LittleEndian>()?;
    let mut weights = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        weights.push(read_f64s(&mut r, svm_feat)?);
    }
    let biases = read_f64s(&mut r, n_classes)?;
    Ok((pca, SvmModel { weights, biases, lambda }))
}

/// Save a trained CNN (f32 weights).
pub fn save_cnn(path: &Path, net: &Cnn<f32>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_header(&mut w, KIND_CNN)?;
    let arch = &net.arch;
    w.write_u64::<LittleEndian>(arch.input.0 as u64)?;
    w.write_u64::<LittleEndian>(arch.input.1 as u64)?;
    w.write_u64::<LittleEndian>(arch.input.2 as u64)?;
    w.write_u64::<LittleEndian>(arch.conv.len() as u64)?;
    for block in &arch.conv {
        w.write_u64::<LittleEndian>(block.out_channels as u64)?;
        w.write_u8(u8::from(block.pool))?;
    }
    w.write_u64::<LittleEndian>(arch.dense.len() as u64)?;
    for &d in &arch.dense {
        w.write_u64::<LittleEndian>(d as u64)?;
    }
    w.write_u64::<LittleEndian>(arch.n_classes as u64)?;
    w.write_f64::<LittleEndian>(arch.dropout)?;
    for conv in &net.convs {
        write_f32s(&mut w, conv.w.iter().copied())?;
        write_f32s(&mut w, conv.b.iter().copied())?;
    }
    for bn in &net.bns {
        write_f32s(&mut w, bn.gamma.iter().copied())?;
        write_f32s(&mut w, bn.beta.iter().copied())?;
        write_f32s(&mut w, bn.running_mean.iter().copied())?;
        write_f32s(&mut w, bn.running_var.iter().copied())?;
    }
    for dense in &net.denses {
        write_f32s(&mut w, dense.w.iter().copied())?;
        write_f32s(&mut w, dense.b.iter().copied())?;
    }
    w.flush()?;
    Ok(())
}

/// Load a CNN checkpoint saved by [`save_cnn`].
pub fn load_cnn(path: &Path) -> Result<Cnn<f32>> {
    let mut r = BufReader::new(File::open(path)?);
    read_header(&mut r, KIND_CNN)?;
    let input = (
        r.read_u64::<LittleEndian>()? as usize,
        r.read_u64::<LittleEndian>()? as usize,
        r.read_u64::<LittleEndian>()? as usize,
    );
    let n_conv = r.read_u64::<LittleEndian>()? as usize;
    let mut conv = Vec::with_capacity(n_conv);
    for _ in 0..n_conv {
        let out_channels = r.read_u64::<LittleEndian>()? as usize;
        let pool = r.read_u8()? != 0;
        conv.push(ConvBlock { out_channels, pool });
    }
    let n_dense = r.read_u64::<LittleEndian>()? as usize;
    let mut dense = Vec::with_capacity(n_dense);
    for _ in 0..n_dense {
        dense.push(r.read_u64::<LittleEndian>()? as usize);
    }
    let n_classes = r.read_u64::<LittleEndian>()? as usize;
    let dropout = r.read_f64::<LittleEndian>()?;
    let arch = CnnArch { input, conv, dense, n_classes, dropout };

    let mut convs = Vec::with_capacity(n_conv);
    let mut in_c = arch.input.0;
    for block in &arch.conv {
        let fan_in = in_c * 9;
        let w = Array2::from_shape_vec(
            (block.out_channels, fan_in),
            read_f32s(&mut r, block.out_channels * fan_in)?,
        )
        .map_err(|e| JamError::Format(format!("conv weights: {e}")))?;
        let b = Array1::from_vec(read_f32s(&mut r, block.out_channels)?);
        convs.push(ConvLayer { w, b, in_c, out_c: block.out_channels });
        in_c = block.out_channels;
    }
    let mut bns = Vec::with_capacity(n_conv);
    for block in &arch.conv {
        let c = block.out_channels;
        bns.push(BatchNorm {
            gamma: Array1::from_vec(read_f32s(&mut r, c)?),
            beta: Array1::from_vec(read_f32s(&mut r, c)?),
            running_mean: Array1::from_vec(read_f32s(&mut r, c)?),
            running_var: Array1::from_vec(read_f32s(&mut r, c)?),
        });
    }
    let mut denses = Vec::with_capacity(n_dense + 1);
    let mut in_f = arch.flatten_dim()?;
    for &width in arch.dense.iter().chain(std::iter::once(&arch.n_classes)) {
        let w = Array2::from_shape_vec((width, in_f), read_f32s(&mut r, width * in_f)?)
            .map_err(|e| JamError::Format(format!("dense weights: {e}")))?;
        let b = Array1::from_vec(read_f32s(&mut r, width)?);
        denses.push(DenseLayer { w, b });
        in_f = width;
    }
    Ok(Cnn { arch, convs, bns, denses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pca_svm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let mut x = Array2::<f32>::zeros((12, 6));
        let mut state = 5u64;
        for v in x.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = ((state >> 33) as f32 / 2.0_f32.powi(31)) - 0.5;
        }
        let pca = crate::classify::pca_fit(&x, 4).unwrap();
        let feats = crate::classify::pca_transform(&pca, &x).unwrap();
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let svm = crate::classify::svm_train_ovr(
            &feats,
            &labels,
            1.0,
            50,
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        save_pca_svm(&path, &pca, &svm).unwrap();
        let (pca2, svm2) = load_pca_svm(&path).unwrap();
        assert_eq!(pca.mean, pca2.mean);
        assert_eq!(pca.components, pca2.components);
        assert_eq!(pca.explained_variance, pca2.explained_variance);
        assert_eq!(svm.weights, svm2.weights);
        assert_eq!(svm.biases, svm2.biases);
        assert_eq!(svm.lambda, svm2.lambda);
    }

    #[test]
    fn cnn_round_trip_preserves_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cnn.bin");
        let arch = CnnArch {
            input: (1, 10, 10),
            conv: vec![ConvBlock { out_channels: 3, pool: true }],
            dense: vec![5],
            n_classes: 3,
            dropout: 0.2,
        };
        let net = Cnn::<f32>::new(arch, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        save_cnn(&path, &net).unwrap();
        let net2 = load_cnn(&path).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Array4::from_shape_simple_fn((4, 1, 10, 10), || rng.gen::<f32>());
        assert_eq!(
            net.forward_infer(&x).unwrap(),
            net2.forward_infer(&x).unwrap()
        );
        assert_eq!(net.arch.dropout, net2.arch.dropout);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOPE00000000").unwrap();
        assert!(matches!(load_pca_svm(&path), Err(JamError::Format(_))));
        // Kind mismatch: a PCA file read as a CNN.
        let good = dir.path().join("pca.bin");
        let x = ndarray::array![[1.0f32, 2.0], [3.0, 4.0], [5.0, 7.0]];
        let pca = crate::classify::pca_fit(&x, 1).unwrap();
        let svm = SvmModel {
            weights: vec![vec![1.0], vec![-1.0]],
            biases: vec![0.0, 0.0],
            lambda: 1.0,
        };
        save_pca_svm(&good, &pca, &svm).unwrap();
        assert!(matches!(load_cnn(&good), Err(JamError::Format(_))));
    }
}
