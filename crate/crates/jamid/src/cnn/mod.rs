//! Convolutional network built from scratch on dense GEMMs.
//!
//! The default architecture works on 128×128 RGB time-frequency images:
//! three 3×3 valid-convolution blocks (32, 64, 128 channels, each followed by
//! batch normalization and ReLU, the first two also by 2×2 max pooling), a
//! flatten to 28·28·128 = 100352 features, dense 128 → ReLU → dropout 0.4 →
//! dense 64 → ReLU → dense 4 → softmax.
//!
//! All layers are generic over the float type: `f32` for production training
//! (fast GEMM path), `f64` for finite-difference gradient verification.

mod layers;
mod network;

pub use layers::{
    cross_entropy, im2col, softmax, BatchNorm, ConvLayer, DenseLayer, MaxPool,
};
pub use network::{Cnn, CnnArch, ConvBlock, Grads, TrainConfig, TrainHistory};

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Float type usable in every layer: `LinalgScalar` keeps the fast
/// `matrixmultiply` GEMM path, `Float` supplies the transcendentals.
pub trait CnnFloat:
    LinalgScalar + Float + FromPrimitive + ToPrimitive + ScalarOperand + std::fmt::Debug + Send + Sync
{
}

impl CnnFloat for f32 {}
impl CnnFloat for f64 {}

/// Convert an `f64` constant into the working float type.
pub(crate) fn tf<T: CnnFloat>(v: f64) -> T {
    T::from_f64(v).expect("f64 constant must convert into the CNN float type")
}
