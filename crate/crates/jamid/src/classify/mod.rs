//! PCA feature extraction and linear one-vs-rest soft-margin SVM.

mod pca;
mod svm;

pub use pca::{pca_fit, pca_transform, PcaModel};
pub use svm::{svm_objective, svm_predict, svm_train_ovr, SvmModel};
