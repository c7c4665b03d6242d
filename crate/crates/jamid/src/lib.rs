//! Desk-scale LTE jammer-identification toolkit.
//!
//! The crate synthesizes jammed LTE downlink baseband signals, converts them
//! to time-frequency images (spectrogram, Choi-Williams distribution, Gabor
//! wavelet scalogram), and identifies the jammer type (none / barrage /
//! synchronization-signal / reference-signal) with a PCA+SVM pipeline and a
//! from-scratch convolutional neural network.
//!
//! Module map:
//! - [`lte_phy`] — downlink resource grid and OFDM modulation
//! - [`jamming`] — barrage / sync-signal / reference-signal jammers
//! - [`channel`] — fading, path loss, noise, SNR/SJR calibration, EVM
//! - [`tft`] — the three time-frequency transforms
//! - [`imaging`] — log-scale jet-colormap 128×128 PNG rendering
//! - [`classify`] — PCA feature extraction + linear one-vs-rest SVM
//! - [`cnn`] — convolutional network built from scratch (SGD, backprop)
//! - [`harness`] — scenario calibration, dataset generation, experiments

pub mod channel;
pub mod classify;
pub mod cnn;
pub mod error;
pub mod harness;
pub mod imaging;
pub mod jamming;
pub mod lte_phy;
pub mod model_io;
pub mod tft;

pub use error::{JamError, Result};
