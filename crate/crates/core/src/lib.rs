//! Robust adaptive beamforming with Krylov-subspace steering-vector estimation.
//!
//! The crate covers the uniform-linear-array signal model with steering
//! mismatch, the orthogonal Krylov projection estimator of the desired
//! steering vector and its low-complexity stochastic-gradient and
//! conjugate-gradient variants, reference beamformers, closed-form analysis
//! helpers, and a seeded Monte Carlo harness.

// `!(x >= 0.0)` is the idiom used throughout to reject NaN along with negatives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod analysis;
pub mod array_model;
pub mod baselines;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod linalg;
pub mod okspme;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
