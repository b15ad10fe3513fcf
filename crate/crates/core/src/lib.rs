//! Robust PCA with multiplication-free, l1-norm inducing dot products.
//!
//! The crate builds generalised covariance matrices from three
//! multiplication-free vector products ([`kernel_ops`]), decomposes them with
//! its own symmetric eigensolvers ([`eigen`]), and uses the leading
//! eigenvectors for PCA reconstruction ([`pca`]). [`imaging`] and
//! [`experiment`] provide the image denoising harness on top.
//!
//! The numerical modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below name the common `f64` instantiations.

pub mod covariance;
pub mod eigen;
mod error;
pub mod experiment;
pub mod imaging;
pub mod kernel_ops;
pub mod matrix;
pub mod memory;
pub mod pca;
pub mod scalar;

pub use covariance::{
    covariance, hadamard, is_psd, l2_covariance, mf_covariance, min_kernel_matrix, multiplication_count,
    CovarianceMatrix, CovarianceOperator, DataMatrix, PsdReport,
};
pub use eigen::{
    jacobi_eigen, lanczos_top_k, symmetric_eigen, top_k, EigenDecomposition, EigenOrder, LanczosOptions,
    SymmetricOperator, TopEigen,
};
pub use error::{Error, Result};
pub use imaging::GrayImage;
pub use kernel_ops::{
    euclid_dot, kernel_dot, mf_dot, mf_matrix_product, min_dot_matched, min_dot_signed, sign, KernelKind,
};
pub use matrix::Matrix;
pub use pca::{
    fit, fit_best_mean, fit_with, reconstruct, BestFit, Centering, FitOptions, MeanMode, PcaModel, Solver,
};
pub use scalar::Scalar;

pub type MatrixF64 = Matrix<f64>;
pub type MatrixF32 = Matrix<f32>;
pub type DataMatrixF64 = DataMatrix<f64>;
pub type DataMatrixF32 = DataMatrix<f32>;
pub type CovarianceMatrixF64 = CovarianceMatrix<f64>;
pub type CovarianceMatrixF32 = CovarianceMatrix<f32>;
pub type EigenDecompositionF64 = EigenDecomposition<f64>;
pub type PcaModelF64 = PcaModel<f64>;
pub type PcaModelF32 = PcaModel<f32>;
