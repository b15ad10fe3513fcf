//! Sample covariance `X Xᵀ` and MF-covariance `X ⊕ Xᵀ` matrices.
//!
//! Entry `(i, j)` of a covariance is the chosen dot product of rows `i` and
//! `j` of the `D x N` data matrix. No `1/N` normalization is applied; it
//! does not change eigenvectors or the eigenvalue order.
//!
//! Dense matrices are built from the upper triangle and mirrored, so they are
//! exactly symmetric. For large `D` see [`CovarianceOperator`], which applies
//! the same matrix to a vector without materialising it.

mod operator;

pub use operator::CovarianceOperator;

use crate::eigen::{check_symmetric, symmetric_eigen};
use crate::error::{Error, Result};
use crate::kernel_ops::{joint_sign, KernelKind};
use crate::matrix::Matrix;
use crate::scalar::{ensure_finite, Scalar};

/// `D x N` data matrix, one sample per column. Non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    values: Matrix<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(values: Matrix<T>) -> Result<Self> {
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::invalid(format!(
                "data matrix must be non-empty, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        ensure_finite(values.as_slice(), "data matrix")?;
        Ok(Self { values })
    }

    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        Self::new(Matrix::from_columns(columns)?)
    }

    /// Sample dimension `D`.
    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    /// Number of samples `N`.
    pub fn samples(&self) -> usize {
        self.values.cols()
    }

    pub fn column(&self, j: usize) -> &[T] {
        self.values.col(j)
    }

    pub fn as_matrix(&self) -> &Matrix<T> {
        &self.values
    }

    /// Mean of each row (a length-`D` vector).
    pub fn row_mean(&self) -> Vec<T> {
        let n = self.samples() as f64;
        let mut acc = vec![0.0f64; self.dim()];
        for j in 0..self.samples() {
            for (a, v) in acc.iter_mut().zip(self.column(j)) {
                *a += v.widen();
            }
        }
        acc.into_iter().map(|a| T::narrow(a / n)).collect()
    }

    /// Subtracts `mean` from every column.
    pub fn centered(&self, mean: &[T]) -> Result<Self> {
        if mean.len() != self.dim() {
            return Err(Error::dim(format!(
                "centering vector has length {}, samples have dimension {}",
                mean.len(),
                self.dim()
            )));
        }
        ensure_finite(mean, "centering vector")?;
        let values = Matrix::from_fn(self.dim(), self.samples(), |i, j| self.values[(i, j)] - mean[i]);
        Ok(Self { values })
    }
}

/// Dense symmetric covariance together with the kernel that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T> {
    entries: Matrix<T>,
    kind: KernelKind,
}

impl<T: Scalar> CovarianceMatrix<T> {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix<T> {
        self.entries
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for CovarianceMatrix<T> {
    type Output = T;

    fn index(&self, ij: (usize, usize)) -> &T {
        &self.entries[ij]
    }
}

const SIGN_BIT: u64 = 1 << 63;

#[inline(always)]
fn l2_term(a: f64, b: f64) -> f64 {
    a * b
}

// The MF terms take their sign from the operands' sign bits; when an operand
// is zero the magnitude (or the select) is already zero.
#[inline(always)]
fn mf_add_term(a: f64, b: f64) -> f64 {
    let m = a.abs() + b.abs();
    let t = f64::from_bits(m.to_bits() | ((a.to_bits() ^ b.to_bits()) & SIGN_BIT));
    if a != 0.0 && b != 0.0 {
        t
    } else {
        0.0
    }
}

#[inline(always)]
fn min_signed_term(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    f64::from_bits(m.to_bits() | ((a.to_bits() ^ b.to_bits()) & SIGN_BIT))
}

#[inline(always)]
fn min_matched_term(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a.to_bits() ^ b.to_bits()) & SIGN_BIT == 0 {
        m
    } else {
        0.0
    }
}

/// Builds `A_ij = Σ_n term(X_in, X_jn)` column by column over the upper
/// triangle and mirrors it. Each entry sums its terms in sample order, like
/// the pairwise dot products, but the inner loop runs down a contiguous data
/// column so it vectorises.
fn build_symmetric<T: Scalar>(x: &DataMatrix<T>, kind: KernelKind) -> Matrix<T> {
    match kind {
        KernelKind::L2 => accumulate(x, l2_term),
        KernelKind::MfAdd => accumulate(x, mf_add_term),
        KernelKind::MinSigned => accumulate(x, min_signed_term),
        KernelKind::MinMatched => accumulate(x, min_matched_term),
    }
}

fn accumulate<T: Scalar>(x: &DataMatrix<T>, term: impl Fn(f64, f64) -> f64 + Copy) -> Matrix<T> {
    let (d, n) = (x.dim(), x.samples());
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|s| x.column(s).iter().map(|v| v.widen()).collect())
        .collect();
    let mut out = Matrix::zeros(d, d);
    let mut acc = vec![0.0f64; d];
    for j in 0..d {
        let acc = &mut acc[..=j];
        acc.iter_mut().for_each(|a| *a = 0.0);
        for col in &cols {
            let xj = col[j];
            for (a, &xi) in acc.iter_mut().zip(&col[..=j]) {
                *a += term(xi, xj);
            }
        }
        for (o, &a) in out.col_mut(j).iter_mut().zip(acc.iter()) {
            *o = T::narrow(a);
        }
    }
    mirror_upper(&mut out);
    out
}

/// Copies the upper triangle into the lower one in cache-sized blocks.
fn mirror_upper<T: Scalar>(m: &mut Matrix<T>) {
    const B: usize = 64;
    let d = m.rows();
    for jb in (0..d).step_by(B) {
        for ib in (jb..d).step_by(B) {
            for j in jb..(jb + B).min(d) {
                for i in ib.max(j + 1)..(ib + B).min(d) {
                    m[(i, j)] = m[(j, i)];
                }
            }
        }
    }
}

/// `C = X Xᵀ`.
pub fn l2_covariance<T: Scalar>(x: &DataMatrix<T>) -> CovarianceMatrix<T> {
    CovarianceMatrix {
        entries: build_symmetric(x, KernelKind::L2),
        kind: KernelKind::L2,
    }
}

/// `A = X ⊕ Xᵀ` for one of the multiplication-free kinds.
///
/// `KernelKind::L2` is rejected; use [`l2_covariance`] (or [`covariance`]).
pub fn mf_covariance<T: Scalar>(x: &DataMatrix<T>, kind: KernelKind) -> Result<CovarianceMatrix<T>> {
    if kind == KernelKind::L2 {
        return Err(Error::invalid(
            "mf_covariance needs a multiplication-free kind; use l2_covariance for L2",
        ));
    }
    Ok(CovarianceMatrix {
        entries: build_symmetric(x, kind),
        kind,
    })
}

/// Dense covariance for any kind.
pub fn covariance<T: Scalar>(x: &DataMatrix<T>, kind: KernelKind) -> CovarianceMatrix<T> {
    match kind {
        KernelKind::L2 => l2_covariance(x),
        _ => CovarianceMatrix {
            entries: build_symmetric(x, kind),
            kind,
        },
    }
}

/// Outcome of a positive semi-definiteness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdReport {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// PSD test: `λ_min >= -tol * max(1, λ_max)`.
pub fn is_psd<T: Scalar>(a: &Matrix<T>, tol: f64) -> Result<PsdReport> {
    check_symmetric(a)?;
    let e = symmetric_eigen(a)?;
    let max_eigenvalue = e.eigenvalues[0].widen();
    let min_eigenvalue = e.eigenvalues[e.dim() - 1].widen();
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tol * max_eigenvalue.max(1.0),
        min_eigenvalue,
        max_eigenvalue,
    })
}

/// Min-kernel matrix of a vector.
///
/// Unsigned: `min(x_i, x_j)`, which requires strictly positive entries.
/// Signed: `sign(x_i x_j) min(|x_i|, |x_j|)`.
pub fn min_kernel_matrix<T: Scalar>(x: &[T], signed: bool) -> Result<Matrix<T>> {
    ensure_finite(x, "min-kernel input")?;
    if !signed {
        if let Some(i) = x.iter().position(|&v| v <= T::zero()) {
            return Err(Error::precondition(format!(
                "unsigned min-kernel needs strictly positive entries, x[{i}] = {}",
                x[i]
            )));
        }
        return Ok(Matrix::from_fn(x.len(), x.len(), |i, j| x[i].min(x[j])));
    }
    Ok(Matrix::from_fn(x.len(), x.len(), |i, j| {
        let m = x[i].abs().min(x[j].abs());
        match joint_sign(x[i], x[j]) {
            1 => m,
            -1 => -m,
            _ => T::zero(),
        }
    }))
}

/// Entry-wise (Schur) product.
pub fn hadamard<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.shape() != b.shape() {
        return Err(Error::dim(format!(
            "Hadamard product of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] * b[(i, j)]))
}

/// General multiplications needed to build a `D x D` covariance from `N`
/// samples: `D² N` for L2, none for the multiplication-free kinds.
pub fn multiplication_count(dim: u64, samples: u64, kind: KernelKind) -> u64 {
    match kind {
        KernelKind::L2 => dim * dim * samples,
        _ => 0,
    }
}
