//! Multiplication-free (MF) vector products and their Euclidean reference.
//!
//! The three MF products replace each `w_i * x_i` of the ordinary dot product
//! with an expression built from sign logic, absolute values, `min` and
//! addition:
//!
//! | kind          | per-component term                               | `x . x`      |
//! |---------------|--------------------------------------------------|--------------|
//! | `MfAdd`       | `sign(w_i x_i) (|w_i| + |x_i|)`                  | `2 ||x||_1`  |
//! | `MinSigned`   | `sign(w_i x_i) min(|w_i|, |x_i|)`                | `||x||_1`    |
//! | `MinMatched`  | `[sign(w_i) = sign(x_i)] min(|w_i|, |x_i|)`      | `||x||_1`    |
//!
//! `sign(0) = 0`. The sign of `w_i x_i` is derived from the operand signs, so
//! the accumulation path never forms a product.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{ensure_finite, Scalar};

/// Selects which dot product defines a covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    /// Ordinary Euclidean product.
    L2,
    /// Additive MF product.
    MfAdd,
    /// Min product with subtractive opposite-sign terms.
    MinSigned,
    /// Min product where opposite-sign components contribute nothing.
    MinMatched,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::L2,
        KernelKind::MfAdd,
        KernelKind::MinSigned,
        KernelKind::MinMatched,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::L2 => "l2",
            KernelKind::MfAdd => "mf",
            KernelKind::MinSigned => "min1",
            KernelKind::MinMatched => "min2",
        }
    }

    pub fn is_multiplication_free(self) -> bool {
        !matches!(self, KernelKind::L2)
    }

    /// Whether covariances built from this kind are guaranteed PSD.
    pub fn is_psd_kernel(self) -> bool {
        !matches!(self, KernelKind::MfAdd)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l2" => Ok(KernelKind::L2),
            "mf" | "mfadd" | "mf-add" => Ok(KernelKind::MfAdd),
            "min1" | "minsigned" | "min-signed" => Ok(KernelKind::MinSigned),
            "min2" | "minmatched" | "min-matched" => Ok(KernelKind::MinMatched),
            other => Err(Error::invalid(format!(
                "unknown kernel '{other}' (expected l2, mf, min1 or min2)"
            ))),
        }
    }
}

/// Standard signum with `sign(0) = 0`; rejects NaN and infinities.
pub fn sign<T: Scalar>(a: T) -> Result<i8> {
    if !a.is_finite() {
        return Err(Error::invalid(format!("sign of non-finite value {a}")));
    }
    Ok(raw_sign(a))
}

#[inline]
pub(crate) fn raw_sign<T: Scalar>(a: T) -> i8 {
    if a > T::zero() {
        1
    } else if a < T::zero() {
        -1
    } else {
        0
    }
}

/// `sign(w * x)` computed from the operand signs alone.
#[inline]
pub(crate) fn joint_sign<T: Scalar>(w: T, x: T) -> i8 {
    match (raw_sign(w), raw_sign(x)) {
        (0, _) | (_, 0) => 0,
        (a, b) if a == b => 1,
        _ => -1,
    }
}

#[inline]
fn mf_add_f64<T: Scalar>(w: &[T], x: &[T]) -> f64 {
    let mut acc = 0.0f64;
    for (&a, &b) in w.iter().zip(x) {
        match joint_sign(a, b) {
            1 => acc += a.abs().widen() + b.abs().widen(),
            -1 => acc -= a.abs().widen() + b.abs().widen(),
            _ => {}
        }
    }
    acc
}

#[inline]
fn min_signed_f64<T: Scalar>(w: &[T], x: &[T]) -> f64 {
    let mut acc = 0.0f64;
    for (&a, &b) in w.iter().zip(x) {
        match joint_sign(a, b) {
            1 => acc += a.abs().min(b.abs()).widen(),
            -1 => acc -= a.abs().min(b.abs()).widen(),
            _ => {}
        }
    }
    acc
}

#[inline]
fn min_matched_f64<T: Scalar>(w: &[T], x: &[T]) -> f64 {
    let mut acc = 0.0f64;
    for (&a, &b) in w.iter().zip(x) {
        if raw_sign(a) == raw_sign(b) {
            acc += a.abs().min(b.abs()).widen();
        }
    }
    acc
}

/// Dot product of already validated, equal-length slices.
#[inline]
pub(crate) fn dot_unchecked<T: Scalar>(kind: KernelKind, w: &[T], x: &[T]) -> f64 {
    match kind {
        KernelKind::L2 => crate::matrix::dot_f64(w, x),
        KernelKind::MfAdd => mf_add_f64(w, x),
        KernelKind::MinSigned => min_signed_f64(w, x),
        KernelKind::MinMatched => min_matched_f64(w, x),
    }
}

fn check_pair<T: Scalar>(w: &[T], x: &[T]) -> Result<()> {
    if w.len() != x.len() {
        return Err(Error::dim(format!(
            "vectors have lengths {} and {}",
            w.len(),
            x.len()
        )));
    }
    ensure_finite(w, "left operand")?;
    ensure_finite(x, "right operand")
}

/// Dot product selected by `kind`.
pub fn kernel_dot<T: Scalar>(kind: KernelKind, w: &[T], x: &[T]) -> Result<T> {
    check_pair(w, x)?;
    Ok(T::narrow(dot_unchecked(kind, w, x)))
}

/// Additive MF product `Σ sign(w_i x_i)(|w_i| + |x_i|)`.
pub fn mf_dot<T: Scalar>(w: &[T], x: &[T]) -> Result<T> {
    kernel_dot(KernelKind::MfAdd, w, x)
}

/// `Σ sign(w_i x_i) min(|w_i|, |x_i|)`.
pub fn min_dot_signed<T: Scalar>(w: &[T], x: &[T]) -> Result<T> {
    kernel_dot(KernelKind::MinSigned, w, x)
}

/// `Σ [sign(w_i) = sign(x_i)] min(|w_i|, |x_i|)`.
pub fn min_dot_matched<T: Scalar>(w: &[T], x: &[T]) -> Result<T> {
    kernel_dot(KernelKind::MinMatched, w, x)
}

pub fn euclid_dot<T: Scalar>(w: &[T], x: &[T]) -> Result<T> {
    kernel_dot(KernelKind::L2, w, x)
}

/// Generalised `Wᵀ ⊕ X`: entry `(i, j)` is the `kind` product of column `i`
/// of `w` with column `j` of `x`. With `KernelKind::L2` this is `WᵀX`.
pub fn mf_matrix_product<T: Scalar>(w: &Matrix<T>, x: &Matrix<T>, kind: KernelKind) -> Result<Matrix<T>> {
    if w.rows() != x.rows() {
        return Err(Error::dim(format!(
            "operands have {} and {} rows",
            w.rows(),
            x.rows()
        )));
    }
    ensure_finite(w.as_slice(), "left matrix")?;
    ensure_finite(x.as_slice(), "right matrix")?;
    Ok(Matrix::from_fn(w.cols(), x.cols(), |i, j| {
        T::narrow(dot_unchecked(kind, w.col(i), x.col(j)))
    }))
}
