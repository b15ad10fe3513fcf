//! Symmetric eigensolvers.
//!
//! [`jacobi_eigen`] is a cyclic-by-row Jacobi solver for full decompositions
//! of small and moderate dense matrices. [`lanczos_top_k`] extracts the
//! leading eigenpairs of a large operator that is only available through
//! matrix-vector products (full reorthogonalisation, no restarts).
//!
//! Both solvers work in `f64` internally and return eigenvectors under the
//! same sign convention: the largest-magnitude component of every vector is
//! non-negative (first such component on ties).

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{ensure_finite, Scalar};

pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Relative symmetry tolerance accepted by the solvers.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// How "the K largest eigenvalues" are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenOrder {
    /// Largest algebraic value first.
    #[default]
    Algebraic,
    /// Largest absolute value first.
    Magnitude,
}

impl fmt::Display for EigenOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EigenOrder::Algebraic => "algebraic",
            EigenOrder::Magnitude => "magnitude",
        })
    }
}

impl FromStr for EigenOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(EigenOrder::Algebraic),
            "magnitude" => Ok(EigenOrder::Magnitude),
            _ => Err(Error::invalid(format!("unknown eigenvalue order '{s}'"))),
        }
    }
}

/// Full eigendecomposition `A = V Λ Vᵀ`; eigenvalues sorted non-increasing,
/// column `j` of `eigenvectors` paired with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
    /// Number of Jacobi sweeps performed.
    pub sweeps: usize,
}

/// Leading eigenpairs of a (possibly implicit) symmetric operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TopEigen<T> {
    pub eigenvalues: Vec<T>,
    /// `dim x k`, orthonormal columns.
    pub eigenvectors: Matrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The `k` leading pairs under `order`.
    pub fn top(&self, k: usize, order: EigenOrder) -> Result<TopEigen<T>> {
        check_k(k, self.dim())?;
        let idx = ranked_indices(
            &self.eigenvalues.iter().map(|v| v.widen()).collect::<Vec<_>>(),
            order,
        );
        let idx = &idx[..k];
        Ok(TopEigen {
            eigenvalues: idx.iter().map(|&i| self.eigenvalues[i]).collect(),
            eigenvectors: Matrix::from_fn(self.dim(), k, |r, c| self.eigenvectors[(r, idx[c])]),
        })
    }
}

fn check_k(k: usize, dim: usize) -> Result<()> {
    if k == 0 || k > dim {
        return Err(Error::precondition(format!(
            "number of components {k} must be in 1..={dim}"
        )));
    }
    Ok(())
}

/// Indices sorted by `order`, stable on ties.
fn ranked_indices(values: &[f64], order: EigenOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    match order {
        EigenOrder::Algebraic => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
        EigenOrder::Magnitude => idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs())),
    }
    idx
}

/// First `k` eigenvector columns (largest algebraic eigenvalues).
pub fn top_k<T: Scalar>(e: &EigenDecomposition<T>, k: usize) -> Result<Matrix<T>> {
    check_k(k, e.dim())?;
    Ok(e.eigenvectors.leading_columns(k))
}

fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub(crate) fn check_symmetric<T: Scalar>(a: &Matrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    ensure_finite(a.as_slice(), "matrix")?;
    let n = a.rows();
    for j in 0..n {
        for i in 0..j {
            let (x, y) = (a[(i, j)].widen(), a[(j, i)].widen());
            if (x - y).abs() > SYMMETRY_TOL * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::invalid(format!(
                    "matrix is not symmetric: a[{i},{j}] = {x}, a[{j},{i}] = {y}"
                )));
            }
        }
    }
    Ok(())
}

/// Cyclic-by-row Jacobi eigendecomposition of a symmetric matrix.
///
/// Stops once the off-diagonal Frobenius mass is at most `tol * ||A||_F`.
/// Fails with [`Error::NonConvergence`] (carrying that mass) if `max_sweeps`
/// sweeps are not enough.
pub fn jacobi_eigen<T: Scalar>(a: &Matrix<T>, tol: f64, max_sweeps: usize) -> Result<EigenDecomposition<T>> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    // Work on a full f64 copy, row-major (symmetric, so layout is moot).
    let mut m: Vec<f64> = a.as_slice().iter().map(|v| v.widen()).collect();
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.frobenius_norm();
    let target = tol * norm;

    let off_mass = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_mass(&m);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::NonConvergence {
                iterations: sweeps,
                residual: off,
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if tau.abs() > 1e150 {
                    0.5 / tau
                } else {
                    tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns p and q
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                // rows p and q
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (kp, kq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let order = ranked_indices(&diag, EigenOrder::Algebraic);
    let mut vectors = Matrix::zeros(n, n);
    let mut col = vec![0.0f64; n];
    for (dst, &src) in order.iter().enumerate() {
        for (k, c) in col.iter_mut().enumerate() {
            *c = v[k * n + src];
        }
        apply_sign_convention(&mut col);
        for (o, &c) in vectors.col_mut(dst).iter_mut().zip(&col) {
            *o = T::narrow(c);
        }
    }
    Ok(EigenDecomposition {
        eigenvalues: order.iter().map(|&i| T::narrow(diag[i])).collect(),
        eigenvectors: vectors,
        sweeps,
    })
}

/// Jacobi with the default tolerance and sweep budget.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    jacobi_eigen(a, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS)
}

/// A symmetric linear operator known only through products `y = A x`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;

    /// Writes `A x` into `y` (both of length [`dim`](Self::dim)).
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: Scalar> SymmetricOperator for Matrix<T> {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.col(j)) {
                *yi += a.widen() * xj;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Ritz pairs are accepted once `||A y - θ y|| <= tol * max|θ|`.
    pub tol: f64,
    /// Largest Krylov basis to build before giving up.
    pub max_basis: usize,
    pub order: EigenOrder,
    /// Seed for the start vector (and for fresh vectors after a breakdown).
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_basis: 600,
            order: EigenOrder::Algebraic,
            seed: 0x6d66_7063_615f_6c7a,
        }
    }
}

fn random_unit_orthogonal(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], n: usize) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut w: Vec<f64> = (0..n)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            .collect();
        reorthogonalize(&mut w, basis);
        let nrm = norm2(&w);
        if nrm > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nrm);
            return Some(w);
        }
    }
    None
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let h = dot(q, w);
            w.iter_mut().zip(q).for_each(|(x, qi)| *x -= h * qi);
        }
    }
}

/// Leading `k` eigenpairs of `op` via Lanczos with full reorthogonalisation.
///
/// If the Krylov space becomes invariant before `k` pairs are available (or
/// before the wanted pairs converge), the iteration continues from a fresh
/// vector orthogonal to the current basis, so low-rank operators and
/// repeated eigenvalues are handled.
pub fn lanczos_top_k<T: Scalar>(
    op: &dyn SymmetricOperator,
    k: usize,
    opts: &LanczosOptions,
) -> Result<TopEigen<T>> {
    let n = op.dim();
    check_k(k, n)?;
    let max_basis = opts.max_basis.max(k).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_basis);
    // beta[j] couples basis vectors j and j + 1
    let mut beta: Vec<f64> = Vec::with_capacity(max_basis);

    let mut q = random_unit_orthogonal(&mut rng, &basis, n)
        .ok_or_else(|| Error::invalid("could not draw a start vector"))?;
    let mut w = vec![0.0f64; n];
    let mut next_check = k.max(8);
    let mut scale_est = 0.0f64;

    loop {
        op.apply(&q, &mut w);
        let a = dot(&q, &w);
        let j = basis.len();
        w.iter_mut().zip(&q).for_each(|(x, qi)| *x -= a * qi);
        if j > 0 {
            let b = beta[j - 1];
            w.iter_mut().zip(&basis[j - 1]).for_each(|(x, qi)| *x -= b * qi);
        }
        basis.push(std::mem::take(&mut q));
        alpha.push(a);
        reorthogonalize(&mut w, &basis);
        let b = norm2(&w);
        scale_est = scale_est.max(a.abs() + b);

        let m = basis.len();
        let breakdown = b <= 1e-12 * scale_est.max(f64::MIN_POSITIVE);
        let full = m == max_basis;

        if m >= k && (m >= next_check || breakdown || full) {
            next_check = m + (m / 4).max(4);
            let b_last = if breakdown { 0.0 } else { b };
            let (ritz, worst) = ritz_pairs(&alpha, &beta, b_last, k, opts.order)?;
            let converged = worst <= opts.tol;
            if converged || m == n {
                return Ok(assemble(&basis, &ritz, k));
            }
            if full {
                return Err(Error::NonConvergence {
                    iterations: m,
                    residual: worst,
                });
            }
        } else if full {
            // m < k can only happen when max_basis == n
            unreachable!("basis full before k vectors");
        }

        if breakdown {
            match random_unit_orthogonal(&mut rng, &basis, n) {
                Some(fresh) => {
                    q = fresh;
                    beta.push(0.0);
                }
                None => {
                    let (ritz, _) = ritz_pairs(&alpha, &beta, 0.0, k, opts.order)?;
                    return Ok(assemble(&basis, &ritz, k));
                }
            }
        } else {
            q = w.iter().map(|x| x / b).collect();
            beta.push(b);
        }
    }
}

struct Ritz {
    values: Vec<f64>,
    /// `m x k` coefficients in the Lanczos basis.
    coeffs: Matrix<f64>,
}

/// Ritz pairs of the tridiagonal projection and the worst relative residual
/// among the wanted ones.
fn ritz_pairs(alpha: &[f64], beta: &[f64], b_last: f64, k: usize, order: EigenOrder) -> Result<(Ritz, f64)> {
    let m = alpha.len();
    let t = Matrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let e = jacobi_eigen(&t, 1e-14, DEFAULT_MAX_SWEEPS)?;
    let top = e.top(k, order)?;
    let scale = e
        .eigenvalues
        .iter()
        .fold(0.0f64, |s, v| s.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let worst = (0..k)
        .map(|c| (b_last * top.eigenvectors[(m - 1, c)]).abs() / scale)
        .fold(0.0, f64::max);
    Ok((
        Ritz {
            values: top.eigenvalues,
            coeffs: top.eigenvectors,
        },
        worst,
    ))
}

fn assemble<T: Scalar>(basis: &[Vec<f64>], ritz: &Ritz, k: usize) -> TopEigen<T> {
    let n = basis[0].len();
    let mut vectors = Matrix::zeros(n, k);
    let mut y = vec![0.0f64; n];
    for c in 0..k {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, q) in basis.iter().enumerate() {
            let s = ritz.coeffs[(j, c)];
            y.iter_mut().zip(q).for_each(|(v, qi)| *v += s * qi);
        }
        let nrm = norm2(&y);
        y.iter_mut().for_each(|v| *v /= nrm);
        apply_sign_convention(&mut y);
        for (o, &v) in vectors.col_mut(c).iter_mut().zip(&y) {
            *o = T::narrow(v);
        }
    }
    TopEigen {
        eigenvalues: ritz.values.iter().map(|&v| T::narrow(v)).collect(),
        eigenvectors: vectors,
    }
}
