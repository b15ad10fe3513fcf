//! PCA on a (multiplication-free) covariance.
//!
//! The data are centred by a chosen vector `v̄`, the covariance of the
//! chosen kind is eigendecomposed, and the `K` leading eigenvectors form the
//! orthonormal basis `W`. A sample is reconstructed as `W Wᵀ (v - v̄) + v̄`
//! with ordinary arithmetic; only the covariance uses the MF products.
//!
//! Three eigen paths compute the same subspace:
//!
//! * dense: build the `D x D` matrix and run Jacobi (Lanczos above
//!   [`FitOptions::dense_limit`]),
//! * Gram (L2 only): decompose the `N x N` matrix `XᵀX` and map back,
//! * structured: Lanczos on [`CovarianceOperator`], never forming the matrix.

use std::fmt;
use std::str::FromStr;

use crate::covariance::{covariance, CovarianceOperator, DataMatrix};
use crate::eigen::{lanczos_top_k, symmetric_eigen, EigenOrder, LanczosOptions, TopEigen};
use crate::error::{Error, Result};
use crate::imaging::metrics::{mse, psnr_from_mse};
use crate::kernel_ops::KernelKind;
use crate::matrix::{dot_f64, Matrix};
use crate::memory;
use crate::scalar::{ensure_finite, Scalar};

/// A concrete centering vector choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Centering {
    Zero,
    /// Every component 0.5 (mid-grey for images in `[0, 1]`).
    Half,
    /// Row-wise mean of the data.
    SampleMean,
}

impl Centering {
    pub const ALL: [Centering; 3] = [Centering::Zero, Centering::Half, Centering::SampleMean];

    pub fn as_str(self) -> &'static str {
        match self {
            Centering::Zero => "zero",
            Centering::Half => "half",
            Centering::SampleMean => "sample",
        }
    }

    pub fn vector<T: Scalar>(self, x: &DataMatrix<T>) -> Vec<T> {
        match self {
            Centering::Zero => vec![T::zero(); x.dim()],
            Centering::Half => vec![T::narrow(0.5); x.dim()],
            Centering::SampleMean => x.row_mean(),
        }
    }
}

impl fmt::Display for Centering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Centering policy; `BestOfThree` needs ground truth and is resolved by
/// [`fit_best_mean`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MeanMode {
    Zero,
    Half,
    SampleMean,
    #[default]
    BestOfThree,
}

impl MeanMode {
    pub fn concrete(self) -> Option<Centering> {
        match self {
            MeanMode::Zero => Some(Centering::Zero),
            MeanMode::Half => Some(Centering::Half),
            MeanMode::SampleMean => Some(Centering::SampleMean),
            MeanMode::BestOfThree => None,
        }
    }
}

impl FromStr for MeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(MeanMode::Zero),
            "half" => Ok(MeanMode::Half),
            "sample" | "mean" => Ok(MeanMode::SampleMean),
            "best" => Ok(MeanMode::BestOfThree),
            _ => Err(Error::invalid(format!(
                "unknown mean mode '{s}' (expected zero, half, sample or best)"
            ))),
        }
    }
}

/// Eigen path used by [`fit_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Gram for L2 when `D > N`, dense up to `dense_limit`, structured above.
    #[default]
    Auto,
    Dense,
    Gram,
    Structured,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Auto => "auto",
            Solver::Dense => "dense",
            Solver::Gram => "gram",
            Solver::Structured => "structured",
        })
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Solver::Auto),
            "dense" => Ok(Solver::Dense),
            "gram" => Ok(Solver::Gram),
            "structured" => Ok(Solver::Structured),
            _ => Err(Error::invalid(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub solver: Solver,
    pub order: EigenOrder,
    /// Largest `D` decomposed with full Jacobi; bigger dense matrices use Lanczos.
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            solver: Solver::Auto,
            order: EigenOrder::Algebraic,
            dense_limit: 256,
            lanczos: LanczosOptions::default(),
        }
    }
}

impl FitOptions {
    fn resolve(&self, kind: KernelKind, dim: usize, samples: usize) -> Result<Solver> {
        match self.solver {
            Solver::Auto if kind == KernelKind::L2 && dim > samples => Ok(Solver::Gram),
            Solver::Auto if dim <= self.dense_limit => Ok(Solver::Dense),
            Solver::Auto => Ok(Solver::Structured),
            Solver::Gram if kind != KernelKind::L2 => {
                Err(Error::invalid("the Gram path only exists for the L2 kernel"))
            }
            s => Ok(s),
        }
    }
}

/// Fitted model: `K` orthonormal directions, the centering vector and the
/// kernel that defined the covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T> {
    /// `D x K`, orthonormal columns.
    pub components: Matrix<T>,
    pub mean: Vec<T>,
    pub kind: KernelKind,
    pub eigenvalues: Vec<T>,
    /// Path that actually ran (never `Auto`).
    pub solver: Solver,
}

impl<T: Scalar> PcaModel<T> {
    pub fn dim(&self) -> usize {
        self.components.rows()
    }

    pub fn n_components(&self) -> usize {
        self.components.cols()
    }

    /// `W Wᵀ (v - v̄) + v̄`.
    pub fn reconstruct(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(Error::dim(format!(
                "vector has length {}, model dimension is {}",
                v.len(),
                self.dim()
            )));
        }
        ensure_finite(v, "reconstruction input")?;
        let centered: Vec<f64> = v
            .iter()
            .zip(&self.mean)
            .map(|(a, m)| a.widen() - m.widen())
            .collect();
        let mut out: Vec<f64> = self.mean.iter().map(|m| m.widen()).collect();
        for c in 0..self.n_components() {
            let w = self.components.col(c);
            let coef: f64 = w.iter().zip(&centered).map(|(a, b)| a.widen() * b).sum();
            out.iter_mut().zip(w).for_each(|(o, a)| *o += coef * a.widen());
        }
        Ok(out.into_iter().map(T::narrow).collect())
    }
}

pub fn reconstruct<T: Scalar>(model: &PcaModel<T>, v: &[T]) -> Result<Vec<T>> {
    model.reconstruct(v)
}

/// Fits with default options.
pub fn fit<T: Scalar>(
    x: &DataMatrix<T>,
    k: usize,
    kind: KernelKind,
    centering: Centering,
) -> Result<PcaModel<T>> {
    fit_with(x, k, kind, centering, &FitOptions::default())
}

pub fn fit_with<T: Scalar>(
    x: &DataMatrix<T>,
    k: usize,
    kind: KernelKind,
    centering: Centering,
    opts: &FitOptions,
) -> Result<PcaModel<T>> {
    let (d, n) = (x.dim(), x.samples());
    if k == 0 || k > d.min(n) {
        return Err(Error::precondition(format!(
            "number of components {k} must be in 1..={} (D = {d}, N = {n})",
            d.min(n)
        )));
    }
    let mean = centering.vector(x);
    let centered = x.centered(&mean)?;
    let solver = opts.resolve(kind, d, n)?;
    let top = match solver {
        Solver::Dense => {
            memory::check_dense_budget(d, std::mem::size_of::<T>())?;
            let cov = covariance(&centered, kind).into_entries();
            if d <= opts.dense_limit {
                symmetric_eigen(&cov)?.top(k, opts.order)?
            } else {
                lanczos_top_k(
                    &cov,
                    k,
                    &LanczosOptions {
                        order: opts.order,
                        ..opts.lanczos
                    },
                )?
            }
        }
        Solver::Structured => {
            let op = CovarianceOperator::new(&centered, kind);
            lanczos_top_k(
                &op,
                k,
                &LanczosOptions {
                    order: opts.order,
                    ..opts.lanczos
                },
            )?
        }
        Solver::Gram => gram_top_k(&centered, k, opts.order)?,
        Solver::Auto => unreachable!("resolved above"),
    };
    Ok(PcaModel {
        components: top.eigenvectors,
        mean,
        kind,
        eigenvalues: top.eigenvalues,
        solver,
    })
}

/// L2 eigenvectors of `X Xᵀ` from the `N x N` matrix `XᵀX`: if `XᵀX u = λ u`
/// then `X u / √λ` is a unit eigenvector of `X Xᵀ` with the same `λ`.
/// Directions with (numerically) zero eigenvalue are completed with an
/// orthonormal basis of the remaining space.
fn gram_top_k<T: Scalar>(x: &DataMatrix<T>, k: usize, order: EigenOrder) -> Result<TopEigen<T>> {
    let (d, n) = (x.dim(), x.samples());
    let gram = Matrix::from_fn(n, n, |a, b| dot_f64(x.column(a), x.column(b)));
    let e = symmetric_eigen(&gram)?.top(k, order)?;
    let lead = e.eigenvalues[0].abs();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for c in 0..k {
        let lambda = e.eigenvalues[c];
        if lambda > 1e-12 * lead && lambda > 0.0 {
            let u = e.eigenvectors.col(c);
            let mut w = vec![0.0f64; d];
            for (j, &uj) in u.iter().enumerate() {
                w.iter_mut()
                    .zip(x.column(j))
                    .for_each(|(wi, xi)| *wi += uj * xi.widen());
            }
            if push_orthonormal(&mut basis, w) {
                values.push(lambda);
                continue;
            }
        }
        // null space: first standard basis vector that survives orthogonalisation
        let mut e_idx = 0;
        loop {
            let mut w = vec![0.0f64; d];
            w[e_idx] = 1.0;
            if push_orthonormal(&mut basis, w) {
                values.push(0.0);
                break;
            }
            e_idx += 1;
        }
    }
    let mut vectors = Matrix::zeros(d, k);
    for (c, mut w) in basis.into_iter().enumerate() {
        sign_convention(&mut w);
        for (o, v) in vectors.col_mut(c).iter_mut().zip(w) {
            *o = T::narrow(v);
        }
    }
    Ok(TopEigen {
        eigenvalues: values.into_iter().map(T::narrow).collect(),
        eigenvectors: vectors,
    })
}

fn sign_convention(w: &mut [f64]) {
    let mut best = 0;
    for i in 0..w.len() {
        if w[i].abs() > w[best].abs() {
            best = i;
        }
    }
    if w[best] < 0.0 {
        w.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Orthogonalises `w` against `basis` (twice) and appends it if it keeps
/// more than half of its norm.
fn push_orthonormal(basis: &mut Vec<Vec<f64>>, mut w: Vec<f64>) -> bool {
    let before = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in basis.iter() {
            let h: f64 = q.iter().zip(&w).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= h * qi);
        }
    }
    let after = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if after <= 0.5 * before {
        return false;
    }
    w.iter_mut().for_each(|v| *v /= after);
    basis.push(w);
    true
}

/// Result of [`fit_best_mean`].
#[derive(Debug, Clone, PartialEq)]
pub struct BestFit<T> {
    pub model: PcaModel<T>,
    pub centering: Centering,
    /// PSNR (dB, peak 1) of `reconstruction` against the reference.
    pub psnr: f64,
    pub reconstruction: Vec<T>,
}

/// Order in which centerings are tried; on equal PSNR the earlier one wins.
const BEST_OF_THREE: [Centering; 3] = [Centering::SampleMean, Centering::Half, Centering::Zero];

/// Fits under each centering, reconstructs column `index` and keeps the
/// centering whose reconstruction has the highest PSNR against `reference`.
pub fn fit_best_mean<T: Scalar>(
    x: &DataMatrix<T>,
    k: usize,
    kind: KernelKind,
    reference: &[T],
    index: usize,
) -> Result<BestFit<T>> {
    fit_best_mean_with(x, k, kind, reference, index, &FitOptions::default())
}

pub fn fit_best_mean_with<T: Scalar>(
    x: &DataMatrix<T>,
    k: usize,
    kind: KernelKind,
    reference: &[T],
    index: usize,
    opts: &FitOptions,
) -> Result<BestFit<T>> {
    let mut best: Option<BestFit<T>> = None;
    for centering in BEST_OF_THREE {
        let fit = evaluate_centering(x, k, kind, centering, reference, index, opts)?;
        if best.as_ref().is_none_or(|b| fit.psnr > b.psnr) {
            best = Some(fit);
        }
    }
    Ok(best.expect("three candidates"))
}

/// Fits under one centering and scores the reconstruction of column `index`.
pub fn evaluate_centering<T: Scalar>(
    x: &DataMatrix<T>,
    k: usize,
    kind: KernelKind,
    centering: Centering,
    reference: &[T],
    index: usize,
    opts: &FitOptions,
) -> Result<BestFit<T>> {
    if index >= x.samples() {
        return Err(Error::precondition(format!(
            "column index {index} out of range for {} samples",
            x.samples()
        )));
    }
    if reference.len() != x.dim() {
        return Err(Error::dim(format!(
            "reference has length {}, samples have dimension {}",
            reference.len(),
            x.dim()
        )));
    }
    let model = fit_with(x, k, kind, centering, opts)?;
    let reconstruction = model.reconstruct(x.column(index))?;
    let psnr = psnr_from_mse(mse(&reconstruction, reference)?, 1.0);
    Ok(BestFit {
        model,
        centering,
        psnr,
        reconstruction,
    })
}
