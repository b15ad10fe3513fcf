//! Reference implementations shared by the integration tests. They follow
//! the textbook definitions directly and share no code with the library.
#![allow(dead_code)]

use mfpca::{KernelKind, Matrix};
use proptest::prelude::*;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixtures() -> Vec<std::path::PathBuf> {
    ["camera.pgm", "moon.pgm", "coins.pgm"]
        .iter()
        .map(|n| fixture(n))
        .collect()
}

fn signum0(a: f64) -> f64 {
    if a > 0.0 {
        1.0
    } else if a < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Term-by-term evaluation of each product with ordinary arithmetic.
pub fn oracle_dot(kind: KernelKind, w: &[f64], x: &[f64]) -> f64 {
    assert_eq!(w.len(), x.len());
    w.iter()
        .zip(x)
        .map(|(&a, &b)| match kind {
            KernelKind::L2 => a * b,
            KernelKind::MfAdd => signum0(a * b) * (a.abs() + b.abs()),
            KernelKind::MinSigned => signum0(a * b) * a.abs().min(b.abs()),
            KernelKind::MinMatched => {
                if signum0(a) == signum0(b) {
                    a.abs().min(b.abs())
                } else {
                    0.0
                }
            }
        })
        .sum()
}

pub fn oracle_covariance(x: &Matrix<f64>, kind: KernelKind) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = (0..x.rows()).map(|i| x.row(i)).collect();
    rows.iter()
        .map(|ri| rows.iter().map(|rj| oracle_dot(kind, ri, rj)).collect())
        .collect()
}

pub fn to_nalgebra(a: &Matrix<f64>) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Eigenvalues in descending order: closed-form roots of the characteristic
/// polynomial up to 3x3, nalgebra's symmetric QR solver above.
pub fn oracle_eigenvalues(a: &Matrix<f64>) -> Vec<f64> {
    let n = a.rows();
    let mut ev = match n {
        1 => vec![a[(0, 0)]],
        2 => {
            let (p, q, r) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
            let mid = 0.5 * (p + r);
            let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            vec![mid + rad, mid - rad]
        }
        3 => symmetric_3x3_roots(a),
        _ => nalgebra::SymmetricEigen::new(to_nalgebra(a))
            .eigenvalues
            .iter()
            .copied()
            .collect(),
    };
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Trigonometric solution of the characteristic cubic of a symmetric matrix.
fn symmetric_3x3_roots(a: &Matrix<f64>) -> Vec<f64> {
    let (a11, a12, a13) = (a[(0, 0)], a[(0, 1)], a[(0, 2)]);
    let (a22, a23, a33) = (a[(1, 1)], a[(1, 2)], a[(2, 2)]);
    let p1 = a12 * a12 + a13 * a13 + a23 * a23;
    let q = (a11 + a22 + a33) / 3.0;
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return vec![q; 3];
    }
    let (b11, b22, b33) = ((a11 - q) / p, (a22 - q) / p, (a33 - q) / p);
    let (b12, b13, b23) = (a12 / p, a13 / p, a23 / p);
    let det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) + b13 * (b12 * b23 - b22 * b13);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    vec![e1, e2, e3]
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// `W Wᵀ` of a matrix with orthonormal columns.
pub fn projector(w: &Matrix<f64>) -> Matrix<f64> {
    let d = w.rows();
    Matrix::from_fn(d, d, |i, j| (0..w.cols()).map(|c| w[(i, c)] * w[(j, c)]).sum())
}

/// `‖VᵀV - I‖_max`.
pub fn orthonormality_error(v: &Matrix<f64>) -> f64 {
    let k = v.cols();
    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let dot: f64 = v.col(a).iter().zip(v.col(b)).map(|(x, y)| x * y).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

pub fn vector(len: impl Into<proptest::sample::SizeRange>, bound: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-bound..bound, len)
}

/// `rows x cols` matrix with entries uniform in `(-bound, bound)`.
pub fn matrix(rows: usize, cols: usize, bound: f64) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(-bound..bound, rows * cols)
        .prop_map(move |v| Matrix::from_column_major(rows, cols, v).unwrap())
}

/// Random data matrix with `D, N` in `1..=max`.
pub fn data_matrix(max: usize, bound: f64) -> impl Strategy<Value = Matrix<f64>> {
    (1..=max, 1..=max).prop_flat_map(move |(d, n)| matrix(d, n, bound))
}

pub fn symmetric(max: usize, bound: f64) -> impl Strategy<Value = Matrix<f64>> {
    (1..=max).prop_flat_map(move |n| {
        matrix(n, n, bound).prop_map(|m| {
            let n = m.rows();
            Matrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] })
        })
    })
}

/// `G Gᵀ` for a random square `G`.
pub fn gram(n: usize, bound: f64) -> impl Strategy<Value = Matrix<f64>> {
    matrix(n, n, bound).prop_map(|g| {
        let n = g.rows();
        Matrix::from_fn(n, n, |i, j| (0..n).map(|k| g[(i, k)] * g[(j, k)]).sum())
    })
}
