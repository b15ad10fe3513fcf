//! Matrix-free application of a covariance to a vector.
//!
//! Writing `x_n` for sample (column) `n`, `s = sign(x_n)` and `a = |x_n|`,
//! every covariance is a sum over samples:
//!
//! * L2:         `Σ_n x_n x_nᵀ`
//! * MfAdd:      `Σ_n (x_n s_nᵀ + s_n x_nᵀ)`, because `s_i s_j (a_i + a_j) = x_i s_j + s_i x_j`
//! * MinSigned:  `Σ_n K_n` with `K_n[i, j] = s_i s_j min(a_i, a_j)`, the signed min-kernel of `x_n`
//! * MinMatched: `Σ_n` of the min-kernel restricted to each sign class of `x_n`
//!
//! A min-kernel times a vector needs only the entries sorted by magnitude:
//! `Σ_j min(a_i, a_j) z_j = Σ_{a_j <= a_i} a_j z_j + a_i Σ_{a_j > a_i} z_j`,
//! i.e. one prefix and one suffix sum. So every kind costs `O(N D)` per
//! product after an `O(N D log D)` setup, against `O(D²)` storage and
//! `O(D² N)` construction for the dense matrix.

use crate::covariance::DataMatrix;
use crate::eigen::SymmetricOperator;
use crate::kernel_ops::{raw_sign, KernelKind};
use crate::scalar::Scalar;

/// One sample sorted by magnitude.
#[derive(Debug, Clone)]
struct SortedSample {
    /// Original row index of each sorted position.
    order: Vec<u32>,
    magnitude: Vec<f64>,
    sign: Vec<i8>,
}

impl SortedSample {
    fn new<T: Scalar>(column: &[T]) -> Self {
        let mut order: Vec<u32> = (0..column.len() as u32).collect();
        order.sort_by(|&a, &b| {
            column[a as usize]
                .abs()
                .widen()
                .total_cmp(&column[b as usize].abs().widen())
        });
        let magnitude = order.iter().map(|&i| column[i as usize].abs().widen()).collect();
        let sign = order.iter().map(|&i| raw_sign(column[i as usize])).collect();
        Self {
            order,
            magnitude,
            sign,
        }
    }
}

#[derive(Debug, Clone)]
enum Structure {
    Euclidean {
        columns: Vec<Vec<f64>>,
    },
    MfAdd {
        columns: Vec<Vec<f64>>,
        signs: Vec<Vec<f64>>,
    },
    Min {
        samples: Vec<SortedSample>,
        matched: bool,
    },
}

/// Implicit `D x D` covariance of a data matrix; see the module docs.
#[derive(Debug, Clone)]
pub struct CovarianceOperator {
    dim: usize,
    kind: KernelKind,
    structure: Structure,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

impl CovarianceOperator {
    pub fn new<T: Scalar>(x: &DataMatrix<T>, kind: KernelKind) -> Self {
        let columns = || -> Vec<Vec<f64>> {
            (0..x.samples())
                .map(|j| x.column(j).iter().map(|v| v.widen()).collect())
                .collect()
        };
        let structure = match kind {
            KernelKind::L2 => Structure::Euclidean { columns: columns() },
            KernelKind::MfAdd => Structure::MfAdd {
                signs: (0..x.samples())
                    .map(|j| x.column(j).iter().map(|&v| raw_sign(v) as f64).collect())
                    .collect(),
                columns: columns(),
            },
            KernelKind::MinSigned | KernelKind::MinMatched => Structure::Min {
                samples: (0..x.samples()).map(|j| SortedSample::new(x.column(j))).collect(),
                matched: kind == KernelKind::MinMatched,
            },
        };
        Self {
            dim: x.dim(),
            kind,
            structure,
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }
}

/// `out += K y` for the signed min-kernel of one sample.
fn apply_signed(s: &SortedSample, y: &[f64], suffix: &mut [f64], out: &mut [f64]) {
    let d = s.order.len();
    let z = |l: usize| match s.sign[l] {
        1 => y[s.order[l] as usize],
        -1 => -y[s.order[l] as usize],
        _ => 0.0,
    };
    // suffix[l] = Σ_{l' > l} z_l'
    let mut acc = 0.0;
    for l in (0..d).rev() {
        suffix[l] = acc;
        acc += z(l);
    }
    let mut prefix = 0.0;
    for l in 0..d {
        prefix += s.magnitude[l] * z(l);
        let v = prefix + s.magnitude[l] * suffix[l];
        match s.sign[l] {
            1 => out[s.order[l] as usize] += v,
            -1 => out[s.order[l] as usize] -= v,
            _ => {}
        }
    }
}

/// `out += K y` for the sign-matched min-kernel of one sample: the plain
/// min-kernel applied separately within the positive and the negative class.
fn apply_matched(s: &SortedSample, y: &[f64], suffix: &mut [f64], out: &mut [f64]) {
    let d = s.order.len();
    // suffix sums per class; the class of position l is s.sign[l]
    let (mut pos, mut neg) = (0.0, 0.0);
    for l in (0..d).rev() {
        match s.sign[l] {
            1 => {
                suffix[l] = pos;
                pos += y[s.order[l] as usize];
            }
            -1 => {
                suffix[l] = neg;
                neg += y[s.order[l] as usize];
            }
            _ => suffix[l] = 0.0,
        }
    }
    let (mut pos, mut neg) = (0.0, 0.0);
    for l in 0..d {
        let yi = y[s.order[l] as usize];
        let a = s.magnitude[l];
        match s.sign[l] {
            1 => {
                pos += a * yi;
                out[s.order[l] as usize] += pos + a * suffix[l];
            }
            -1 => {
                neg += a * yi;
                out[s.order[l] as usize] += neg + a * suffix[l];
            }
            _ => {}
        }
    }
}

impl SymmetricOperator for CovarianceOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match &self.structure {
            Structure::Euclidean { columns } => {
                for c in columns {
                    axpy(dot(c, y), c, out);
                }
            }
            Structure::MfAdd { columns, signs } => {
                for (c, s) in columns.iter().zip(signs) {
                    axpy(dot(s, y), c, out);
                    axpy(dot(c, y), s, out);
                }
            }
            Structure::Min { samples, matched } => {
                let mut suffix = vec![0.0f64; self.dim];
                for s in samples {
                    if *matched {
                        apply_matched(s, y, &mut suffix, out);
                    } else {
                        apply_signed(s, y, &mut suffix, out);
                    }
                }
            }
        }
    }
}
