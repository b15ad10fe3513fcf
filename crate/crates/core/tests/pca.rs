mod common;

use common::{matrix, orthonormality_error, projector};
use mfpca::covariance::DataMatrix;
use mfpca::imaging::noise::{rng_from_seed, uniform_open01};
use mfpca::pca::evaluate_centering;
use mfpca::{
    covariance, fit, fit_best_mean, fit_with, symmetric_eigen, Centering, EigenOrder, FitOptions, KernelKind,
    Matrix, PcaModel, Solver,
};
use proptest::prelude::*;

fn data(m: Matrix<f64>) -> DataMatrix<f64> {
    DataMatrix::new(m).unwrap()
}

fn opts(solver: Solver) -> FitOptions {
    FitOptions {
        solver,
        ..FitOptions::default()
    }
}

fn psnr(a: &[f64], b: &[f64]) -> f64 {
    let mse = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    10.0 * (1.0 / mse).log10()
}

#[test]
fn axis_aligned_variance() {
    let x = DataMatrix::from_columns(&[vec![3.0, 0.0], vec![0.0, 2.0]]).unwrap();
    let m = fit(&x, 1, KernelKind::L2, Centering::Zero).unwrap();
    let p = projector(&m.components);
    assert_eq!(p, Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap());
    assert_eq!(m.eigenvalues, vec![9.0]);
}

#[test]
fn repeated_column_min_signed() {
    let x = DataMatrix::<f64>::from_columns(&vec![vec![1.0, 0.0]; 5]).unwrap();
    let m = fit(&x, 1, KernelKind::MinSigned, Centering::Zero).unwrap();
    assert_eq!(m.components.col(0), &[1.0, 0.0]);
    assert_eq!(m.eigenvalues, vec![5.0]);
}

#[test]
fn reconstruction_examples() {
    let model = PcaModel {
        components: Matrix::from_columns(&[vec![1.0, 0.0]]).unwrap(),
        mean: vec![0.0, 0.0],
        kind: KernelKind::L2,
        eigenvalues: vec![1.0],
        solver: Solver::Dense,
    };
    assert_eq!(model.reconstruct(&[3.0, 4.0]).unwrap(), vec![3.0, 0.0]);
    assert!(model.reconstruct(&[1.0]).is_err());

    let x =
        DataMatrix::from_columns(&[vec![0.2, 0.9, 0.4], vec![0.7, 0.1, 0.3], vec![0.5, 0.5, 0.8]]).unwrap();
    for kind in KernelKind::ALL {
        let m = fit(&x, 2, kind, Centering::SampleMean).unwrap();
        assert_eq!(m.reconstruct(&m.mean).unwrap(), m.mean);
    }
}

#[test]
fn k_out_of_range_is_rejected() {
    let x = DataMatrix::from_columns(&[vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0]]).unwrap();
    assert!(fit(&x, 0, KernelKind::L2, Centering::Zero).is_err());
    assert!(fit(&x, 3, KernelKind::L2, Centering::Zero).is_err());
    assert!(fit_with(&x, 1, KernelKind::MinSigned, Centering::Zero, &opts(Solver::Gram)).is_err());
}

#[test]
fn best_mean_selects_sample_mean_for_clean_columns() {
    let reference = vec![0.1, 0.8, 0.3, 0.6];
    let x = DataMatrix::from_columns(&vec![reference.clone(); 4]).unwrap();
    for kind in KernelKind::ALL {
        let best = fit_best_mean(&x, 1, kind, &reference, 2).unwrap();
        assert_eq!(best.centering, Centering::SampleMean);
        assert!(best.psnr.is_infinite());
        assert_eq!(best.reconstruction, reference);
    }
}

#[test]
fn half_centering_of_mid_grey_is_exact() {
    let reference = vec![0.5; 6];
    let x = DataMatrix::from_columns(&vec![reference.clone(); 3]).unwrap();
    for kind in KernelKind::ALL {
        let r = evaluate_centering(
            &x,
            2,
            kind,
            Centering::Half,
            &reference,
            0,
            &FitOptions::default(),
        )
        .unwrap();
        assert_eq!(r.reconstruction, reference);
        assert!(r.psnr.is_infinite());
    }
}

#[test]
fn sample_mean_beats_zero_on_biased_data() {
    // reference plus zero-mean noise, averaged over seeds
    let d = 40;
    let reference: Vec<f64> = (0..d).map(|i| 0.3 + 0.4 * ((i * 7 % 11) as f64 / 10.0)).collect();
    let (mut zero, mut mean) = (0.0, 0.0);
    for seed in 0..10 {
        let mut rng = rng_from_seed(seed);
        let cols: Vec<Vec<f64>> = (0..8)
            .map(|_| {
                reference
                    .iter()
                    .map(|r| r + 0.2 * (uniform_open01(&mut rng) - 0.5))
                    .collect()
            })
            .collect();
        let x = DataMatrix::from_columns(&cols).unwrap();
        let o = FitOptions::default();
        let run = |c| evaluate_centering(&x, 1, KernelKind::MinSigned, c, &reference, 0, &o).unwrap();
        zero += run(Centering::Zero).psnr;
        mean += run(Centering::SampleMean).psnr;
    }
    assert!(mean >= zero, "sample mean {mean} vs zero {zero}");
}

#[test]
fn complete_basis_is_identity() {
    let x = DataMatrix::from_columns(&[vec![1.0, 0.2, -0.3], vec![0.4, -1.1, 0.5], vec![-0.2, 0.3, 0.9]])
        .unwrap();
    for kind in KernelKind::ALL {
        let m = fit(&x, 3, kind, Centering::Zero).unwrap();
        let p = projector(&m.components);
        assert!(p.max_abs_diff(&Matrix::identity(3)).unwrap() <= 1e-8, "{kind}");
        let v = [0.3, -0.7, 0.25];
        let r = m.reconstruct(&v).unwrap();
        assert!(r.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-8));
    }
}

#[test]
fn auto_solver_choices() {
    let wide = DataMatrix::new(Matrix::from_fn(20, 4, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0)).unwrap();
    assert_eq!(
        fit(&wide, 2, KernelKind::L2, Centering::Zero).unwrap().solver,
        Solver::Gram
    );
    assert_eq!(
        fit(&wide, 2, KernelKind::MinSigned, Centering::Zero)
            .unwrap()
            .solver,
        Solver::Dense
    );
    let o = FitOptions {
        dense_limit: 10,
        ..FitOptions::default()
    };
    let m = fit_with(&wide, 2, KernelKind::MinSigned, Centering::Zero, &o).unwrap();
    assert_eq!(m.solver, Solver::Structured);
}

/// Relative gap after the `k`-th algebraic eigenvalue.
fn gap_after(a: &Matrix<f64>, k: usize) -> f64 {
    let ev = symmetric_eigen(a).unwrap().eigenvalues;
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if k >= ev.len() {
        return 1.0;
    }
    (ev[k - 1] - ev[k]) / scale
}

fn wide_data() -> impl Strategy<Value = (Matrix<f64>, usize)> {
    (2usize..=30)
        .prop_flat_map(|d| (Just(d), 1usize..d.min(8)))
        .prop_flat_map(|(d, n)| (matrix(d, n, 1.0), 1..=n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_invariants_and_idempotence(x in common::data_matrix(10, 1.0), k_seed in 0usize..100) {
        let x = data(x);
        let k = 1 + k_seed % x.dim().min(x.samples());
        for kind in KernelKind::ALL {
            for centering in Centering::ALL {
                let m = fit(&x, k, kind, centering).unwrap();
                prop_assert!(orthonormality_error(&m.components) <= 1e-8);
                prop_assert!(m.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
                let v = x.column(0);
                let r1 = m.reconstruct(v).unwrap();
                let r2 = m.reconstruct(&r1).unwrap();
                for (a, b) in r1.iter().zip(&r2) {
                    prop_assert!((a - b).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn sign_flips_do_not_change_reconstruction(x in common::data_matrix(10, 1.0), v in common::vector(10, 1.0)) {
        let x = data(x);
        let k = x.dim().min(x.samples());
        let v = &v[..x.dim()];
        let m = fit(&x, k, KernelKind::MinMatched, Centering::SampleMean).unwrap();
        let base = m.reconstruct(v).unwrap();
        for c in 0..k {
            let mut flipped = m.clone();
            flipped.components.col_mut(c).iter_mut().for_each(|w| *w = -*w);
            let r = flipped.reconstruct(v).unwrap();
            for (a, b) in r.iter().zip(&base) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gram_path_matches_dense((x, k) in wide_data()) {
        let x = data(x);
        let cov = covariance(&x, KernelKind::L2).into_entries();
        prop_assume!(gap_after(&cov, k) > 1e-6);
        let g = fit_with(&x, k, KernelKind::L2, Centering::Zero, &opts(Solver::Gram)).unwrap();
        let d = fit_with(&x, k, KernelKind::L2, Centering::Zero, &opts(Solver::Dense)).unwrap();
        prop_assert_eq!(g.solver, Solver::Gram);
        let diff = projector(&g.components).max_abs_diff(&projector(&d.components)).unwrap();
        prop_assert!(diff <= 1e-6, "projector difference {diff}");
    }

    #[test]
    fn structured_path_matches_dense((x, k) in wide_data()) {
        let x = data(x);
        for kind in KernelKind::ALL {
            let centered = x.centered(&x.row_mean()).unwrap();
            let cov = covariance(&centered, kind).into_entries();
            if gap_after(&cov, k) <= 1e-3 {
                continue;
            }
            let s = fit_with(&x, k, kind, Centering::SampleMean, &opts(Solver::Structured)).unwrap();
            let d = fit_with(&x, k, kind, Centering::SampleMean, &opts(Solver::Dense)).unwrap();
            let diff = projector(&s.components).max_abs_diff(&projector(&d.components)).unwrap();
            prop_assert!(diff <= 1e-6, "{kind}: projector difference {diff}");
        }
    }

    #[test]
    fn rank_many_components_reproduce_clean_data(x in common::data_matrix(12, 1.0)) {
        // K equal to the rank of the covariance keeps every column of X: for
        // PSD covariances each x_n lies in the range, and a full-rank basis
        // covers everything. The indefinite MfAdd matrix only has the latter.
        let x = data(x);
        for kind in KernelKind::ALL {

            let cov = covariance(&x, kind).into_entries();
            let ev = symmetric_eigen(&cov).unwrap().eigenvalues;
            let lead = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rank = ev.iter().filter(|v| v.abs() > 1e-9 * lead).count();
            // MF covariances can have rank above min(D, N), beyond what a fit allows
            let indefinite_deficient = kind == KernelKind::MfAdd && rank < x.dim();
            if rank == 0 || rank > x.dim().min(x.samples()) || indefinite_deficient {
                continue;
            }
            let o = FitOptions {
                solver: Solver::Dense,
                order: EigenOrder::Magnitude,
                ..FitOptions::default()
            };
            let m = fit_with(&x, rank, kind, Centering::Zero, &o).unwrap();
            for j in 0..x.samples() {
                let r = m.reconstruct(x.column(j)).unwrap();
                let p = psnr(&r, x.column(j));
                prop_assert!(p >= 100.0, "{kind}: column {j} PSNR {p} (rank {rank})");
            }
        }
    }
}
