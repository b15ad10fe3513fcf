mod common;

use common::fixture;
use mfpca::imaging::metrics::{capped, image_mse, psnr, psnr_from_mse, PSNR_CAP_DB};
use mfpca::imaging::noise::{rng_from_seed, salt_pepper_count, NoiseSpec};
use mfpca::imaging::pgm::{decode, encode, read_pgm, write_pgm};
use mfpca::GrayImage;
use proptest::prelude::*;

fn image(max: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max, 1..=max).prop_flat_map(|(h, w)| {
        prop::collection::vec(0u8..=255, h * w).prop_map(move |px| GrayImage::from_u8(h, w, &px).unwrap())
    })
}

fn changed(a: &GrayImage, b: &GrayImage) -> usize {
    a.pixels().iter().zip(b.pixels()).filter(|(x, y)| x != y).count()
}

#[test]
fn fixtures_load_as_k_over_255() {
    for name in ["camera.pgm", "moon.pgm", "coins.pgm"] {
        let img = read_pgm(fixture(name)).unwrap();
        assert_eq!((img.height(), img.width()), (128, 128), "{name}");
        for &p in img.pixels() {
            let k = (p * 255.0).round();
            assert_eq!(p, k / 255.0);
        }
    }
    let tiny = read_pgm(fixture("tiny_ascii.pgm")).unwrap();
    assert_eq!((tiny.height(), tiny.width()), (2, 3));
    assert_eq!(tiny.to_u8(), vec![0, 128, 255, 17, 34, 51]);
}

#[test]
fn vec_is_column_major() {
    let img = GrayImage::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    assert_eq!(img.vec(), vec![0.1, 0.3, 0.2, 0.4]);
    let one = GrayImage::new(1, 1, vec![0.5]).unwrap();
    assert_eq!(one.vec(), vec![0.5]);
    assert!(GrayImage::mat(&[0.1, 0.2, 0.3], 2, 2).is_err());
}

#[test]
fn occlusion_on_a_fixture() {
    let img = read_pgm(fixture("camera.pgm")).unwrap();
    let spec = NoiseSpec::occlusion().with_seed(11);
    let noisy = spec.apply(&img, &mut spec.rng()).unwrap();
    assert_eq!(changed(&img, &noisy), 3 * 32 * 32);
    let mut identical_tiles = 0;
    for tr in 0..4 {
        for tc in 0..4 {
            let same = (0..32).all(|r| {
                (0..32).all(|c| img.get(tr * 32 + r, tc * 32 + c) == noisy.get(tr * 32 + r, tc * 32 + c))
            });
            identical_tiles += same as usize;
        }
    }
    assert_eq!(identical_tiles, 13);
}

#[test]
fn salt_pepper_on_a_fixture() {
    let img = read_pgm(fixture("moon.pgm")).unwrap();
    let spec = NoiseSpec::salt_pepper(0.1).with_seed(5);
    let noisy = spec.apply(&img, &mut spec.rng()).unwrap();
    assert_eq!(salt_pepper_count(0.1, 128 * 128), 1638);
    let extremes = img
        .pixels()
        .iter()
        .zip(noisy.pixels())
        .filter(|(a, b)| a != b)
        .all(|(_, b)| *b == 0.0 || *b == 1.0);
    assert!(extremes);
    assert!(changed(&img, &noisy) <= 1638);
    let all = NoiseSpec::salt_pepper(1.0).with_seed(5);
    let full = all.apply(&img, &mut all.rng()).unwrap();
    assert!(full.pixels().iter().all(|&p| p == 0.0 || p == 1.0));
    let none = NoiseSpec::salt_pepper(0.0).with_seed(5);
    assert_eq!(none.apply(&img, &mut none.rng()).unwrap(), img);
}

#[test]
fn occlusion_rejects_mismatched_grid() {
    let img = GrayImage::filled(40, 40, 0.5).unwrap();
    let spec = NoiseSpec::occlusion();
    assert!(spec.apply(&img, &mut spec.rng()).is_err());
}

#[test]
fn metric_examples() {
    let a = GrayImage::filled(4, 4, 0.0).unwrap();
    let b = GrayImage::filled(4, 4, 1.0).unwrap();
    let c = GrayImage::filled(4, 4, 0.1).unwrap();
    assert_eq!(image_mse(&a, &b).unwrap(), 1.0);
    assert_eq!(psnr(&a, &b, 1.0).unwrap(), 0.0);
    assert!((psnr(&a, &c, 1.0).unwrap() - 20.0).abs() < 1e-12);
    assert!(psnr(&a, &a, 1.0).unwrap().is_infinite());
    assert_eq!(capped(f64::INFINITY), PSNR_CAP_DB);
    assert!(image_mse(&a, &GrayImage::filled(2, 8, 0.0).unwrap()).is_err());
}

proptest! {
    #[test]
    fn vec_mat_round_trip(img in image(12)) {
        let back = GrayImage::mat(&img.vec(), img.height(), img.width()).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn pgm_round_trip_is_bit_exact(img in image(16)) {
        let back = decode(&encode(&img)).unwrap();
        prop_assert_eq!(back.to_u8(), img.to_u8());
        prop_assert_eq!(back, img);
    }

    #[test]
    fn noise_is_deterministic_and_budgeted(seed in any::<u64>(), density in 0.0f64..=1.0, tiles in 0usize..=16) {
        let img = GrayImage::from_u8(64, 64, &(0..64 * 64).map(|i| (i % 251) as u8).collect::<Vec<_>>()).unwrap();
        let occ = NoiseSpec { tiles_corrupted: tiles, tile_size: 16, ..NoiseSpec::occlusion() }.with_seed(seed);
        let a = occ.apply(&img, &mut occ.rng()).unwrap();
        let b = occ.apply(&img, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(changed(&img, &a) <= tiles * 16 * 16);
        let sp = NoiseSpec::salt_pepper(density).with_seed(seed);
        let a = sp.apply(&img, &mut sp.rng()).unwrap();
        let b = sp.apply(&img, &mut sp.rng()).unwrap();
        prop_assert_eq!(&a, &b);
        let hits = salt_pepper_count(density, img.len());
        let extremes = a.pixels().iter().filter(|&&p| p == 0.0 || p == 1.0).count();
        let orig_extremes = img.pixels().iter().filter(|&&p| p == 0.0 || p == 1.0).count();
        prop_assert!(changed(&img, &a) <= hits);
        prop_assert!(extremes >= hits.min(img.len()).saturating_sub(orig_extremes));
        prop_assert!(extremes <= hits + orig_extremes);
    }

    #[test]
    fn psnr_properties(a in image(8), shift in 1u8..=100) {
        prop_assert_eq!(capped(psnr(&a, &a, 1.0).unwrap()), PSNR_CAP_DB);
        let px: Vec<u8> = a.to_u8().iter().map(|&v| v.saturating_add(shift)).collect();
        let b = GrayImage::from_u8(a.height(), a.width(), &px).unwrap();
        prop_assert_eq!(psnr(&a, &b, 1.0).unwrap(), psnr(&b, &a, 1.0).unwrap());
    }

    #[test]
    fn psnr_decreases_with_mse(m1 in 1e-9f64..1.0, m2 in 1e-9f64..1.0) {
        prop_assume!(m1 != m2);
        let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(psnr_from_mse(lo, 1.0) > psnr_from_mse(hi, 1.0));
    }
}

#[test]
fn write_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.pgm");
    let img = GrayImage::from_u8(3, 5, &(0..15).map(|v| v * 17).collect::<Vec<u8>>()).unwrap();
    write_pgm(&path, &img).unwrap();
    assert_eq!(read_pgm(&path).unwrap(), img);
}
