mod common;

use std::f64::consts::PI;

use common::{naive_dft3, naive_phase_saliency, rng};
use num_complex::Complex64;
use rand::Rng;
use spectral_saliency::qft::{
    comparison_image, channel_sum_saliency, cross_correlation, iqft2, qft2, qft_saliency_raw, run_qft_comparison,
    ComparisonConfig, QftAxis, Quaternion, QuaternionImage,
};
use spectral_saliency::saliency::phase_saliency;
use spectral_saliency::{Dims, SaliencyMap, SmoothSpec, Volume};

fn random_image(seed: u64, rows: usize, cols: usize) -> QuaternionImage {
    let mut g = rng(seed);
    let data = (0..rows * cols)
        .map(|_| Quaternion::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0), g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)))
        .collect();
    QuaternionImage::new(rows, cols, data).unwrap()
}

fn max_diff(a: &QuaternionImage, b: &QuaternionImage) -> f64 {
    a.data().iter().zip(b.data()).map(|(p, q)| (*p - *q).norm()).fold(0.0, f64::max)
}

/// Direct double sum with the kernel `cos θ - μ sin θ` on the left.
fn naive_qft(img: &QuaternionImage, mu: Quaternion) -> QuaternionImage {
    let (r, c) = (img.rows(), img.cols());
    let mut out = Vec::with_capacity(r * c);
    for u in 0..r {
        for v in 0..c {
            let mut acc = Quaternion::ZERO;
            for m in 0..r {
                for n in 0..c {
                    let th = 2.0 * PI * ((u * m) as f64 / r as f64 + (v * n) as f64 / c as f64);
                    let kernel = Quaternion::ONE.scale(th.cos()) - mu.scale(th.sin());
                    acc = acc + kernel * img.get(m, n);
                }
            }
            out.push(acc);
        }
    }
    QuaternionImage::new(r, c, out).unwrap()
}

#[test]
fn qft_matches_direct_sum() {
    let axes = [
        QftAxis::default(),
        QftAxis::new(Quaternion::pure(1.0, 0.0, 0.0)).unwrap(),
        QftAxis::new(Quaternion::pure(0.6, 0.0, -0.8)).unwrap(),
    ];
    for (i, axis) in axes.iter().enumerate() {
        for (r, c) in [(4, 4), (3, 5), (1, 6)] {
            let img = random_image(i as u64 * 10 + r as u64, r, c);
            let err = max_diff(&qft2(&img, axis).unwrap(), &naive_qft(&img, axis.mu()));
            assert!(err <= 1e-9, "{r}x{c}: {err}");
        }
    }
}

#[test]
fn inverse_round_trip() {
    let axis = QftAxis::default();
    for (r, c) in [(4, 4), (7, 9), (16, 5)] {
        let img = random_image(r as u64 * 31 + c as u64, r, c);
        let back = iqft2(&qft2(&img, &axis).unwrap(), &axis).unwrap();
        assert!(max_diff(&img, &back) <= 1e-9);
    }
}

#[test]
fn real_image_reduces_to_complex_dft() {
    let (r, c) = (5, 6);
    let img = random_image(40, r, c);
    let real = QuaternionImage::new(r, c, img.data().iter().map(|q| Quaternion::new(q.w, 0.0, 0.0, 0.0)).collect()).unwrap();
    let axis = QftAxis::default();
    let mu = axis.mu();
    let spec = qft2(&real, &axis).unwrap();
    let x: Vec<Complex64> = img.data().iter().map(|q| Complex64::new(q.w, 0.0)).collect();
    let y = naive_dft3(&x, Dims::new(r, c, 1), -1.0);
    for row in 0..r {
        for col in 0..c {
            let s = spec.get(row, col);
            let yv = y[row * c + col];
            let expected = Quaternion::ONE.scale(yv.re) + mu.scale(yv.im);
            assert!((s - expected).norm() <= 1e-9, "({row},{col})");
        }
    }
}

#[test]
fn right_scalar_linearity() {
    let axis = QftAxis::default();
    let (a, b) = (random_image(50, 6, 7), random_image(51, 6, 7));
    let (p, q) = (Quaternion::new(0.3, -1.0, 2.0, 0.5), Quaternion::new(-0.7, 0.1, 0.0, 1.5));
    let mix = QuaternionImage::new(6, 7, a.data().iter().zip(b.data()).map(|(x, y)| *x * p + *y * q).collect()).unwrap();
    let (fa, fb) = (qft2(&a, &axis).unwrap(), qft2(&b, &axis).unwrap());
    let expected = QuaternionImage::new(6, 7, fa.data().iter().zip(fb.data()).map(|(x, y)| *x * p + *y * q).collect()).unwrap();
    assert!(max_diff(&qft2(&mix, &axis).unwrap(), &expected) <= 1e-9);
}

#[test]
fn saliency_energy_identity() {
    let img = random_image(60, 32, 32);
    let raw = qft_saliency_raw(&img, &QftAxis::default()).unwrap();
    let total: f64 = raw.map.data().iter().sum();
    let expected = raw.kept_bins as f64 / (32.0 * 32.0);
    assert!((total - expected).abs() <= 1e-10 * expected.max(1.0), "{total} vs {expected}");
    assert!(raw.map.data().iter().all(|&v| v >= 0.0));
}

#[test]
fn channel_sum_equals_separate_maps() {
    let img = random_image(70, 12, 10);
    let summed = channel_sum_saliency(&img, SmoothSpec::NONE).unwrap();
    let mut expected = vec![0.0; 120];
    for ch in img.channels() {
        let (z, _) = naive_phase_saliency(&ch);
        for (e, v) in expected.iter_mut().zip(z) {
            *e += v;
        }
    }
    let err = summed.data().iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12, "{err}");

    let smooth = SmoothSpec::new(2.0, 0.0).unwrap();
    let smoothed = channel_sum_saliency(&img, smooth).unwrap();
    let mut direct = vec![0.0; 120];
    for ch in img.channels() {
        for (e, v) in direct.iter_mut().zip(phase_saliency(&ch, smooth).unwrap().data()) {
            *e += v;
        }
    }
    let err = smoothed.data().iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-12, "{err}");
}

fn map(seed: u64, dims: Dims) -> SaliencyMap {
    let mut g = rng(seed);
    SaliencyMap::new(Volume::new(dims, (0..dims.len()).map(|_| g.random_range(0.0..1.0)).collect()).unwrap()).unwrap()
}

#[test]
fn correlation_properties() {
    let d = Dims::new(64, 64, 1);
    let (a, b) = (map(80, d), map(81, d));
    let ab = cross_correlation(&a, &b).unwrap();
    assert!((ab - cross_correlation(&b, &a).unwrap()).abs() <= 1e-15);
    assert!(ab.abs() <= 0.1, "{ab}");
    let scaled = SaliencyMap::new(a.as_volume().map(|v| 3.0 * v + 2.0).unwrap()).unwrap();
    assert!((cross_correlation(&scaled, &b).unwrap() - ab).abs() <= 1e-12);
    assert!((cross_correlation(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
    let flat = SaliencyMap::new(Volume::filled(d, 0.5).unwrap()).unwrap();
    assert!(cross_correlation(&a, &flat).is_err());
    assert!(cross_correlation(&a, &map(82, Dims::new(8, 8, 1))).is_err());
}

#[test]
fn experiment_is_seeded_and_sized() {
    let cfg = ComparisonConfig { trials: 6, min_size: 8, max_size: 24, sigma: 2.0, seed: 9 };
    let a = run_qft_comparison(&cfg).unwrap();
    assert_eq!(a, run_qft_comparison(&cfg).unwrap());
    assert_eq!(a.trials.len(), 6);
    for (i, t) in a.trials.iter().enumerate() {
        assert_eq!(t.trial, i);
        assert!((8..=24).contains(&t.rows) && (8..=24).contains(&t.cols));
        let img = comparison_image(&cfg, i).unwrap();
        assert_eq!((img.rows(), img.cols()), (t.rows, t.cols));
        assert!(img.data().iter().all(|q| [q.w, q.x, q.y, q.z].iter().all(|v| (0.0..1.0).contains(v))));
    }
    let other = run_qft_comparison(&ComparisonConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a, other);
    assert!(run_qft_comparison(&ComparisonConfig { min_size: 30, ..cfg }).is_err());
}
