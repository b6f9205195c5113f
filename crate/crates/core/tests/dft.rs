mod common;

use common::{max_abs_diff, naive_dft3, random_dims, random_volume, rng};
use num_complex::Complex64;
use spectral_saliency::dft::{forward_dft3, forward_dft3_complex, inverse_dft3};
use spectral_saliency::{ComplexVolume, Dims, Volume};

fn as_complex(x: &Volume) -> Vec<Complex64> {
    x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

#[test]
fn forward_matches_triple_sum() {
    let mut g = rng(1);
    let x = random_volume(&mut g, Dims::new(4, 4, 4));
    let y = forward_dft3(&x).unwrap();
    assert!(max_abs_diff(y.data(), &naive_dft3(&as_complex(&x), x.dims(), -1.0)) <= 1e-10);
}

#[test]
fn odd_and_prime_lengths() {
    let mut g = rng(2);
    for dims in [Dims::new(3, 5, 7), Dims::new(6, 1, 5), Dims::new(1, 1, 11), Dims::new(9, 2, 3)] {
        let x = random_volume(&mut g, dims);
        let y = forward_dft3(&x).unwrap();
        assert!(max_abs_diff(y.data(), &naive_dft3(&as_complex(&x), dims, -1.0)) <= 1e-10, "{dims}");
    }
}

#[test]
fn inverse_matches_triple_sum() {
    let mut g = rng(3);
    let dims = Dims::new(5, 3, 4);
    let re = random_volume(&mut g, dims);
    let im = random_volume(&mut g, dims);
    let y: Vec<Complex64> = re.data().iter().zip(im.data()).map(|(&a, &b)| Complex64::new(a, b)).collect();
    let x = inverse_dft3(&ComplexVolume::new(dims, y.clone()).unwrap()).unwrap();
    assert!(max_abs_diff(x.data(), &naive_dft3(&y, dims, 1.0)) <= 1e-10);
}

#[test]
fn round_trip_and_parseval() {
    let mut g = rng(4);
    for _ in 0..20 {
        let dims = random_dims(&mut g, 8);
        let x = random_volume(&mut g, dims);
        let y = forward_dft3(&x).unwrap();
        let back = inverse_dft3(&y).unwrap();
        assert!(max_abs_diff(back.data(), &as_complex(&x)) <= 1e-10);

        let energy_y: f64 = y.data().iter().map(|z| z.norm_sqr()).sum();
        let energy_x: f64 = x.data().iter().map(|v| v * v).sum();
        let expected = dims.len() as f64 * energy_x;
        assert!((energy_y - expected).abs() <= 1e-8 * expected.max(1e-300));
    }
}

#[test]
fn linearity() {
    let mut g = rng(5);
    let dims = Dims::new(6, 7, 5);
    let (x1, x2) = (random_volume(&mut g, dims), random_volume(&mut g, dims));
    let (a, b) = (1.7, -0.4);
    let mix = Volume::new(dims, x1.data().iter().zip(x2.data()).map(|(p, q)| a * p + b * q).collect()).unwrap();
    let (y1, y2, ym) = (forward_dft3(&x1).unwrap(), forward_dft3(&x2).unwrap(), forward_dft3(&mix).unwrap());
    let combined: Vec<Complex64> = y1.data().iter().zip(y2.data()).map(|(p, q)| p * a + q * b).collect();
    assert!(max_abs_diff(ym.data(), &combined) <= 1e-10);
}

#[test]
fn complex_forward_agrees_with_real_forward() {
    let mut g = rng(6);
    let x = random_volume(&mut g, Dims::new(4, 6, 3));
    let a = forward_dft3(&x).unwrap();
    let b = forward_dft3_complex(&ComplexVolume::from_real(&x)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn benchmark_sized_axes_round_trip() {
    let mut g = rng(7);
    let x = random_volume(&mut g, Dims::new(174, 30, 60));
    let back = inverse_dft3(&forward_dft3(&x).unwrap()).unwrap();
    assert!(max_abs_diff(back.data(), &as_complex(&x)) <= 1e-10);
}

#[test]
fn rejects_empty_and_non_finite() {
    assert!(Volume::new(Dims::new(0, 2, 2), vec![]).is_err());
    assert!(Volume::new(Dims::new(1, 1, 1), vec![f64::INFINITY]).is_err());
    assert!(ComplexVolume::new(Dims::new(1, 1, 1), vec![Complex64::new(f64::NAN, 0.0)]).is_err());
}
