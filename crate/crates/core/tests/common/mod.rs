//! Helpers shared by the integration tests: seeded random data and naive
//! reference implementations.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_saliency::{Dims, Volume};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_volume(rng: &mut ChaCha8Rng, dims: Dims) -> Volume {
    let data = (0..dims.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Volume::new(dims, data).unwrap()
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: usize) -> Dims {
    Dims::new(rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max))
}

/// Direct triple sum. `sign` is -1 for the forward kernel, +1 for the
/// inverse (which also divides by MNT).
pub fn naive_dft3(x: &[Complex64], d: Dims, sign: f64) -> Vec<Complex64> {
    let (m, n, t) = (d.rows, d.cols, d.frames);
    let mut out = vec![Complex64::new(0.0, 0.0); m * n * t];
    for w in 0..t {
        for u in 0..m {
            for v in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for tt in 0..t {
                    for i in 0..m {
                        for j in 0..n {
                            let phase = 2.0
                                * std::f64::consts::PI
                                * ((u * i) as f64 / m as f64 + (v * j) as f64 / n as f64 + (w * tt) as f64 / t as f64);
                            acc += x[(tt * m + i) * n + j] * Complex64::from_polar(1.0, sign * phase);
                        }
                    }
                }
                if sign > 0.0 {
                    acc /= (m * n * t) as f64;
                }
                out[(w * m + u) * n + v] = acc;
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Phase-only saliency straight from the definition, with the naive DFT.
pub fn naive_phase_saliency(x: &Volume) -> (Vec<f64>, usize) {
    let d = x.dims();
    let input: Vec<Complex64> = x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let y = naive_dft3(&input, d, -1.0);
    let max = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eps = 1e-12 * max.max(1.0);
    let mut kept = 0;
    let unit: Vec<Complex64> = y
        .iter()
        .map(|z| {
            if z.norm() > eps {
                kept += 1;
                z / z.norm()
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    (naive_dft3(&unit, d, 1.0).iter().map(|z| z.norm_sqr()).collect(), kept)
}

/// Mirror index with the edge sample repeated: `... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...`.
pub fn mirror(i: i64, n: usize) -> usize {
    let n = n as i64;
    let period = 2 * n;
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

pub fn truncated_gaussian(sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-r..=r).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Full 3D convolution with the outer-product kernel, evaluated voxel by voxel.
pub fn naive_smooth3(x: &Volume, sigma_s: f64, sigma_t: f64) -> Vec<f64> {
    let d = x.dims();
    let ks = truncated_gaussian(sigma_s);
    let kt = truncated_gaussian(sigma_t);
    let (rs, rt) = ((ks.len() / 2) as i64, (kt.len() / 2) as i64);
    let mut out = Vec::with_capacity(d.len());
    for t in 0..d.frames {
        for r in 0..d.rows {
            for c in 0..d.cols {
                let mut acc = 0.0;
                for dt in -rt..=rt {
                    for dr in -rs..=rs {
                        for dc in -rs..=rs {
                            let w = kt[(dt + rt) as usize] * ks[(dr + rs) as usize] * ks[(dc + rs) as usize];
                            acc += w * x.get(
                                mirror(r as i64 + dr, d.rows),
                                mirror(c as i64 + dc, d.cols),
                                mirror(t as i64 + dt, d.frames),
                            );
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}
