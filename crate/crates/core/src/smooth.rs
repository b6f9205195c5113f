//! Separable Gaussian smoothing with mirror boundaries.

use crate::error::{Error, Result};
use crate::volume::Volume;

/// Normalized 1D Gaussian taps for `sigma`, truncated at radius `⌈3σ⌉`.
///
/// `sigma == 0` yields the identity kernel `[1.0]`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid(format!(
            "gaussian sigma must be finite and >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(vec![1.0]);
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|w| *w /= total);
    Ok(taps)
}

/// Mirror-reflects an out-of-range index back into `0..len` (edge sample
/// repeated, as in `d c b a | a b c d | d c b a`).
#[inline]
pub(crate) fn reflect(index: i64, len: usize) -> usize {
    let n = len as i64;
    if n == 1 {
        return 0;
    }
    let period = 2 * n;
    let mut k = index.rem_euclid(period);
    if k >= n {
        k = period - 1 - k;
    }
    k as usize
}

/// Separable 3D Gaussian filter; `sigma_spatial` applies to rows and
/// columns, `sigma_temporal` to frames. A zero sigma skips that axis.
pub fn gaussian_smooth3(x: &Volume, sigma_spatial: f64, sigma_temporal: f64) -> Result<Volume> {
    let spatial = gaussian_kernel(sigma_spatial)?;
    let temporal = gaussian_kernel(sigma_temporal)?;
    let dims = x.dims();
    let mut data = x.data().to_vec();
    let mut scratch = vec![0.0; data.len()];

    let passes = [
        (&spatial, dims.rows * dims.frames, dims.cols, 1),
        (&spatial, dims.frames, dims.rows, dims.cols),
        (&temporal, 1, dims.frames, dims.frame_len()),
    ];
    for (kernel, outer, len, inner) in passes {
        if kernel.len() > 1 {
            convolve_axis(&data, &mut scratch, outer, len, inner, kernel);
            std::mem::swap(&mut data, &mut scratch);
        }
    }
    Ok(Volume::from_raw(dims, data))
}

/// Convolves along the middle axis of an `outer × len × inner` array.
fn convolve_axis(
    src: &[f64],
    dst: &mut [f64],
    outer: usize,
    len: usize,
    inner: usize,
    kernel: &[f64],
) {
    let radius = (kernel.len() / 2) as i64;
    let taps = kernel.len();
    // source index of every (output position, tap) pair
    let table: Vec<usize> = (0..len as i64)
        .flat_map(|k| (0..taps as i64).map(move |tap| reflect(k + tap - radius, len)))
        .collect();

    if inner == 1 {
        for (line_in, line_out) in src.chunks_exact(len).zip(dst.chunks_exact_mut(len)).take(outer) {
            for (k, out) in line_out.iter_mut().enumerate() {
                let idx = &table[k * taps..(k + 1) * taps];
                *out = kernel.iter().zip(idx).map(|(w, &i)| w * line_in[i]).sum();
            }
        }
        return;
    }
    for o in 0..outer {
        let base = o * len * inner;
        for k in 0..len {
            let out = &mut dst[base + k * inner..base + (k + 1) * inner];
            out.fill(0.0);
            for (w, &s) in kernel.iter().zip(&table[k * taps..(k + 1) * taps]) {
                let input = &src[base + s * inner..base + (s + 1) * inner];
                for (acc, v) in out.iter_mut().zip(input) {
                    *acc += w * v;
                }
            }
        }
    }
}
