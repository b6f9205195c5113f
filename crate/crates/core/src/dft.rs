//! Separable 3D discrete Fourier transform.
//!
//! The 3D transform is evaluated as one pass of 1D transforms per axis. Any
//! axis length is supported; the 1D kernels come from `rustfft`, which picks
//! mixed-radix, Rader or Bluestein plans as needed.
//!
//! Conventions: the forward transform is unnormalized,
//! `Y(u,v,w) = Σ X(i,j,t) exp(-2πi (ui/M + vj/N + wt/T))`, and the inverse
//! carries the full `1/(MNT)` factor.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use crate::error::Result;
use crate::volume::{ComplexVolume, Dims, Volume};

/// Forward 3D DFT of a real volume.
pub fn forward_dft3(x: &Volume) -> Result<ComplexVolume> {
    x.dims().ensure_nonempty()?;
    let mut y = ComplexVolume::from_real(x);
    transform_in_place(&mut y, FftDirection::Forward);
    Ok(y)
}

/// Forward 3D DFT of a complex volume.
pub fn forward_dft3_complex(x: &ComplexVolume) -> Result<ComplexVolume> {
    let mut y = x.clone();
    transform_in_place(&mut y, FftDirection::Forward);
    Ok(y)
}

/// Inverse 3D DFT, normalized so that `inverse_dft3(forward_dft3(x)) == x`.
pub fn inverse_dft3(y: &ComplexVolume) -> Result<ComplexVolume> {
    let mut x = y.clone();
    inverse_in_place(&mut x);
    Ok(x)
}

pub(crate) fn inverse_in_place(y: &mut ComplexVolume) {
    transform_in_place(y, FftDirection::Inverse);
    let scale = 1.0 / y.dims().len() as f64;
    y.data_mut().par_iter_mut().for_each(|z| *z *= scale);
}

/// Applies the unnormalized transform along all three axes.
pub(crate) fn transform_in_place(y: &mut ComplexVolume, direction: FftDirection) {
    let dims = y.dims();
    let mut planner = FftPlanner::<f64>::new();
    let data = y.data_mut();

    // Columns are contiguous.
    if dims.cols > 1 {
        let fft = planner.plan_fft(dims.cols, direction);
        data.par_chunks_mut(frame_batch(dims) * dims.cols)
            .for_each(|chunk| fft.process(chunk));
    }

    // Rows: transpose each frame so columns of the frame become contiguous.
    if dims.rows > 1 {
        let fft = planner.plan_fft(dims.rows, direction);
        let (rows, cols) = (dims.rows, dims.cols);
        data.par_chunks_mut(dims.frame_len()).for_each(|frame| {
            let mut scratch = vec![Complex64::default(); frame.len()];
            transpose(frame, &mut scratch, rows, cols);
            fft.process(&mut scratch);
            transpose(&scratch, frame, cols, rows);
        });
    }

    // Frames: gather a block of neighbouring pixels' time series at a time.
    if dims.frames > 1 {
        let fft = planner.plan_fft(dims.frames, direction);
        let (t, n) = (dims.frames, dims.frame_len());
        let mut series = vec![Complex64::default(); t * PIXEL_BLOCK];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for p0 in (0..n).step_by(PIXEL_BLOCK) {
            let width = PIXEL_BLOCK.min(n - p0);
            for k in 0..t {
                let row = &data[k * n + p0..k * n + p0 + width];
                for (b, z) in row.iter().enumerate() {
                    series[b * t + k] = *z;
                }
            }
            fft.process_with_scratch(&mut series[..width * t], &mut scratch);
            for k in 0..t {
                let row = &mut data[k * n + p0..k * n + p0 + width];
                for (b, z) in row.iter_mut().enumerate() {
                    *z = series[b * t + k];
                }
            }
        }
    }
}

const PIXEL_BLOCK: usize = 16;

fn frame_batch(dims: Dims) -> usize {
    (4096 / dims.cols.max(1)).max(1) * dims.rows
}

/// Blocked out-of-place transpose of a `rows × cols` row-major matrix.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 32;
    debug_assert_eq!(src.len(), rows * cols);
    debug_assert_eq!(dst.len(), rows * cols);
    for r0 in (0..rows).step_by(BLOCK) {
        for c0 in (0..cols).step_by(BLOCK) {
            for r in r0..(r0 + BLOCK).min(rows) {
                for c in c0..(c0 + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
