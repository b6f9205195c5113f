//! Dense 3D containers for video volumes and their spectra.
//!
//! Layout is row-major within a frame with frames stored contiguously, so the
//! voxel `(row, col, frame)` lives at `frame * rows * cols + row * cols + col`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Extent of a volume: `rows` (M) × `cols` (N) × `frames` (T).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
}

impl Dims {
    pub const fn new(rows: usize, cols: usize, frames: usize) -> Self {
        Dims { rows, cols, frames }
    }

    pub const fn len(&self) -> usize {
        self.rows * self.cols * self.frames
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn frame_len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub const fn index(&self, row: usize, col: usize, frame: usize) -> usize {
        (frame * self.rows + row) * self.cols + col
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub const fn coords(&self, index: usize) -> (usize, usize, usize) {
        let frame = index / self.frame_len();
        let rem = index % self.frame_len();
        (rem / self.cols, rem % self.cols, frame)
    }

    pub const fn as_tuple(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.frames)
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::invalid(format!(
                "volume dimensions must be positive, got {}x{}x{}",
                self.rows, self.cols, self.frames
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: Dims) -> Result<()> {
        if *self != other {
            return Err(Error::DimensionMismatch {
                expected: self.as_tuple(),
                got: other.as_tuple(),
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.rows, self.cols, self.frames)
    }
}

/// Real scalar field over a video volume (one channel).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    data: Vec<f64>,
}

impl Volume {
    /// Wraps `data`, checking its length and that every value is finite.
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        dims.ensure_nonempty()?;
        if data.len() != dims.len() {
            return Err(Error::invalid(format!(
                "volume {dims} needs {} values, got {}",
                dims.len(),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let (r, c, t) = dims.coords(pos);
            return Err(Error::invalid(format!(
                "non-finite value at (row {r}, col {c}, frame {t})"
            )));
        }
        Ok(Volume { dims, data })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::filled(dims, 0.0)
    }

    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        Self::new(dims, vec![value; dims.len()])
    }

    /// Builds a volume by evaluating `f(row, col, frame)` at every voxel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for t in 0..dims.frames {
            for r in 0..dims.rows {
                for c in 0..dims.cols {
                    data.push(f(r, c, t));
                }
            }
        }
        Self::new(dims, data)
    }

    /// Skips validation; callers guarantee length and finiteness.
    pub(crate) fn from_raw(dims: Dims, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.len(), data.len());
        Volume { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, frame: usize) -> f64 {
        self.data[self.dims.index(row, col, frame)]
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        let n = self.dims.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    /// Copies frames `start..start + len` into a new volume.
    pub fn frames(&self, start: usize, len: usize) -> Result<Volume> {
        if len == 0 || start + len > self.dims.frames {
            return Err(Error::invalid(format!(
                "frame range {start}..{} outside 0..{}",
                start + len,
                self.dims.frames
            )));
        }
        let n = self.dims.frame_len();
        let dims = Dims::new(self.dims.rows, self.dims.cols, len);
        Ok(Volume::from_raw(
            dims,
            self.data[start * n..(start + len) * n].to_vec(),
        ))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Returns `self * factor` voxelwise.
    pub fn scaled(&self, factor: f64) -> Result<Volume> {
        Volume::new(self.dims, self.data.iter().map(|v| v * factor).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Volume> {
        Volume::new(self.dims, self.data.iter().map(|&v| f(v)).collect())
    }
}

/// Complex field over a volume, typically a 3D spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVolume {
    dims: Dims,
    data: Vec<Complex64>,
}

impl ComplexVolume {
    pub fn new(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        dims.ensure_nonempty()?;
        if data.len() != dims.len() {
            return Err(Error::invalid(format!(
                "complex volume {dims} needs {} values, got {}",
                dims.len(),
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("non-finite complex value"));
        }
        Ok(ComplexVolume { dims, data })
    }

    /// Lifts a real volume onto the real axis.
    pub fn from_real(x: &Volume) -> Self {
        ComplexVolume {
            dims: x.dims(),
            data: x.data().iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, frame: usize) -> Complex64 {
        self.data[self.dims.index(row, col, frame)]
    }

    /// Squared modulus per voxel.
    pub fn norm_sqr(&self) -> Volume {
        Volume::from_raw(self.dims, self.data.iter().map(|z| z.norm_sqr()).collect())
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
