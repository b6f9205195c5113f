//! Frame preprocessing: color conversion and spatial downsampling.

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume};

/// 8-bit RGB video, one `[r, g, b]` triple per voxel in volume layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbVolume {
    dims: Dims,
    data: Vec<[u8; 3]>,
}

impl RgbVolume {
    pub fn new(dims: Dims, data: Vec<[u8; 3]>) -> Result<Self> {
        dims.ensure_nonempty()?;
        if data.len() != dims.len() {
            return Err(Error::invalid(format!(
                "rgb volume {dims} needs {} pixels, got {}",
                dims.len(),
                data.len()
            )));
        }
        Ok(RgbVolume { dims, data })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[[u8; 3]] {
        &self.data
    }

    /// Splits into three real channels holding raw 0..=255 values.
    pub fn channels(&self) -> [Volume; 3] {
        let ch = |k: usize| {
            Volume::from_raw(self.dims, self.data.iter().map(|p| p[k] as f64).collect())
        };
        [ch(0), ch(1), ch(2)]
    }
}

// sRGB primaries, D65 reference white.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const WHITE_D65: [f64; 3] = [0.95047, 1.0, 1.08883];

fn srgb_to_linear(c: f64) -> f64 {
    let c = c / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// CIE L*a*b* of one sRGB pixel.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    srgb_to_lab(rgb.map(f64::from))
}

/// Like [`srgb_pixel_to_lab`] for components on a continuous 0..=255 scale,
/// such as box-averaged pixels.
pub fn srgb_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut f = [0.0; 3];
    for (k, row) in RGB_TO_XYZ.iter().enumerate() {
        let xyz = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        f[k] = lab_f(xyz / WHITE_D65[k]);
    }
    [116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])]
}

/// Converts every frame to L*a*b*, returning the `[L, a, b]` channels.
pub fn rgb_to_lab(rgb: &RgbVolume) -> [Volume; 3] {
    let n = rgb.data.len();
    let (mut l, mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for &p in &rgb.data {
        let [pl, pa, pb] = srgb_pixel_to_lab(p);
        l.push(pl);
        a.push(pa);
        b.push(pb);
    }
    [l, a, b].map(|d| Volume::from_raw(rgb.dims, d))
}

/// Converts three 0..=255 R, G, B channels to `[L, a, b]`.
pub fn lab_channels(rgb: &[Volume; 3]) -> Result<[Volume; 3]> {
    let dims = rgb[0].dims();
    dims.ensure_same(rgb[1].dims())?;
    dims.ensure_same(rgb[2].dims())?;
    let [r, g, b] = rgb.each_ref().map(|v| v.data());
    let mut out = [(); 3].map(|_| Vec::with_capacity(dims.len()));
    for p in 0..dims.len() {
        let lab = srgb_to_lab([r[p], g[p], b[p]]);
        for (ch, v) in out.iter_mut().zip(lab) {
            ch.push(v);
        }
    }
    Ok(out.map(|d| Volume::from_raw(dims, d)))
}

/// Rec. 601 luma of three 0..=255 R, G, B channels.
pub fn luma_channels(rgb: &[Volume; 3]) -> Result<Volume> {
    let dims = rgb[0].dims();
    dims.ensure_same(rgb[1].dims())?;
    dims.ensure_same(rgb[2].dims())?;
    let [r, g, b] = rgb.each_ref().map(|v| v.data());
    let data = (0..dims.len()).map(|p| 0.299 * r[p] + 0.587 * g[p] + 0.114 * b[p]).collect();
    Ok(Volume::from_raw(dims, data))
}

/// Rec. 601 luma in 0..=255.
pub fn rgb_to_gray(rgb: &RgbVolume) -> Volume {
    let data = rgb
        .data
        .iter()
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect();
    Volume::from_raw(rgb.dims, data)
}

/// Box-averages `factor × factor` blocks in every frame. Rows and columns
/// beyond the largest multiple of `factor` are dropped.
pub fn downsample_spatial(x: &Volume, factor: usize) -> Result<Volume> {
    if factor == 0 {
        return Err(Error::invalid("downsample factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(x.clone());
    }
    let d = x.dims();
    let (rows, cols) = (d.rows / factor, d.cols / factor);
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "downsample factor {factor} is larger than the {}x{} frame",
            d.rows, d.cols
        )));
    }
    let out_dims = Dims::new(rows, cols, d.frames);
    let norm = 1.0 / (factor * factor) as f64;
    let mut data = Vec::with_capacity(out_dims.len());
    for t in 0..d.frames {
        for r in 0..rows {
            for c in 0..cols {
                let mut sum = 0.0;
                for dr in 0..factor {
                    for dc in 0..factor {
                        sum += x.get(r * factor + dr, c * factor + dc, t);
                    }
                }
                data.push(sum * norm);
            }
        }
    }
    Ok(Volume::from_raw(out_dims, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lab_reference_colors() {
        let white = srgb_pixel_to_lab([255, 255, 255]);
        assert!((white[0] - 100.0).abs() < 1e-3);
        assert!(white[1].abs() <= 0.01 && white[2].abs() <= 0.01);
        assert_eq!(srgb_pixel_to_lab([0, 0, 0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn lab_of_volume_splits_channels() {
        let rgb = RgbVolume::new(Dims::new(1, 2, 1), vec![[255, 255, 255], [0, 0, 0]]).unwrap();
        let [l, a, _] = rgb_to_lab(&rgb);
        assert!((l.data()[0] - 100.0).abs() < 1e-3);
        assert_eq!(l.data()[1], 0.0);
        assert!(a.data()[0].abs() < 0.01);
        assert!(RgbVolume::new(Dims::new(1, 2, 1), vec![[0; 3]]).is_err());
    }

    #[test]
    fn float_channels_match_pixel_conversion() {
        let rgb = RgbVolume::new(Dims::new(1, 3, 1), vec![[255, 0, 0], [12, 200, 99], [0, 0, 0]]).unwrap();
        let lab = rgb_to_lab(&rgb);
        let from_float = lab_channels(&rgb.channels()).unwrap();
        assert_eq!(lab, from_float);
        assert_eq!(luma_channels(&rgb.channels()).unwrap(), rgb_to_gray(&rgb));
    }

    #[test]
    fn gray_weights_sum_to_one() {
        let rgb = RgbVolume::new(Dims::new(1, 1, 1), vec![[200, 200, 200]]).unwrap();
        assert!((rgb_to_gray(&rgb).data()[0] - 200.0).abs() < 1e-9);
    }

    #[test]
    fn downsample_block_means() {
        let x = Volume::new(Dims::new(4, 4, 1), (0..16).map(|v| v as f64).collect()).unwrap();
        let y = downsample_spatial(&x, 2).unwrap();
        assert_eq!(y.dims(), Dims::new(2, 2, 1));
        assert_eq!(y.data(), &[2.5, 4.5, 10.5, 12.5]);
        assert_eq!(downsample_spatial(&x, 1).unwrap(), x);
        assert!(downsample_spatial(&x, 0).is_err());
        assert!(downsample_spatial(&x, 5).is_err());
    }

    #[test]
    fn downsample_truncates_ragged_edges() {
        let x = Volume::filled(Dims::new(5, 7, 2), 8.0).unwrap();
        let y = downsample_spatial(&x, 2).unwrap();
        assert_eq!(y.dims(), Dims::new(2, 3, 2));
        assert!(y.data().iter().all(|&v| v == 8.0));
    }
}
