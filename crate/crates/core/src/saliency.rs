//! Phase-only spectral saliency for video volumes.
//!
//! The saliency of a volume `X` is `|F⁻¹(Y / |Y|)|²` with `Y = F(X)`,
//! followed by a 3D Gaussian blur. Flat, repetitive structure concentrates
//! spectral energy in a few bands; discarding magnitude suppresses those
//! bands relative to the rest, so whatever behaves differently from its
//! surroundings in space *and* time stands out.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dft::{forward_dft3, inverse_in_place};
use crate::error::{Error, Result};
use crate::smooth::gaussian_smooth3;
use crate::volume::{ComplexVolume, Dims, Volume};

/// Nonnegative saliency values over a volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap(Volume);

impl SaliencyMap {
    /// Wraps a volume, rejecting negative values.
    pub fn new(values: Volume) -> Result<Self> {
        if values.data().iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("saliency values must be nonnegative"));
        }
        Ok(SaliencyMap(values))
    }

    pub fn dims(&self) -> Dims {
        self.0.dims()
    }

    pub fn as_volume(&self) -> &Volume {
        &self.0
    }

    pub fn into_volume(self) -> Volume {
        self.0
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn get(&self, row: usize, col: usize, frame: usize) -> f64 {
        self.0.get(row, col, frame)
    }

    pub fn mean(&self) -> f64 {
        self.0.mean()
    }
}

/// Gaussian blur applied to each saliency map; zero sigmas disable an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothSpec {
    pub sigma_spatial: f64,
    pub sigma_temporal: f64,
}

impl SmoothSpec {
    pub const NONE: SmoothSpec = SmoothSpec {
        sigma_spatial: 0.0,
        sigma_temporal: 0.0,
    };

    pub fn new(sigma_spatial: f64, sigma_temporal: f64) -> Result<Self> {
        let spec = SmoothSpec {
            sigma_spatial,
            sigma_temporal,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("spatial", self.sigma_spatial),
            ("temporal", self.sigma_temporal),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} smoothing sigma must be >= 0, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_none(&self) -> bool {
        self.sigma_spatial == 0.0 && self.sigma_temporal == 0.0
    }
}

impl Default for SmoothSpec {
    fn default() -> Self {
        SmoothSpec {
            sigma_spatial: 3.0,
            sigma_temporal: 1.5,
        }
    }
}

/// Rectangular temporal window slid along the frame axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub hop: usize,
}

impl WindowSpec {
    /// Non-overlapping tiling (`hop == length`).
    pub fn tiling(length: usize) -> Self {
        WindowSpec {
            length,
            hop: length,
        }
    }

    pub fn validate(&self, frames: usize) -> Result<()> {
        if self.length == 0 || self.hop == 0 || self.hop > self.length {
            return Err(Error::invalid(format!(
                "window needs 1 <= hop <= length, got length {} hop {}",
                self.length, self.hop
            )));
        }
        if self.length > frames {
            return Err(Error::invalid(format!(
                "window length {} exceeds the {frames} available frames; \
                 use full-span saliency (no window) for short clips",
                self.length
            )));
        }
        Ok(())
    }

    /// Start frames of every placement. The last one is clamped so the
    /// final frames are always covered.
    pub fn placements(&self, frames: usize) -> Result<Vec<usize>> {
        self.validate(frames)?;
        let last = frames - self.length;
        let mut starts: Vec<usize> = (0..=last).step_by(self.hop).collect();
        if starts.last() != Some(&last) {
            starts.push(last);
        }
        Ok(starts)
    }
}

/// Default threshold below which a spectral bin counts as zero.
pub fn default_eps(y: &ComplexVolume) -> f64 {
    1e-12 * y.max_norm().max(1.0)
}

/// Projects every bin onto the unit circle; bins with `|Y| <= eps` become 0.
pub fn phase_normalize(y: &ComplexVolume, eps: f64) -> Result<ComplexVolume> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    let mut out = y.clone();
    phase_normalize_in_place(out.data_mut(), eps);
    Ok(out)
}

/// Returns the number of bins kept.
fn phase_normalize_in_place(bins: &mut [Complex64], eps: f64) -> usize {
    let mut kept = 0;
    for z in bins.iter_mut() {
        let m = z.norm();
        if m > eps {
            *z /= m;
            kept += 1;
        } else {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    kept
}

/// Unsmoothed phase-only saliency together with the number of spectral
/// bins that survived the zero-magnitude guard.
#[derive(Debug, Clone)]
pub struct RawSaliency {
    pub map: SaliencyMap,
    pub kept_bins: usize,
}

/// `|F⁻¹(Y/|Y|)|²` without smoothing.
pub fn phase_saliency_raw(x: &Volume) -> Result<RawSaliency> {
    let mut y = forward_dft3(x)?;
    let eps = default_eps(&y);
    let kept_bins = phase_normalize_in_place(y.data_mut(), eps);
    inverse_in_place(&mut y);
    Ok(RawSaliency {
        map: SaliencyMap(y.norm_sqr()),
        kept_bins,
    })
}

/// Phase-only saliency of the whole volume, then Gaussian smoothing.
pub fn phase_saliency(x: &Volume, smooth: SmoothSpec) -> Result<SaliencyMap> {
    smooth.validate()?;
    let raw = phase_saliency_raw(x)?.map;
    if smooth.is_none() {
        return Ok(raw);
    }
    let z = gaussian_smooth3(raw.as_volume(), smooth.sigma_spatial, smooth.sigma_temporal)?;
    Ok(SaliencyMap(z))
}

/// Short-time variant: saliency is computed per temporal window and the
/// overlapping results are averaged by coverage count.
pub fn windowed_saliency(x: &Volume, win: WindowSpec, smooth: SmoothSpec) -> Result<SaliencyMap> {
    smooth.validate()?;
    let dims = x.dims();
    let starts = win.placements(dims.frames)?;
    let frame_len = dims.frame_len();

    let per_window: Vec<SaliencyMap> = starts
        .par_iter()
        .map(|&s| phase_saliency(&x.frames(s, win.length)?, smooth))
        .collect::<Result<_>>()?;

    let mut acc = vec![0.0; dims.len()];
    let mut coverage = vec![0u32; dims.frames];
    for (&s, z) in starts.iter().zip(&per_window) {
        let dst = &mut acc[s * frame_len..(s + win.length) * frame_len];
        for (a, v) in dst.iter_mut().zip(z.data()) {
            *a += v;
        }
        for c in &mut coverage[s..s + win.length] {
            *c += 1;
        }
    }
    for (t, &c) in coverage.iter().enumerate() {
        let c = c as f64;
        for a in &mut acc[t * frame_len..(t + 1) * frame_len] {
            *a /= c;
        }
    }
    Ok(SaliencyMap(Volume::from_raw(dims, acc)))
}

/// Saliency of one channel, windowed when `win` is given.
pub fn channel_saliency(x: &Volume, win: Option<WindowSpec>, smooth: SmoothSpec) -> Result<SaliencyMap> {
    match win {
        Some(w) => windowed_saliency(x, w, smooth),
        None => phase_saliency(x, smooth),
    }
}

/// Per-channel saliency summed voxelwise.
pub fn multi_channel_saliency(
    channels: &[Volume],
    win: Option<WindowSpec>,
    smooth: SmoothSpec,
) -> Result<SaliencyMap> {
    weighted_channel_saliency(channels, None, win, smooth)
}

/// Like [`multi_channel_saliency`] with a nonnegative weight per channel.
pub fn weighted_channel_saliency(
    channels: &[Volume],
    weights: Option<&[f64]>,
    win: Option<WindowSpec>,
    smooth: SmoothSpec,
) -> Result<SaliencyMap> {
    let first = channels
        .first()
        .ok_or_else(|| Error::invalid("at least one channel is required"))?;
    let dims = first.dims();
    for c in &channels[1..] {
        dims.ensure_same(c.dims())?;
    }
    if let Some(w) = weights {
        if w.len() != channels.len() {
            return Err(Error::invalid(format!(
                "{} weights given for {} channels",
                w.len(),
                channels.len()
            )));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("channel weights must be finite and >= 0"));
        }
    }

    let maps: Vec<SaliencyMap> = channels
        .par_iter()
        .map(|c| channel_saliency(c, win, smooth))
        .collect::<Result<_>>()?;

    if maps.len() == 1 && weights.is_none() {
        return Ok(maps.into_iter().next().unwrap());
    }
    // fixed-order reduction keeps the sum independent of scheduling
    let mut acc = vec![0.0; dims.len()];
    for (k, m) in maps.iter().enumerate() {
        let w = weights.map_or(1.0, |w| w[k]);
        for (a, v) in acc.iter_mut().zip(m.data()) {
            *a += w * v;
        }
    }
    Ok(SaliencyMap(Volume::from_raw(dims, acc)))
}
