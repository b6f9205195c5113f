//! Video in, saliency out: downsampling, color handling and multi-channel
//! saliency in one call.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_frame_dir, read_vol1, Frames};
use crate::preprocess::{downsample_spatial, lab_channels, luma_channels};
use crate::saliency::{multi_channel_saliency, SaliencyMap, SmoothSpec, WindowSpec};
use crate::volume::{Dims, Volume};

/// A decoded video: one intensity channel, or R, G, B on a 0..=255 scale.
#[derive(Debug, Clone, PartialEq)]
pub enum Video {
    Gray(Volume),
    Rgb([Volume; 3]),
}

impl Video {
    pub fn dims(&self) -> Dims {
        match self {
            Video::Gray(v) => v.dims(),
            Video::Rgb(c) => c[0].dims(),
        }
    }

    pub fn from_frames(frames: Frames) -> Self {
        match frames {
            Frames::Gray(v) => Video::Gray(v),
            Frames::Rgb(rgb) => Video::Rgb(rgb.channels()),
        }
    }

    /// One VOL1 channel is gray; three are R, G, B and must lie in 0..=255.
    pub fn from_channels(mut channels: Vec<Volume>) -> Result<Self> {
        match channels.len() {
            1 => Ok(Video::Gray(channels.pop().unwrap())),
            3 => {
                if channels.iter().any(|c| c.min() < 0.0 || c.max() > 255.0) {
                    return Err(Error::invalid("RGB channel values must lie in 0..=255"));
                }
                let b = channels.pop().unwrap();
                let g = channels.pop().unwrap();
                let r = channels.pop().unwrap();
                r.dims().ensure_same(g.dims())?;
                r.dims().ensure_same(b.dims())?;
                Ok(Video::Rgb([r, g, b]))
            }
            n => Err(Error::invalid(format!("expected 1 (gray) or 3 (RGB) channels, got {n}"))),
        }
    }

    /// Reads a VOL1 file, or a directory of PGM/PPM frames.
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_dir() {
            Ok(Video::from_frames(read_frame_dir(path)?))
        } else {
            Video::from_channels(read_vol1(path)?)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ColorMode {
    /// Single intensity channel (Rec. 601 luma for RGB input).
    #[default]
    Gray,
    /// L*, a*, b* channels, saliency summed over them.
    LabSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub downsample: usize,
    pub color: ColorMode,
    pub window: Option<WindowSpec>,
    pub smooth: SmoothSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            downsample: 1,
            color: ColorMode::Gray,
            window: None,
            smooth: SmoothSpec::default(),
        }
    }
}

impl PipelineConfig {
    /// Checks every parameter against a video of `dims` before any work.
    pub fn validate(&self, dims: Dims) -> Result<()> {
        if self.downsample == 0 {
            return Err(Error::invalid("downsample factor must be >= 1"));
        }
        if dims.rows / self.downsample == 0 || dims.cols / self.downsample == 0 {
            return Err(Error::invalid(format!(
                "downsample factor {} is larger than the {}x{} frame",
                self.downsample, dims.rows, dims.cols
            )));
        }
        if let Some(w) = self.window {
            w.validate(dims.frames)?;
        }
        self.smooth.validate()
    }
}

/// Downsamples, then converts color, returning the channels saliency is
/// computed on.
pub fn prepare_channels(video: &Video, downsample: usize, color: ColorMode) -> Result<Vec<Volume>> {
    match video {
        Video::Gray(v) => {
            if color == ColorMode::LabSum {
                return Err(Error::invalid("lab-sum color mode needs RGB input"));
            }
            Ok(vec![downsample_spatial(v, downsample)?])
        }
        Video::Rgb(c) => {
            let [r, g, b] = c.each_ref().map(|v| downsample_spatial(v, downsample));
            let rgb = [r?, g?, b?];
            match color {
                ColorMode::Gray => Ok(vec![luma_channels(&rgb)?]),
                ColorMode::LabSum => Ok(lab_channels(&rgb)?.to_vec()),
            }
        }
    }
}

/// Saliency of a whole video under `cfg`.
pub fn video_saliency(video: &Video, cfg: &PipelineConfig) -> Result<SaliencyMap> {
    cfg.validate(video.dims())?;
    let channels = prepare_channels(video, cfg.downsample, cfg.color)?;
    multi_channel_saliency(&channels, cfg.window, cfg.smooth)
}
