//! Training-free abnormality detection from saliency maps.
//!
//! A frame's score is its mean saliency; frames that score high are likely
//! to contain abnormal activity. Abnormal regions are voxels well above the
//! video's mean saliency.

use std::io::Write;

use crate::error::{Error, Result};
use crate::saliency::SaliencyMap;
use crate::synth::GroundTruthMask;

/// Per-frame scores, indexed by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScoreSeries(Vec<f64>);

impl FrameScoreSeries {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("frame scores must be finite"));
        }
        Ok(FrameScoreSeries(scores))
    }

    pub fn scores(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Mean saliency of each frame.
pub fn frame_scores(z: &SaliencyMap) -> FrameScoreSeries {
    let dims = z.dims();
    let n = dims.frame_len() as f64;
    let scores = (0..dims.frames)
        .map(|t| z.as_volume().frame(t).iter().sum::<f64>() / n)
        .collect();
    FrameScoreSeries(scores)
}

/// Flags frames whose score is strictly above `threshold`.
pub fn abnormal_frames(s: &FrameScoreSeries, threshold: f64) -> Result<Vec<bool>> {
    if !threshold.is_finite() {
        return Err(Error::invalid("frame threshold must be finite"));
    }
    Ok(s.0.iter().map(|&v| v > threshold).collect())
}

/// Default multiplier for [`abnormal_regions`].
pub const DEFAULT_REGION_MULTIPLIER: f64 = 4.0;

/// Flags voxels whose saliency exceeds `k` times the mean of the whole map.
pub fn abnormal_regions(z: &SaliencyMap, k: f64) -> Result<GroundTruthMask> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("region multiplier must be > 0, got {k}")));
    }
    let cut = k * z.mean();
    GroundTruthMask::new(z.dims(), z.data().iter().map(|&v| v > cut).collect())
}

/// Writes `frame,score` rows.
pub fn write_scores_csv<W: Write>(s: &FrameScoreSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "score"])?;
    for (t, v) in s.0.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<scores csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Dims, Volume};

    fn map(dims: Dims, f: impl FnMut(usize, usize, usize) -> f64) -> SaliencyMap {
        SaliencyMap::new(Volume::from_fn(dims, f).unwrap()).unwrap()
    }

    #[test]
    fn uniform_map_scores() {
        let s = frame_scores(&map(Dims::new(3, 4, 5), |_, _, _| 0.7));
        assert_eq!(s.len(), 5);
        assert!(s.scores().iter().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn single_voxel_score() {
        let z = map(Dims::new(10, 10, 8), |r, c, t| {
            if (r, c, t) == (3, 4, 5) {
                2.0
            } else {
                0.0
            }
        });
        let s = frame_scores(&z);
        for (t, &v) in s.scores().iter().enumerate() {
            assert_eq!(v, if t == 5 { 0.02 } else { 0.0 });
        }
    }

    #[test]
    fn frame_flags() {
        let s = FrameScoreSeries::new(vec![1.0, 5.0, 2.0, 8.0]).unwrap();
        assert_eq!(abnormal_frames(&s, 4.0).unwrap(), vec![false, true, false, true]);
        assert_eq!(abnormal_frames(&s, 10.0).unwrap(), vec![false; 4]);
        assert!(abnormal_frames(&s, f64::NAN).is_err());
        let rising = FrameScoreSeries::new((0..10).map(|v| v as f64).collect()).unwrap();
        let flags = abnormal_frames(&rising, 4.5).unwrap();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 5);
        assert!(flags[5..].iter().all(|&f| f));
    }

    #[test]
    fn region_rule() {
        let uniform = map(Dims::new(4, 4, 4), |_, _, _| 3.0);
        assert_eq!(abnormal_regions(&uniform, 1.5).unwrap().count(), 0);

        let dims = Dims::new(10, 10, 10);
        let spike = map(dims, |r, c, t| if (r, c, t) == (1, 2, 3) { 100.0 } else { 0.0 });
        let flagged = abnormal_regions(&spike, 4.0).unwrap();
        assert_eq!(flagged.count(), 1);
        assert!(flagged.get(1, 2, 3));
        assert!(abnormal_regions(&spike, 0.0).is_err());
    }

    #[test]
    fn scores_csv_layout() {
        let mut buf = Vec::new();
        write_scores_csv(&FrameScoreSeries::new(vec![0.5, 1.0]).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frame,score\n0,0.5\n1,1\n");
    }
}
