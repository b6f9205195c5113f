//! Frame-level abnormality on a crowd-like clip: many small blobs drift
//! right at one speed, and between frames 40 and 55 one blob runs left.
//! Scores frames by mean saliency and reports AUC/EER against the known
//! abnormal frames.
//!
//! ```text
//! cargo run --release --example anomaly_detection
//! ```

use spectral_saliency::anomaly::{abnormal_regions, frame_scores, DEFAULT_REGION_MULTIPLIER};
use spectral_saliency::metrics::{eer, roc_auc, ScoredSamples};
use spectral_saliency::saliency::phase_saliency;
use spectral_saliency::{Dims, SmoothSpec, Volume};

fn main() -> spectral_saliency::Result<()> {
    let dims = Dims::new(64, 96, 80);
    let abnormal = 40..56;
    let video = Volume::from_fn(dims, |r, c, t| {
        let walker = (r % 16) < 3 && ((c + 96 - t % 96) % 12) < 3;
        let runner = abnormal.contains(&t) && (30..34).contains(&r) && {
            let x = 90 - 4 * (t - 40);
            (x..x + 4).contains(&c)
        };
        if walker || runner { 1.0 } else { 0.0 }
    })?;

    let z = phase_saliency(&video, SmoothSpec::default())?;
    let scores = frame_scores(&z);
    let labels: Vec<bool> = (0..dims.frames).map(|t| abnormal.contains(&t)).collect();
    let samples = ScoredSamples::new(scores.scores().to_vec(), labels)?;
    let regions = abnormal_regions(&z, DEFAULT_REGION_MULTIPLIER)?;

    println!("frame_auc={:.4} frame_eer={:.4}", roc_auc(&samples)?, eer(&samples)?);
    println!("abnormal_voxels={} of {}", regions.count(), dims.len());
    Ok(())
}
