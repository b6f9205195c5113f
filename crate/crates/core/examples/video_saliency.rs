//! Phase-only saliency of a small synthetic clip: a bright square that
//! moves against a static textured background. Prints the per-frame
//! location of the saliency peak.
//!
//! ```text
//! cargo run --release --example video_saliency
//! ```

use spectral_saliency::saliency::phase_saliency;
use spectral_saliency::{Dims, SmoothSpec, Volume};

fn main() -> spectral_saliency::Result<()> {
    let dims = Dims::new(64, 64, 32);
    let video = Volume::from_fn(dims, |r, c, t| {
        let texture = (((r * 13 + c * 7) % 11) as f64) / 11.0;
        let (sr, sc) = (20, 8 + t);
        let inside = (sr..sr + 6).contains(&r) && (sc..sc + 6).contains(&c);
        texture + if inside { 2.0 } else { 0.0 }
    })?;

    let z = phase_saliency(&video, SmoothSpec::default())?;
    println!("frame,peak_row,peak_col,square_center_col");
    for t in (0..dims.frames).step_by(4) {
        let frame = z.as_volume().frame(t);
        let (idx, _) = frame.iter().enumerate().fold((0, f64::MIN), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
        println!("{t},{},{},{}", idx / dims.cols, idx % dims.cols, 11 + t);
    }
    Ok(())
}
