//! Full-span versus short-time saliency. A square blinks on in the first
//! half and stays on in the second; with a short window the second half
//! becomes "normal" and its saliency drops.
//!
//! ```text
//! cargo run --release --example windowed_saliency -- [window]
//! ```

use spectral_saliency::anomaly::frame_scores;
use spectral_saliency::saliency::{phase_saliency, windowed_saliency};
use spectral_saliency::{Dims, SmoothSpec, Volume, WindowSpec};

fn main() -> spectral_saliency::Result<()> {
    let length: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let dims = Dims::new(48, 48, 64);
    let video = Volume::from_fn(dims, |r, c, t| {
        let on = if t < 32 { (t / 4) % 2 == 0 } else { true };
        let inside = (20..28).contains(&r) && (20..28).contains(&c);
        if inside && on { 1.0 } else { 0.1 * (((r + 3 * c) % 5) as f64) }
    })?;

    let smooth = SmoothSpec::default();
    let full = frame_scores(&phase_saliency(&video, smooth)?);
    let short = frame_scores(&windowed_saliency(&video, WindowSpec { length, hop: length / 2 }, smooth)?);
    println!("frame,full_span,window_{length}");
    for t in (0..dims.frames).step_by(4) {
        println!("{t},{:.3e},{:.3e}", full.scores()[t], short.scores()[t]);
    }
    Ok(())
}
