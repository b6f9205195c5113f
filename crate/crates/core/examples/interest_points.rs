//! Saliency interest points and 72-bin subblock descriptors on a short
//! synthetic velocity trial.
//!
//! ```text
//! cargo run --release --example interest_points
//! ```

use spectral_saliency::saliency::phase_saliency;
use spectral_saliency::stsp::{detect_points, extract_all, DescriptorScale, NmsConfig};
use spectral_saliency::synth::{generate_trial, MotionKind, TrialConfig};
use spectral_saliency::SmoothSpec;

fn main() -> spectral_saliency::Result<()> {
    let cfg = TrialConfig { frames: 60, ..TrialConfig::new(MotionKind::Velocity, 0.5, 2.0, 1) };
    let trial = generate_trial(&cfg)?;
    let z = phase_saliency(&trial.video, SmoothSpec::default())?;

    let nms = NmsConfig::default();
    let mut points = detect_points(&z, &nms)?;
    println!("rho={:.3e} points={}", nms.rho(&z), points.len());
    points.sort_by(|a, b| b.score.total_cmp(&a.score));
    points.truncate(5);
    let descriptors = extract_all(&trial.video, &points, &DescriptorScale::DEFAULTS);
    for d in &descriptors {
        let on_target = trial.mask.get(d.point.y, d.point.x, d.point.t);
        let head: Vec<String> = d.values[..8].iter().map(|v| format!("{v:.2}")).collect();
        println!(
            "({:>3},{:>3},{:>3}) box {:>2}x{:>2} target={on_target:<5} [{} ...]",
            d.point.x, d.point.y, d.point.t, d.scale.spatial, d.scale.temporal, head.join(" ")
        );
    }
    Ok(())
}
