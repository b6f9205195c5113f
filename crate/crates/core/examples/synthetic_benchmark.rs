//! Synthetic motion trials: a target that flickers, drifts or moves at a
//! different speed than 35 distractors, scored by pixel-level AUC.
//!
//! ```text
//! cargo run --release --example synthetic_benchmark -- [seeds]
//! ```

use std::time::Instant;

use spectral_saliency::synth::{run_trial, MotionKind, TrialConfig};
use spectral_saliency::SmoothSpec;

fn main() -> spectral_saliency::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let conditions = [
        (MotionKind::Flicker, 1.0, 4.0),
        (MotionKind::Direction, 0.0, std::f64::consts::FRAC_PI_2),
        (MotionKind::Velocity, 0.5, 2.0),
    ];

    println!("kind,distractor,target,seed,auc,seconds");
    for (kind, distractor, target) in conditions {
        for blind in [false, true] {
            let target = if blind { distractor } else { target };
            let mut total = 0.0;
            for seed in 0..seeds {
                let start = Instant::now();
                let cfg = TrialConfig::new(kind, distractor, target, seed);
                let row = run_trial(&cfg, SmoothSpec::default())?;
                total += row.auc;
                println!(
                    "{kind},{distractor},{target},{seed},{:.4},{:.2}",
                    row.auc,
                    start.elapsed().as_secs_f64()
                );
            }
            eprintln!(
                "{kind:>9} {}: mean AUC {:.4}",
                if blind { "blind " } else { "target" },
                total / seeds as f64
            );
        }
    }
    Ok(())
}
