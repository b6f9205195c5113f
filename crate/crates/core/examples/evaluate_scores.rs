//! AUC, EER and best F-measure for a `score,label` CSV (stdin or a path).
//! With no input, scores a small built-in example.
//!
//! ```text
//! cargo run --release --example evaluate_scores -- scores.csv
//! ```

use std::fs::File;

use spectral_saliency::io::read_scored_csv;
use spectral_saliency::Error;
use spectral_saliency::metrics::{auc, best_f_measure, eer_from_curve, rank_auc, roc, FMeasureMode, ScoredSamples};

fn main() -> spectral_saliency::Result<()> {
    let samples = match std::env::args().nth(1) {
        Some(path) if path == "-" => read_scored_csv(std::io::stdin().lock())?,
        Some(path) => {
            let file = File::open(&path).map_err(|source| Error::Io { path: path.into(), source })?;
            read_scored_csv(file)?
        },
        None => ScoredSamples::new(vec![0.9, 0.8, 0.7, 0.6, 0.4, 0.3, 0.2, 0.1], vec![true, true, false, true, false, true, false, false])?,
    };
    let curve = roc(&samples)?;
    println!("auc={:.4} rank_auc={:.4} eer={:.4}", auc(&curve), rank_auc(&samples)?, eer_from_curve(&curve));
    for mode in [FMeasureMode::Standard, FMeasureMode::TprFpr] {
        let (threshold, f) = best_f_measure(&samples, mode)?;
        println!("{mode:?}: best_f={f:.4} at threshold {threshold}");
    }
    Ok(())
}
