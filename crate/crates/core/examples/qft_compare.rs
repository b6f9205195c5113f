//! Quaternion FFT saliency versus summed per-channel saliency on random
//! four-channel images.
//!
//! ```text
//! cargo run --release --example qft_compare -- [trials] [seed]
//! ```

use spectral_saliency::qft::{run_qft_comparison, ComparisonConfig};

fn main() -> spectral_saliency::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = ComparisonConfig { trials, seed, ..Default::default() };

    let report = run_qft_comparison(&cfg)?;
    report.write_csv(std::io::stdout().lock())?;
    eprintln!("{}", report.summary_line());
    Ok(())
}
