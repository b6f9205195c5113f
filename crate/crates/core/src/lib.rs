//! Phase-spectrum spatiotemporal saliency for video volumes.

pub mod anomaly;
pub mod cli;
pub mod dft;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod qft;
pub mod saliency;
pub mod smooth;
pub mod stsp;
pub mod synth;
pub mod volume;

pub use error::{Error, Result};
pub use saliency::{SaliencyMap, SmoothSpec, WindowSpec};
pub use volume::{ComplexVolume, Dims, Volume};
