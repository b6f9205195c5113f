//! Synthetic motion-saliency trials.
//!
//! A grid of small white rectangles on black, one of which (the target)
//! differs from the others in flicker rate, motion direction or speed.
//! Each object lives in its own square region and wraps toroidally inside
//! it. Blind trials give the target the same parameter as the distractors,
//! so nothing should stand out.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{rank_auc, ScoredSamples};
use crate::saliency::{phase_saliency, SmoothSpec};
use crate::volume::{Dims, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    /// On/off blinking; the parameter is the rate in Hz.
    Flicker,
    /// Constant-speed drift; the parameter is the heading in radians
    /// (0 = +column, π/2 = +row).
    Direction,
    /// Constant-heading drift; the parameter is the speed in px/frame.
    Velocity,
}

impl MotionKind {
    pub const ALL: [MotionKind; 3] = [MotionKind::Flicker, MotionKind::Direction, MotionKind::Velocity];

    pub fn name(&self) -> &'static str {
        match self {
            MotionKind::Flicker => "flicker",
            MotionKind::Direction => "direction",
            MotionKind::Velocity => "velocity",
        }
    }
}

impl fmt::Display for MotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flicker" => Ok(MotionKind::Flicker),
            "direction" => Ok(MotionKind::Direction),
            "velocity" => Ok(MotionKind::Velocity),
            other => Err(Error::invalid(format!(
                "unknown trial kind {other:?} (expected flicker, direction or velocity)"
            ))),
        }
    }
}

/// Geometry and motion parameters of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub kind: MotionKind,
    pub distractor_param: f64,
    pub target_param: f64,
    pub seed: u64,
    /// Square frame side in pixels.
    pub frame_size: usize,
    pub frames: usize,
    pub fps: f64,
    /// Objects per grid side.
    pub grid: usize,
    pub object_rows: usize,
    pub object_cols: usize,
    /// Side of the square region each object wraps within.
    pub roam: usize,
    /// Speed of every object in direction trials, px/frame.
    pub direction_speed: f64,
    /// Heading of every object in velocity trials, radians.
    pub velocity_heading: f64,
}

impl TrialConfig {
    /// Full-size trial: 174×174 px, 400 frames at 60 fps, 6×6 objects of
    /// 5×13 px, each roaming a 29×29 region.
    pub fn new(kind: MotionKind, distractor_param: f64, target_param: f64, seed: u64) -> Self {
        TrialConfig {
            kind,
            distractor_param,
            target_param,
            seed,
            frame_size: 174,
            frames: 400,
            fps: 60.0,
            grid: 6,
            object_rows: 5,
            object_cols: 13,
            roam: 29,
            direction_speed: 1.0,
            velocity_heading: 0.0,
        }
    }

    /// Trial whose target moves exactly like the distractors.
    pub fn blind(kind: MotionKind, param: f64, seed: u64) -> Self {
        Self::new(kind, param, param, seed)
    }

    pub fn is_blind(&self) -> bool {
        self.target_param == self.distractor_param
    }

    pub fn object_count(&self) -> usize {
        self.grid * self.grid
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.frame_size, self.frame_size, self.frames)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid == 0 || self.frames == 0 || self.object_rows == 0 || self.object_cols == 0 {
            return Err(Error::invalid("trial grid, frames and object size must be positive"));
        }
        if self.object_rows > self.roam || self.object_cols > self.roam {
            return Err(Error::invalid(format!(
                "object {}x{} does not fit its {}x{} roam region",
                self.object_rows, self.object_cols, self.roam, self.roam
            )));
        }
        if self.grid * self.roam > self.frame_size {
            return Err(Error::invalid(format!(
                "{} regions of {} px do not fit a {} px frame",
                self.grid, self.roam, self.frame_size
            )));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::invalid("fps must be positive"));
        }
        for v in [
            self.distractor_param,
            self.target_param,
            self.direction_speed,
            self.velocity_heading,
        ] {
            if !v.is_finite() {
                return Err(Error::invalid("trial parameters must be finite"));
            }
        }
        if self.kind == MotionKind::Flicker && (self.distractor_param < 0.0 || self.target_param < 0.0) {
            return Err(Error::invalid("flicker rates must be >= 0"));
        }
        Ok(())
    }

    /// Top-left pixel of the roam region of grid cell `object`.
    pub fn region_origin(&self, object: usize) -> (usize, usize) {
        let margin = (self.frame_size - self.grid * self.roam) / 2;
        let (gr, gc) = (object / self.grid, object % self.grid);
        (margin + gr * self.roam, margin + gc * self.roam)
    }

    /// Offset of an object's top-left corner when centered in its region.
    pub fn centered_offset(&self) -> (usize, usize) {
        (
            (self.roam - self.object_rows) / 2,
            (self.roam - self.object_cols) / 2,
        )
    }

    /// Per-frame displacement `(rows, cols)` for an object with motion
    /// parameter `param`. Zero for flicker trials.
    pub fn velocity(&self, param: f64) -> (f64, f64) {
        let (heading, speed) = match self.kind {
            MotionKind::Flicker => return (0.0, 0.0),
            MotionKind::Direction => (param, self.direction_speed),
            MotionKind::Velocity => (self.velocity_heading, param),
        };
        let snap = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
        (snap(speed * heading.sin()), snap(speed * heading.cos()))
    }
}

/// Random quantities drawn for one object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub param: f64,
    /// Starting top-left offset inside the roam region.
    pub start: (f64, f64),
    /// Flicker phase as a fraction of one on/off cycle.
    pub phase: f64,
}

/// Fully resolved trial: the config plus every random draw.
#[derive(Debug, Clone)]
pub struct TrialLayout {
    pub config: TrialConfig,
    pub target: usize,
    pub objects: Vec<ObjectState>,
}

impl TrialLayout {
    pub fn new(cfg: &TrialConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let target = rng.random_range(0..cfg.object_count());
        let centered = cfg.centered_offset();
        let moving = cfg.kind != MotionKind::Flicker;
        let objects = (0..cfg.object_count())
            .map(|k| {
                let dr = rng.random_range(0..cfg.roam);
                let dc = rng.random_range(0..cfg.roam);
                let phase: f64 = rng.random();
                let start = if moving {
                    ((centered.0 + dr) as f64, (centered.1 + dc) as f64)
                } else {
                    (centered.0 as f64, centered.1 as f64)
                };
                ObjectState {
                    param: if k == target {
                        cfg.target_param
                    } else {
                        cfg.distractor_param
                    },
                    start,
                    phase,
                }
            })
            .collect();
        Ok(TrialLayout {
            config: cfg.clone(),
            target,
            objects,
        })
    }

    /// Top-left corner of `object` at `frame`, wrapped into its region.
    pub fn offset(&self, object: usize, frame: usize) -> (usize, usize) {
        let o = &self.objects[object];
        let (vr, vc) = self.config.velocity(o.param);
        let roam = self.config.roam as f64;
        let wrap = |p: f64| (p.floor().rem_euclid(roam)) as usize;
        (
            wrap(o.start.0 + vr * frame as f64),
            wrap(o.start.1 + vc * frame as f64),
        )
    }

    pub fn visible(&self, object: usize, frame: usize) -> bool {
        let cfg = &self.config;
        if cfg.kind != MotionKind::Flicker {
            return true;
        }
        let o = &self.objects[object];
        if o.param == 0.0 {
            return true;
        }
        let cycles = frame as f64 / cfg.fps * o.param + o.phase;
        ((2.0 * cycles).floor() as i64).rem_euclid(2) == 0
    }

    /// Calls `f(row, col)` for every frame pixel covered by `object`.
    fn for_each_pixel(&self, object: usize, frame: usize, mut f: impl FnMut(usize, usize)) {
        let cfg = &self.config;
        let (r0, c0) = cfg.region_origin(object);
        let (dr, dc) = self.offset(object, frame);
        for r in 0..cfg.object_rows {
            for c in 0..cfg.object_cols {
                f(r0 + (dr + r) % cfg.roam, c0 + (dc + c) % cfg.roam);
            }
        }
    }
}

/// Binary per-voxel target mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl GroundTruthMask {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        dims.ensure_nonempty()?;
        if bits.len() != dims.len() {
            return Err(Error::invalid(format!(
                "mask {dims} needs {} bits, got {}",
                dims.len(),
                bits.len()
            )));
        }
        Ok(GroundTruthMask { dims, bits })
    }

    /// Nonzero voxels of `v` become set bits.
    pub fn from_volume(v: &Volume) -> Self {
        GroundTruthMask {
            dims: v.dims(),
            bits: v.data().iter().map(|&x| x != 0.0).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize, frame: usize) -> bool {
        self.bits[self.dims.index(row, col, frame)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_volume(&self) -> Volume {
        Volume::from_raw(
            self.dims,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
    }
}

/// A rendered trial.
#[derive(Debug, Clone)]
pub struct Trial {
    pub layout: TrialLayout,
    pub video: Volume,
    pub mask: GroundTruthMask,
}

/// Renders a trial: white (1) objects on black (0) plus the target mask.
/// The mask marks the target's footprint in every frame, including frames
/// where a flickering target is switched off.
pub fn generate_trial(cfg: &TrialConfig) -> Result<Trial> {
    Ok(render(TrialLayout::new(cfg)?))
}

/// Renders an already resolved layout.
pub fn render(layout: TrialLayout) -> Trial {
    let cfg = &layout.config;
    let dims = cfg.dims();
    let mut video = vec![0.0; dims.len()];
    let mut mask = vec![false; dims.len()];
    for t in 0..cfg.frames {
        for k in 0..cfg.object_count() {
            if layout.visible(k, t) {
                layout.for_each_pixel(k, t, |r, c| video[dims.index(r, c, t)] = 1.0);
            }
            if k == layout.target {
                layout.for_each_pixel(k, t, |r, c| mask[dims.index(r, c, t)] = true);
            }
        }
    }
    Trial {
        layout,
        video: Volume::from_raw(dims, video),
        mask: GroundTruthMask { dims, bits: mask },
    }
}

/// Pixel-level AUC of `scores` against `mask`.
pub fn mask_auc(scores: &Volume, mask: &GroundTruthMask) -> Result<f64> {
    scores.dims().ensure_same(mask.dims())?;
    let samples = ScoredSamples::new(scores.data().to_vec(), mask.bits.clone())?;
    rank_auc(&samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub kind: MotionKind,
    pub distractor: f64,
    pub target: f64,
    pub seed: u64,
    pub auc: f64,
}

/// What to run: every kind × parameter pair × seed, on top of `base`
/// geometry.
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub kinds: Vec<MotionKind>,
    /// `(distractor, target)` parameter pairs.
    pub params: Vec<(f64, f64)>,
    pub seeds: Vec<u64>,
    pub smooth: SmoothSpec,
    pub base: TrialConfig,
}

impl BenchmarkPlan {
    pub fn new(kinds: Vec<MotionKind>, params: Vec<(f64, f64)>, seeds: Vec<u64>) -> Self {
        BenchmarkPlan {
            kinds,
            params,
            seeds,
            smooth: SmoothSpec::default(),
            base: TrialConfig::new(MotionKind::Flicker, 0.0, 0.0, 0),
        }
    }

    pub fn trial(&self, kind: MotionKind, (distractor, target): (f64, f64), seed: u64) -> TrialConfig {
        TrialConfig {
            kind,
            distractor_param: distractor,
            target_param: target,
            seed,
            ..self.base.clone()
        }
    }
}

/// Generates each trial, computes its full-span saliency and scores it
/// against the target mask. Rows come out in kind, parameter, seed order.
pub fn run_benchmark(plan: &BenchmarkPlan) -> Result<Vec<BenchmarkRow>> {
    if plan.kinds.is_empty() || plan.params.is_empty() {
        return Err(Error::invalid("benchmark needs at least one kind and one parameter pair"));
    }
    let mut rows = Vec::new();
    for &kind in &plan.kinds {
        for &params in &plan.params {
            for &seed in &plan.seeds {
                rows.push(run_trial(&plan.trial(kind, params, seed), plan.smooth)?);
            }
        }
    }
    Ok(rows)
}

/// One benchmark cell.
pub fn run_trial(cfg: &TrialConfig, smooth: SmoothSpec) -> Result<BenchmarkRow> {
    let trial = generate_trial(cfg)?;
    let z = phase_saliency(&trial.video, smooth)?;
    Ok(BenchmarkRow {
        kind: cfg.kind,
        distractor: cfg.distractor_param,
        target: cfg.target_param,
        seed: cfg.seed,
        auc: mask_auc(z.as_volume(), &trial.mask)?,
    })
}

/// Writes `kind,distractor,target,seed,auc` rows.
pub fn write_benchmark_csv<W: Write>(rows: &[BenchmarkRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "distractor", "target", "seed", "auc"])?;
    for r in rows {
        w.write_record([
            r.kind.name().to_string(),
            r.distractor.to_string(),
            r.target.to_string(),
            r.seed.to_string(),
            r.auc.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<benchmark csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: MotionKind, d: f64, t: f64, seed: u64) -> TrialConfig {
        TrialConfig {
            frame_size: 40,
            frames: 30,
            grid: 2,
            roam: 20,
            ..TrialConfig::new(kind, d, t, seed)
        }
    }

    #[test]
    fn full_size_geometry() {
        let cfg = TrialConfig::new(MotionKind::Flicker, 1.0, 4.0, 0);
        cfg.validate().unwrap();
        assert_eq!(cfg.object_count(), 36);
        assert_eq!(cfg.region_origin(0), (0, 0));
        assert_eq!(cfg.region_origin(7), (29, 29));
        assert_eq!(cfg.region_origin(35), (145, 145));
        assert_eq!(cfg.centered_offset(), (12, 8));
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut cfg = small(MotionKind::Flicker, 1.0, 2.0, 0);
        cfg.roam = 25;
        assert!(cfg.validate().is_err());
        let mut cfg = small(MotionKind::Flicker, -1.0, 2.0, 0);
        assert!(cfg.validate().is_err());
        cfg.distractor_param = 1.0;
        cfg.object_cols = 21;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("Flicker".parse::<MotionKind>().unwrap(), MotionKind::Flicker);
        assert!("spin".parse::<MotionKind>().is_err());
    }

    #[test]
    fn one_target_rectangle_per_frame() {
        let cfg = small(MotionKind::Velocity, 0.5, 2.0, 4);
        let trial = generate_trial(&cfg).unwrap();
        let per_frame = cfg.object_rows * cfg.object_cols;
        for t in 0..cfg.frames {
            let n = (0..cfg.frame_size * cfg.frame_size)
                .filter(|&p| trial.mask.bits()[t * cfg.frame_size * cfg.frame_size + p])
                .count();
            assert_eq!(n, per_frame);
        }
    }

    #[test]
    fn flicker_visibility_is_a_square_wave() {
        let cfg = TrialConfig {
            frames: 120,
            ..small(MotionKind::Flicker, 1.0, 1.0, 2)
        };
        let layout = TrialLayout::new(&cfg).unwrap();
        let on = (0..120).filter(|&t| layout.visible(0, t)).count();
        // 2 s at 1 Hz: half the frames on, up to a frame of phase jitter
        assert!((59..=61).contains(&on), "{on}");
    }

    #[test]
    fn velocity_snaps_tiny_components() {
        let cfg = TrialConfig::new(MotionKind::Direction, 0.0, std::f64::consts::FRAC_PI_2, 0);
        assert_eq!(cfg.velocity(std::f64::consts::FRAC_PI_2), (1.0, 0.0));
        assert_eq!(cfg.velocity(0.0), (0.0, 1.0));
        let cfg = TrialConfig::new(MotionKind::Velocity, 0.5, 2.0, 0);
        assert_eq!(cfg.velocity(2.0), (0.0, 2.0));
    }

    #[test]
    fn benchmark_rejects_empty_grid() {
        let plan = BenchmarkPlan::new(vec![MotionKind::Flicker], vec![], vec![1]);
        assert!(run_benchmark(&plan).is_err());
    }
}
