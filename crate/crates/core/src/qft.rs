//! Quaternion Fourier transform saliency on 4-channel images, and the
//! experiment comparing it with summed per-channel phase saliency.
//!
//! The transform is left-sided, `F(u, v) = Σ exp(-μ·2π(ux/M + vy/N)) q(x, y)`,
//! computed through the symplectic split `q = s1 + s2·μ₂` where `s1` and `s2`
//! live in the complex plane spanned by `1` and `μ`.

use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dft::{forward_dft3_complex, inverse_dft3};
use crate::error::{Error, Result};
use crate::saliency::{multi_channel_saliency, RawSaliency, SaliencyMap, SmoothSpec};
use crate::smooth::gaussian_smooth3;
use crate::volume::{ComplexVolume, Dims, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, k: f64) -> Self {
        Quaternion::new(self.w * k, self.x * k, self.y * k, self.z * k)
    }

    fn vector_dot(self, other: Quaternion) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// An `r × c` image with one quaternion per pixel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionImage {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuaternionImage {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("image dims must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|q| !q.is_finite()) {
            return Err(Error::invalid("quaternion components must be finite"));
        }
        Ok(QuaternionImage { rows, cols, data })
    }

    /// Packs four equally sized `r × c × 1` channels as `q0 + q1 i + q2 j + q3 k`.
    pub fn from_channels(channels: &[Volume; 4]) -> Result<Self> {
        let dims = channels[0].dims();
        if dims.frames != 1 {
            return Err(Error::invalid(format!("channels must have one frame, got {}", dims.frames)));
        }
        for c in &channels[1..] {
            dims.ensure_same(c.dims())?;
        }
        let [a, b, c, d] = channels.each_ref().map(|v| v.data());
        let data = (0..dims.len()).map(|p| Quaternion::new(a[p], b[p], c[p], d[p])).collect();
        QuaternionImage::new(dims.rows, dims.cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.rows, self.cols, 1)
    }

    pub fn data(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Quaternion {
        self.data[row * self.cols + col]
    }

    /// The four components as single-frame volumes.
    pub fn channels(&self) -> [Volume; 4] {
        let ch = |f: fn(&Quaternion) -> f64| Volume::from_raw(self.dims(), self.data.iter().map(f).collect());
        [ch(|q| q.w), ch(|q| q.x), ch(|q| q.y), ch(|q| q.z)]
    }
}

/// Transform axis `μ` with the orthonormal frame used for the symplectic split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QftAxis {
    mu: Quaternion,
    mu2: Quaternion,
    mu3: Quaternion,
}

impl QftAxis {
    /// Accepts any pure unit quaternion.
    pub fn new(mu: Quaternion) -> Result<Self> {
        if !mu.is_finite() || mu.w.abs() > 1e-12 {
            return Err(Error::invalid("transform axis must be a pure quaternion"));
        }
        if (mu.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("transform axis must have unit norm, got {}", mu.norm())));
        }
        let mu = Quaternion::pure(mu.x, mu.y, mu.z);
        // Gram-Schmidt from the basis vector least aligned with mu
        let basis = [Quaternion::pure(1.0, 0.0, 0.0), Quaternion::pure(0.0, 1.0, 0.0), Quaternion::pure(0.0, 0.0, 1.0)];
        let e = basis
            .into_iter()
            .min_by(|a, b| a.vector_dot(mu).abs().total_cmp(&b.vector_dot(mu).abs()))
            .unwrap();
        let v = e - mu.scale(e.vector_dot(mu));
        let mu2 = v.scale(1.0 / v.norm());
        let m = mu * mu2;
        let mu3 = Quaternion::pure(m.x, m.y, m.z);
        Ok(QftAxis { mu, mu2, mu3 })
    }

    pub fn mu(&self) -> Quaternion {
        self.mu
    }

    fn split(&self, q: Quaternion) -> (Complex64, Complex64) {
        (
            Complex64::new(q.w, q.vector_dot(self.mu)),
            Complex64::new(q.vector_dot(self.mu2), q.vector_dot(self.mu3)),
        )
    }

    fn join(&self, s1: Complex64, s2: Complex64) -> Quaternion {
        Quaternion::new(s1.re, 0.0, 0.0, 0.0) + self.mu.scale(s1.im) + self.mu2.scale(s2.re) + self.mu3.scale(s2.im)
    }
}

impl Default for QftAxis {
    /// `μ = (i + j + k)/√3`.
    fn default() -> Self {
        let s = 1.0 / 3f64.sqrt();
        QftAxis::new(Quaternion::pure(s, s, s)).unwrap()
    }
}

fn transform(img: &QuaternionImage, axis: &QftAxis, inverse: bool) -> Result<QuaternionImage> {
    let dims = img.dims();
    let (s1, s2): (Vec<_>, Vec<_>) = img.data.iter().map(|&q| axis.split(q)).unzip();
    let run = |s: Vec<Complex64>| {
        let v = ComplexVolume::new(dims, s)?;
        if inverse {
            inverse_dft3(&v)
        } else {
            forward_dft3_complex(&v)
        }
    };
    let (f1, f2) = (run(s1)?, run(s2)?);
    let data = f1.data().iter().zip(f2.data()).map(|(&a, &b)| axis.join(a, b)).collect();
    Ok(QuaternionImage { rows: img.rows, cols: img.cols, data })
}

/// Left-sided 2D quaternion Fourier transform (unnormalized).
pub fn qft2(img: &QuaternionImage, axis: &QftAxis) -> Result<QuaternionImage> {
    transform(img, axis, false)
}

/// Inverse of [`qft2`], carrying the `1/(rc)` factor.
pub fn iqft2(spec: &QuaternionImage, axis: &QftAxis) -> Result<QuaternionImage> {
    transform(spec, axis, true)
}

/// `|QFT⁻¹(Q/|Q|)|²` without smoothing, with the count of kept bins.
pub fn qft_saliency_raw(img: &QuaternionImage, axis: &QftAxis) -> Result<RawSaliency> {
    let mut spec = qft2(img, axis)?;
    let max = spec.data.iter().map(|q| q.norm()).fold(0.0, f64::max);
    let eps = 1e-12 * max.max(1.0);
    let mut kept_bins = 0;
    for q in &mut spec.data {
        let m = q.norm();
        if m > eps {
            *q = q.scale(1.0 / m);
            kept_bins += 1;
        } else {
            *q = Quaternion::ZERO;
        }
    }
    let back = iqft2(&spec, axis)?;
    let z = Volume::from_raw(img.dims(), back.data.iter().map(|q| q.norm_sqr()).collect());
    Ok(RawSaliency { map: SaliencyMap::new(z)?, kept_bins })
}

/// Quaternion phase-only saliency followed by 2D Gaussian smoothing with
/// `smooth.sigma_spatial`.
pub fn qft_saliency(img: &QuaternionImage, axis: &QftAxis, smooth: SmoothSpec) -> Result<SaliencyMap> {
    smooth.validate()?;
    let raw = qft_saliency_raw(img, axis)?.map;
    if smooth.sigma_spatial == 0.0 {
        return Ok(raw);
    }
    SaliencyMap::new(gaussian_smooth3(raw.as_volume(), smooth.sigma_spatial, 0.0)?)
}

/// Sum of the four per-channel phase saliency maps, each smoothed first.
pub fn channel_sum_saliency(img: &QuaternionImage, smooth: SmoothSpec) -> Result<SaliencyMap> {
    let spatial = SmoothSpec::new(smooth.sigma_spatial, 0.0)?;
    multi_channel_saliency(&img.channels(), None, spatial)
}

/// Pearson correlation over all voxels.
pub fn cross_correlation(a: &SaliencyMap, b: &SaliencyMap) -> Result<f64> {
    a.dims().ensure_same(b.dims())?;
    let n = a.data().len() as f64;
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.data().iter().zip(b.data()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    for (s, m) in [(saa, ma), (sbb, mb)] {
        if (s / n).sqrt() <= 1e-12 * m.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::invalid("correlation is undefined for a zero-variance map"));
        }
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonConfig {
    pub trials: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig { trials: 100, min_size: 8, max_size: 128, sigma: 2.0, seed: 0 }
    }
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(Error::invalid(format!(
                "size range must satisfy 1 <= min <= max, got [{}, {}]",
                self.min_size, self.max_size
            )));
        }
        SmoothSpec::new(self.sigma, 0.0).map(|_| ())
    }
}

/// One trial of the comparison. Correlations are `None` when the trial is
/// degenerate and therefore skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonTrial {
    pub trial: usize,
    pub rows: usize,
    pub cols: usize,
    pub corr_raw: Option<f64>,
    pub corr_smoothed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub config: ComparisonConfig,
    pub trials: Vec<ComparisonTrial>,
}

impl ComparisonReport {
    pub fn completed(&self) -> impl Iterator<Item = &ComparisonTrial> {
        self.trials.iter().filter(|t| t.corr_raw.is_some())
    }

    pub fn skipped(&self) -> usize {
        self.trials.len() - self.completed().count()
    }

    /// Mean raw correlation over completed trials.
    pub fn mean_raw(&self) -> Option<f64> {
        mean(self.completed().filter_map(|t| t.corr_raw))
    }

    pub fn mean_smoothed(&self) -> Option<f64> {
        mean(self.completed().filter_map(|t| t.corr_smoothed))
    }

    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |v| format!("{v:.6}"));
        format!(
            "trials={} skipped={} sigma={} mean_corr_raw={} mean_corr_smoothed={}",
            self.trials.len(),
            self.skipped(),
            self.config.sigma,
            fmt(self.mean_raw()),
            fmt(self.mean_smoothed())
        )
    }

    /// `trial,r,c,corr_raw,corr_smoothed`; skipped trials leave both
    /// correlation fields empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "r", "c", "corr_raw", "corr_smoothed"])?;
        let fmt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for t in &self.trials {
            w.write_record([
                t.trial.to_string(),
                t.rows.to_string(),
                t.cols.to_string(),
                fmt(t.corr_raw),
                fmt(t.corr_smoothed),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<comparison csv>", e))?;
        Ok(())
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Uniform `[0, 1)` four-channel image of a random size for trial `trial`.
/// Each trial draws from its own ChaCha stream, so results do not depend on
/// scheduling.
pub fn comparison_image(cfg: &ComparisonConfig, trial: usize) -> Result<QuaternionImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let rows = rng.random_range(cfg.min_size..=cfg.max_size);
    let cols = rng.random_range(cfg.min_size..=cfg.max_size);
    let data = (0..rows * cols)
        .map(|_| Quaternion::new(rng.random(), rng.random(), rng.random(), rng.random()))
        .collect();
    QuaternionImage::new(rows, cols, data)
}

fn run_one(cfg: &ComparisonConfig, trial: usize) -> Result<ComparisonTrial> {
    let img = comparison_image(cfg, trial)?;
    let axis = QftAxis::default();
    let smooth = SmoothSpec::new(cfg.sigma, 0.0)?;
    let raw = (
        qft_saliency(&img, &axis, SmoothSpec::NONE)?,
        channel_sum_saliency(&img, SmoothSpec::NONE)?,
    );
    let smoothed = (qft_saliency(&img, &axis, smooth)?, channel_sum_saliency(&img, smooth)?);
    let (corr_raw, corr_smoothed) = match (
        cross_correlation(&raw.0, &raw.1),
        cross_correlation(&smoothed.0, &smoothed.1),
    ) {
        (Ok(a), Ok(b)) => (Some(a), Some(b)),
        _ => (None, None),
    };
    Ok(ComparisonTrial { trial, rows: img.rows, cols: img.cols, corr_raw, corr_smoothed })
}

/// Random four-channel images compared under QFT saliency and summed
/// per-channel saliency, before and after smoothing.
pub fn run_qft_comparison(cfg: &ComparisonConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_one(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { config: *cfg, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn hamilton_units() {
        let (i, j, k) = (q(0.0, 1.0, 0.0, 0.0), q(0.0, 0.0, 1.0, 0.0), q(0.0, 0.0, 0.0, 1.0));
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, -Quaternion::ONE);
    }

    #[test]
    fn axis_frame_is_orthonormal() {
        let a = QftAxis::default();
        for (u, v) in [(a.mu, a.mu2), (a.mu, a.mu3), (a.mu2, a.mu3)] {
            assert!(u.vector_dot(v).abs() < 1e-15);
        }
        for u in [a.mu, a.mu2, a.mu3] {
            assert!((u.norm() - 1.0).abs() < 1e-14 && u.w == 0.0);
        }
        assert!(QftAxis::new(q(0.0, 1.0, 1.0, 0.0)).is_err());
        assert!(QftAxis::new(q(0.5, 0.5, 0.5, 0.5)).is_err());
        assert!(QftAxis::new(q(0.0, 0.0, 0.0, 1.0)).is_ok());
    }

    #[test]
    fn split_join_round_trip() {
        let a = QftAxis::default();
        let x = q(0.3, -1.2, 2.5, 0.7);
        let (s1, s2) = a.split(x);
        assert!((a.join(s1, s2) - x).norm() < 1e-14);
    }

    #[test]
    fn single_pixel_is_identity() {
        let img = QuaternionImage::new(1, 1, vec![q(1.0, 2.0, 3.0, 4.0)]).unwrap();
        let f = qft2(&img, &QftAxis::default()).unwrap();
        assert!((f.get(0, 0) - img.get(0, 0)).norm() < 1e-14);
    }

    #[test]
    fn constant_image_gives_uniform_map() {
        let img = QuaternionImage::new(4, 6, vec![q(1.0, 0.5, 0.2, 0.1); 24]).unwrap();
        let z = qft_saliency(&img, &QftAxis::default(), SmoothSpec::NONE).unwrap();
        let first = z.data()[0];
        assert!(z.data().iter().all(|&v| (v - first).abs() < 1e-15));
    }

    #[test]
    fn correlation_basics() {
        let dims = Dims::new(3, 4, 1);
        let a = SaliencyMap::new(Volume::from_fn(dims, |r, c, _| (r * 4 + c) as f64).unwrap()).unwrap();
        let b = SaliencyMap::new(Volume::from_fn(dims, |r, c, _| 20.0 - (r * 4 + c) as f64).unwrap()).unwrap();
        assert!((cross_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((cross_correlation(&a, &b).unwrap() + 1.0).abs() < 1e-12);
        let flat = SaliencyMap::new(Volume::filled(dims, 2.0).unwrap()).unwrap();
        assert!(cross_correlation(&a, &flat).is_err());
    }

    #[test]
    fn single_pixel_trial_is_skipped() {
        let cfg = ComparisonConfig { trials: 1, min_size: 1, max_size: 1, sigma: 2.0, seed: 3 };
        let report = run_qft_comparison(&cfg).unwrap();
        assert_eq!(report.skipped(), 1);
        assert_eq!(report.mean_raw(), None);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial,r,c,corr_raw,corr_smoothed\n0,1,1,,\n");
    }

    #[test]
    fn config_validation() {
        assert!(ComparisonConfig { trials: 0, ..Default::default() }.validate().is_err());
        assert!(ComparisonConfig { min_size: 9, max_size: 8, ..Default::default() }.validate().is_err());
        assert!(ComparisonConfig { sigma: -1.0, ..Default::default() }.validate().is_err());
        assert!(ComparisonConfig::default().validate().is_ok());
    }
}
