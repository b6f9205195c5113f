//! Spatiotemporal saliency points: thresholded local maxima of a saliency
//! volume, described by gradient-orientation histograms over a
//! subdivided box around each point.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::saliency::SaliencyMap;
use crate::volume::{Dims, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestPoint {
    /// Column.
    pub x: usize,
    /// Row.
    pub y: usize,
    /// Frame.
    pub t: usize,
    pub score: f64,
}

/// Minimum saliency a local maximum needs to be kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    Absolute(f64),
    /// Multiple of the mean saliency of the whole volume.
    MeanMultiple(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmsConfig {
    pub threshold: Threshold,
    /// Neighborhood half-extents `(x, y, t)`.
    pub radius: (usize, usize, usize),
}

impl Default for NmsConfig {
    fn default() -> Self {
        NmsConfig {
            threshold: Threshold::MeanMultiple(2.0),
            radius: (5, 5, 3),
        }
    }
}

impl NmsConfig {
    pub fn validate(&self) -> Result<()> {
        let (rx, ry, rt) = self.radius;
        if rx == 0 || ry == 0 || rt == 0 {
            return Err(Error::invalid("NMS neighborhood extents must be >= 1"));
        }
        let v = match self.threshold {
            Threshold::Absolute(v) | Threshold::MeanMultiple(v) => v,
        };
        if !v.is_finite() {
            return Err(Error::invalid("NMS threshold must be finite"));
        }
        Ok(())
    }

    /// Resolves the threshold against a concrete map.
    pub fn rho(&self, z: &SaliencyMap) -> f64 {
        match self.threshold {
            Threshold::Absolute(v) => v,
            Threshold::MeanMultiple(k) => k * z.mean(),
        }
    }
}

/// Selects voxels that reach the threshold and are at least as salient as
/// everything in their neighborhood (clipped at the borders). Among equal
/// values inside one neighborhood only the lexicographically smallest
/// `(t, y, x)` survives. Points come out in `(t, y, x)` order.
pub fn detect_points(z: &SaliencyMap, cfg: &NmsConfig) -> Result<Vec<InterestPoint>> {
    cfg.validate()?;
    let dims = z.dims();
    let rho = cfg.rho(z);
    let (rx, ry, rt) = cfg.radius;
    let data = z.data();

    // Separable running max narrows the candidates to neighborhood maxima;
    // only those need the exact tie check.
    let local_max = max_filter(data, dims, cfg.radius);
    let mut points = Vec::new();
    for (idx, (&v, &m)) in data.iter().zip(&local_max).enumerate() {
        if v < rho || v < m {
            continue;
        }
        let (y, x, t) = dims.coords(idx);
        if has_earlier_tie(data, dims, (x, y, t), (rx, ry, rt), v) {
            continue;
        }
        points.push(InterestPoint { x, y, t, score: v });
    }
    Ok(points)
}

/// True if a voxel before `(t, y, x)` in lexicographic order, inside the
/// neighborhood, holds the same value.
fn has_earlier_tie(
    data: &[f64],
    dims: Dims,
    (x, y, t): (usize, usize, usize),
    (rx, ry, rt): (usize, usize, usize),
    v: f64,
) -> bool {
    for tt in t.saturating_sub(rt)..=t {
        let y_hi = if tt == t { y } else { (y + ry).min(dims.rows - 1) };
        for yy in y.saturating_sub(ry)..=y_hi {
            let x_hi = if tt == t && yy == y {
                x
            } else {
                (x + rx).min(dims.cols - 1)
            };
            for xx in x.saturating_sub(rx)..=x_hi {
                if (tt, yy, xx) != (t, y, x) && data[dims.index(yy, xx, tt)] == v {
                    return true;
                }
            }
        }
    }
    false
}

/// Box maximum over `(2rx+1) × (2ry+1) × (2rt+1)`, clipped at borders.
fn max_filter(data: &[f64], dims: Dims, (rx, ry, rt): (usize, usize, usize)) -> Vec<f64> {
    let mut cur = data.to_vec();
    let mut next = vec![0.0; data.len()];
    let passes = [
        (dims.rows * dims.frames, dims.cols, 1, rx),
        (dims.frames, dims.rows, dims.cols, ry),
        (1, dims.frames, dims.frame_len(), rt),
    ];
    for (outer, len, inner, r) in passes {
        for o in 0..outer {
            let base = o * len * inner;
            for k in 0..len {
                let lo = k.saturating_sub(r);
                let hi = (k + r).min(len - 1);
                let out = &mut next[base + k * inner..base + (k + 1) * inner];
                out.copy_from_slice(&cur[base + lo * inner..base + (lo + 1) * inner]);
                for s in lo + 1..=hi {
                    let src = &cur[base + s * inner..base + (s + 1) * inner];
                    for (m, &v) in out.iter_mut().zip(src) {
                        if v > *m {
                            *m = v;
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Subblocks per box along x, y and t.
pub const GRID: (usize, usize, usize) = (3, 3, 2);
/// Orientation bins per subblock.
pub const BINS: usize = 4;
pub const DESCRIPTOR_LEN: usize = GRID.0 * GRID.1 * GRID.2 * BINS;

/// Box size of one descriptor scale: `spatial × spatial × temporal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorScale {
    pub spatial: usize,
    pub temporal: usize,
}

impl DescriptorScale {
    pub const fn new(spatial: usize, temporal: usize) -> Self {
        DescriptorScale { spatial, temporal }
    }

    /// The three scales used for action clips: 18×18×10, 25×25×14 and
    /// 36×36×20.
    pub const DEFAULTS: [DescriptorScale; 3] = [
        DescriptorScale::new(18, 10),
        DescriptorScale::new(25, 14),
        DescriptorScale::new(36, 20),
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub point: InterestPoint,
    pub scale: DescriptorScale,
    pub values: Vec<f64>,
}

/// Half-open ranges of a box centered on `center` with side `extent`,
/// clipped to `0..len`.
fn clipped_range(center: usize, extent: usize, len: usize) -> (usize, usize) {
    let start = center as i64 - (extent / 2) as i64;
    let end = start + extent as i64;
    (start.max(0) as usize, (end.min(len as i64)).max(0) as usize)
}

/// Subblock index of offset `k` on an axis of `len` voxels split into `n`
/// blocks; the last block absorbs the remainder.
fn block_of(k: usize, len: usize, n: usize) -> usize {
    k.checked_div(len / n).map_or(n - 1, |b| b.min(n - 1))
}

/// Quadrant of `atan2(gy, gx)`: `[-π,-π/2)`, `[-π/2,0)`, `[0,π/2)`, `[π/2,π]`.
pub fn orientation_bin(gx: f64, gy: f64) -> usize {
    let theta = gy.atan2(gx);
    use std::f64::consts::FRAC_PI_2;
    if theta < -FRAC_PI_2 {
        0
    } else if theta < 0.0 {
        1
    } else if theta < FRAC_PI_2 {
        2
    } else {
        3
    }
}

/// Finite difference along one axis of the box: central inside, one-sided
/// at the box faces.
#[inline]
fn diff(get: impl Fn(usize) -> f64, k: usize, len: usize) -> f64 {
    if k == 0 {
        get(1) - get(0)
    } else if k == len - 1 {
        get(k) - get(k - 1)
    } else {
        (get(k + 1) - get(k - 1)) / 2.0
    }
}

/// Describes the box around `p`: magnitude-weighted 4-bin histograms of
/// the spatial gradient orientation per subblock, each l1-normalized and
/// concatenated in `(t-block, y-block, x-block)` order.
///
/// Gradients are computed from the clipped box alone.
pub fn describe(x: &Volume, p: &InterestPoint, scale: DescriptorScale) -> Result<Descriptor> {
    let dims = x.dims();
    if p.x >= dims.cols || p.y >= dims.rows || p.t >= dims.frames {
        return Err(Error::invalid(format!(
            "point ({}, {}, {}) outside volume {dims}",
            p.x, p.y, p.t
        )));
    }
    let (x0, x1) = clipped_range(p.x, scale.spatial, dims.cols);
    let (y0, y1) = clipped_range(p.y, scale.spatial, dims.rows);
    let (t0, t1) = clipped_range(p.t, scale.temporal, dims.frames);
    let (nx, ny, nt) = (x1 - x0, y1 - y0, t1 - t0);
    if nx < 2 || ny < 2 || nt < 2 {
        return Err(Error::invalid(format!(
            "descriptor box {nx}x{ny}x{nt} around ({}, {}, {}) is degenerate",
            p.x, p.y, p.t
        )));
    }

    let at = |xx: usize, yy: usize, tt: usize| x.get(y0 + yy, x0 + xx, t0 + tt);
    let mut values = vec![0.0; DESCRIPTOR_LEN];
    for tt in 0..nt {
        let bt = block_of(tt, nt, GRID.2);
        for yy in 0..ny {
            let by = block_of(yy, ny, GRID.1);
            for xx in 0..nx {
                let bx = block_of(xx, nx, GRID.0);
                let gx = diff(|k| at(k, yy, tt), xx, nx);
                let gy = diff(|k| at(xx, k, tt), yy, ny);
                let gt = diff(|k| at(xx, yy, k), tt, nt);
                let mag = (gx * gx + gy * gy + gt * gt).sqrt();
                if mag == 0.0 {
                    continue;
                }
                let block = (bt * GRID.1 + by) * GRID.0 + bx;
                values[block * BINS + orientation_bin(gx, gy)] += mag;
            }
        }
    }
    for hist in values.chunks_exact_mut(BINS) {
        let total: f64 = hist.iter().sum();
        if total > 0.0 {
            hist.iter_mut().for_each(|h| *h /= total);
        }
    }
    Ok(Descriptor {
        point: *p,
        scale,
        values,
    })
}

/// Describes every point at every scale, skipping degenerate boxes. Output
/// is in point order, then scale order.
pub fn extract_all(
    source: &Volume,
    points: &[InterestPoint],
    scales: &[DescriptorScale],
) -> Vec<Descriptor> {
    points
        .iter()
        .flat_map(|p| scales.iter().map(move |&s| (p, s)))
        .filter_map(|(p, s)| describe(source, p, s).ok())
        .collect()
}

/// Writes `x,y,t,score` rows.
pub fn write_points_csv<W: Write>(points: &[InterestPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "t", "score"])?;
    for p in points {
        w.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.t.to_string(),
            p.score.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<points csv>", e))?;
    Ok(())
}

/// Writes `x,y,t,sigma,tau,d0..d71` rows.
pub fn write_descriptors_csv<W: Write>(descriptors: &[Descriptor], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["x", "y", "t", "sigma", "tau"].map(String::from).to_vec();
    header.extend((0..DESCRIPTOR_LEN).map(|k| format!("d{k}")));
    w.write_record(&header)?;
    for d in descriptors {
        let mut row = vec![
            d.point.x.to_string(),
            d.point.y.to_string(),
            d.point.t.to_string(),
            d.scale.spatial.to_string(),
            d.scale.temporal.to_string(),
        ];
        row.extend(d.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<descriptors csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(dims: Dims, f: impl FnMut(usize, usize, usize) -> f64) -> SaliencyMap {
        SaliencyMap::new(Volume::from_fn(dims, f).unwrap()).unwrap()
    }

    #[test]
    fn constant_map_has_no_points() {
        let z = map(Dims::new(8, 8, 8), |_, _, _| 1.5);
        assert!(detect_points(&z, &NmsConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn gaussian_bump_gives_one_point() {
        let z = map(Dims::new(20, 20, 12), |r, c, t| {
            let d2 = (r as f64 - 10.0).powi(2) + (c as f64 - 10.0).powi(2) + (t as f64 - 5.0).powi(2);
            (-d2 / 8.0).exp()
        });
        let pts = detect_points(&z, &NmsConfig::default()).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].x, pts[0].y, pts[0].t), (10, 10, 5));
        assert_eq!(pts[0].score, 1.0);
    }

    #[test]
    fn plateau_keeps_first_voxel() {
        let z = map(Dims::new(6, 6, 4), |r, c, t| {
            if t == 1 && r == 2 && (2..4).contains(&c) {
                5.0
            } else {
                0.0
            }
        });
        let cfg = NmsConfig {
            threshold: Threshold::Absolute(1.0),
            radius: (1, 1, 1),
        };
        let pts = detect_points(&z, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!((pts[0].x, pts[0].y, pts[0].t), (2, 2, 1));
    }

    #[test]
    fn rejects_zero_radius() {
        let z = map(Dims::new(3, 3, 3), |_, _, _| 0.0);
        let cfg = NmsConfig {
            radius: (0, 1, 1),
            ..NmsConfig::default()
        };
        assert!(detect_points(&z, &cfg).is_err());
    }

    #[test]
    fn block_assignment_puts_remainder_last() {
        let blocks: Vec<usize> = (0..10).map(|k| block_of(k, 10, 3)).collect();
        assert_eq!(blocks, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 2]);
        assert_eq!(block_of(0, 2, 3), 2);
        assert_eq!(block_of(1, 2, 3), 2);
    }

    #[test]
    fn quadrant_bins() {
        assert_eq!(orientation_bin(1.0, 0.0), 2);
        assert_eq!(orientation_bin(0.0, 1.0), 3);
        assert_eq!(orientation_bin(-1.0, 0.0), 3);
        assert_eq!(orientation_bin(-1.0, -1e-9), 0);
        assert_eq!(orientation_bin(0.0, -1.0), 1);
    }

    #[test]
    fn clipping_at_borders() {
        assert_eq!(clipped_range(0, 18, 100), (0, 9));
        assert_eq!(clipped_range(50, 18, 100), (41, 59));
        assert_eq!(clipped_range(99, 25, 100), (87, 100));
    }

    #[test]
    fn constant_volume_gives_zero_descriptor() {
        let x = Volume::filled(Dims::new(30, 30, 20), 4.0).unwrap();
        let p = InterestPoint { x: 15, y: 15, t: 10, score: 1.0 };
        let d = describe(&x, &p, DescriptorScale::new(18, 10)).unwrap();
        assert_eq!(d.values.len(), DESCRIPTOR_LEN);
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_in_x_fills_orientation_zero_bin() {
        let x = Volume::from_fn(Dims::new(30, 30, 20), |_, c, _| c as f64 * 0.5).unwrap();
        let p = InterestPoint { x: 15, y: 15, t: 10, score: 1.0 };
        let d = describe(&x, &p, DescriptorScale::new(18, 10)).unwrap();
        for hist in d.values.chunks_exact(BINS) {
            assert_eq!(hist, &[0.0, 0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn degenerate_box_is_rejected() {
        let x = Volume::zeros(Dims::new(30, 30, 1)).unwrap();
        let p = InterestPoint { x: 15, y: 15, t: 0, score: 1.0 };
        assert!(describe(&x, &p, DescriptorScale::new(18, 10)).is_err());
        assert!(extract_all(&x, &[p], &DescriptorScale::DEFAULTS).is_empty());
        let outside = InterestPoint { x: 30, ..p };
        assert!(describe(&x, &outside, DescriptorScale::new(18, 10)).is_err());
    }

    #[test]
    fn csv_widths() {
        let x = Volume::from_fn(Dims::new(20, 20, 12), |r, c, t| (r * c + t) as f64).unwrap();
        let p = InterestPoint { x: 10, y: 10, t: 6, score: 2.0 };
        let ds = extract_all(&x, &[p], &[DescriptorScale::new(18, 10)]);
        let mut buf = Vec::new();
        write_descriptors_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 5 + DESCRIPTOR_LEN);
        }
        let mut buf = Vec::new();
        write_points_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y,t,score\n");
    }
}
