//! Threshold-sweep classification metrics: ROC, AUC, F-measure and EER.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores paired with binary ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSamples {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredSamples {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("scores must be finite"));
        }
        Ok(ScoredSamples { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (pos, self.labels.len() - pos)
    }

    fn ensure_both_classes(&self) -> Result<(usize, usize)> {
        let (pos, neg) = self.class_counts();
        if pos == 0 || neg == 0 {
            return Err(Error::invalid(format!(
                "ROC needs both classes, got {pos} positive and {neg} negative labels"
            )));
        }
        Ok((pos, neg))
    }
}

/// One operating point: samples with `score >= threshold` are predicted
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// ROC curve ordered from the highest threshold (`+inf`, the origin) down
/// to the lowest score, which always reaches `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
}

impl RocCurve {
    /// Builds a curve from explicit `(fpr, tpr)` pairs; thresholds are
    /// left undefined (NaN).
    pub fn from_rates(rates: &[(f64, f64)]) -> Result<Self> {
        if rates.len() < 2 {
            return Err(Error::invalid("a ROC curve needs at least two points"));
        }
        for w in rates.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(Error::invalid("ROC rates must be non-decreasing"));
            }
        }
        Ok(RocCurve {
            points: rates
                .iter()
                .map(|&(fpr, tpr)| RocPoint {
                    threshold: f64::NAN,
                    tpr,
                    fpr,
                })
                .collect(),
        })
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }
}

/// Sweeps every distinct score as a threshold, highest first. Tied scores
/// share one point.
pub fn roc(samples: &ScoredSamples) -> Result<RocCurve> {
    let (pos, neg) = samples.ensure_both_classes()?;
    let mut order: Vec<(f64, bool)> = samples
        .scores
        .iter()
        .copied()
        .zip(samples.labels.iter().copied())
        .collect();
    order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));

    let (pos, neg) = (pos as f64, neg as f64);
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        tpr: 0.0,
        fpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let threshold = order[k].0;
        while k < order.len() && order[k].0 == threshold {
            if order[k].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(RocPoint {
            threshold,
            tpr: tp as f64 / pos,
            fpr: fp as f64 / neg,
        });
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

/// Shorthand for `auc(&roc(samples)?)`.
pub fn roc_auc(samples: &ScoredSamples) -> Result<f64> {
    Ok(auc(&roc(samples)?))
}

/// AUC as the probability that a random positive outscores a random
/// negative, ties counting one half (the Mann-Whitney statistic). Equals
/// [`roc_auc`] up to rounding but only sorts the smaller class, which
/// matters for voxel-level evaluation with a small target.
pub fn rank_auc(samples: &ScoredSamples) -> Result<f64> {
    let (pos, neg) = samples.ensure_both_classes()?;
    let small_is_pos = pos <= neg;
    let mut small: Vec<u64> = samples
        .scores
        .iter()
        .zip(&samples.labels)
        .filter(|(_, &l)| l == small_is_pos)
        .map(|(&s, _)| order_key(s))
        .collect();
    small.sort_unstable();

    // twice the U statistic, so ties stay integral
    let mut twice_u: u64 = 0;
    for (&s, &l) in samples.scores.iter().zip(&samples.labels) {
        if l == small_is_pos {
            continue;
        }
        let key = order_key(s);
        let below = small.partition_point(|&v| v < key);
        let ties = small[below..].iter().take_while(|&&v| v == key).count();
        let wins = if small_is_pos {
            // positives strictly above this negative
            small.len() - below - ties
        } else {
            // negatives strictly below this positive
            below
        };
        twice_u += (2 * wins + ties) as u64;
    }
    Ok(twice_u as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Maps a finite float to an integer with the same ordering; `-0.0` and
/// `0.0` share a key.
fn order_key(v: f64) -> u64 {
    let bits = (v + 0.0).to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// Which harmonic mean [`f_measure`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FMeasureMode {
    /// F1: harmonic mean of precision and recall.
    #[default]
    Standard,
    /// Harmonic mean of true positive rate and false positive rate.
    TprFpr,
}

/// F-measure with `score >= threshold` predicted positive. Returns 0 when
/// the measure is undefined.
pub fn f_measure(samples: &ScoredSamples, threshold: f64, mode: FMeasureMode) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&s, &l) in samples.scores.iter().zip(&samples.labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    let (pos, neg) = samples.class_counts();
    match mode {
        FMeasureMode::Standard => f1_from_counts(tp, fp, fneg),
        FMeasureMode::TprFpr => {
            let tpr = if pos == 0 { 0.0 } else { tp as f64 / pos as f64 };
            let fpr = if neg == 0 { 0.0 } else { fp as f64 / neg as f64 };
            harmonic(tpr, fpr)
        }
    }
}

/// F1 from confusion counts; 0 when nothing is predicted positive.
pub fn f1_from_counts(tp: usize, fp: usize, fneg: usize) -> f64 {
    if tp + fp == 0 || tp + fneg == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    harmonic(precision, recall)
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Highest F-measure over all sweep thresholds, as `(threshold, f)`.
pub fn best_f_measure(samples: &ScoredSamples, mode: FMeasureMode) -> Result<(f64, f64)> {
    let curve = roc(samples)?;
    let (pos, neg) = samples.class_counts();
    let (pos, neg) = (pos as f64, neg as f64);
    let mut best = (f64::INFINITY, 0.0);
    for p in &curve.points[1..] {
        let f = match mode {
            FMeasureMode::Standard => {
                let tp = (p.tpr * pos).round() as usize;
                let fp = (p.fpr * neg).round() as usize;
                f1_from_counts(tp, fp, pos as usize - tp)
            }
            FMeasureMode::TprFpr => harmonic(p.tpr, p.fpr),
        };
        if f > best.1 {
            best = (p.threshold, f);
        }
    }
    Ok(best)
}

/// Equal error rate: the point on the sweep where the false positive rate
/// equals the miss rate `1 - TPR`, linearly interpolated between the two
/// sweep points that bracket the crossing.
pub fn eer(samples: &ScoredSamples) -> Result<f64> {
    Ok(eer_from_curve(&roc(samples)?))
}

pub fn eer_from_curve(curve: &RocCurve) -> f64 {
    let gap = |p: &RocPoint| p.fpr - (1.0 - p.tpr);
    for w in curve.points.windows(2) {
        let (g0, g1) = (gap(&w[0]), gap(&w[1]));
        if g0 < 0.0 && g1 >= 0.0 {
            let alpha = -g0 / (g1 - g0);
            return w[0].fpr + alpha * (w[1].fpr - w[0].fpr);
        }
    }
    // only reachable when the first point already satisfies fpr >= miss
    curve.points[0].fpr
}
