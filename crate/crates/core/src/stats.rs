//! Mergeable per-statistic accumulators with an empirical-distribution sketch.
//!
//! While the pooled count stays at or below [`SKETCH_EXACT_LIMIT`] the full
//! sorted sample is kept and every moment is recomputed from it in sorted
//! order, so merging is exactly associative and commutative. Beyond that the
//! sketch is a fixed quantile grid and moments combine pairwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SKETCH_EXACT_LIMIT: u64 = 100_000;
pub const GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum Sketch {
    /// Full sample, ascending.
    Sorted(Vec<f64>),
    /// Quantiles at probabilities `i / (GRID_POINTS - 1)`.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatAccumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub min: f64,
    pub max: f64,
    pub sketch: Sketch,
}

impl Default for StatAccumulator {
    fn default() -> Self {
        Self::empty()
    }
}

fn moments_sorted(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, m2)
}

fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let h = (xs.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

fn grid_from_sorted(xs: &[f64]) -> Vec<f64> {
    (0..GRID_POINTS)
        .map(|i| quantile_sorted(xs, i as f64 / (GRID_POINTS - 1) as f64))
        .collect()
}

/// Piecewise-linear CDF through grid (or sample) points.
fn cdf_at(points: &[f64], x: f64) -> f64 {
    let m = points.len();
    if m == 0 {
        return 0.0;
    }
    if x < points[0] {
        return 0.0;
    }
    if x >= points[m - 1] {
        return 1.0;
    }
    let i = points.partition_point(|&v| v <= x);
    let (a, b) = (points[i - 1], points[i]);
    let frac = if b > a { (x - a) / (b - a) } else { 1.0 };
    ((i - 1) as f64 + frac) / (m - 1) as f64
}

impl StatAccumulator {
    pub fn empty() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            sketch: Sketch::Sorted(Vec::new()),
        }
    }

    pub fn from_sample(values: &[f64]) -> Self {
        let mut xs = values.to_vec();
        xs.sort_by(f64::total_cmp);
        Self::from_sorted(xs)
    }

    fn from_sorted(xs: Vec<f64>) -> Self {
        let count = xs.len() as u64;
        let (mean, m2) = moments_sorted(&xs);
        let min = xs.first().copied().unwrap_or(f64::INFINITY);
        let max = xs.last().copied().unwrap_or(f64::NEG_INFINITY);
        let sketch = if count > SKETCH_EXACT_LIMIT {
            Sketch::Grid(grid_from_sorted(&xs))
        } else {
            Sketch::Sorted(xs)
        };
        Self {
            count,
            mean,
            m2,
            min,
            max,
            sketch,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match &self.sketch {
            Sketch::Sorted(xs) | Sketch::Grid(xs) => quantile_sorted(xs, p),
        }
    }

    /// The raw sample, if still held.
    pub fn sample(&self) -> Option<&[f64]> {
        match &self.sketch {
            Sketch::Sorted(xs) => Some(xs),
            Sketch::Grid(_) => None,
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return self.clone();
        }
        if self.count == 0 {
            return other.clone();
        }
        if let (Sketch::Sorted(a), Sketch::Sorted(b)) = (&self.sketch, &other.sketch) {
            let mut xs = Vec::with_capacity(a.len() + b.len());
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                if a[i].total_cmp(&b[j]).is_le() {
                    xs.push(a[i]);
                    i += 1;
                } else {
                    xs.push(b[j]);
                    j += 1;
                }
            }
            xs.extend_from_slice(&a[i..]);
            xs.extend_from_slice(&b[j..]);
            return Self::from_sorted(xs);
        }
        // canonical operand order keeps the pairwise update commutative
        let (a, b) = if (self.count, self.mean.to_bits()) <= (other.count, other.mean.to_bits()) {
            (self, other)
        } else {
            (other, self)
        };
        let n = a.count + b.count;
        let delta = b.mean - a.mean;
        let mean = a.mean + delta * b.count as f64 / n as f64;
        let m2 = a.m2 + b.m2 + delta * delta * (a.count as f64 * b.count as f64) / n as f64;
        Self {
            count: n,
            mean,
            m2,
            min: a.min.min(b.min),
            max: a.max.max(b.max),
            sketch: Sketch::Grid(merge_grids(a, b)),
        }
    }
}

fn sketch_points(acc: &StatAccumulator) -> &[f64] {
    match &acc.sketch {
        Sketch::Sorted(xs) | Sketch::Grid(xs) => xs,
    }
}

/// Quantile grid of the count-weighted mixture of two sketches.
fn merge_grids(a: &StatAccumulator, b: &StatAccumulator) -> Vec<f64> {
    let (pa, pb) = (sketch_points(a), sketch_points(b));
    let (wa, wb) = (a.count as f64, b.count as f64);
    let mix = |x: f64| (wa * cdf_at(pa, x) + wb * cdf_at(pb, x)) / (wa + wb);
    let lo = a.min.min(b.min);
    let hi = a.max.max(b.max);
    (0..GRID_POINTS)
        .map(|i| {
            let p = i as f64 / (GRID_POINTS - 1) as f64;
            if p == 0.0 {
                return lo;
            }
            if p == 1.0 {
                return hi;
            }
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h {
                    break;
                }
                if mix(mid) < p {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            h
        })
        .collect()
}

/// Mean and variance of a sample with jackknife standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JackknifeReport {
    pub mean: f64,
    pub variance: f64,
    pub ratio: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_ratio: f64,
}

/// Leave-one-out jackknife for the mean, the unbiased variance and their
/// ratio `variance / mean`. Needs at least 3 values.
pub fn jackknife_mean_variance(xs: &[f64]) -> Result<JackknifeReport> {
    let n = xs.len();
    if n < 3 {
        return Err(Error::InsufficientReplications {
            have: n as u64,
            need: 3,
        });
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let m2: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let variance = m2 / (nf - 1.0);
    let ratio = if mean != 0.0 { variance / mean } else { f64::NAN };

    let mut loo_mean = Vec::with_capacity(n);
    let mut loo_var = Vec::with_capacity(n);
    let mut loo_ratio = Vec::with_capacity(n);
    for &x in xs {
        let m = (nf * mean - x) / (nf - 1.0);
        let dev = x - mean;
        let m2_i = (m2 - dev * dev * nf / (nf - 1.0)).max(0.0);
        let v = m2_i / (nf - 2.0);
        loo_mean.push(m);
        loo_var.push(v);
        loo_ratio.push(if m != 0.0 { v / m } else { f64::NAN });
    }
    let se = |vals: &[f64]| {
        let avg = vals.iter().sum::<f64>() / nf;
        ((nf - 1.0) / nf * vals.iter().map(|v| (v - avg) * (v - avg)).sum::<f64>()).sqrt()
    };
    Ok(JackknifeReport {
        mean,
        variance,
        ratio,
        se_mean: se(&loo_mean),
        se_variance: se(&loo_var),
        se_ratio: se(&loo_ratio),
    })
}
