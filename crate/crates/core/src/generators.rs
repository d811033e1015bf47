//! Generators (minimal points) of the record-setting region.
//!
//! A generator with support `T` is the zero-padded image of an *interior*
//! generator of the records projected onto the coordinates in `T`. An
//! interior generator of `t`-dimensional records is the coordinatewise
//! minimum `g` of `t` distinct records `r^(i_1), …, r^(i_t)` such that
//! `g_j = r^(i_j)_j` is the strict minimum of coordinate `j` over the chosen
//! records, and such that `g` is not strictly below any record.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{rs_contains_coords, strictly_below, Point, RecordSet};

/// Largest dimension representable by a [`Support`] bitmask.
pub const MAX_DIM: usize = 32;

/// Support set `T ⊆ {0, …, d-1}` (0-based coordinate indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Support(u32);

impl Support {
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &j in indices {
            if j >= MAX_DIM {
                return Err(Error::InvalidArgument(format!(
                    "coordinate index {j} exceeds {MAX_DIM}"
                )));
            }
            bits |= 1 << j;
        }
        Ok(Self(bits))
    }

    pub fn from_bits(bits: u32) -> Self {
        Self(bits)
    }

    pub fn full(dim: usize) -> Self {
        Self(if dim >= 32 { u32::MAX } else { (1u32 << dim) - 1 })
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, j: usize) -> bool {
        j < MAX_DIM && self.0 & (1 << j) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..MAX_DIM).filter(|&j| self.contains(j)).collect()
    }
}

impl Ord for Support {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.indices().cmp(&other.indices()))
    }
}

impl PartialOrd for Support {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub point: Point,
    pub support: Support,
}

impl Generator {
    /// Number of nonzero coordinates, `|T|`.
    pub fn dimension(&self) -> usize {
        self.support.len()
    }
}

/// All generators at one epoch, grouped by support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSet {
    dim: usize,
    by_support: BTreeMap<Support, Vec<Generator>>,
    gamma: usize,
    counts_by_dimension: Vec<usize>,
}

impl GeneratorSet {
    fn from_points(dim: usize, points: Vec<Point>) -> Self {
        let mut by_support: BTreeMap<Support, Vec<Generator>> = BTreeMap::new();
        let mut counts_by_dimension = vec![0; dim + 1];
        for point in points {
            let support = Support::from_indices(&point.support()).expect("dim checked");
            counts_by_dimension[support.len()] += 1;
            by_support
                .entry(support)
                .or_default()
                .push(Generator { point, support });
        }
        for list in by_support.values_mut() {
            list.sort_by(|a, b| cmp_coords(a.point.coords(), b.point.coords()));
        }
        let gamma = counts_by_dimension.iter().sum();
        Self {
            dim,
            by_support,
            gamma,
            counts_by_dimension,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of generators `γ_n`.
    pub fn gamma(&self) -> usize {
        self.gamma
    }

    /// Generator counts indexed by generator dimension `0..=d`.
    pub fn counts_by_dimension(&self) -> &[usize] {
        &self.counts_by_dimension
    }

    pub fn by_support(&self) -> &BTreeMap<Support, Vec<Generator>> {
        &self.by_support
    }

    pub fn get(&self, support: Support) -> &[Generator] {
        self.by_support
            .get(&support)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Generator> {
        self.by_support.values().flatten()
    }

    /// Number of interior (full-support) generators, `ι_{d,n}`.
    pub fn interior_count(&self) -> usize {
        self.counts_by_dimension[self.dim]
    }

    /// `γ_n(b)`: generators with coordinate sum `<= b`.
    pub fn gamma_truncated(&self, b: f64) -> usize {
        self.iter().filter(|g| g.point.sum() <= b).count()
    }

    /// `(F_n⁻, τ_n)`: the smallest generator coordinate sum and the unique
    /// generator attaining it.
    pub fn trailing_summary(&self) -> Result<(f64, Point)> {
        let mut best: Option<(f64, &Generator)> = None;
        let mut tied = false;
        for g in self.iter() {
            let s = g.point.sum();
            match best {
                None => best = Some((s, g)),
                Some((b, _)) if s < b => {
                    best = Some((s, g));
                    tied = false;
                }
                Some((b, _)) if s == b => tied = true,
                _ => {}
            }
        }
        let (f_minus, g) = best.ok_or(Error::EmptyGeneratorSet)?;
        if tied {
            return Err(Error::InvalidArgument(format!(
                "trailing point is not unique: several generators have coordinate sum {f_minus}"
            )));
        }
        Ok((f_minus, g.point.clone()))
    }
}

fn cmp_coords(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Maps each record to its coordinates in `support` (0-based, ascending).
pub fn project_records(records: &[Point], support: &[usize]) -> Result<Vec<Point>> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if support.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "support indices must be strictly increasing".into(),
        ));
    }
    records
        .iter()
        .map(|r| {
            if let Some(&j) = support.iter().find(|&&j| j >= r.dim()) {
                return Err(Error::InvalidArgument(format!(
                    "coordinate index {j} out of range for dimension {}",
                    r.dim()
                )));
            }
            Ok(Point::from_coords_unchecked(
                support.iter().map(|&j| r.coords()[j]).collect(),
            ))
        })
        .collect()
}

fn check_no_ties(records: &[&[f64]], dim: usize) -> Result<()> {
    let mut column = Vec::with_capacity(records.len());
    for j in 0..dim {
        column.clear();
        column.extend(records.iter().map(|r| r[j]));
        column.sort_by(f64::total_cmp);
        if let Some(w) = column.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Tie {
                coord: j,
                value: w[0],
            });
        }
    }
    Ok(())
}

/// Interior generators of a set of `t`-dimensional points.
///
/// The input need not be pairwise incomparable: points strictly below
/// another input point cannot take part in a generating tuple and are
/// discarded first. Coordinate ties are an error.
pub fn interior_generators(records: &[Point]) -> Result<Vec<Point>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let t = first.dim();
    if let Some(r) = records.iter().find(|r| r.dim() != t) {
        return Err(Error::DimensionMismatch {
            expected: t,
            actual: r.dim(),
        });
    }
    let all: Vec<&[f64]> = records.iter().map(Point::coords).collect();
    check_no_ties(&all, t)?;
    let maxima: Vec<&[f64]> = all
        .iter()
        .copied()
        .filter(|x| !all.iter().any(|y| strictly_below(x, y)))
        .collect();
    let mut search = TupleSearch {
        recs: &maxima,
        t,
        chosen: Vec::with_capacity(t),
        used: vec![false; maxima.len()],
        upper: vec![vec![f64::INFINITY; t]],
        out: Vec::new(),
    };
    search.descend();
    let mut out = search.out;
    out.sort_by(|a, b| cmp_coords(a, b));
    Ok(out.into_iter().map(Point::from_coords_unchecked).collect())
}

/// Depth-first search over ordered tuples `(i_0, …, i_{t-1})` of distinct
/// records in which record `i_m` supplies the strict minimum of coordinate
/// `m`. A branch is cut as soon as some record is certain to lie strictly
/// above every completion of the partial minimum.
struct TupleSearch<'a> {
    recs: &'a [&'a [f64]],
    t: usize,
    chosen: Vec<usize>,
    used: Vec<bool>,
    // upper[m][j]: min over the first m chosen records of coordinate j
    upper: Vec<Vec<f64>>,
    out: Vec<Vec<f64>>,
}

impl TupleSearch<'_> {
    fn descend(&mut self) {
        let m = self.chosen.len();
        if m == self.t {
            let g: Vec<f64> = (0..self.t).map(|j| self.recs[self.chosen[j]][j]).collect();
            self.out.push(g);
            return;
        }
        for i in 0..self.recs.len() {
            if self.used[i] {
                continue;
            }
            let ri = self.recs[i];
            let compatible = self.chosen.iter().enumerate().all(|(l, &c)| {
                let rc = self.recs[c];
                ri[m] < rc[m] && ri[l] > rc[l]
            });
            if !compatible {
                continue;
            }
            let mut upper = self.upper[m].clone();
            for (u, &v) in upper.iter_mut().zip(ri) {
                *u = u.min(v);
            }
            // partial minimum: coordinates 0..=m are fixed, later ones can
            // only shrink below `upper`
            let doomed = self.recs.iter().any(|s| {
                (0..=m).all(|j| {
                    let g_j = if j == m { ri[m] } else { self.recs[self.chosen[j]][j] };
                    s[j] > g_j
                }) && (m + 1..self.t).all(|j| s[j] > upper[j])
            });
            if doomed {
                continue;
            }
            self.used[i] = true;
            self.chosen.push(i);
            self.upper.push(upper);
            self.descend();
            self.upper.pop();
            self.chosen.pop();
            self.used[i] = false;
        }
    }
}

/// All generators of the record-setting region of `rs`.
pub fn all_generators(rs: &RecordSet) -> Result<GeneratorSet> {
    generators_of(rs.dim(), rs.records())
}

/// All generators of the record-setting region determined by `records`.
///
/// With no records the region is the whole orthant and the only generator
/// is the origin.
pub fn generators_of(dim: usize, records: &[Point]) -> Result<GeneratorSet> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
    }
    if let Some(r) = records.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: r.dim(),
        });
    }
    if records.is_empty() {
        return Ok(GeneratorSet::from_points(dim, vec![Point::origin(dim)]));
    }
    let mut points = Vec::new();
    for bits in 1..=Support::full(dim).bits() {
        let support = Support::from_bits(bits).indices();
        let projected = project_records(records, &support)?;
        for g in interior_generators(&projected)? {
            let mut x = vec![0.0; dim];
            for (&j, &v) in support.iter().zip(g.coords()) {
                x[j] = v;
            }
            points.push(Point::from_coords_unchecked(x));
        }
    }
    Ok(GeneratorSet::from_points(dim, points))
}

/// Upper bound on `(ρ+1)^d` accepted by [`brute_force_generators`].
pub const BRUTE_FORCE_LIMIT: u64 = 4_000_000;

/// Reference enumeration over the candidate grid `∏_j ({0} ∪ {r_j})`.
///
/// A candidate is kept when it lies in the record-setting region and
/// stepping down by `ε` in any of its nonzero coordinates leaves the region,
/// with `ε` half the smallest positive gap among all coordinate values.
pub fn brute_force_generators(rs: &RecordSet) -> Result<GeneratorSet> {
    brute_force_generators_of(rs.dim(), rs.records())
}

pub fn brute_force_generators_of(dim: usize, records: &[Point]) -> Result<GeneratorSet> {
    let rho = records.len() as u64;
    let size = (rho + 1).checked_pow(dim as u32).unwrap_or(u64::MAX);
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge(format!(
            "{size} candidates for rho = {rho}, d = {dim}"
        )));
    }
    let recs: Vec<&[f64]> = records.iter().map(Point::coords).collect();
    let grids: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            let mut g: Vec<f64> = std::iter::once(0.0).chain(recs.iter().map(|r| r[j])).collect();
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        })
        .collect();
    let eps = {
        let mut all: Vec<f64> = grids.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let gap = all
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if gap.is_finite() { gap / 2.0 } else { 1.0 }
    };
    let in_rs = |x: &[f64]| rs_contains_coords(recs.iter().copied(), x);

    let mut found = Vec::new();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    'odometer: loop {
        for j in 0..dim {
            x[j] = grids[j][idx[j]];
        }
        if in_rs(&x) {
            let minimal = (0..dim).filter(|&j| x[j] > 0.0).all(|j| {
                let mut y = x.clone();
                y[j] -= eps;
                !in_rs(&y)
            });
            if minimal {
                found.push(Point::from_coords_unchecked(x.clone()));
            }
        }
        for j in 0..dim {
            idx[j] += 1;
            if idx[j] < grids[j].len() {
                continue 'odometer;
            }
            idx[j] = 0;
        }
        break;
    }
    Ok(GeneratorSet::from_points(dim, found))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn example() -> RecordSet {
        let mut rs = RecordSet::new(4).unwrap();
        rs.insert(&p(&[2., 8., 3., 7.])).unwrap();
        rs.insert(&p(&[5., 1., 4., 6.])).unwrap();
        rs
    }

    fn example_generators() -> Vec<Point> {
        [
            [5., 0., 0., 0.],
            [0., 8., 0., 0.],
            [0., 0., 4., 0.],
            [0., 0., 0., 7.],
            [2., 1., 0., 0.],
            [2., 0., 0., 6.],
            [0., 1., 3., 0.],
            [0., 0., 3., 6.],
        ]
        .iter()
        .map(|v| p(v))
        .collect()
    }

    fn sorted_points(gs: &GeneratorSet) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = gs.iter().map(|g| g.point.coords().to_vec()).collect();
        v.sort_by(|a, b| cmp_coords(a, b));
        v
    }

    #[test]
    fn projection_examples() {
        let rs = example();
        assert_eq!(
            project_records(rs.records(), &[0, 1]).unwrap(),
            vec![p(&[2., 8.]), p(&[5., 1.])]
        );
        assert_eq!(
            project_records(rs.records(), &[2]).unwrap(),
            vec![p(&[3.]), p(&[4.])]
        );
        assert_eq!(project_records(rs.records(), &[0, 1, 2, 3]).unwrap(), rs.records());
        assert_eq!(project_records(rs.records(), &[]).unwrap_err(), Error::EmptySupport);
        assert!(project_records(rs.records(), &[4]).is_err());
        assert!(project_records(rs.records(), &[1, 0]).is_err());
    }

    #[test]
    fn interior_examples() {
        assert_eq!(
            interior_generators(&[p(&[2., 8.]), p(&[5., 1.])]).unwrap(),
            vec![p(&[2., 1.])]
        );
        assert_eq!(interior_generators(&[p(&[3.5])]).unwrap(), vec![p(&[3.5])]);
        assert!(interior_generators(&[p(&[2., 8., 3., 7.]), p(&[5., 1., 4., 6.])])
            .unwrap()
            .is_empty());
        // dominated inputs are ignored
        assert_eq!(
            interior_generators(&[p(&[3.]), p(&[4.])]).unwrap(),
            vec![p(&[4.])]
        );
        let err = interior_generators(&[p(&[1., 2.]), p(&[1., 3.])]).unwrap_err();
        assert!(matches!(err, Error::Tie { coord: 0, .. }));
    }

    #[test]
    fn worked_example_has_eight_generators() {
        let gs = all_generators(&example()).unwrap();
        assert_eq!(gs.gamma(), 8);
        assert_eq!(gs.counts_by_dimension(), &[0, 4, 4, 0, 0]);
        let mut expected: Vec<Vec<f64>> =
            example_generators().into_iter().map(Point::into_coords).collect();
        expected.sort_by(|a, b| cmp_coords(a, b));
        assert_eq!(sorted_points(&gs), expected);
        assert_eq!(gs.get(Support::from_indices(&[0, 1]).unwrap())[0].point, p(&[2., 1., 0., 0.]));
        assert_eq!(gs.interior_count(), 0);

        let bf = brute_force_generators(&example()).unwrap();
        assert_eq!(bf, gs);
    }

    #[test]
    fn trailing_and_truncated_counts() {
        let gs = all_generators(&example()).unwrap();
        let (f_minus, tau) = gs.trailing_summary().unwrap();
        assert_eq!(f_minus, 3.0);
        assert_eq!(tau, p(&[2., 1., 0., 0.]));
        assert_eq!(gs.gamma_truncated(4.0), 3);
        assert_eq!(gs.gamma_truncated(0.0), 0);
        assert_eq!(gs.gamma_truncated(f64::INFINITY), 8);

        let origin = all_generators(&RecordSet::new(3).unwrap()).unwrap();
        assert_eq!(origin.gamma(), 1);
        assert_eq!(origin.counts_by_dimension(), &[1, 0, 0, 0]);
        assert_eq!(origin.trailing_summary().unwrap(), (0.0, Point::origin(3)));

        let mut one = RecordSet::new(1).unwrap();
        one.insert(&p(&[0.7])).unwrap();
        one.insert(&p(&[1.9])).unwrap();
        let gs = all_generators(&one).unwrap();
        assert_eq!(gs.trailing_summary().unwrap().0, 1.9);
        assert_eq!(gs.gamma(), 1);
    }

    #[test]
    fn trailing_tie_is_diagnosed() {
        // generators (1,0) and (0,1) share the minimum sum
        let mut rs = RecordSet::new(2).unwrap();
        rs.insert(&p(&[1., 1.])).unwrap();
        let gs = all_generators(&rs).unwrap();
        assert_eq!(gs.gamma(), 2);
        assert!(gs.trailing_summary().is_err());
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let records: Vec<Point> = (0..60)
            .map(|i| p(&[i as f64 + 1.0, 100.0 - i as f64, 0.5 + i as f64, 200.0 - i as f64]))
            .collect();
        assert!(matches!(
            brute_force_generators_of(4, &records),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn support_ordering_is_by_size_then_indices() {
        let a = Support::from_indices(&[3]).unwrap();
        let b = Support::from_indices(&[0, 1]).unwrap();
        let c = Support::from_indices(&[0, 2]).unwrap();
        assert!(a < b && b < c);
        assert_eq!(Support::full(3).indices(), vec![0, 1, 2]);
        assert!(Support::from_bits(0).is_empty());
    }
}
