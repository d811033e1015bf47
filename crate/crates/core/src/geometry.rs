//! Dominance predicates and incremental maintenance of the remaining-record set.
//!
//! A point `x` is a *current record* after `n` insertions when no inserted
//! point `y` satisfies `x ≺ y` (strictly smaller in every coordinate). The
//! record-setting region is the set of nonnegative points not strictly below
//! any current record.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonnegative, finite `d`-vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        validate_coords(&coords)?;
        Ok(Self::from_coords_unchecked(coords))
    }

    /// The origin of `[0, ∞)^d`.
    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub(crate) fn from_coords_unchecked(mut coords: Vec<f64>) -> Self {
        // fold -0.0 into +0.0 so bitwise comparisons agree with ==
        for c in &mut coords {
            *c += 0.0;
        }
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Coordinate sum `x_+`.
    pub fn sum(&self) -> f64 {
        coord_sum(&self.coords)
    }

    /// Coordinate product `x_×`.
    pub fn product(&self) -> f64 {
        self.coords.iter().product()
    }

    /// Indices of the nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

pub(crate) fn validate_coords(coords: &[f64]) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::InvalidPoint("zero-dimensional point".into()));
    }
    for (j, &c) in coords.iter().enumerate() {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidPoint(format!(
                "coordinate {j} is {c}, expected a finite nonnegative value"
            )));
        }
    }
    Ok(())
}

/// Coordinate sum, accumulated left to right.
///
/// Sequential floating-point addition is monotone in every argument, so
/// `x <= y` coordinatewise implies `coord_sum(x) <= coord_sum(y)` exactly.
/// The frontier ordering audits (`F⁻ <= ĥF⁻ <= F⁺`) depend on that.
#[inline]
pub fn coord_sum(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |acc, &v| acc + v)
}

#[inline]
pub(crate) fn strictly_below(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a < b)
}

#[inline]
pub(crate) fn weakly_below(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a <= b)
}

fn check_same_dim(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    Ok(())
}

/// Returns `x ≺ y`: every coordinate of `x` is strictly below the
/// corresponding coordinate of `y` (so `y` strictly dominates `x`).
pub fn strictly_dominates(x: &Point, y: &Point) -> Result<bool> {
    check_same_dim(x, y)?;
    Ok(strictly_below(&x.coords, &y.coords))
}

/// Returns `x <= y` coordinatewise.
pub fn weakly_leq(x: &Point, y: &Point) -> Result<bool> {
    check_same_dim(x, y)?;
    Ok(weakly_below(&x.coords, &y.coords))
}

/// Membership of `x` in the record-setting region of `records`.
#[inline]
pub(crate) fn rs_contains_coords<'a, I>(records: I, x: &[f64]) -> bool
where
    I: IntoIterator<Item = &'a [f64]>,
{
    records.into_iter().all(|r| !strictly_below(x, r))
}

/// How coordinate ties between a new point and the current records are
/// handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieMode {
    /// Reject the insertion with [`Error::Tie`].
    #[default]
    Strict,
    /// Proceed; a tie never produces `≺`.
    Permissive,
}

/// Storage strategy behind a [`RecordSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Unordered list, linear scan per insertion. Any dimension.
    Linear,
    /// `d = 2` only: records kept sorted by first coordinate (hence by
    /// decreasing second coordinate); insertion by binary search.
    Staircase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionOutcome {
    pub was_record: bool,
    /// Records removed because the new point strictly dominates them.
    pub displaced: Vec<Point>,
}

impl InsertionOutcome {
    fn rejected() -> Self {
        Self {
            was_record: false,
            displaced: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRecordStats {
    /// `F_n⁺`, the largest record coordinate-sum.
    pub f_plus: f64,
    /// The leading point `λ_n`.
    pub leading: Point,
    /// `ĥF_n⁻`, the smallest record coordinate-sum.
    pub hat_f_minus: f64,
    /// `ρ_n`.
    pub rho: usize,
}

/// The remaining (current) records after `epoch` observations.
#[derive(Debug, Clone)]
pub struct RecordSet {
    dim: usize,
    epoch: u64,
    records: Vec<Point>,
    sums: Vec<f64>,
    insertion_epochs: Vec<u64>,
    tie_mode: TieMode,
    backend: Backend,
    // per-coordinate bit patterns of current record values (strict mode only)
    coord_values: Vec<FxHashSet<u64>>,
    // max over records of the smallest coordinate; any x with max_j x_j below
    // it is strictly dominated by that record
    cover: f64,
}

impl RecordSet {
    /// Strict tie handling; staircase backend for `d = 2`, linear otherwise.
    pub fn new(dim: usize) -> Result<Self> {
        let backend = if dim == 2 {
            Backend::Staircase
        } else {
            Backend::Linear
        };
        Self::with_options(dim, TieMode::Strict, backend)
    }

    pub fn with_tie_mode(dim: usize, tie_mode: TieMode) -> Result<Self> {
        let backend = if dim == 2 && tie_mode == TieMode::Strict {
            Backend::Staircase
        } else {
            Backend::Linear
        };
        Self::with_options(dim, tie_mode, backend)
    }

    pub fn with_options(dim: usize, tie_mode: TieMode, backend: Backend) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if backend == Backend::Staircase && (dim != 2 || tie_mode != TieMode::Strict) {
            return Err(Error::InvalidArgument(
                "staircase backend requires d = 2 and strict tie mode".into(),
            ));
        }
        let coord_values = match tie_mode {
            TieMode::Strict => vec![FxHashSet::default(); dim],
            TieMode::Permissive => Vec::new(),
        };
        Ok(Self {
            dim,
            epoch: 0,
            records: Vec::new(),
            sums: Vec::new(),
            insertion_epochs: Vec::new(),
            tie_mode,
            backend,
            coord_values,
            cover: f64::NEG_INFINITY,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observations inserted so far.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn records(&self) -> &[Point] {
        &self.records
    }

    /// Epoch (1-based) at which each record in [`records`](Self::records) was inserted.
    pub fn insertion_epochs(&self) -> &[u64] {
        &self.insertion_epochs
    }

    /// Coordinate sums aligned with [`records`](Self::records).
    pub fn record_sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tie_mode(&self) -> TieMode {
        self.tie_mode
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn insert(&mut self, x: &Point) -> Result<InsertionOutcome> {
        self.insert_coords(x.coords())
    }

    /// Inserts the observation `x` and reports whether it set a record.
    ///
    /// On error the set is left unchanged and the epoch is not advanced.
    pub fn insert_coords(&mut self, x: &[f64]) -> Result<InsertionOutcome> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        validate_coords(x)?;
        if self.tie_mode == TieMode::Strict {
            for (j, &v) in x.iter().enumerate() {
                if self.coord_values[j].contains(&(v + 0.0).to_bits()) {
                    return Err(Error::Tie { coord: j, value: v });
                }
            }
        }
        self.epoch += 1;
        match self.backend {
            Backend::Linear => Ok(self.insert_linear(x)),
            Backend::Staircase => Ok(self.insert_staircase(x)),
        }
    }

    fn insert_linear(&mut self, x: &[f64]) -> InsertionOutcome {
        let x_max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if x_max < self.cover {
            return InsertionOutcome::rejected();
        }
        if self.records.iter().any(|r| strictly_below(x, &r.coords)) {
            return InsertionOutcome::rejected();
        }
        let mut displaced = Vec::new();
        let mut i = 0;
        while i < self.records.len() {
            if strictly_below(&self.records[i].coords, x) {
                displaced.push(self.remove_at(i));
            } else {
                i += 1;
            }
        }
        let point = Point::from_coords_unchecked(x.to_vec());
        let x_min = x.iter().copied().fold(f64::INFINITY, f64::min);
        let at = self.records.len();
        self.insert_at(at, point);
        if displaced.is_empty() {
            self.cover = self.cover.max(x_min);
        } else {
            self.recompute_cover();
        }
        InsertionOutcome {
            was_record: true,
            displaced,
        }
    }

    fn insert_staircase(&mut self, x: &[f64]) -> InsertionOutcome {
        let (a, b) = (x[0], x[1]);
        // records sorted by first coordinate ascending, second descending
        let idx = self.records.partition_point(|r| r.coords[0] < a);
        if idx < self.records.len() && self.records[idx].coords[1] > b {
            return InsertionOutcome::rejected();
        }
        let k = self.records[..idx].partition_point(|r| r.coords[1] > b);
        let mut displaced = Vec::with_capacity(idx - k);
        for _ in k..idx {
            displaced.push(self.remove_at(k));
        }
        self.insert_at(k, Point::from_coords_unchecked(x.to_vec()));
        InsertionOutcome {
            was_record: true,
            displaced,
        }
    }

    fn insert_at(&mut self, at: usize, point: Point) {
        if self.tie_mode == TieMode::Strict {
            for (j, &v) in point.coords.iter().enumerate() {
                self.coord_values[j].insert(v.to_bits());
            }
        }
        self.sums.insert(at, point.sum());
        self.records.insert(at, point);
        self.insertion_epochs.insert(at, self.epoch);
    }

    fn remove_at(&mut self, at: usize) -> Point {
        let point = self.records.remove(at);
        self.sums.remove(at);
        self.insertion_epochs.remove(at);
        if self.tie_mode == TieMode::Strict {
            for (j, &v) in point.coords.iter().enumerate() {
                self.coord_values[j].remove(&v.to_bits());
            }
        }
        point
    }

    fn recompute_cover(&mut self) {
        self.cover = self
            .records
            .iter()
            .map(|r| r.coords.iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max);
    }

    /// `ρ_n(b)`: number of records with coordinate sum `<= b`.
    pub fn rho_truncated(&self, b: f64) -> usize {
        self.sums.iter().filter(|&&s| s <= b).count()
    }

    /// Whether `x` lies in the record-setting region `RS_n`.
    pub fn rs_contains(&self, x: &Point) -> Result<bool> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.dim(),
            });
        }
        Ok(rs_contains_coords(
            self.records.iter().map(|r| r.coords()),
            x.coords(),
        ))
    }

    pub fn frontier_record_stats(&self) -> Result<FrontierRecordStats> {
        if self.records.is_empty() {
            return Err(Error::EmptyRecordSet);
        }
        let mut lead = 0;
        let mut lo = f64::INFINITY;
        for (i, &s) in self.sums.iter().enumerate() {
            if s > self.sums[lead] {
                lead = i;
            }
            lo = lo.min(s);
        }
        let f_plus = self.sums[lead];
        if self.sums.iter().filter(|&&s| s == f_plus).count() > 1 {
            return Err(Error::InvalidArgument(format!(
                "leading point is not unique: several records have coordinate sum {f_plus}"
            )));
        }
        Ok(FrontierRecordStats {
            f_plus,
            leading: self.records[lead].clone(),
            hat_f_minus: lo,
            rho: self.records.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn example_records() -> RecordSet {
        let mut rs = RecordSet::new(4).unwrap();
        rs.insert(&p(&[2., 8., 3., 7.])).unwrap();
        rs.insert(&p(&[5., 1., 4., 6.])).unwrap();
        rs
    }

    #[test]
    fn dominance_examples() {
        assert!(strictly_dominates(&p(&[1., 2.]), &p(&[2., 3.])).unwrap());
        assert!(!strictly_dominates(&p(&[0., 0.]), &p(&[0., 1.])).unwrap());
        assert!(!strictly_dominates(&p(&[2., 8., 3., 7.]), &p(&[5., 1., 4., 6.])).unwrap());
        assert!(!strictly_dominates(&p(&[5., 1., 4., 6.]), &p(&[2., 8., 3., 7.])).unwrap());

        assert!(weakly_leq(&p(&[0., 0.]), &p(&[0., 1.])).unwrap());
        let x = p(&[0.3, 1.7]);
        assert!(weakly_leq(&x, &x).unwrap());
        assert!(weakly_leq(&p(&[2., 1., 0., 0.]), &p(&[2., 8., 3., 7.])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let e = strictly_dominates(&p(&[1.]), &p(&[1., 2.])).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { .. }));
        assert!(weakly_leq(&p(&[1., 2., 3.]), &p(&[1., 2.])).is_err());
    }

    #[test]
    fn invalid_points_rejected() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![-1.0]).is_err());
        assert!(Point::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Point::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn insertion_examples() {
        let mut rs = RecordSet::new(4).unwrap();
        rs.insert(&p(&[2., 8., 3., 7.])).unwrap();
        let out = rs.insert(&p(&[5., 1., 4., 6.])).unwrap();
        assert!(out.was_record);
        assert!(out.displaced.is_empty());
        assert_eq!(rs.len(), 2);
        assert_eq!(rs.insertion_epochs(), &[1, 2]);

        for backend in [Backend::Linear, Backend::Staircase] {
            let mut rs = RecordSet::with_options(2, TieMode::Strict, backend).unwrap();
            rs.insert(&p(&[2., 2.])).unwrap();
            let out = rs.insert(&p(&[1., 1.])).unwrap();
            assert!(!out.was_record && out.displaced.is_empty());
            let out = rs.insert(&p(&[3., 3.])).unwrap();
            assert!(out.was_record);
            assert_eq!(out.displaced, vec![p(&[2., 2.])]);
            assert_eq!(rs.records(), &[p(&[3., 3.])]);
            assert_eq!(rs.epoch(), 3);
        }
    }

    #[test]
    fn strict_mode_rejects_ties_without_mutation() {
        let mut rs = RecordSet::new(3).unwrap();
        rs.insert(&p(&[1., 2., 3.])).unwrap();
        let err = rs.insert(&p(&[0.5, 2., 0.1])).unwrap_err();
        assert_eq!(err, Error::Tie { coord: 1, value: 2.0 });
        assert_eq!(rs.epoch(), 1);
        assert_eq!(rs.len(), 1);

        // displaced values are released from the tie index
        rs.insert(&p(&[4., 5., 6.])).unwrap();
        assert_eq!(rs.len(), 1);
        assert!(rs.insert(&p(&[0.5, 2., 0.1])).is_ok());
    }

    #[test]
    fn permissive_mode_never_uses_ties_for_dominance() {
        let mut rs = RecordSet::with_tie_mode(2, TieMode::Permissive).unwrap();
        assert_eq!(rs.backend(), Backend::Linear);
        rs.insert(&p(&[1., 2.])).unwrap();
        let out = rs.insert(&p(&[1., 3.])).unwrap();
        // (1,2) is not strictly below (1,3): both remain
        assert!(out.was_record);
        assert!(out.displaced.is_empty());
        assert_eq!(rs.len(), 2);
        let out = rs.insert(&p(&[0.5, 3.])).unwrap();
        assert!(out.was_record);
        assert_eq!(rs.len(), 3);
    }

    #[test]
    fn staircase_requires_strict_two_dim() {
        assert!(RecordSet::with_options(3, TieMode::Strict, Backend::Staircase).is_err());
        assert!(RecordSet::with_options(2, TieMode::Permissive, Backend::Staircase).is_err());
        assert!(RecordSet::new(0).is_err());
    }

    #[test]
    fn rho_truncated_examples() {
        let rs = example_records();
        assert_eq!(rs.rho_truncated(16.0), 1);
        assert_eq!(rs.rho_truncated(0.0), 0);
        assert_eq!(rs.rho_truncated(f64::INFINITY), 2);
        assert_eq!(rs.rho_truncated(19.99), 1);
        assert_eq!(rs.rho_truncated(20.0), 2);
    }

    #[test]
    fn rs_contains_examples() {
        let rs = example_records();
        assert!(rs.rs_contains(&p(&[5., 0., 0., 0.])).unwrap());
        assert!(!rs.rs_contains(&p(&[1., 0., 0., 0.])).unwrap());
        let empty = RecordSet::new(4).unwrap();
        assert!(empty.rs_contains(&p(&[0., 0., 0., 0.])).unwrap());
        assert!(rs.rs_contains(&p(&[1., 2.])).is_err());
    }

    #[test]
    fn frontier_stats_examples() {
        let s = example_records().frontier_record_stats().unwrap();
        assert_eq!(s.f_plus, 20.0);
        assert_eq!(s.leading, p(&[2., 8., 3., 7.]));
        assert_eq!(s.hat_f_minus, 16.0);
        assert_eq!(s.rho, 2);

        let mut one = RecordSet::new(3).unwrap();
        one.insert(&p(&[0.5, 1.25, 2.0])).unwrap();
        let s = one.frontier_record_stats().unwrap();
        assert_eq!(s.f_plus, 3.75);
        assert_eq!(s.hat_f_minus, 3.75);

        let mut tied = RecordSet::new(2).unwrap();
        for v in [[1., 3.], [2., 2.], [3., 1.]] {
            tied.insert(&p(&v)).unwrap();
        }
        assert!(tied.frontier_record_stats().is_err());

        assert_eq!(
            RecordSet::new(2).unwrap().frontier_record_stats().unwrap_err(),
            Error::EmptyRecordSet
        );
    }

    #[test]
    fn coord_sum_is_monotone_under_coordinatewise_order() {
        let r = [0.1, 0.2, 0.30000000000000004, 1e-17];
        let g = [0.1, 0.0, 0.30000000000000004, 0.0];
        assert!(coord_sum(&g) <= coord_sum(&r));
    }
}
