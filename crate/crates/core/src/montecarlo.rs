//! Seeded, parallel and mergeable simulation of the record process.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{boundary_eval, centering, Boundary, BoundarySpec, MIN_ITERATED_LOG_N};
use crate::error::{Error, Result};
use crate::generators::{all_generators, MAX_DIM};
use crate::geometry::{Point, RecordSet, TieMode};
use crate::stats::{jackknife_mean_variance, StatAccumulator};

/// Which per-checkpoint quantities to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectFlags {
    /// Generator counts, `F⁻` and the trailing point.
    pub generators: bool,
    /// `ρ_n(b_n)` and `γ_n(b_n)`; needs a boundary.
    pub truncated: bool,
    /// Ordering, monotonicity and identity audits.
    pub path_audits: bool,
}

impl Default for CollectFlags {
    fn default() -> Self {
        Self {
            generators: true,
            truncated: true,
            path_audits: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub d: usize,
    /// Strictly increasing epochs at which statistics are recorded.
    pub checkpoints: Vec<u64>,
    pub replications: u64,
    /// Index of the first replication; streams are keyed by absolute index.
    #[serde(default)]
    pub first_replication: u64,
    pub master_seed: u64,
    pub boundary: Option<BoundarySpec>,
    #[serde(default)]
    pub collect: CollectFlags,
    #[serde(default)]
    pub tie_mode: TieMode,
    /// Worker threads; 0 uses the global pool. Not part of the result.
    #[serde(skip)]
    pub threads: usize,
}

impl SimulationConfig {
    pub fn new(d: usize, checkpoints: Vec<u64>, replications: u64, master_seed: u64) -> Self {
        Self {
            d,
            checkpoints,
            replications,
            first_replication: 0,
            master_seed,
            boundary: None,
            collect: CollectFlags::default(),
            tie_mode: TieMode::Strict,
            threads: 0,
        }
    }

    pub fn with_boundary(mut self, boundary: BoundarySpec) -> Self {
        self.boundary = Some(boundary);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    /// The sub-experiment covering replications `first .. first + count`.
    pub fn slice(&self, first: u64, count: u64) -> Self {
        Self {
            first_replication: first,
            replications: count,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.d > MAX_DIM {
            return Err(Error::InvalidArgument(format!("d must lie in 1..={MAX_DIM}")));
        }
        if self.checkpoints.is_empty() || self.checkpoints[0] == 0 {
            return Err(Error::InvalidArgument("checkpoints must be nonempty and positive".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("need at least one replication".into()));
        }
        Ok(())
    }
}

/// Log-spaced default checkpoints `10², 10³, …` up to `max_n`.
pub fn default_checkpoints(max_n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = 100u64;
    while n <= max_n {
        out.push(n);
        n = n.saturating_mul(10);
    }
    if out.last() != Some(&max_n) {
        out.push(max_n);
    }
    out
}

/// The random stream of replication `rep`: ChaCha8 keyed by the master seed,
/// stream number `rep`.
pub fn replication_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}

#[inline]
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // U = 1 - V with V in [0, 1), so U in (0, 1]
    -(1.0 - rng.random::<f64>()).ln()
}

/// `d` independent Exponential(1) coordinates by inverse transform.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Point {
    Point::from_coords_unchecked((0..d).map(|_| exp1(rng)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointSnapshot {
    pub n: u64,
    pub rho: usize,
    pub f_plus: f64,
    pub hat_f_minus: f64,
    pub leading: Point,
    pub gamma: Option<usize>,
    pub gamma_by_dim: Option<Vec<usize>>,
    pub f_minus: Option<f64>,
    pub trailing: Option<Point>,
    pub boundary: Option<Boundary>,
    pub rho_b: Option<usize>,
    pub gamma_b: Option<usize>,
}

/// Violation counters. Checkpoint-level counts are the audited invariants;
/// `hat_f_minus_step_decreases` counts observation-level decreases of `ĥF⁻`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathAudit {
    pub checkpoints: u64,
    pub ordering_violations: u64,
    pub f_minus_decreases: u64,
    pub hat_f_minus_decreases: u64,
    pub identity_violations: u64,
    pub hat_f_minus_step_decreases: u64,
}

impl PathAudit {
    pub fn add(&mut self, other: &PathAudit) {
        self.checkpoints += other.checkpoints;
        self.ordering_violations += other.ordering_violations;
        self.f_minus_decreases += other.f_minus_decreases;
        self.hat_f_minus_decreases += other.hat_f_minus_decreases;
        self.identity_violations += other.identity_violations;
        self.hat_f_minus_step_decreases += other.hat_f_minus_step_decreases;
    }

    /// Violations of the checkpoint-level invariants.
    pub fn total_violations(&self) -> u64 {
        self.ordering_violations
            + self.f_minus_decreases
            + self.hat_f_minus_decreases
            + self.identity_violations
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub rep_index: u64,
    pub snapshots: Vec<CheckpointSnapshot>,
    pub audit: PathAudit,
}

fn boundary_at(config: &SimulationConfig, n: u64) -> Result<Option<Boundary>> {
    match config.boundary {
        Some(spec) if (n as f64) >= MIN_ITERATED_LOG_N => Ok(Some(boundary_eval(spec, config.d as u32, n as f64)?)),
        _ => Ok(None),
    }
}

fn snapshot(rs: &RecordSet, config: &SimulationConfig, n: u64) -> Result<CheckpointSnapshot> {
    let fr = rs.frontier_record_stats()?;
    let boundary = if config.collect.truncated {
        boundary_at(config, n)?
    } else {
        None
    };
    let mut snap = CheckpointSnapshot {
        n,
        rho: fr.rho,
        f_plus: fr.f_plus,
        hat_f_minus: fr.hat_f_minus,
        leading: fr.leading,
        gamma: None,
        gamma_by_dim: None,
        f_minus: None,
        trailing: None,
        boundary,
        rho_b: boundary.map(|bd| rs.rho_truncated(bd.b)),
        gamma_b: None,
    };
    if config.collect.generators {
        let gens = all_generators(rs)?;
        let (f_minus, trailing) = gens.trailing_summary()?;
        snap.gamma = Some(gens.gamma());
        snap.gamma_by_dim = Some(gens.counts_by_dimension().to_vec());
        snap.f_minus = Some(f_minus);
        snap.trailing = Some(trailing);
        snap.gamma_b = boundary.map(|bd| gens.gamma_truncated(bd.b));
    }
    Ok(snap)
}

fn audit_snapshot(d: usize, snap: &CheckpointSnapshot, prev: Option<&CheckpointSnapshot>, audit: &mut PathAudit) {
    audit.checkpoints += 1;
    let lower_ok = snap.f_minus.is_none_or(|f| f <= snap.hat_f_minus);
    if !lower_ok || snap.hat_f_minus > snap.f_plus {
        audit.ordering_violations += 1;
    }
    if let Some(gamma) = snap.gamma {
        let identity = match d {
            2 => Some(snap.rho + 1),
            3 => Some(2 * snap.rho + 1),
            _ => None,
        };
        if identity.is_some_and(|want| want != gamma) {
            audit.identity_violations += 1;
        }
    }
    if let Some(p) = prev {
        if let (Some(a), Some(b)) = (p.f_minus, snap.f_minus) {
            if b < a {
                audit.f_minus_decreases += 1;
            }
        }
        if snap.hat_f_minus < p.hat_f_minus {
            audit.hat_f_minus_decreases += 1;
        }
    }
}

/// Streams `max(checkpoints)` observations of replication `rep_index`.
pub fn run_replication(config: &SimulationConfig, rep_index: u64) -> Result<ReplicationResult> {
    config.validate()?;
    let d = config.d;
    let mut rng = replication_rng(config.master_seed, rep_index);
    let mut rs = RecordSet::with_tie_mode(d, config.tie_mode)?;
    let mut audit = PathAudit::default();
    let mut snapshots: Vec<CheckpointSnapshot> = Vec::with_capacity(config.checkpoints.len());
    let mut buf = [0.0f64; MAX_DIM];
    let mut hat_min = f64::INFINITY;
    let track_steps = config.collect.path_audits;
    let mut next = 0;
    let last = *config.checkpoints.last().expect("validated");
    for epoch in 1..=last {
        for v in buf[..d].iter_mut() {
            *v = exp1(&mut rng);
        }
        let outcome = rs.insert_coords(&buf[..d])?;
        if track_steps && outcome.was_record {
            let new_min = if outcome.displaced.is_empty() {
                hat_min.min(crate::geometry::coord_sum(&buf[..d]))
            } else {
                rs.record_sums().iter().copied().fold(f64::INFINITY, f64::min)
            };
            if new_min < hat_min && hat_min.is_finite() {
                audit.hat_f_minus_step_decreases += 1;
            }
            hat_min = new_min;
        }
        if epoch == config.checkpoints[next] {
            let snap = snapshot(&rs, config, epoch)?;
            if config.collect.path_audits {
                audit_snapshot(d, &snap, snapshots.last(), &mut audit);
            }
            snapshots.push(snap);
            next += 1;
        }
    }
    Ok(ReplicationResult {
        rep_index,
        snapshots,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub n: u64,
    pub stats: BTreeMap<String, StatAccumulator>,
}

impl CheckpointSummary {
    pub fn get(&self, stat: &str) -> Option<&StatAccumulator> {
        self.stats.get(stat)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub d: usize,
    pub master_seed: u64,
    pub boundary: Option<BoundarySpec>,
    pub replications: u64,
    pub checkpoints: Vec<CheckpointSummary>,
    pub audit: PathAudit,
}

impl AggregateSummary {
    /// A summary of zero replications with the shape of `config`.
    pub fn empty(config: &SimulationConfig) -> Self {
        Self {
            d: config.d,
            master_seed: config.master_seed,
            boundary: config.boundary,
            replications: 0,
            checkpoints: config
                .checkpoints
                .iter()
                .map(|&n| CheckpointSummary {
                    n,
                    stats: BTreeMap::new(),
                })
                .collect(),
            audit: PathAudit::default(),
        }
    }

    pub fn checkpoint(&self, n: u64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.n == n)
    }

    pub fn stat(&self, n: u64, stat: &str) -> Option<&StatAccumulator> {
        self.checkpoint(n)?.get(stat)
    }
}

/// Per-checkpoint scalar statistics of one snapshot, by name.
pub fn snapshot_stats(d: usize, spec: Option<BoundarySpec>, snap: &CheckpointSnapshot) -> Vec<(String, f64)> {
    let mut out = vec![
        ("rho".to_string(), snap.rho as f64),
        ("f_plus".to_string(), snap.f_plus),
        ("hat_f_minus".to_string(), snap.hat_f_minus),
    ];
    if let Some(g) = snap.gamma {
        out.push(("gamma".into(), g as f64));
    }
    if let Some(by_dim) = &snap.gamma_by_dim {
        for (k, &c) in by_dim.iter().enumerate() {
            out.push((format!("gamma_dim_{k}"), c as f64));
        }
    }
    if let Some(f) = snap.f_minus {
        out.push(("f_minus".into(), f));
    }
    if let Some(bd) = snap.boundary {
        let rho_b = snap.rho_b.expect("set with boundary");
        out.push(("rho_b".into(), rho_b as f64));
        out.push(("hat_f_minus_le_b".into(), f64::from(u8::from(snap.hat_f_minus <= bd.b))));
        if matches!(spec, Some(BoundarySpec::Shift { .. })) {
            out.push(("r_a".into(), rho_b as f64));
        }
        if let Some(g) = snap.gamma_b {
            out.push(("gamma_b".into(), g as f64));
        }
        if let Some(f) = snap.f_minus {
            out.push(("f_minus_le_b".into(), f64::from(u8::from(f <= bd.b))));
        }
    }
    if d >= 2 && (snap.n as f64) >= MIN_ITERATED_LOG_N {
        if let Ok(c) = centering(d as u32, snap.n as f64) {
            let l2 = (snap.n as f64).ln().ln();
            out.push(("f_plus_centered".into(), snap.f_plus - c.fplus_center));
            out.push(("hat_f_minus_scaled".into(), l2 * (snap.hat_f_minus - c.trailing_center)));
        }
    }
    out
}

/// Builds the summary of replication results, consumed in index order.
pub fn summarize(config: &SimulationConfig, results: &[ReplicationResult]) -> AggregateSummary {
    let mut ordered: Vec<&ReplicationResult> = results.iter().collect();
    ordered.sort_by_key(|r| r.rep_index);
    let mut summary = AggregateSummary::empty(config);
    summary.replications = ordered.len() as u64;
    for (ci, cp) in summary.checkpoints.iter_mut().enumerate() {
        let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &ordered {
            for (name, v) in snapshot_stats(config.d, config.boundary, &r.snapshots[ci]) {
                columns.entry(name).or_default().push(v);
            }
        }
        cp.stats = columns
            .into_iter()
            .map(|(k, v)| (k, StatAccumulator::from_sample(&v)))
            .collect();
    }
    for r in &ordered {
        summary.audit.add(&r.audit);
    }
    summary
}

/// Runs every replication of `config` on `config.threads` workers.
///
/// The result does not depend on the number of workers.
pub fn run_experiment(config: &SimulationConfig) -> Result<AggregateSummary> {
    let results = run_replications(config)?;
    Ok(summarize(config, &results))
}

/// All replication results of `config`, in index order.
pub fn run_replications(config: &SimulationConfig) -> Result<Vec<ReplicationResult>> {
    config.validate()?;
    let reps = config.first_replication..config.first_replication + config.replications;
    let job = || -> Vec<Result<ReplicationResult>> {
        reps.clone().into_par_iter().map(|r| run_replication(config, r)).collect()
    };
    let outcomes = if config.threads == 0 {
        job()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(job)
    };
    outcomes
        .into_iter()
        .zip(reps)
        .map(|(o, rep)| {
            o.map_err(|e| Error::Replication {
                rep,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Combines two summaries over disjoint replication ranges of one experiment.
pub fn merge(a: &AggregateSummary, b: &AggregateSummary) -> Result<AggregateSummary> {
    let same_checkpoints = a.checkpoints.len() == b.checkpoints.len()
        && a.checkpoints.iter().zip(&b.checkpoints).all(|(x, y)| x.n == y.n);
    if a.d != b.d || a.master_seed != b.master_seed || a.boundary != b.boundary || !same_checkpoints {
        return Err(Error::ShapeMismatch(
            "summaries differ in dimension, seed, boundary or checkpoints".into(),
        ));
    }
    let mut out = a.clone();
    out.replications += b.replications;
    out.audit.add(&b.audit);
    for (cp, other) in out.checkpoints.iter_mut().zip(&b.checkpoints) {
        for (name, acc) in &other.stats {
            let merged = match cp.stats.get(name) {
                Some(mine) => mine.merge(acc),
                None => acc.clone(),
            };
            cp.stats.insert(name.clone(), merged);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceReport {
    pub n: u64,
    pub count: u64,
    pub mean_hat: f64,
    pub var_hat: f64,
    pub ratio: f64,
    pub se_mean: f64,
    pub se_var: f64,
    pub se_ratio: f64,
}

/// Minimum replications for [`variance_vs_mean_report`].
pub const MIN_VARIANCE_REPLICATIONS: u64 = 1000;

/// Mean and variance of `ρ_n(b_n)` at checkpoint `n`, with jackknife errors.
pub fn variance_vs_mean_report(summary: &AggregateSummary, n: u64) -> Result<VarianceReport> {
    if summary.boundary.is_none() {
        return Err(Error::InvalidArgument("no boundary configured".into()));
    }
    let acc = summary
        .stat(n, "rho_b")
        .ok_or_else(|| Error::InvalidArgument(format!("no truncated counts at checkpoint {n}")))?;
    if acc.count < MIN_VARIANCE_REPLICATIONS {
        return Err(Error::InsufficientReplications {
            have: acc.count,
            need: MIN_VARIANCE_REPLICATIONS,
        });
    }
    let sample = acc
        .sample()
        .ok_or_else(|| Error::ShapeMismatch("jackknife needs the raw sample".into()))?;
    let jk = jackknife_mean_variance(sample)?;
    Ok(VarianceReport {
        n,
        count: acc.count,
        mean_hat: jk.mean,
        var_hat: jk.variance,
        ratio: jk.ratio,
        se_mean: jk.se_mean,
        se_var: jk.se_variance,
        se_ratio: jk.se_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{expected_gamma, expected_rho};

    #[test]
    fn exponential_draws() {
        let mut rng = replication_rng(11, 0);
        let n = 1_000_000;
        let mut sums = [0.0; 2];
        let mut tail = 0u64;
        for _ in 0..n {
            let p = sample_point(&mut rng, 2);
            sums[0] += p.coords()[0];
            sums[1] += p.coords()[1];
            tail += u64::from(p.coords()[0] > 2.0);
        }
        for s in sums {
            assert!((s / n as f64 - 1.0).abs() < 0.01);
        }
        let q = (-2.0f64).exp();
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((tail as f64 / n as f64 - q).abs() < 3.0 * se);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<Point> = {
            let mut r = replication_rng(5, 3);
            (0..10).map(|_| sample_point(&mut r, 3)).collect()
        };
        let b: Vec<Point> = {
            let mut r = replication_rng(5, 3);
            (0..10).map(|_| sample_point(&mut r, 3)).collect()
        };
        let c: Vec<Point> = {
            let mut r = replication_rng(5, 4);
            (0..10).map(|_| sample_point(&mut r, 3)).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn replication_identities_and_audits() {
        for d in [2usize, 3] {
            let config = SimulationConfig::new(d, vec![1, 10, 100, 1000], 1, 42);
            for rep in 0..20 {
                let r = run_replication(&config, rep).unwrap();
                for s in &r.snapshots {
                    let g = s.gamma.unwrap();
                    let want = if d == 2 { s.rho + 1 } else { 2 * s.rho + 1 };
                    assert_eq!(g, want);
                    assert!(s.f_minus.unwrap() <= s.hat_f_minus && s.hat_f_minus <= s.f_plus);
                }
                assert_eq!(r.audit.identity_violations, 0);
                assert_eq!(r.audit.ordering_violations, 0);
                assert_eq!(r.audit.f_minus_decreases, 0);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::new(2, vec![], 1, 0).validate().is_err());
        assert!(SimulationConfig::new(2, vec![10, 10], 1, 0).validate().is_err());
        assert!(SimulationConfig::new(2, vec![10], 0, 0).validate().is_err());
        assert!(SimulationConfig::new(0, vec![10], 1, 0).validate().is_err());
        assert_eq!(default_checkpoints(100_000), vec![100, 1000, 10_000, 100_000]);
        assert_eq!(default_checkpoints(5000), vec![100, 1000, 5000]);
    }

    #[test]
    fn halves_merge_to_whole() {
        let config = SimulationConfig::new(3, vec![50, 200], 40, 9).with_boundary(BoundarySpec::Constant { c: 2.0 });
        let whole = run_experiment(&config).unwrap();
        let first = run_experiment(&config.slice(0, 17)).unwrap();
        let second = run_experiment(&config.slice(17, 23)).unwrap();
        assert_eq!(merge(&first, &second).unwrap(), whole);
        assert_eq!(merge(&second, &first).unwrap(), whole);
        let empty = AggregateSummary::empty(&config);
        assert_eq!(merge(&whole, &empty).unwrap(), whole);
        assert_eq!(whole.replications, 40);
        assert_eq!(whole.stat(200, "rho").unwrap().count, 40);
        let other = SimulationConfig::new(3, vec![50], 4, 9);
        assert!(merge(&whole, &run_experiment(&other).unwrap()).is_err());
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let config = SimulationConfig::new(2, vec![100, 1000], 24, 3).with_boundary(BoundarySpec::Shift { a: 0.5 });
        let one = run_experiment(&config.clone().with_threads(1)).unwrap();
        let four = run_experiment(&config.with_threads(4)).unwrap();
        assert_eq!(one, four);
        assert!(one.stat(1000, "r_a").is_some());
    }

    #[test]
    fn means_agree_with_exact_values() {
        let config = SimulationConfig::new(2, vec![100], 2000, 1);
        let s = run_experiment(&config).unwrap();
        let rho = s.stat(100, "rho").unwrap();
        let gamma = s.stat(100, "gamma").unwrap();
        let er = expected_rho(2, 100).unwrap();
        let eg = expected_gamma(2, 100).unwrap();
        assert!((rho.mean - er).abs() <= 4.0 * rho.std_error());
        assert!((gamma.mean - eg).abs() <= 4.0 * gamma.std_error());
    }

    #[test]
    fn variance_report_requires_replications_and_boundary() {
        let config = SimulationConfig::new(2, vec![100], 10, 1);
        let s = run_experiment(&config).unwrap();
        assert!(variance_vs_mean_report(&s, 100).is_err());
        let s = run_experiment(&config.with_boundary(BoundarySpec::Constant { c: 1.0 })).unwrap();
        assert!(matches!(
            variance_vs_mean_report(&s, 100),
            Err(Error::InsufficientReplications { .. })
        ));
    }

    #[test]
    fn stepwise_hat_f_minus_can_decrease() {
        // ĥF⁻ is not monotone along single observations
        let mut rs = RecordSet::new(2).unwrap();
        rs.insert_coords(&[0.1, 5.0]).unwrap();
        rs.insert_coords(&[5.1, 0.1]).unwrap();
        let before = rs.frontier_record_stats().unwrap().hat_f_minus;
        assert!(rs.insert_coords(&[3.0, 0.2]).unwrap().was_record);
        let after = rs.frontier_record_stats().unwrap().hat_f_minus;
        assert!(after < before);
    }
}
