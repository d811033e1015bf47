//! The acceptance suite: ten pass/fail criteria with runtime limits.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::Serialize;

use crate::asymptotics::{a_coefficient, boundary_eval, expected_gamma_asymptotic, BoundarySpec, EULER_GAMMA};
use crate::error::Result;
use crate::exact::{
    expected_gamma, expected_iota_exact, expected_rho, expected_rho_exact, expected_rho_truncated,
    iota_quadrature, roman_harmonic, roman_harmonic_alternating,
};
use crate::generators::{all_generators, brute_force_generators};
use crate::geometry::{Point, RecordSet};
use crate::montecarlo::{
    merge, replication_rng, run_experiment, variance_vs_mean_report, AggregateSummary, PathAudit,
    SimulationConfig,
};
use crate::report::summary_json;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub limit_secs: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {}: {} ({:.2}s of {}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_secs,
            self.limit_secs
        )
    }
}

/// Suite settings. `threads` applies to the simulation criteria.
#[derive(Debug, Clone, Copy)]
pub struct Suite {
    pub threads: usize,
    pub seed: u64,
}

impl Default for Suite {
    fn default() -> Self {
        Self { threads: 0, seed: 20_240_601 }
    }
}

fn finish(id: u32, name: &'static str, start: Instant, limit: Duration, ok: bool, detail: String) -> CriterionOutcome {
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let detail = if in_time {
        detail
    } else {
        format!("{detail}; runtime limit exceeded")
    };
    CriterionOutcome {
        id,
        name,
        passed: ok && in_time,
        detail,
        elapsed_secs: elapsed.as_secs_f64(),
        limit_secs: limit.as_secs_f64(),
    }
}

fn error_outcome(id: u32, name: &'static str, start: Instant, limit: Duration, e: crate::Error) -> CriterionOutcome {
    finish(id, name, start, limit, false, format!("error: {e}"))
}

fn pt(v: [f64; 4]) -> Point {
    Point::new(v.to_vec()).expect("valid literal")
}

/// Criterion 1: the two-record example in d = 4 has exactly eight generators.
pub fn worked_example() -> CriterionOutcome {
    let name = "worked example generators";
    let limit = Duration::from_millis(1);
    let mut rs = RecordSet::new(4).expect("d = 4");
    rs.insert(&pt([2., 8., 3., 7.])).expect("first record");
    rs.insert(&pt([5., 1., 4., 6.])).expect("second record");
    let start = Instant::now();
    let gens = all_generators(&rs);
    let elapsed_ok = start.elapsed();
    let gens = match gens {
        Ok(g) => g,
        Err(e) => return error_outcome(1, name, start, limit, e),
    };
    let mut want: Vec<Vec<f64>> = [
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
    .map(|v| v.to_vec())
    .collect();
    let mut got: Vec<Vec<f64>> = gens.iter().map(|g| g.point.coords().to_vec()).collect();
    let key = |a: &Vec<f64>, b: &Vec<f64>| a.partial_cmp(b).expect("finite");
    want.sort_by(key);
    got.sort_by(key);
    let by_dim = gens.counts_by_dimension().to_vec();
    let ok = got == want && by_dim == [0, 4, 4, 0, 0];
    let mut out = finish(1, name, start, limit, ok, format!("gamma = {}, by dimension {:?}", gens.gamma(), by_dim));
    out.elapsed_secs = elapsed_ok.as_secs_f64();
    out.passed = ok && elapsed_ok <= limit;
    out
}

/// Criterion 2: pruned enumeration equals the brute-force oracle.
pub fn oracle_equivalence(seed: u64) -> CriterionOutcome {
    let name = "generator oracle equivalence";
    let limit = Duration::from_secs(120);
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (block, (d, max_n)) in [(2usize, 100u64), (3, 60), (4, 40)].into_iter().enumerate() {
        for i in 0..500u64 {
            let mut rng = replication_rng(seed ^ 0x0a11_0c1e, (block as u64) << 32 | i);
            let n = rng.random_range(1..=max_n);
            let mut rs = RecordSet::new(d).expect("d >= 1");
            let mut buf = vec![0.0; d];
            for _ in 0..n {
                for v in buf.iter_mut() {
                    *v = -(1.0 - rng.random::<f64>()).ln();
                }
                if let Err(e) = rs.insert_coords(&buf) {
                    return error_outcome(2, name, start, limit, e);
                }
            }
            let fast = all_generators(&rs);
            let slow = brute_force_generators(&rs);
            match (fast, slow) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(_), Ok(_)) => mismatches.push((d, n, i)),
                (Err(e), _) | (_, Err(e)) => return error_outcome(2, name, start, limit, e),
            }
            checked += 1;
        }
    }
    let ok = mismatches.is_empty();
    finish(2, name, start, limit, ok, format!("{checked} instances, {} mismatches {:?}", mismatches.len(), &mismatches[..mismatches.len().min(5)]))
}

/// Criterion 3: `γ = ρ + 1` (d = 2) and `γ = 2ρ + 1` (d = 3) on every path.
pub fn almost_sure_identities(suite: &Suite, audits: &mut Vec<(&'static str, PathAudit)>) -> CriterionOutcome {
    let name = "almost-sure generator identities";
    let limit = Duration::from_secs(120);
    let start = Instant::now();
    let mut checked = 0;
    let mut violations = 0;
    for d in [2usize, 3] {
        let config = SimulationConfig::new(d, vec![10, 100, 1000, 10_000], 1000, suite.seed + d as u64).with_threads(suite.threads);
        match run_experiment(&config) {
            Ok(s) => {
                checked += s.audit.checkpoints;
                violations += s.audit.identity_violations;
                audits.push(if d == 2 { ("identities d=2", s.audit) } else { ("identities d=3", s.audit) });
            }
            Err(e) => return error_outcome(3, name, start, limit, e),
        }
    }
    finish(3, name, start, limit, violations == 0, format!("{checked} checkpoints, {violations} violations"))
}

/// Criterion 4: exact rational, quadrature and recurrence paths agree.
pub fn exact_concordance() -> CriterionOutcome {
    let name = "exact formula concordance";
    let limit = Duration::from_secs(60);
    let start = Instant::now();
    let run = || -> Result<(u32, f64, f64)> {
        let mut roman_bad = 0;
        for n in 1..=25 {
            for k in 0..=5 {
                if roman_harmonic(n, k)? != roman_harmonic_alternating(n, k) {
                    roman_bad += 1;
                }
            }
        }
        let mut worst_iota: f64 = 0.0;
        for d in 1..=4u32 {
            for n in d as u64..=50 {
                let exact = expected_iota_exact(d, n)?.to_f64();
                let quad = iota_quadrature(d, n)?.value;
                worst_iota = worst_iota.max(((quad - exact) / exact).abs());
            }
        }
        let mut worst_rho: f64 = 0.0;
        for d in 1..=4u32 {
            for n in 1..=200 {
                let exact = expected_rho_exact(d, n)?.to_f64();
                let quad = expected_rho_truncated(d, n, f64::INFINITY)?.value;
                worst_rho = worst_rho.max(((quad - exact) / exact).abs());
            }
        }
        Ok((roman_bad, worst_iota, worst_rho))
    };
    match run() {
        Ok((bad, wi, wr)) => finish(
            4,
            name,
            start,
            limit,
            bad == 0 && wi <= 1e-8 && wr <= 1e-8,
            format!("{bad} recurrence mismatches, iota rel err {wi:.2e}, truncated-at-infinity rel err {wr:.2e}"),
        ),
        Err(e) => error_outcome(4, name, start, limit, e),
    }
}

/// Criterion 5: simulated means of ρ and γ within 3 SE of exact values.
pub fn monte_carlo_means(suite: &Suite, audits: &mut Vec<(&'static str, PathAudit)>) -> CriterionOutcome {
    let name = "Monte Carlo means vs exact";
    let limit = Duration::from_secs(300);
    let start = Instant::now();
    let runs: [(usize, Vec<u64>, &'static str); 3] = [
        (2, vec![100], "means d=2"),
        (3, vec![100, 1000], "means d=3"),
        (4, vec![100, 1000], "means d=4"),
    ];
    let targets = [(2usize, 100u64), (3, 100), (3, 1000), (4, 1000)];
    let mut parts = Vec::new();
    let mut ok = true;
    for (d, cps, label) in runs {
        let config = SimulationConfig::new(d, cps, 10_000, suite.seed + 10 + d as u64).with_threads(suite.threads);
        let s = match run_experiment(&config) {
            Ok(s) => s,
            Err(e) => return error_outcome(5, name, start, limit, e),
        };
        audits.push((label, s.audit));
        for &(td, n) in targets.iter().filter(|t| t.0 == d) {
            for (stat, exact) in [("rho", expected_rho(td as u32, n)), ("gamma", expected_gamma(td as u32, n))] {
                let exact = match exact {
                    Ok(v) => v,
                    Err(e) => return error_outcome(5, name, start, limit, e),
                };
                let acc = s.stat(n, stat).expect("collected");
                let z = (acc.mean - exact) / acc.std_error();
                ok &= z.abs() <= 3.0;
                parts.push(format!("{stat}(d={td},n={n}) z={z:+.2}"));
            }
        }
    }
    finish(5, name, start, limit, ok, parts.join(", "))
}

/// Simulation shared by criteria 6 and 7: d = 3, n = 10⁵, c = 2.
fn markov_config(suite: &Suite) -> SimulationConfig {
    SimulationConfig::new(3, vec![100, 1000, 10_000, 100_000], 20_000, suite.seed + 100)
        .with_boundary(BoundarySpec::Constant { c: 2.0 })
        .with_threads(suite.threads)
}

/// Criterion 6: empirical `P(ĥF⁻ ≤ b_n) ≤ E ρ_n(b_n) + 3 SE` for c = 2, 3.
///
/// Uses the first 10⁴ replications of the shared simulation; the `c = 3`
/// event is evaluated on the same paths.
pub fn markov_bound(suite: &Suite, audits: &mut Vec<(&'static str, PathAudit)>) -> (CriterionOutcome, Option<(AggregateSummary, Duration)>) {
    let name = "Markov bound on the lowest record sum";
    let limit = Duration::from_secs(300);
    let start = Instant::now();
    let n = 100_000u64;
    let config = markov_config(suite).slice(0, 10_000);
    let s = match run_experiment(&config) {
        Ok(s) => s,
        Err(e) => return (error_outcome(6, name, start, limit, e), None),
    };
    audits.push(("Markov half", s.audit));
    let sample = s.stat(n, "hat_f_minus").and_then(|a| a.sample()).expect("exact sketch").to_vec();
    let mut ok = true;
    let mut parts = Vec::new();
    for c in [2.0, 3.0] {
        let b = match boundary_eval(BoundarySpec::Constant { c }, 3, n as f64) {
            Ok(bd) => bd.b,
            Err(e) => return (error_outcome(6, name, start, limit, e), None),
        };
        let bound = match expected_rho_truncated(3, n, b) {
            Ok(q) => q.value,
            Err(e) => return (error_outcome(6, name, start, limit, e), None),
        };
        let r = sample.len() as f64;
        let p = sample.iter().filter(|&&h| h <= b).count() as f64 / r;
        let se = (p * (1.0 - p) / r).sqrt();
        ok &= p <= bound + 3.0 * se;
        parts.push(format!("c={c}: P={p:.4} (SE {se:.4}) vs E rho(b)={bound:.4}"));
    }
    let elapsed = start.elapsed();
    (finish(6, name, start, limit, ok, parts.join("; ")), Some((s, elapsed)))
}

/// Criterion 7: `Var ρ_n(b_n) / E ρ_n(b_n) ∈ [0.8, 1.2]` from 2·10⁴ paths.
///
/// Runs the second 10⁴ replications and merges them with the first half.
pub fn variance_ratio(suite: &Suite, first_half: Option<(AggregateSummary, Duration)>, audits: &mut Vec<(&'static str, PathAudit)>) -> CriterionOutcome {
    let name = "variance-to-mean ratio of truncated record count";
    let limit = Duration::from_secs(600);
    let start = Instant::now();
    let n = 100_000u64;
    let config = markov_config(suite);
    let (first, reused) = match first_half {
        Some(x) => x,
        None => match run_experiment(&config.slice(0, 10_000)) {
            Ok(s) => (s, Duration::ZERO),
            Err(e) => return error_outcome(7, name, start, limit, e),
        },
    };
    let second = match run_experiment(&config.slice(10_000, 10_000)) {
        Ok(s) => s,
        Err(e) => return error_outcome(7, name, start, limit, e),
    };
    audits.push(("variance half", second.audit));
    let all = match merge(&first, &second) {
        Ok(s) => s,
        Err(e) => return error_outcome(7, name, start, limit, e),
    };
    let report = match variance_vs_mean_report(&all, n) {
        Ok(r) => r,
        Err(e) => return error_outcome(7, name, start, limit, e),
    };
    let reference = boundary_eval(BoundarySpec::Constant { c: 2.0 }, 3, n as f64)
        .and_then(|bd| expected_rho_truncated(3, n, bd.b))
        .map(|q| q.value)
        .unwrap_or(f64::NAN);
    let ok = (0.8..=1.2).contains(&report.ratio);
    let mut out = finish(
        7,
        name,
        start,
        limit,
        ok,
        format!(
            "R={}, mean {:.4} (SE {:.4}, quadrature {:.4}), var {:.4} (SE {:.4}), ratio {:.4} (SE {:.4})",
            report.count, report.mean_hat, report.se_mean, reference, report.var_hat, report.se_var, report.ratio, report.se_ratio
        ),
    );
    // the reused first half counts toward this criterion's runtime
    out.elapsed_secs += reused.as_secs_f64();
    if out.elapsed_secs > out.limit_secs {
        out.passed = false;
    }
    out
}

/// Criterion 8: coefficient values and convergence of the expansion.
pub fn asymptotics_sanity() -> CriterionOutcome {
    let name = "asymptotic coefficients and convergence";
    let limit = Duration::from_secs(60);
    let start = Instant::now();
    let run = || -> Result<(f64, f64, Vec<(u32, f64, f64)>)> {
        let mut worst_a0: f64 = 0.0;
        for d in 1..=8 {
            worst_a0 = worst_a0.max((a_coefficient(d, 0)? - 1.0).abs());
        }
        let a21 = (a_coefficient(2, 1)? - (1.0 + EULER_GAMMA)).abs();
        let mut errs = Vec::new();
        for d in 2..=4u32 {
            let e = |n: u64| -> Result<f64> { Ok((expected_gamma_asymptotic(d, n as f64)? / expected_gamma(d, n)? - 1.0).abs()) };
            errs.push((d, e(1000)?, e(1_000_000)?));
        }
        Ok((worst_a0, a21, errs))
    };
    match run() {
        Ok((a0, a21, errs)) => {
            let shrinks = errs.iter().all(|&(_, lo, hi)| hi < lo);
            let detail = format!(
                "max |a_(d,0) - 1| = {a0:.1e}, |a_(2,1) - 1 - gamma| = {a21:.1e}, rel err 1e3 -> 1e6: {}",
                errs.iter().map(|(d, lo, hi)| format!("d={d} {lo:.3e} -> {hi:.3e}")).collect::<Vec<_>>().join(", ")
            );
            finish(8, name, start, limit, a0 <= 1e-12 && a21 <= 1e-10 && shrinks, detail)
        }
        Err(e) => error_outcome(8, name, start, limit, e),
    }
}

/// Criterion 9: JSON summaries identical at 1, 4 and 16 workers.
pub fn determinism(seed: u64) -> CriterionOutcome {
    let name = "determinism across worker counts";
    let limit = Duration::from_secs(120);
    let start = Instant::now();
    let mut outputs = Vec::new();
    for threads in [1usize, 4, 16] {
        let config = SimulationConfig::new(3, vec![100, 1000, 5000], 400, seed)
            .with_boundary(BoundarySpec::Constant { c: 2.0 })
            .with_threads(threads);
        match run_experiment(&config) {
            Ok(s) => outputs.push(summary_json(&config, &s, Vec::new()).to_string()),
            Err(e) => return error_outcome(9, name, start, limit, e),
        }
    }
    let ok = outputs.windows(2).all(|w| w[0] == w[1]);
    finish(9, name, start, limit, ok, format!("{} bytes per summary, identical: {ok}", outputs[0].len()))
}

/// Criterion 10: no ordering or monotonicity violations in criteria 3 to 7.
pub fn path_audit(audits: &[(&'static str, PathAudit)]) -> CriterionOutcome {
    let name = "path ordering and monotonicity";
    let start = Instant::now();
    let mut total = PathAudit::default();
    for (_, a) in audits {
        total.add(a);
    }
    let ok = total.ordering_violations == 0 && total.f_minus_decreases == 0 && total.hat_f_minus_decreases == 0;
    let per_run: Vec<String> = audits
        .iter()
        .filter(|(_, a)| a.hat_f_minus_decreases > 0)
        .map(|(label, a)| format!("{label}: {}", a.hat_f_minus_decreases))
        .collect();
    let detail = format!(
        "{} checkpoints; ordering {}, F- decreases {}, hat F- decreases {} [{}]; observation-level hat F- decreases {}",
        total.checkpoints,
        total.ordering_violations,
        total.f_minus_decreases,
        total.hat_f_minus_decreases,
        per_run.join(", "),
        total.hat_f_minus_step_decreases
    );
    finish(10, name, start, Duration::from_secs(1), ok, detail)
}

/// Runs all ten criteria in order, calling `report` after each.
pub fn run_all(suite: &Suite, mut report: impl FnMut(&CriterionOutcome)) -> Vec<CriterionOutcome> {
    let mut out = Vec::new();
    let mut audits = Vec::new();
    let mut push = |o: CriterionOutcome, out: &mut Vec<CriterionOutcome>| {
        report(&o);
        out.push(o);
    };
    push(worked_example(), &mut out);
    push(oracle_equivalence(suite.seed), &mut out);
    push(almost_sure_identities(suite, &mut audits), &mut out);
    push(exact_concordance(), &mut out);
    push(monte_carlo_means(suite, &mut audits), &mut out);
    let (c6, half) = markov_bound(suite, &mut audits);
    push(c6, &mut out);
    push(variance_ratio(suite, half, &mut audits), &mut out);
    push(asymptotics_sanity(), &mut out);
    push(determinism(suite.seed), &mut out);
    push(path_audit(&audits), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        assert!(worked_example().detail.contains("gamma = 8"));
        assert!(exact_concordance().passed);
        assert!(asymptotics_sanity().passed);
    }

    #[test]
    fn audit_criterion_reports_decreases() {
        let clean = PathAudit { checkpoints: 5, ..PathAudit::default() };
        assert!(path_audit(&[("a", clean)]).passed);
        let bad = PathAudit { hat_f_minus_decreases: 2, ..clean };
        let o = path_audit(&[("a", clean), ("b", bad)]);
        assert!(!o.passed);
        assert!(o.detail.contains("b: 2"));
    }
}
