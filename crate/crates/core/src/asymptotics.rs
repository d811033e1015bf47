//! Main-term asymptotics, boundary families and lead-order probability bounds.
//!
//! Every evaluator returns the main term only. Remainders are never added.
//! Functions taking `n: f64` accept non-integral sample sizes so that
//! iterated-log identities can be evaluated at points like `n = e^{e^e}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial_f64, complete_bell, factorial_f64, j_integral};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// `ζ(2), …, ζ(9)`.
const ZETA: [f64; 8] = [
    1.644_934_066_848_226_436,
    1.202_056_903_159_594_285,
    1.082_323_233_711_138_192,
    1.036_927_755_143_369_926,
    1.017_343_061_984_449_140,
    1.008_349_277_381_922_827,
    1.004_077_356_197_944_339,
    1.002_008_392_826_082_214,
];

/// Highest derivative order supported by [`gamma_derivative_int`].
pub const MAX_GAMMA_DERIVATIVE: u32 = 8;

/// `n ≥ e^e` makes `ln ln ln n ≥ 0`.
pub const MIN_ITERATED_LOG_N: f64 = 15.154_262_241_479_262;

/// `Σ_{i ≥ m} i^{-s}` for `s ≥ 2`.
fn zeta_tail(s: u32, m: u64) -> f64 {
    if m <= 20 {
        let head: f64 = (1..m).map(|i| (i as f64).powi(-(s as i32))).sum();
        return ZETA[(s - 2) as usize] - head;
    }
    // Euler–Maclaurin
    let x = m as f64;
    let s_f = s as f64;
    x.powf(1.0 - s_f) / (s_f - 1.0) + 0.5 * x.powf(-s_f) + s_f / 12.0 * x.powf(-s_f - 1.0)
        - s_f * (s_f + 1.0) * (s_f + 2.0) / 720.0 * x.powf(-s_f - 3.0)
        + s_f * (s_f + 1.0) * (s_f + 2.0) * (s_f + 3.0) * (s_f + 4.0) / 30240.0 * x.powf(-s_f - 5.0)
}

/// Polygamma `ψ^{(k)}(m)` at a positive integer.
pub fn polygamma_int(k: u32, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("polygamma needs m >= 1".into()));
    }
    if k == 0 {
        let h: f64 = (1..m).map(|i| 1.0 / i as f64).sum();
        return Ok(h - EULER_GAMMA);
    }
    if k + 1 > 9 {
        return Err(Error::InvalidArgument(format!("polygamma order {k} exceeds 8")));
    }
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * factorial_f64(k as u64) * zeta_tail(k + 1, m))
}

/// `Γ^{(k)}(m)` for integer `m ≥ 1`, `k ≤ 8`.
pub fn gamma_derivative_int(k: u32, m: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("gamma derivative needs m >= 1".into()));
    }
    if k > MAX_GAMMA_DERIVATIVE {
        return Err(Error::InvalidArgument(format!("derivative order {k} exceeds 8")));
    }
    let psi = (0..k).map(|j| polygamma_int(j, m)).collect::<Result<Vec<_>>>()?;
    Ok(factorial_f64(m - 1) * complete_bell(&psi, |v| v as f64))
}

/// Derivatives `Γ^{(0)}(m), …, Γ^{(K)}(m)` at one integer point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaDerivatives {
    pub m: u64,
    pub values: Vec<f64>,
}

impl GammaDerivatives {
    pub fn new(m: u64, max_order: u32) -> Result<Self> {
        let values = (0..=max_order)
            .map(|k| gamma_derivative_int(k, m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { m, values })
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d == 0 || d > MAX_GAMMA_DERIVATIVE + 1 {
        return Err(Error::InvalidArgument(format!(
            "dimension must lie in 1..=9 for asymptotic coefficients, got {d}"
        )));
    }
    Ok(())
}

/// Coefficient `a_{d,j}` of `(ln n)^{d-1-j}` in the expected generator count.
pub fn a_coefficient(d: u32, j: u32) -> Result<f64> {
    check_dim(d)?;
    if j >= d {
        return Err(Error::InvalidArgument(format!("need j < d, got j={j}, d={d}")));
    }
    let denom_tail = factorial_f64((d - 1 - j) as u64);
    let mut acc = 0.0;
    for k in 0..=j {
        let m = (d - j + k) as u64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = binomial_f64(d as u64, m) * gamma_derivative_int(k, m)?
            / (factorial_f64(k as u64) * denom_tail);
        acc += sign * term;
    }
    Ok(acc)
}

fn check_log_n(n: f64, min: f64) -> Result<f64> {
    if !(n >= min) || !n.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite n >= {min}, got {n}")));
    }
    Ok(n.ln())
}

/// Poissonized interior-generator mean, main term:
/// `(ln n)^{d-1} Σ_j (-1)^j Γ^{(j)}(d) / (j! (d-1-j)!) (ln n)^{-j}`.
pub fn iota_hat(d: u32, n: f64) -> Result<f64> {
    check_dim(d)?;
    let l = check_log_n(n, 3.0)?;
    let mut acc = 0.0;
    for j in 0..d {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let c = gamma_derivative_int(j, d as u64)?
            / (factorial_f64(j as u64) * factorial_f64((d - 1 - j) as u64));
        acc += sign * c * l.powi((d - 1 - j) as i32);
    }
    Ok(acc)
}

/// `Σ_j a_{d,j} (ln n)^{d-1-j}`.
pub fn expected_gamma_asymptotic(d: u32, n: f64) -> Result<f64> {
    check_dim(d)?;
    let l = check_log_n(n, 3.0)?;
    let mut acc = 0.0;
    for j in 0..d {
        acc += a_coefficient(d, j)? * l.powi((d - 1 - j) as i32);
    }
    Ok(acc)
}

/// Lead order of `E ρ_{d,n}`: `(ln n)^{d-1} / (d-1)!`.
pub fn expected_rho_lead(d: u32, n: f64) -> Result<f64> {
    check_dim(d)?;
    let l = check_log_n(n, 3.0)?;
    Ok(l.powi(d as i32 - 1) / factorial_f64(d as u64 - 1))
}

/// Family of sum thresholds `b_n = ln n - L₃n - ln c_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// `c_n ≡ c > 0`.
    Constant { c: f64 },
    /// `c_n = (d-1) e^{-a / L₂n}`.
    Shift { a: f64 },
}

impl BoundarySpec {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("c must be finite and > 0, got {c}")));
        }
        Ok(Self::Constant { c })
    }

    pub fn shift(a: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidArgument(format!("a must be finite, got {a}")));
        }
        Ok(Self::Shift { a })
    }
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { c } => write!(f, "c={c}"),
            Self::Shift { a } => write!(f, "a={a}"),
        }
    }
}

impl FromStr for BoundarySpec {
    type Err = Error;

    /// Parses `c=<value>` or `a=<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("boundary must be c=<v> or a=<v>, got {s:?}")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad boundary value {value:?}")))?;
        match key.trim() {
            "c" => Self::constant(v),
            "a" => Self::shift(v),
            other => Err(Error::InvalidArgument(format!("unknown boundary form {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundary {
    pub b: f64,
    pub beta: f64,
    pub c: f64,
}

/// `L₂n = ln ln n`, `L₃n = ln ln ln n`; requires `n ≥ e^e`.
fn iterated_logs(n: f64) -> Result<(f64, f64, f64)> {
    // tolerate the rounding in f64 renditions of e^e
    if !(n >= MIN_ITERATED_LOG_N * (1.0 - 1e-12)) || !n.is_finite() {
        return Err(Error::TooSmallForIteratedLogs(n));
    }
    let l1 = n.ln();
    let l2 = l1.ln();
    let l3 = l2.ln().max(0.0);
    Ok((l1, l2, l3))
}

/// `b_n`, `β_n = n e^{-b_n} = c_n L₂n` and `c_n`.
pub fn boundary_eval(spec: BoundarySpec, d: u32, n: f64) -> Result<Boundary> {
    if d == 0 {
        return Err(Error::InvalidArgument("need d >= 1".into()));
    }
    let (l1, l2, l3) = iterated_logs(n)?;
    let c = match spec {
        BoundarySpec::Constant { c } => c,
        BoundarySpec::Shift { a } => (d as f64 - 1.0) * (-a / l2).exp(),
    };
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("c_n must be > 0, got {c}")));
    }
    Ok(Boundary {
        b: l1 - l3 - c.ln(),
        beta: c * l2,
        c,
    })
}

/// Asymptotic mean number of remaining records with coordinate sum `<= b_n`:
/// `1/(d-1)! Σ_j (-1)^j C(d-1, j) (ln n)^{d-1-j} J_j(β_n)`.
pub fn mean_asymptotic_truncated(d: u32, n: f64, spec: BoundarySpec) -> Result<f64> {
    let bd = boundary_eval(spec, d, n)?;
    let l = n.ln();
    let k = d as u64 - 1;
    let mut acc = 0.0;
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let jj = j_integral(j as u32, bd.beta)?.value;
        acc += sign * binomial_f64(k, j) * l.powi((k - j) as i32) * jj;
    }
    Ok(acc / factorial_f64(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityBounds {
    /// Lead-order Markov bound on `P(ĥF⁻ ≤ b_n)`.
    pub markov_hat_f: f64,
    /// Lead-order Chebyshev bound on `P(ĥF⁻ > b_n)`.
    pub chebyshev_hat_f: f64,
    /// Lead-order Markov bound on `P(F⁻ ≤ b_n)`; present only when `c_n ≥ 1`.
    pub markov_f: Option<f64>,
}

pub fn probability_bounds(d: u32, n: f64, spec: BoundarySpec) -> Result<ProbabilityBounds> {
    let bd = boundary_eval(spec, d, n)?;
    let (l1, l2, _) = iterated_logs(n)?;
    let k = d as f64 - 1.0;
    let fact = factorial_f64(d as u64 - 1);
    let markov_hat_f = l1.powf(k - bd.c) / fact;
    let chebyshev_hat_f = fact * l1.powf(-(k - bd.c));
    let markov_f = (bd.c >= 1.0).then(|| l1.powf(k) / fact * (bd.c * l2).powf(k) * l1.powf(-bd.c));
    Ok(ProbabilityBounds {
        markov_hat_f,
        chebyshev_hat_f,
        markov_f,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Centering {
    /// `ln n + (d-1) L₂n - ln((d-1)!)`.
    pub fplus_center: f64,
    /// `ln n - L₃n - ln(d-1)`.
    pub trailing_center: f64,
}

pub fn centering(d: u32, n: f64) -> Result<Centering> {
    if d < 2 {
        return Err(Error::InvalidArgument("centering needs d >= 2".into()));
    }
    let (l1, l2, l3) = iterated_logs(n)?;
    Ok(Centering {
        fplus_center: l1 + (d as f64 - 1.0) * l2 - factorial_f64(d as u64 - 1).ln(),
        trailing_center: l1 - l3 - (d as f64 - 1.0).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{expected_gamma, expected_rho_truncated};
    use crate::quadrature::{integrate, Tolerance};
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    #[test]
    fn polygamma_examples() {
        assert_relative_eq!(polygamma_int(0, 1).unwrap(), -0.577_215_664_9, epsilon = 1e-10);
        assert_relative_eq!(polygamma_int(0, 2).unwrap(), 0.422_784_335_1, epsilon = 1e-10);
        assert_relative_eq!(polygamma_int(1, 1).unwrap(), PI * PI / 6.0, max_relative = 1e-15);
        // ψ''(1) = -2ζ(3)
        assert_relative_eq!(polygamma_int(2, 1).unwrap(), -2.0 * ZETA[1], max_relative = 1e-15);
    }

    #[test]
    fn polygamma_tail_branches_agree() {
        for s in 2..=9u32 {
            let head: f64 = (21..20_000u64).rev().map(|i| (i as f64).powi(-(s as i32))).sum();
            let direct = head + 19_999.5f64.powf(1.0 - s as f64) / (s as f64 - 1.0);
            assert_relative_eq!(zeta_tail(s, 21), direct, max_relative = 1e-9);
        }
    }

    #[test]
    fn gamma_derivative_examples() {
        assert_eq!(gamma_derivative_int(0, 3).unwrap(), 2.0);
        assert_relative_eq!(gamma_derivative_int(1, 1).unwrap(), -EULER_GAMMA, max_relative = 1e-15);
        assert_relative_eq!(gamma_derivative_int(1, 2).unwrap(), 1.0 - EULER_GAMMA, max_relative = 1e-15);
        // Γ''(1) = γ² + π²/6
        assert_relative_eq!(
            gamma_derivative_int(2, 1).unwrap(),
            EULER_GAMMA * EULER_GAMMA + PI * PI / 6.0,
            max_relative = 1e-14
        );
        assert!(gamma_derivative_int(9, 2).is_err());
        let g = GammaDerivatives::new(4, 3).unwrap();
        assert_eq!(g.values[0], 6.0);
    }

    fn central(f: &dyn Fn(f64) -> f64, k: u32, x: f64, h: f64) -> f64 {
        match k {
            0 => f(x),
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gamma_derivatives_match_finite_differences() {
        let f = |x: f64| statrs::function::gamma::gamma(x);
        for m in 1..=6u64 {
            for k in 0..=3u32 {
                let x = m as f64;
                let h = 0.04;
                let d1 = central(&f, k, x, h);
                let d2 = central(&f, k, x, h / 2.0);
                let d3 = central(&f, k, x, h / 4.0);
                let r1 = (4.0 * d2 - d1) / 3.0;
                let r2 = (4.0 * d3 - d2) / 3.0;
                let fd = (16.0 * r2 - r1) / 15.0;
                let exact = gamma_derivative_int(k, m).unwrap();
                assert_relative_eq!(fd, exact, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn a_coefficient_examples() {
        for d in 1..=8 {
            assert_eq!(a_coefficient(d, 0).unwrap(), 1.0);
        }
        assert_relative_eq!(a_coefficient(2, 1).unwrap(), 1.0 + EULER_GAMMA, max_relative = 1e-15);
        assert!(a_coefficient(3, 3).is_err());
    }

    #[test]
    fn iota_hat_examples() {
        for n in [3.0, 10.0, 1e9] {
            assert_relative_eq!(iota_hat(1, n).unwrap(), 1.0);
        }
        let n = 10f64.exp();
        assert_relative_eq!(iota_hat(2, n).unwrap(), 10.0 - (1.0 - EULER_GAMMA), max_relative = 1e-13);
        assert!(iota_hat(2, 2.0).is_err());
    }

    #[test]
    fn iota_hat_matches_poissonized_quadrature() {
        for d in 1..=4u32 {
            let n = 1000.0f64;
            let k = (d - 1) as i32;
            let f = |u: f64| {
                if u <= 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                u.powi(k) * (-n * u).exp() * (-u.ln()).powi(k)
            };
            let cuts = [1.0 / n, 10.0 / n, 50.0 / n];
            let r = integrate(f, 0.0, 1.0, &cuts, Tolerance::default()).unwrap();
            let quad = r.value * n.powi(d as i32) / factorial_f64(d as u64 - 1);
            let main = iota_hat(d, n).unwrap();
            let slack = n.ln().powi(d as i32 - 2) / n;
            assert!((quad - main).abs() < slack.max(1e-9), "d={d} quad={quad} main={main}");
        }
    }

    #[test]
    fn gamma_asymptotic_examples() {
        for n in [10.0, 1e4, 1e8] {
            assert_relative_eq!(expected_gamma_asymptotic(2, n).unwrap(), n.ln() + 1.0 + EULER_GAMMA, max_relative = 1e-14);
            assert_eq!(expected_gamma_asymptotic(1, n).unwrap(), 1.0);
        }
        let exact = expected_gamma(3, 1_000_000).unwrap();
        let asy = expected_gamma_asymptotic(3, 1e6).unwrap();
        assert!(((asy - exact) / exact).abs() < 0.1);
    }

    #[test]
    fn gamma_asymptotic_error_shrinks() {
        for d in 2..=4 {
            let err = |n: u64| {
                let e = expected_gamma(d, n).unwrap();
                ((expected_gamma_asymptotic(d, n as f64).unwrap() - e) / e).abs()
            };
            assert!(err(1_000_000) < err(1000), "d={d}");
        }
    }

    #[test]
    fn gamma_lead_is_factorial_times_rho_lead() {
        for d in 1..=8u32 {
            let n = 1e300f64;
            let l = n.ln().powi(d as i32 - 1);
            let ratio = (l * a_coefficient(d, 0).unwrap()) / expected_rho_lead(d, n).unwrap();
            assert_relative_eq!(ratio, factorial_f64(d as u64 - 1), max_relative = 1e-14);
        }
    }

    #[test]
    fn boundary_examples() {
        let n = E.powf(E.powf(E));
        let bd = boundary_eval(BoundarySpec::constant(1.0).unwrap(), 2, n).unwrap();
        assert_relative_eq!(bd.b, E.powf(E) - 1.0, max_relative = 1e-12);
        assert_relative_eq!(bd.beta, E, max_relative = 1e-12);

        let n = 1e7;
        let bd = boundary_eval(BoundarySpec::shift(0.0).unwrap(), 3, n).unwrap();
        assert_eq!(bd.c, 2.0);
        assert_relative_eq!(bd.b, n.ln() - n.ln().ln().ln() - 2f64.ln(), max_relative = 1e-15);

        for spec in [BoundarySpec::Constant { c: 0.3 }, BoundarySpec::Shift { a: -1.7 }] {
            let bd = boundary_eval(spec, 4, 12345.0).unwrap();
            assert_relative_eq!(bd.beta / (bd.c * 12345f64.ln().ln()), 1.0, max_relative = 1e-15);
            assert_relative_eq!(bd.beta, 12345.0 * (-bd.b).exp(), max_relative = 1e-12);
        }
        assert!(matches!(
            boundary_eval(BoundarySpec::Constant { c: 1.0 }, 2, 10.0),
            Err(Error::TooSmallForIteratedLogs(_))
        ));
    }

    #[test]
    fn boundary_spec_parsing() {
        assert_eq!("c=2".parse::<BoundarySpec>().unwrap(), BoundarySpec::Constant { c: 2.0 });
        assert_eq!("a=-0.5".parse::<BoundarySpec>().unwrap(), BoundarySpec::Shift { a: -0.5 });
        assert!("c=0".parse::<BoundarySpec>().is_err());
        assert!("x=1".parse::<BoundarySpec>().is_err());
        assert!("c2".parse::<BoundarySpec>().is_err());
        let spec = BoundarySpec::Shift { a: 1.25 };
        assert_eq!(spec.to_string().parse::<BoundarySpec>().unwrap(), spec);
    }

    #[test]
    fn truncated_mean_examples() {
        let spec = BoundarySpec::constant(2.0).unwrap();
        let n = 1e5;
        let asy = mean_asymptotic_truncated(3, n, spec).unwrap();
        let b = boundary_eval(spec, 3, n).unwrap().b;
        let quad = expected_rho_truncated(3, 100_000, b).unwrap().value;
        assert!(((asy - quad) / quad).abs() < 0.05, "asy={asy} quad={quad}");

        let bd = boundary_eval(spec, 1, n).unwrap();
        assert_relative_eq!(mean_asymptotic_truncated(1, n, spec).unwrap(), (-bd.beta).exp(), max_relative = 1e-9);
    }

    #[test]
    fn truncated_mean_lead_ratio_tends_to_one() {
        let mut prev = f64::INFINITY;
        for d in [2u32, 3] {
            let spec = BoundarySpec::constant(d as f64 - 1.0).unwrap();
            for e in [10, 30, 100, 300] {
                let n = 10f64.powi(e);
                let lead = n.ln().powf(d as f64 - 1.0 - (d as f64 - 1.0)) / factorial_f64(d as u64 - 1);
                let r = mean_asymptotic_truncated(d, n, spec).unwrap() / lead;
                let gap = (r - 1.0).abs();
                if e > 10 {
                    assert!(gap < prev, "d={d} e={e} gap={gap}");
                }
                prev = gap;
            }
            prev = f64::INFINITY;
        }
    }

    #[test]
    fn truncated_mean_within_factor_two_of_quadrature() {
        for d in [2u32, 3] {
            for n in [10_000u64, 100_000, 1_000_000] {
                for c in [1.0, 2.0, d as f64 + 1.0] {
                    let spec = BoundarySpec::constant(c).unwrap();
                    let asy = mean_asymptotic_truncated(d, n as f64, spec).unwrap();
                    let b = boundary_eval(spec, d, n as f64).unwrap().b;
                    let quad = expected_rho_truncated(d, n, b).unwrap().value;
                    let r = asy / quad;
                    assert!((0.5..=2.0).contains(&r), "d={d} n={n} c={c} r={r}");
                }
            }
        }
    }

    #[test]
    fn probability_bound_examples() {
        let n = 1e6f64;
        for d in 2..=5u32 {
            let pb = probability_bounds(d, n, BoundarySpec::constant(d as f64 - 1.0).unwrap()).unwrap();
            assert_relative_eq!(pb.markov_hat_f, 1.0 / factorial_f64(d as u64 - 1), max_relative = 1e-14);
            assert_relative_eq!(pb.markov_hat_f * pb.chebyshev_hat_f, 1.0, max_relative = 1e-14);
        }
        let pb = probability_bounds(3, n, BoundarySpec::constant(4.0).unwrap()).unwrap();
        let (l1, l2) = (n.ln(), n.ln().ln());
        let want = l1 * l1 / 2.0 * (4.0 * l2).powi(2) * l1.powi(-4);
        assert_relative_eq!(pb.markov_f.unwrap(), want, max_relative = 1e-13);
        let pb = probability_bounds(3, n, BoundarySpec::constant(0.5).unwrap()).unwrap();
        assert!(pb.markov_f.is_none());
    }

    #[test]
    fn centering_examples() {
        let c = centering(2, E.powf(E)).unwrap();
        assert_relative_eq!(c.fplus_center, E + 1.0, max_relative = 1e-14);
        let n = 5e4f64;
        let c = centering(2, n).unwrap();
        assert_relative_eq!(c.trailing_center, n.ln() - n.ln().ln().ln(), max_relative = 1e-15);
        let c = centering(3, E.powf(E.powf(E))).unwrap();
        assert_relative_eq!(c.trailing_center, E.powf(E) - 1.0 - 2f64.ln(), max_relative = 1e-12);
        assert!(centering(1, 100.0).is_err());
    }
}
