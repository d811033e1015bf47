//! Exact and quadrature evaluation of expected record and generator counts.
//!
//! Rational results are exact for `n <= EXACT_LIMIT`. Beyond that the
//! floating-point evaluators use sums of positive terms only.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureResult, Tolerance};

/// Largest `n` for which rational evaluation is used.
pub const EXACT_LIMIT: u64 = 500;

/// An exact rational in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_integer(v: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(v)))
    }

    /// `numer / denom`, reduced. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        Self(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn recip(&self) -> Self {
        Self(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    fn from_big(v: BigInt) -> Self {
        Self(BigRational::from_integer(v))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: Self) -> Self {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl<'a> $tr<&'a ExactRational> for &'a ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &'a ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> Self {
        ExactRational(-self.0)
    }
}

fn binomial_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub(crate) fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn factorial_f64(k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Complete exponential Bell polynomial `Y_m(x_1, …, x_m)` with `m = x.len()`.
///
/// `Y_0 = 1`, `Y_{m+1} = Σ_{i=0}^{m} C(m, i) Y_{m-i} x_{i+1}`.
pub fn complete_bell<T>(x: &[T], from_u64: impl Fn(u64) -> T) -> T
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    let mut y: Vec<T> = vec![from_u64(1)];
    for m in 0..x.len() {
        let mut next = from_u64(0);
        for i in 0..=m {
            let c = from_u64(binomial_u64(m as u64, i as u64));
            next = next + c * y[m - i].clone() * x[i].clone();
        }
        y.push(next);
    }
    y.pop().expect("nonempty")
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Generalized harmonic number `H_n^(k) = Σ_{i=1}^n i^{-k}`.
pub fn harmonic(n: u64, k: u32) -> ExactRational {
    let mut acc = BigRational::zero();
    for i in 1..=n {
        acc += BigRational::new(BigInt::one(), BigInt::from(i).pow(k));
    }
    ExactRational(acc)
}

/// `[Ĥ_1^(k), …, Ĥ_n^(k)]` by the recurrence `Ĥ_j^(0) = 1`,
/// `Ĥ_j^(k) = Σ_{i=1}^j Ĥ_i^(k-1) / i`.
pub fn roman_harmonic_row(n: u64, k: u32) -> Vec<ExactRational> {
    let mut row: Vec<BigRational> = vec![BigRational::one(); n as usize];
    for _ in 0..k {
        let mut acc = BigRational::zero();
        for (i, v) in row.iter_mut().enumerate() {
            acc += &*v / BigInt::from(i as u64 + 1);
            *v = acc.clone();
        }
    }
    row.into_iter().map(ExactRational).collect()
}

/// Roman harmonic number `Ĥ_n^(k)` via the positive-term recurrence.
pub fn roman_harmonic(n: u64, k: u32) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::InvalidArgument("roman harmonic requires n >= 1".into()));
    }
    Ok(roman_harmonic_row(n, k).pop().expect("n >= 1"))
}

/// `Σ_{j=1}^n (-1)^{j-1} C(n, j) j^{-k}` evaluated directly.
pub fn roman_harmonic_alternating(n: u64, k: u32) -> ExactRational {
    let mut acc = BigRational::zero();
    for j in 1..=n {
        let term = BigRational::new(binomial_big(n, j), BigInt::from(j).pow(k));
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    ExactRational(acc)
}

/// Floating-point `Ĥ_n^(k)` by the same recurrence (positive terms).
pub fn roman_harmonic_f64(n: u64, k: u32) -> f64 {
    let mut row = vec![1.0f64; n as usize];
    for _ in 0..k {
        let mut acc = 0.0;
        for (i, v) in row.iter_mut().enumerate() {
            acc += *v / (i as f64 + 1.0);
            *v = acc;
        }
    }
    row.last().copied().unwrap_or(0.0)
}

fn check_exact_range(n: u64) -> Result<()> {
    if n > EXACT_LIMIT {
        return Err(Error::InvalidArgument(format!(
            "exact evaluation limited to n <= {EXACT_LIMIT}, got {n}"
        )));
    }
    Ok(())
}

/// `E ρ_{d,n} = Ĥ_n^(d-1)` exactly.
pub fn expected_rho_exact(d: u32, n: u64) -> Result<ExactRational> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and n >= 1".into()));
    }
    check_exact_range(n)?;
    roman_harmonic(n, d - 1)
}

/// `E ρ_{d,n}` in floating point; rational evaluation up to [`EXACT_LIMIT`].
pub fn expected_rho(d: u32, n: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidArgument("need d >= 1".into()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    if n <= EXACT_LIMIT {
        return Ok(expected_rho_exact(d, n)?.to_f64());
    }
    Ok(roman_harmonic_f64(n, d - 1))
}

/// Falling factorial `n (n-1) ⋯ (n-d+1)`.
fn falling_big(n: u64, d: u32) -> BigInt {
    (0..d as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

/// `E ι_{d,n}`, the expected number of interior generators, exactly.
///
/// Evaluated through the expected record counts:
/// `E ι_{d,n} = n^(d) Σ_{j=0}^{d-1} (-1)^j C(d-1, j) E ρ_{d,m} / m` with
/// `m = n - d + j + 1`. `E ι_{0,n} = δ_{0,n}` and `E ι_{d,n} = 0` for `n < d`.
pub fn expected_iota_exact(d: u32, n: u64) -> Result<ExactRational> {
    check_exact_range(n)?;
    if d == 0 {
        return Ok(if n == 0 {
            ExactRational::one()
        } else {
            ExactRational::zero()
        });
    }
    if n < d as u64 {
        return Ok(ExactRational::zero());
    }
    let row = roman_harmonic_row(n, d - 1);
    let mut acc = BigRational::zero();
    for j in 0..d as u64 {
        let m = n - d as u64 + j + 1;
        let term = &row[(m - 1) as usize].0 * BigRational::new(binomial_big(d as u64 - 1, j), BigInt::from(m));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(ExactRational(acc * BigRational::from_integer(falling_big(n, d))))
}

/// `E ι_{d,n}` as the complete Bell polynomial of harmonic tails,
/// `Y_{d-1}(0!·S_1, 1!·S_2, …, (d-2)!·S_{d-1})` with `S_i = Σ_{k=d}^n k^{-i}`,
/// in exact arithmetic. Independent of the record-count relation.
pub fn expected_iota_bell_exact(d: u32, n: u64) -> Result<ExactRational> {
    check_exact_range(n)?;
    if d == 0 {
        return expected_iota_exact(0, n);
    }
    if n < d as u64 {
        return Ok(ExactRational::zero());
    }
    let args: Vec<BigRational> = (1..d)
        .map(|i| {
            let mut s = BigRational::zero();
            for k in d as u64..=n {
                s += BigRational::new(BigInt::one(), BigInt::from(k).pow(i));
            }
            s * BigRational::from_integer(BigInt::from((1..i as u64).product::<u64>()))
        })
        .collect();
    Ok(ExactRational(complete_bell(&args, |v| {
        BigRational::from_integer(BigInt::from(v))
    })))
}

/// `E ι_{d,n}` in floating point. Rational evaluation up to
/// [`EXACT_LIMIT`]; beyond it the harmonic-tail Bell form, whose terms are
/// all positive.
pub fn expected_iota(d: u32, n: u64) -> Result<f64> {
    if n <= EXACT_LIMIT {
        return Ok(expected_iota_exact(d, n)?.to_f64());
    }
    if d == 0 {
        return Ok(0.0);
    }
    let args: Vec<f64> = (1..d)
        .map(|i| {
            // small terms first
            let s = (d as u64..=n).rev().fold(0.0, |acc, k| acc + (k as f64).powi(-(i as i32)));
            s * factorial_f64(i as u64 - 1)
        })
        .collect();
    Ok(complete_bell(&args, |v| v as f64))
}

/// `E γ_{d,n} = Σ_{k=0}^d C(d, k) E ι_{k,n}` exactly.
pub fn expected_gamma_exact(d: u32, n: u64) -> Result<ExactRational> {
    check_exact_range(n)?;
    let mut acc = ExactRational::zero();
    for k in 0..=d {
        let c = ExactRational::from_big(binomial_big(d as u64, k as u64));
        acc = acc + c * expected_iota_exact(k, n)?;
    }
    Ok(acc)
}

/// `E γ_{d,n}` in floating point.
pub fn expected_gamma(d: u32, n: u64) -> Result<f64> {
    if n <= EXACT_LIMIT {
        return Ok(expected_gamma_exact(d, n)?.to_f64());
    }
    let mut acc = 0.0;
    for k in 0..=d {
        acc += binomial_f64(d as u64, k as u64) * expected_iota(k, n)?;
    }
    Ok(acc)
}

/// `E ι_{d,n}` from its integral representation, reduced to one dimension
/// through the density of a product of `d` uniforms:
/// `n^(d)/(d-1)! ∫_0^1 u^{d-1} (1-u)^{n-d} (-ln u)^{d-1} du`.
pub fn iota_quadrature(d: u32, n: u64) -> Result<QuadratureResult> {
    if d == 0 || n < d as u64 {
        return Err(Error::InvalidArgument("iota quadrature needs n >= d >= 1".into()));
    }
    let k = (d - 1) as i32;
    let tail = (n - d as u64) as f64;
    let f = move |u: f64| {
        if u <= 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let body = u.powi(k) * (-u.ln()).powi(k);
        if u >= 1.0 {
            return if tail == 0.0 { body } else { 0.0 };
        }
        body * (tail * (-u).ln_1p()).exp()
    };
    let nf = n as f64;
    let cuts = [1.0 / nf, 5.0 / nf, 20.0 / nf, 80.0 / nf];
    let r = integrate(f, 0.0, 1.0, &cuts, Tolerance::default())?;
    let falling = (0..d as u64).fold(1.0, |acc, i| acc * (n - i) as f64);
    Ok(r.scale(falling / factorial_f64(k as u64)))
}

/// Threshold above which [`expected_rho_truncated`] integrates in `z = n e^{-y}`.
pub const Z_SUBSTITUTION_ABOVE: u64 = 10_000;

/// `E ρ_n(b) = n/(d-1)! ∫_0^b y^{d-1} e^{-y} (1 - e^{-y})^{n-1} dy`,
/// the expected number of remaining records with coordinate sum `<= b`.
/// `b` may be `+∞`.
pub fn expected_rho_truncated(d: u32, n: u64, b: f64) -> Result<QuadratureResult> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("need d >= 1 and n >= 1".into()));
    }
    if b.is_nan() || b < 0.0 {
        return Err(Error::InvalidArgument(format!("threshold must be >= 0, got {b}")));
    }
    if b == 0.0 {
        return Ok(QuadratureResult::zero());
    }
    if n > Z_SUBSTITUTION_ABOVE {
        expected_rho_truncated_z(d, n, b)
    } else {
        expected_rho_truncated_y(d, n, b)
    }
}

/// Integrand beyond `y = ln n + TAIL_CUT` is below `e^{-TAIL_CUT}` relative.
const TAIL_CUT: f64 = 60.0;

pub(crate) fn expected_rho_truncated_y(d: u32, n: u64, b: f64) -> Result<QuadratureResult> {
    let k = (d - 1) as i32;
    let nf = n as f64;
    let ln_n = nf.ln();
    let hi = b.min(ln_n + TAIL_CUT);
    let lo = (ln_n - 5.0).max(0.0).min(hi);
    let m = (n - 1) as f64;
    let f = move |y: f64| {
        let body = y.powi(k) * (-y).exp();
        if m == 0.0 {
            return body;
        }
        body * (m * (-(-y).exp()).ln_1p()).exp()
    };
    let cuts = [ln_n - 2.0, ln_n, ln_n + 2.0, ln_n + 8.0];
    let r = integrate(f, lo, hi, &cuts, Tolerance::default())?;
    Ok(r.scale(nf / factorial_f64(k as u64)))
}

pub(crate) fn expected_rho_truncated_z(d: u32, n: u64, b: f64) -> Result<QuadratureResult> {
    let k = (d - 1) as i32;
    let nf = n as f64;
    let ln_n = nf.ln();
    let z_lo = (ln_n - b.min(ln_n + TAIL_CUT)).exp();
    let z_hi = nf.min(200.0);
    if z_lo >= z_hi {
        return Ok(QuadratureResult::zero());
    }
    let m = (n - 1) as f64;
    let f = move |z: f64| (ln_n - z.ln()).powi(k) * (m * (-z / nf).ln_1p()).exp();
    let cuts = [1e-12, 1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0, 60.0];
    let r = integrate(f, z_lo, z_hi, &cuts, Tolerance::default())?;
    Ok(r.scale(1.0 / factorial_f64(k as u64)))
}

/// `J_j(x) = ∫_x^∞ (ln z)^j e^{-z} dz` for `x > 0`.
pub fn j_integral(j: u32, x: f64) -> Result<QuadratureResult> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidArgument(format!("J_j needs finite x > 0, got {x}")));
    }
    let j = j as i32;
    let mut total = QuadratureResult::zero();
    if x < 1.0 {
        // z = e^{-s} on (x, 1): ∫_0^{-ln x} (-s)^j e^{-s} e^{-e^{-s}} ds
        let s_hi = -x.ln();
        let f = move |s: f64| (-s).powi(j) * (-s - (-s).exp()).exp();
        let cuts = [1.0, 5.0, 20.0, 50.0];
        total = total + integrate(f, 0.0, s_hi, &cuts, Tolerance::default())?;
    }
    let start = x.max(1.0);
    let f = move |z: f64| z.ln().powi(j) * (-z).exp();
    let end = start + TAIL_CUT + 10.0 * j as f64;
    let cuts = [start + 1.0, start + 5.0, start + 20.0];
    total = total + integrate(f, start, end, &cuts, Tolerance::default())?;
    Ok(total)
}
