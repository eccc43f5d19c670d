//! Coefficient fields and the scalar functions f, g, α.
//!
//! Two backends share one trait: exact rationals (`BigRational`) for identity
//! testing and double-precision complex numbers (`Complex64`) for root
//! solving and eigenvector residuals.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            _ => Err(Error::ConfigError(format!("unknown backend '{s}'"))),
        }
    }
}

/// Field element usable by every module. Arithmetic is by value; the hot
/// loops go through `mul_add_assign`.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(p: i64, r: i64) -> Self;
    /// Multiplicative inverse, `None` for exact zero.
    fn inv(&self) -> Option<Self>;
    /// |x| as a double, used only for reporting and tolerance checks.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    fn render(&self) -> String;
    /// Equality used by genericity constraints: exact for rationals,
    /// relative 1e-9 for floats.
    fn approx_eq(&self, other: &Self) -> bool;
    /// Zero test used for rank decisions; `scale` is the size of the data.
    fn is_negligible(&self, scale: f64) -> bool;
    fn random_point(rng: &mut ChaCha8Rng, bound: i64) -> Self;
    fn parse(s: &str) -> Result<Self>;

    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let t = std::mem::replace(self, Self::zero());
        *self = t + a.clone() * b.clone();
    }

    fn checked_div(&self, d: &Self) -> Option<Self> {
        d.inv().map(|i| self.clone() * i)
    }

    fn powi(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc * base.clone();
        }
        Some(acc)
    }
}

pub type Rational = BigRational;

pub fn rational(p: i64, r: i64) -> Rational {
    BigRational::new(BigInt::from(p), BigInt::from(r))
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(p: i64, r: i64) -> Self {
        rational(p, r)
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn magnitude(&self) -> f64 {
        let a = self.abs();
        match a.to_f64() {
            Some(v) if v.is_finite() => v,
            _ => f64::MAX,
        }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
    fn random_point(rng: &mut ChaCha8Rng, bound: i64) -> Self {
        let mut p = 0;
        while p == 0 {
            p = rng.gen_range(-bound..=bound);
        }
        let r = rng.gen_range(1..=bound);
        rational(p, r)
    }
    fn parse(s: &str) -> Result<Self> {
        parse_rational(s)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::ConfigError(format!("cannot parse '{s}' as an exact rational"));
    if let Some((p, r)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let r: BigInt = r.trim().parse().map_err(|_| bad())?;
        if Zero::is_zero(&r) {
            return Err(bad());
        }
        return Ok(BigRational::new(p, r));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        // finite decimals are read exactly: 0.7 -> 7/10
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim().trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), fp.len());
        let v = BigRational::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn from_ratio(p: i64, r: i64) -> Self {
        Complex64::new(p as f64 / r as f64, 0.0)
    }
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn render(&self) -> String {
        if self.im == 0.0 {
            format!("{}", self.re)
        } else if self.im < 0.0 {
            format!("{}-{}i", self.re, -self.im)
        } else {
            format!("{}+{}i", self.re, self.im)
        }
    }
    fn approx_eq(&self, other: &Self) -> bool {
        (self - other).norm() <= 1e-9 * (1.0 + self.norm().max(other.norm()))
    }
    fn is_negligible(&self, scale: f64) -> bool {
        self.norm() <= 1e-10 * scale.max(1e-300)
    }
    fn random_point(rng: &mut ChaCha8Rng, _bound: i64) -> Self {
        // annulus pieces 0.35 ≤ |x| ≤ 0.85 or 1.2 ≤ |x| ≤ 2.8, uniform phase
        let r = if rng.gen_bool(0.5) {
            rng.gen_range(0.35..0.85)
        } else {
            rng.gen_range(1.2..2.8)
        };
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, phi)
    }
    fn parse(s: &str) -> Result<Self> {
        parse_complex(s)
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// Accepts "p/r", "1.5", "2i", "0.3-1.2i", "1e-3+4i".
fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::ConfigError(format!("cannot parse '{s}' as a number"));
    let real = |p: &str| -> Result<f64> {
        if p.contains('/') {
            parse_rational(p)?.to_f64().ok_or_else(bad)
        } else {
            p.parse::<f64>().map_err(|_| bad())
        }
    };
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            v => real(v)?,
        };
        return Ok(Complex64::new(real(re)?, im));
    }
    Ok(Complex64::new(real(&t)?, 0.0))
}

/// Deformation parameter, rank and sampling seed, with the f/g/α evaluators.
#[derive(Clone, Debug)]
pub struct FieldCtx<S> {
    n: usize,
    q: S,
    seed: u64,
    perturbation: Option<S>,
}

impl<S: Scalar> FieldCtx<S> {
    pub fn new(n: usize, q: S, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ConfigError("rank n must be positive".into()));
        }
        if q.is_zero() {
            return Err(Error::ConfigError("q must be nonzero".into()));
        }
        let lim = 2 * n as i32 + 4;
        for m in 1..=lim {
            let p = q.powi(m).expect("q nonzero");
            if p.approx_eq(&S::one()) {
                return Err(Error::ConfigError(format!(
                    "q^{m} = 1: q must not be a small root of unity"
                )));
            }
        }
        Ok(FieldCtx {
            n,
            q,
            seed,
            perturbation: None,
        })
    }

    /// Test hook: adds `delta` to the E^1_1⊗E^1_1 coefficient of R(x) and R^(+,+)(x).
    pub fn with_perturbation(mut self, delta: S) -> Self {
        self.perturbation = Some(delta);
        self
    }

    pub fn perturbation(&self) -> Option<&S> {
        self.perturbation.as_ref()
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn q(&self) -> &S {
        &self.q
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    pub fn qpow(&self, m: i32) -> S {
        self.q.powi(m).expect("q is nonzero by construction")
    }

    fn denom(&self, x: &S) -> Result<S> {
        let xi = x
            .inv()
            .ok_or_else(|| Error::ZeroArgument(format!("x = {}", x.render())))?;
        let d = x.clone() - xi;
        if d.is_zero() {
            return Err(Error::PoleError(format!("x^2 = 1 at x = {}", x.render())));
        }
        Ok(d)
    }

    /// f(x) = (xq − x⁻¹q⁻¹)/(x − x⁻¹)
    pub fn f(&self, x: &S) -> Result<S> {
        let d = self.denom(x)?;
        let xq = x.clone() * self.q.clone();
        let num = xq.clone() - xq.inv().expect("xq nonzero");
        Ok(num.checked_div(&d).expect("denominator checked"))
    }

    /// g(x) = x(q − q⁻¹)/(x − x⁻¹)
    pub fn g(&self, x: &S) -> Result<S> {
        let d = self.denom(x)?;
        let num = x.clone() * (self.q.clone() - self.qpow(-1));
        Ok(num.checked_div(&d).expect("denominator checked"))
    }

    /// α(x) = 1 + (q − q⁻¹)/(x − x⁻¹)
    pub fn alpha(&self, x: &S) -> Result<S> {
        let d = self.denom(x)?;
        let t = (self.q.clone() - self.qpow(-1))
            .checked_div(&d)
            .expect("denominator checked");
        Ok(S::one() + t)
    }

    /// 1/f(x), with FZero when f(x) vanishes.
    pub fn f_recip(&self, x: &S) -> Result<S> {
        let v = self.f(x)?;
        v.inv()
            .ok_or_else(|| Error::FZero(format!("f({}) = 0", x.render())))
    }
}

pub fn inverse<S: Scalar>(x: &S) -> Result<S> {
    x.inv()
        .ok_or_else(|| Error::ZeroArgument("inverse of zero".to_string()))
}

/// Genericity requirements for sampled points.
#[derive(Clone, Debug)]
pub enum Constraint<S> {
    /// x ≠ ±q^m for |m| ≤ max (m = 0 gives x² ≠ 1).
    QShifts { max: i32 },
    /// x·p⁻¹ ≠ ±q^m for every p and |m| ≤ max.
    RatioShifts { points: Vec<S>, max: i32 },
    /// Same as RatioShifts but against the points drawn earlier in the same call.
    PairwiseGeneric { max: i32 },
    /// Unsatisfiable; every draw is rejected.
    Everything,
}

impl<S: Scalar> Constraint<S> {
    /// Standard genericity for rank n: shifts up to 2n+4.
    pub fn generic(n: usize) -> Vec<Constraint<S>> {
        let max = 2 * n as i32 + 4;
        vec![
            Constraint::QShifts { max },
            Constraint::PairwiseGeneric { max },
        ]
    }
}

const DRAWS_PER_POINT: usize = 1000;

fn is_shift<S: Scalar>(ctx: &FieldCtx<S>, r: &S, max: i32) -> bool {
    (-max..=max).any(|m| {
        let p = ctx.qpow(m);
        r.approx_eq(&p) || r.approx_eq(&(-p))
    })
}

fn admissible<S: Scalar>(ctx: &FieldCtx<S>, x: &S, avoid: &[Constraint<S>], drawn: &[S]) -> bool {
    if x.is_zero() {
        return false;
    }
    avoid.iter().all(|c| match c {
        Constraint::QShifts { max } => !is_shift(ctx, x, *max),
        Constraint::RatioShifts { points, max } => points.iter().all(|p| match p.inv() {
            Some(pi) => !is_shift(ctx, &(x.clone() * pi), *max),
            None => true,
        }),
        Constraint::PairwiseGeneric { max } => drawn.iter().all(|p| match p.inv() {
            Some(pi) => !is_shift(ctx, &(x.clone() * pi), *max),
            None => true,
        }),
        Constraint::Everything => false,
    })
}

/// Draws `count` points from `rng`, each satisfying `avoid`.
pub fn sample_points_with<S: Scalar>(
    ctx: &FieldCtx<S>,
    rng: &mut ChaCha8Rng,
    count: usize,
    avoid: &[Constraint<S>],
    bound: i64,
) -> Result<Vec<S>> {
    let mut out: Vec<S> = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        let mut ok = false;
        for _ in 0..DRAWS_PER_POINT {
            draws += 1;
            let x = S::random_point(rng, bound);
            if admissible(ctx, &x, avoid, &out) {
                out.push(x);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::ExhaustedSampling(draws));
        }
    }
    Ok(out)
}

pub const DEFAULT_BOUND: i64 = 64;

/// Deterministic sample points from the context seed.
pub fn sample_points<S: Scalar>(
    ctx: &FieldCtx<S>,
    count: usize,
    avoid: &[Constraint<S>],
) -> Result<Vec<S>> {
    use rand::SeedableRng;
    if count == 0 {
        return Err(Error::ConfigError("count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed());
    sample_points_with(ctx, &mut rng, count, avoid, DEFAULT_BOUND)
}

/// A deformation parameter valid for rank n.
pub fn sample_q<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Result<S> {
    for _ in 0..DRAWS_PER_POINT {
        let q = S::random_point(rng, bound);
        if FieldCtx::new(n, q.clone(), 0).is_ok() {
            return Ok(q);
        }
    }
    Err(Error::ExhaustedSampling(DRAWS_PER_POINT))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(q: Rational) -> FieldCtx<Rational> {
        FieldCtx::new(2, q, 1).unwrap()
    }

    #[test]
    fn f_at_three_with_q_two() {
        // (6 - 1/6)/(3 - 1/3) = (35/6)/(8/3)
        let c = ctx(rational(2, 1));
        let expect = rational(35, 6) * rational(3, 8);
        assert_eq!(c.f(&rational(3, 1)).unwrap(), expect);
        assert_eq!(expect, rational(35, 16));
    }

    #[test]
    fn f_at_q_is_q_plus_inverse() {
        let c = ctx(rational(5, 3));
        let q = c.q().clone();
        assert_eq!(c.f(&q).unwrap(), q.clone() + q.recip());
    }

    #[test]
    fn alpha_special_values() {
        let c = ctx(rational(5, 3));
        let q = c.q().clone();
        assert!(Scalar::is_zero(&c.alpha(&q.recip()).unwrap()));
        assert_eq!(c.alpha(&q).unwrap(), rational(2, 1));
    }

    #[test]
    fn poles_and_zero_argument() {
        let c = ctx(rational(5, 3));
        assert!(matches!(c.f(&rational(1, 1)), Err(Error::PoleError(_))));
        assert!(matches!(c.g(&rational(-1, 1)), Err(Error::PoleError(_))));
        assert!(matches!(c.alpha(&rational(1, 1)), Err(Error::PoleError(_))));
        assert!(matches!(c.f(&rational(0, 1)), Err(Error::ZeroArgument(_))));
    }

    #[test]
    fn root_of_unity_q_rejected() {
        assert!(FieldCtx::new(1, rational(-1, 1), 0).is_err());
        assert!(FieldCtx::new(1, rational(1, 1), 0).is_err());
        assert!(FieldCtx::new(1, Complex64::new(0.0, 1.0), 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let c = ctx(rational(7, 5));
        let avoid = Constraint::generic(2);
        let a = sample_points(&c, 20, &avoid).unwrap();
        let b = sample_points(&c, 20, &avoid).unwrap();
        assert_eq!(a, b);
        for (i, x) in a.iter().enumerate() {
            assert!(c.f(x).is_ok());
            for y in &a[..i] {
                assert_ne!(x, y);
            }
        }
        let three = sample_points(&ctx(rational(7, 5)), 3, &avoid).unwrap();
        assert_eq!(three.len(), 3);
    }

    #[test]
    fn unsatisfiable_constraint_exhausts() {
        let c = ctx(rational(7, 5));
        let r = sample_points(&c, 1, &[Constraint::Everything]);
        assert!(matches!(r, Err(Error::ExhaustedSampling(_))));
    }

    #[test]
    fn parse_inputs() {
        assert_eq!(Rational::parse("7/10").unwrap(), rational(7, 10));
        assert_eq!(Rational::parse("0.7").unwrap(), rational(7, 10));
        assert_eq!(Rational::parse("-1.25").unwrap(), rational(-5, 4));
        assert_eq!(Rational::parse("3").unwrap(), rational(3, 1));
        assert!(Rational::parse("1/0").is_err());
        assert_eq!(Complex64::parse("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(
            Complex64::parse("0.5-1.5i").unwrap(),
            Complex64::new(0.5, -1.5)
        );
        assert_eq!(
            Complex64::parse("1e-3+4i").unwrap(),
            Complex64::new(1e-3, 4.0)
        );
        assert_eq!(Complex64::parse("7/10").unwrap(), Complex64::new(0.7, 0.0));
        let z = Complex64::new(-0.25, 1.0 / 3.0);
        assert_eq!(Complex64::parse(&z.render()).unwrap(), z);
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-64i64..=64, 1i64..=64)
            .prop_filter("nonzero", |(p, _)| *p != 0)
            .prop_map(|(p, r)| rational(p, r))
    }

    fn admissible_pair() -> impl Strategy<Value = (Rational, Rational)> {
        (small_rational(), small_rational()).prop_filter("generic", |(q, x)| {
            let one = rational(1, 1);
            let c = match FieldCtx::new(1, q.clone(), 0) {
                Ok(c) => c,
                Err(_) => return false,
            };
            let xq = x.clone() * q.clone();
            x.clone() * x.clone() != one
                && c.f(&x.recip()).is_ok()
                && xq.clone() * xq != one
                && c.f(&(x.clone() * q.recip())).is_ok()
        })
    }

    proptest! {
        #[test]
        fn f_plus_f_inverse((q, x) in admissible_pair()) {
            let c = FieldCtx::new(1, q.clone(), 0).unwrap();
            let lhs = c.f(&x).unwrap() + c.f(&x.recip()).unwrap();
            prop_assert_eq!(lhs, q.clone() + q.recip());
        }

        #[test]
        fn f_shift_times_f_inverse_is_one((q, x) in admissible_pair()) {
            let c = FieldCtx::new(1, q.clone(), 0).unwrap();
            let lhs = c.f(&(x.clone() * q.recip())).unwrap() * c.f(&x.recip()).unwrap();
            prop_assert_eq!(lhs, rational(1, 1));
        }

        #[test]
        fn g_identities((q, x) in admissible_pair()) {
            let c = FieldCtx::new(1, q.clone(), 0).unwrap();
            let sum = c.g(&x).unwrap() + c.g(&x.recip()).unwrap();
            prop_assert_eq!(sum, q.clone() - q.recip());
            let diff = c.f(&x).unwrap() - c.g(&x).unwrap();
            prop_assert_eq!(diff, q.recip());
        }
    }
}
