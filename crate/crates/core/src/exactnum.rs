//! Exact arithmetic in Q(√2).
//!
//! Every horizontal distance in the supported model spaces lies in this
//! field: tree edges carry lengths in Q(√2) and diamond chords are 2 or √2.
//! Comparisons are decided by sign analysis on the rational coefficients, so
//! floating point only appears when a value is reported.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (positive denominator,
/// coprime parts).
pub type Rational = BigRational;

/// Parses `"p"` or `"p/q"` with optional sign.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let r = BigRational::from_str(s).ok()?;
    Some(r)
}

/// The number `a + b·√2` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QuadExt {
    a: Rational,
    b: Rational,
}

/// Arithmetic operation selector for [`quad_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Field arithmetic on two elements of Q(√2).
pub fn quad_arith(x: &QuadExt, y: &QuadExt, op: QuadOp) -> Result<QuadExt> {
    Ok(match op {
        QuadOp::Add => x + y,
        QuadOp::Sub => x - y,
        QuadOp::Mul => x * y,
        QuadOp::Div => x.checked_div(y)?,
    })
}

/// Exact total order on Q(√2) as a subfield of the reals.
pub fn quad_compare(x: &QuadExt, y: &QuadExt) -> Ordering {
    x.cmp(y)
}

/// Approximates `x` by an `f64`.
///
/// The result is within `2^-precision · max(1, |x|)` of the exact value for
/// every `precision` in `16..=52`; larger requests get the nearest `f64` the
/// format can hold. Use [`QuadExt::to_dyadic`] when more bits are needed.
pub fn quad_to_real(x: &QuadExt, precision: u32) -> f64 {
    debug_assert!(precision >= 16);
    x.to_f64()
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadExt { a, b }
    }

    pub fn zero() -> Self {
        QuadExt::default()
    }

    pub fn one() -> Self {
        QuadExt::from_integer(1)
    }

    pub fn sqrt2() -> Self {
        QuadExt::new(Rational::zero(), Rational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        QuadExt::from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        QuadExt::new(Rational::from_integer(n), Rational::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        QuadExt::new(r, Rational::zero())
    }

    /// `p/q` as an element with zero irrational part. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        QuadExt::from_rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Rational coefficient.
    pub fn a(&self) -> &Rational {
        &self.a
    }

    /// Coefficient of √2.
    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Field norm `a² − 2b²`; nonzero for every nonzero element.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(2))
    }

    pub fn conjugate(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone())
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (s, t) if s == t => s,
            (sa, _) => {
                // Opposite signs: the larger of a² and 2b² wins.
                let a2 = &self.a * &self.a;
                let b2 = &self.b * &self.b * Rational::from_integer(BigInt::from(2));
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                    Ordering::Equal => unreachable!("√2 is irrational"),
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let n = self.norm();
        Ok(QuadExt::new(&self.a / &n, -(&self.b / &n)))
    }

    pub fn checked_div(&self, rhs: &QuadExt) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        let k = Rational::from_integer(k.clone());
        QuadExt::new(&self.a * &k, &self.b * &k)
    }

    pub fn scale_rational(&self, k: &Rational) -> Self {
        QuadExt::new(&self.a * k, &self.b * k)
    }

    /// `floor(x · 2^shift)` up to an error of at most 2 units.
    fn scaled_floor_approx(&self, shift: u32) -> BigInt {
        let (an, ad) = (self.a.numer(), self.a.denom());
        let (bn, bd) = (self.b.numer(), self.b.denom());
        let den = ad * bd;
        let p = (an * bd) << shift;
        let r = (bn * ad) << shift;
        // floor(|r|·√2) = isqrt(2r²)
        let s = (BigInt::from(2) * &r * &r).sqrt();
        let s = if r.sign() == Sign::Minus { -s } else { s };
        (p + s).div_floor(&den)
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let mut k = self.scaled_floor_approx(0);
        while QuadExt::from_bigint(k.clone()) > *self {
            k -= 1;
        }
        while QuadExt::from_bigint(&k + 1) <= *self {
            k += 1;
        }
        k
    }

    /// Returns `(mantissa, shift)` with `|mantissa / 2^shift − x| ≤ 2^(2−shift)`
    /// where `shift = precision + 2`.
    pub fn to_dyadic(&self, precision: u32) -> (BigInt, u32) {
        let shift = precision + 2;
        (self.scaled_floor_approx(shift), shift)
    }

    /// Nearest-ish `f64`, computed from an exact high-precision floor so that
    /// cancellation in `a + b√2` costs no accuracy.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.is_rational() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        let mut shift = 64u32;
        loop {
            let n = self.scaled_floor_approx(shift);
            if n.bits() >= 62 || shift >= 4096 {
                let m = n.to_f64().unwrap_or(f64::NAN);
                return m * (2f64).powi(-(shift as i32).min(1022)) * pow2_tail(shift);
            }
            shift += 64 - n.bits() as u32 + 2;
        }
    }
}

// Splits 2^-shift for shifts beyond the normal exponent range.
fn pow2_tail(shift: u32) -> f64 {
    if shift > 1022 {
        (2f64).powi(-((shift - 1022) as i32))
    } else {
        1.0
    }
}

impl Ord for QuadExt {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl PartialOrd for QuadExt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a QuadExt> for &'a QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        let two = Rational::from_integer(BigInt::from(2));
        QuadExt::new(
            &self.a * &rhs.a + &self.b * &rhs.b * two,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a.clone(), -self.b.clone())
    }
}

impl Neg for QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a, -self.b)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $f(self, rhs: QuadExt) -> QuadExt { (&self).$f(&rhs) }
        }
        impl<'a> $tr<&'a QuadExt> for QuadExt {
            type Output = QuadExt;
            fn $f(self, rhs: &QuadExt) -> QuadExt { (&self).$f(rhs) }
        }
        impl<'a> $tr<QuadExt> for &'a QuadExt {
            type Output = QuadExt;
            fn $f(self, rhs: QuadExt) -> QuadExt { self.$f(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl std::iter::Sum for QuadExt {
    fn sum<I: Iterator<Item = QuadExt>>(iter: I) -> Self {
        iter.fold(QuadExt::zero(), |acc, x| acc + x)
    }
}

impl From<i64> for QuadExt {
    fn from(n: i64) -> Self {
        QuadExt::from_integer(n)
    }
}

/// Textual form `a + b r2` with `a`, `b` written as `p` or `p/q`.
impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {} r2", self.a, self.b)
    }
}

impl FromStr for QuadExt {
    type Err = Error;

    /// Accepts `a`, `b r2`, `a + b r2`, `a - b r2`, and `r2` with optional
    /// signs on each coefficient.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed Q(√2) value `{s}`"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let Some(head) = compact.strip_suffix("r2") else {
            return parse_rational(&compact)
                .map(QuadExt::from_rational)
                .ok_or_else(bad);
        };
        // Split before the sign that separates the two coefficients.
        let bytes = head.as_bytes();
        let split = (1..bytes.len())
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1].is_ascii_digit());
        let (rat, coef) = match split {
            Some(i) => (&head[..i], &head[i..]),
            None => ("0", head),
        };
        let a = parse_rational(rat).ok_or_else(bad)?;
        let coef = coef.strip_prefix('+').unwrap_or(coef);
        let b = match coef {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c if c.starts_with("--") || c.starts_with("-+") => {
                -parse_rational(&c[1..]).ok_or_else(bad)?
            }
            c => parse_rational(c).ok_or_else(bad)?,
        };
        Ok(QuadExt::new(a, b))
    }
}

impl Serialize for QuadExt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuadExt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact value plus its numeric rendering, as emitted in reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExactReal {
    pub exact: QuadExt,
    pub approx: f64,
}

impl From<&QuadExt> for ExactReal {
    fn from(x: &QuadExt) -> Self {
        ExactReal {
            exact: x.clone(),
            approx: x.to_f64(),
        }
    }
}

/// Rank of a list of vectors over Q(√2), by exact Gaussian elimination.
pub fn rank(rows: &[Vec<QuadExt>]) -> usize {
    let mut m: Vec<Vec<QuadExt>> = rows.to_vec();
    let cols = m.iter().map(Vec::len).max().unwrap_or(0);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i].get(c).is_none_or(QuadExt::is_zero)) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip().expect("pivot is nonzero");
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = &row[c] * &inv;
                for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                    *x = &*x - &(&factor * p);
                }
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(
            quad_arith(&q("1 + 1 r2"), &q("1 + 1 r2"), QuadOp::Mul).unwrap(),
            q("3 + 2 r2")
        );
        assert_eq!(
            quad_arith(&q("2"), &q("3 r2"), QuadOp::Add).unwrap(),
            q("2 + 3 r2")
        );
        let quotient = quad_arith(&q("3 + 2 r2"), &q("1 + 1 r2"), QuadOp::Div).unwrap();
        assert_eq!(quotient, q("1 + 1 r2"));
        // multiply back
        assert_eq!(&quotient * &q("1 + 1 r2"), q("3 + 2 r2"));
    }

    #[test]
    fn division_by_zero() {
        let err = quad_arith(&q("1"), &QuadExt::zero(), QuadOp::Div).unwrap_err();
        assert_eq!(err.to_string(), "zero divisor");
    }

    #[test]
    fn comparison_examples() {
        assert_eq!(quad_compare(&q("0 + 1 r2"), &q("1")), Ordering::Greater);
        assert_eq!(quad_compare(&q("3"), &q("2 r2")), Ordering::Greater);
        assert_eq!(
            quad_compare(&q("1 + 1 r2"), &q("1 + 1 r2")),
            Ordering::Equal
        );
        // 99 - 70√2 ≈ 0.00505 > 0 and 70√2 - 99 < 0
        assert!(q("99 - 70 r2").is_positive());
        assert!(q("-99 + 70 r2").is_negative());
    }

    #[test]
    fn real_approximations() {
        let r2 = quad_to_real(&q("0 + 1 r2"), 52);
        assert!((r2 - std::f64::consts::SQRT_2).abs() <= 2f64.powi(-52) * 1.5);
        assert_eq!(quad_to_real(&q("2 + 0 r2"), 52), 2.0);
        // 3 + 2√2 = 5.828427124746190097603377448419396157139343750753896146353...
        let x = quad_to_real(&q("3 + 2 r2"), 52);
        assert!((x - 5.828_427_124_746_19).abs() <= 2f64.powi(-52) * 5.83);
        // heavy cancellation stays accurate: 99 - 70√2 = 0.00505063388...
        let small = q("99 - 70 r2").to_f64();
        assert!((small - 0.005_050_633_883_346_584).abs() < 1e-17);
    }

    #[test]
    fn exact_floor() {
        assert_eq!(q("0 + 1 r2").floor(), BigInt::from(1));
        assert_eq!(q("-1 r2").floor(), BigInt::from(-2));
        assert_eq!(q("7/2").floor(), BigInt::from(3));
        assert_eq!(q("-7/2").floor(), BigInt::from(-4));
        assert_eq!(q("2 + 7 r2").floor(), BigInt::from(11)); // 11.899
        assert_eq!(q("4").floor(), BigInt::from(4));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("-1/2 + 0 r2"), QuadExt::ratio(-1, 2));
        assert_eq!(
            q("3 - 2 r2"),
            QuadExt::new(
                Rational::from_integer(3.into()),
                Rational::from_integer((-2).into())
            )
        );
        assert_eq!(q("3 + -2 r2"), q("3 - 2 r2"));
        assert_eq!(q("r2"), QuadExt::sqrt2());
        assert_eq!(q("-r2"), -QuadExt::sqrt2());
        assert_eq!(
            q("1/2 r2"),
            QuadExt::new(Rational::zero(), Rational::new(1.into(), 2.into()))
        );
        assert!("".parse::<QuadExt>().is_err());
        assert!("3 + x r2".parse::<QuadExt>().is_err());
        assert_eq!(q("4/6").to_string(), "2/3 + 0 r2");
    }

    #[test]
    fn rank_detects_dependence() {
        let v = |a: i64, b: i64| vec![QuadExt::from(a), QuadExt::from(b)];
        assert_eq!(rank(&[v(1, 0), v(0, 1)]), 2);
        assert_eq!(rank(&[v(1, 2), v(2, 4)]), 1);
        assert_eq!(rank(&[vec![QuadExt::sqrt2()], vec![QuadExt::from(2)]]), 1);
        assert_eq!(rank(&[]), 0);
    }
}
