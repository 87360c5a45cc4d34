//! Scalars used as sequence coordinates.
//!
//! Certificate-producing code runs on exact values: rationals, and real
//! radicals `c * r^(1/n)` which appear as soon as a fractional power map is
//! applied to a rational. Float and complex values exist for experiments and
//! carry the field's declared epsilon.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Exact rational numbers.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(n.into(), d.into())
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(n.into())
}

/// Parses `"3"`, `"-1/2"`, `"1.5"` or `"2.5e-3"` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let l = ln_abs_q(x);
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * l.exp()
}

/// Natural log of |x| for a nonzero rational, robust to huge numerators.
pub fn ln_abs_q(x: &Q) -> f64 {
    ln_abs_int(x.numer()) - ln_abs_int(x.denom())
}

fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(1.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact value of a finite float.
pub fn q_from_f64(x: f64) -> Option<Q> {
    BigRational::from_float(x)
}

fn pow_q(base: &Q, e: u32) -> Q {
    num_traits::pow(base.clone(), e as usize)
}

fn int_nth_root_exact(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

fn q_nth_root_exact(x: &Q, k: u32) -> Option<Q> {
    let n = int_nth_root_exact(x.numer(), k)?;
    let d = int_nth_root_exact(x.denom(), k)?;
    Some(BigRational::new(n, d))
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    a / gcd_u32(a, b) * b
}

const MAX_RADICAL_INDEX: u32 = 64;

/// A real number `coeff * radicand^(1/index)` with `radicand > 0`.
#[derive(Clone, Debug)]
pub struct Radical {
    coeff: Q,
    radicand: Q,
    index: u32,
}

impl Radical {
    /// Builds `coeff * radicand^(1/index)`, reducing to a rational when the
    /// radicand is a perfect power.
    pub fn build(coeff: Q, radicand: Q, index: u32) -> Scalar {
        assert!(index >= 1, "radical index must be positive");
        assert!(radicand.is_positive(), "radicand must be positive");
        if coeff.is_zero() {
            return Scalar::Rational(Q::zero());
        }
        let mut radicand = radicand;
        let mut index = index;
        let mut p = 2;
        while p <= index {
            while index % p == 0 {
                match q_nth_root_exact(&radicand, p) {
                    Some(root) => {
                        radicand = root;
                        index /= p;
                    }
                    None => break,
                }
            }
            p += 1;
        }
        if index == 1 {
            return Scalar::Rational(coeff * radicand);
        }
        if radicand.is_one() {
            return Scalar::Rational(coeff);
        }
        Scalar::Radical(Radical {
            coeff,
            radicand,
            index,
        })
    }

    pub fn coeff(&self) -> &Q {
        &self.coeff
    }

    pub fn radicand(&self) -> &Q {
        &self.radicand
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn to_f64(&self) -> f64 {
        let mag = (ln_abs_q(&self.radicand) / self.index as f64).exp();
        q_to_f64(&self.coeff) * mag
    }

    /// `|value|^L` as an exact rational, for `L` a multiple of the index.
    fn abs_pow(&self, l: u32) -> Q {
        debug_assert!(l % self.index == 0);
        pow_q(&self.coeff.abs(), l) * pow_q(&self.radicand, l / self.index)
    }

    fn signum(&self) -> i32 {
        if self.coeff.is_negative() {
            -1
        } else {
            1
        }
    }
}

/// Exact real viewed as a radical (rationals have index 1).
fn as_radical(s: &Scalar) -> Option<Radical> {
    match s {
        Scalar::Rational(x) => Some(Radical {
            coeff: x.clone(),
            radicand: Q::one(),
            index: 1,
        }),
        Scalar::Radical(r) => Some(r.clone()),
        _ => None,
    }
}

/// A coordinate value.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(Q),
    Radical(Radical),
    Float(f64),
    Complex(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Q::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Q::one())
    }

    pub fn from_q(x: Q) -> Self {
        Scalar::Rational(x)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(x) => x.is_zero(),
            Scalar::Radical(_) => false,
            Scalar::Float(x) => *x == 0.0,
            Scalar::Complex(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Rational(_) | Scalar::Radical(_))
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Scalar::Complex(_))
    }

    /// Real value as a float; the real part for complex scalars.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(x) => q_to_f64(x),
            Scalar::Radical(r) => r.to_f64(),
            Scalar::Float(x) => *x,
            Scalar::Complex(z) => z.re,
        }
    }

    /// Exact rational value when one exists. Floats convert to their exact
    /// dyadic value.
    pub fn to_rational(&self) -> Option<Q> {
        match self {
            Scalar::Rational(x) => Some(x.clone()),
            Scalar::Radical(_) => None,
            Scalar::Float(x) => q_from_f64(*x),
            Scalar::Complex(z) if z.im == 0.0 => q_from_f64(z.re),
            Scalar::Complex(_) => None,
        }
    }

    fn to_complex(&self) -> Complex64 {
        match self {
            Scalar::Complex(z) => *z,
            other => Complex64::new(other.to_f64(), 0.0),
        }
    }

    /// Absolute value (modulus for complex scalars); never complex.
    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rational(x) => Scalar::Rational(x.abs()),
            Scalar::Radical(r) => Scalar::Radical(Radical {
                coeff: r.coeff.abs(),
                ..r.clone()
            }),
            Scalar::Float(x) => Scalar::Float(x.abs()),
            Scalar::Complex(z) => Scalar::Float(z.norm()),
        }
    }

    /// `|self|^r` for rational `r > 0`; exact on exact inputs where the
    /// radical stays small.
    pub fn abs_pow(&self, r: &Q) -> Scalar {
        assert!(r.is_positive(), "exponent must be positive");
        if self.is_zero() {
            return Scalar::zero();
        }
        match self {
            Scalar::Rational(_) | Scalar::Radical(_) => {
                let rad = as_radical(self).expect("exact");
                let u = r.numer().to_u32();
                let v = r.denom().to_u32();
                if let (Some(u), Some(v)) = (u, v) {
                    let index = rad.index.saturating_mul(v);
                    if u <= 64 && index <= MAX_RADICAL_INDEX {
                        let base = pow_q(&rad.coeff.abs(), rad.index) * rad.radicand.clone();
                        return Radical::build(Q::one(), pow_q(&base, u), index);
                    }
                }
                Scalar::Float(self.to_f64().abs().powf(q_to_f64(r)))
            }
            Scalar::Float(x) => Scalar::Float(x.abs().powf(q_to_f64(r))),
            Scalar::Complex(z) => Scalar::Float(z.norm().powf(q_to_f64(r))),
        }
    }

    /// Sign of a real scalar as -1, 0 or 1; the unit phase for complex ones
    /// is handled by [`Scalar::unit_phase`].
    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Rational(x) => {
                if x.is_zero() {
                    0
                } else if x.is_negative() {
                    -1
                } else {
                    1
                }
            }
            Scalar::Radical(r) => r.signum(),
            Scalar::Float(x) => {
                if *x == 0.0 {
                    0
                } else if *x < 0.0 {
                    -1
                } else {
                    1
                }
            }
            Scalar::Complex(z) => {
                if z.re == 0.0 && z.im == 0.0 {
                    0
                } else {
                    1
                }
            }
        }
    }

    /// `z / |z|` for complex scalars, `None` otherwise or at zero.
    pub fn unit_phase(&self) -> Option<Complex64> {
        match self {
            Scalar::Complex(z) if z.norm() > 0.0 => Some(z / z.norm()),
            _ => None,
        }
    }

    /// Exact equality when both sides are exact, `None` otherwise.
    pub fn exact_eq(&self, other: &Scalar) -> Option<bool> {
        self.exact_cmp(other).map(|o| o == Ordering::Equal)
    }

    /// Exact ordering of two exact reals.
    pub fn exact_cmp(&self, other: &Scalar) -> Option<Ordering> {
        let a = as_radical(self)?;
        let b = as_radical(other)?;
        let sa = if a.coeff.is_zero() { 0 } else { a.signum() };
        let sb = if b.coeff.is_zero() { 0 } else { b.signum() };
        if sa != sb || sa == 0 {
            return Some(sa.cmp(&sb));
        }
        let l = lcm_u32(a.index, b.index);
        let ord = a.abs_pow(l).cmp(&b.abs_pow(l));
        Some(if sa < 0 { ord.reverse() } else { ord })
    }

    /// Ordering of real scalars, exact where possible.
    pub fn real_cmp(&self, other: &Scalar) -> Ordering {
        match self.exact_cmp(other) {
            Some(o) => o,
            None => self
                .to_f64()
                .partial_cmp(&other.to_f64())
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Equality up to a relative epsilon; exact values compare exactly.
    pub fn approx_eq(&self, other: &Scalar, eps: f64) -> bool {
        if let Some(b) = self.exact_eq(other) {
            return b;
        }
        let a = self.to_complex();
        let b = other.to_complex();
        let scale = 1.0f64.max(a.norm()).max(b.norm());
        (a - b).norm() <= eps * scale
    }

    pub fn max_real(self, other: Scalar) -> Scalar {
        if other.real_cmp(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match self.exact_eq(other) {
            Some(b) => b,
            None => self.to_complex() == other.to_complex(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(x) => write!(f, "{}", format_q(x)),
            Scalar::Radical(r) => {
                if r.coeff.is_one() {
                    write!(f, "({})^(1/{})", format_q(&r.radicand), r.index)
                } else {
                    write!(
                        f,
                        "{}*({})^(1/{})",
                        format_q(&r.coeff),
                        format_q(&r.radicand),
                        r.index
                    )
                }
            }
            Scalar::Float(x) => write!(f, "{x:e}"),
            Scalar::Complex(z) => write!(f, "{:e}{:+e}i", z.re, z.im),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if rhs.is_zero() && !self.is_complex() {
            return self.clone();
        }
        if self.is_zero() && !rhs.is_complex() {
            return rhs.clone();
        }
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Radical(a), Scalar::Radical(b))
                if a.index == b.index && a.radicand == b.radicand =>
            {
                Radical::build(&a.coeff + &b.coeff, a.radicand.clone(), a.index)
            }
            (Scalar::Complex(_), _) | (_, Scalar::Complex(_)) => {
                Scalar::Complex(self.to_complex() + rhs.to_complex())
            }
            _ => Scalar::Float(self.to_f64() + rhs.to_f64()),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Radical(r) => Scalar::Radical(Radical {
                coeff: -&r.coeff,
                ..r.clone()
            }),
            Scalar::Float(x) => Scalar::Float(-x),
            Scalar::Complex(z) => Scalar::Complex(-z),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if (self.is_zero() && !rhs.is_complex()) || (rhs.is_zero() && !self.is_complex()) {
            return Scalar::zero();
        }
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Complex(_), _) | (_, Scalar::Complex(_)) => {
                Scalar::Complex(self.to_complex() * rhs.to_complex())
            }
            (Scalar::Float(_), _) | (_, Scalar::Float(_)) => {
                Scalar::Float(self.to_f64() * rhs.to_f64())
            }
            _ => {
                let a = as_radical(self).expect("exact");
                let b = as_radical(rhs).expect("exact");
                let l = lcm_u32(a.index, b.index);
                if l > MAX_RADICAL_INDEX {
                    return Scalar::Float(self.to_f64() * rhs.to_f64());
                }
                let radicand =
                    pow_q(&a.radicand, l / a.index) * pow_q(&b.radicand, l / b.index);
                Radical::build(&a.coeff * &b.coeff, radicand, l)
            }
        }
    }
}

/// How coordinate values are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldMode {
    RealRational,
    RealFloat,
    ComplexFloat,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub mode: FieldMode,
    pub epsilon: f64,
}

impl Default for ScalarField {
    fn default() -> Self {
        ScalarField {
            mode: FieldMode::RealRational,
            epsilon: 1e-12,
        }
    }
}

impl ScalarField {
    pub fn rational() -> Self {
        Self::default()
    }

    pub fn float() -> Self {
        ScalarField {
            mode: FieldMode::RealFloat,
            epsilon: 1e-12,
        }
    }

    pub fn complex() -> Self {
        ScalarField {
            mode: FieldMode::ComplexFloat,
            epsilon: 1e-12,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == FieldMode::RealRational
    }

    /// Represents an exact rational in this field.
    pub fn from_q(&self, x: Q) -> Scalar {
        match self.mode {
            FieldMode::RealRational => Scalar::Rational(x),
            FieldMode::RealFloat => Scalar::Float(q_to_f64(&x)),
            FieldMode::ComplexFloat => Scalar::Complex(Complex64::new(q_to_f64(&x), 0.0)),
        }
    }

    /// Represents a computed real in this field. Rational mode stores the
    /// exact dyadic value of the float.
    pub fn from_f64(&self, x: f64) -> Scalar {
        match self.mode {
            FieldMode::RealRational => {
                Scalar::Rational(q_from_f64(x).expect("finite coordinate value"))
            }
            FieldMode::RealFloat => Scalar::Float(x),
            FieldMode::ComplexFloat => Scalar::Complex(Complex64::new(x, 0.0)),
        }
    }
}

/// Serde helper for rationals written as strings like `"1/2"`.
pub mod qstr {
    use super::{format_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let raw = super::StringOrNumber::deserialize(d)?;
        parse_q(&raw.0).map_err(serde::de::Error::custom)
    }
}

/// Serde helper for lists of rationals.
pub mod qvec {
    use super::{format_q, parse_q, Q};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(xs.len()))?;
        for x in xs {
            seq.serialize_element(&format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw = Vec::<super::StringOrNumber>::deserialize(d)?;
        raw.into_iter()
            .map(|s| parse_q(&s.0).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Accepts either a JSON string or a JSON number.
pub(crate) struct StringOrNumber(pub String);

impl<'de> Deserialize<'de> for StringOrNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => Ok(StringOrNumber(s)),
            serde_json::Value::Number(n) => Ok(StringOrNumber(n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or numeric string, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3").unwrap(), qi(3));
        assert_eq!(parse_q("-1/2").unwrap(), q(-1, 2));
        assert_eq!(parse_q("1.5").unwrap(), q(3, 2));
        assert_eq!(parse_q("2.5e-1").unwrap(), q(1, 4));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("").is_err());
    }

    #[test]
    fn radical_reduces_perfect_powers() {
        let s = Scalar::Rational(q(9, 4)).abs_pow(&q(1, 2));
        assert_eq!(s, Scalar::Rational(q(3, 2)));
        let t = Scalar::Rational(qi(2)).abs_pow(&q(1, 2));
        assert!(matches!(t, Scalar::Radical(_)));
        let sq = &t * &t;
        assert_eq!(sq, Scalar::Rational(qi(2)));
    }

    #[test]
    fn radical_ordering_is_exact() {
        let r2 = Scalar::Rational(qi(2)).abs_pow(&q(1, 2));
        let r3 = Scalar::Rational(qi(3)).abs_pow(&q(1, 2));
        assert_eq!(r2.exact_cmp(&r3), Some(Ordering::Less));
        let neg = -&r3;
        assert_eq!(neg.exact_cmp(&r2), Some(Ordering::Less));
        assert_eq!(r2.exact_cmp(&Scalar::Rational(q(7, 5))), Some(Ordering::Greater));
    }

    #[test]
    fn homogeneity_of_fractional_power_is_exact() {
        let alpha = Scalar::Rational(qi(8));
        let x = Scalar::Rational(q(1, 3));
        let r = q(1, 2);
        let lhs = (&alpha * &x).abs_pow(&r);
        let rhs = &alpha.abs_pow(&r) * &x.abs_pow(&r);
        assert_eq!(lhs.exact_eq(&rhs), Some(true));
    }

    #[test]
    fn float_roundtrip_is_exact() {
        let x = 0.1f64;
        let r = q_from_f64(x).unwrap();
        assert_eq!(q_to_f64(&r), x);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = num_traits::pow(qi(2), 2000);
        let v = q_to_f64(&(Q::one() / big));
        assert_eq!(v, 0.0);
        assert!(ln_abs_q(&num_traits::pow(qi(2), 2000)) > 1386.0);
    }
}
