use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, Scalar, ScalarField, Q};

/// Norm on a finite-dimensional value space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VecNorm {
    /// `(Σ|v_i|^p)^(1/p)`, a quasi-norm when `p < 1`.
    P(Q),
    Sup,
}

impl fmt::Display for VecNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VecNorm::P(p) => write!(f, "{}", format_q(p)),
            VecNorm::Sup => write!(f, "sup"),
        }
    }
}

impl Serialize for VecNorm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VecNorm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = crate::scalar::StringOrNumber::deserialize(d)?.0;
        match s.as_str() {
            "sup" | "inf" | "max" => Ok(VecNorm::Sup),
            other => {
                let p = parse_q(other).map_err(serde::de::Error::custom)?;
                if !p.is_positive() {
                    return Err(serde::de::Error::custom("norm exponent must be positive"));
                }
                Ok(VecNorm::P(p))
            }
        }
    }
}

/// Finite-dimensional stand-in for a Banach value space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorSpaceSpec {
    pub dim: usize,
    pub norm: VecNorm,
}

impl VectorSpaceSpec {
    pub fn new(dim: usize, norm: VecNorm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("value space dimension must be positive".into()));
        }
        if let VecNorm::P(p) = &norm {
            if !p.is_positive() {
                return Err(Error::InvalidSpace("norm exponent must be positive".into()));
            }
        }
        Ok(VectorSpaceSpec { dim, norm })
    }

    pub fn sup(dim: usize) -> Self {
        VectorSpaceSpec::new(dim, VecNorm::Sup).expect("positive dimension")
    }

    pub fn p(dim: usize, p: Q) -> Self {
        VectorSpaceSpec::new(dim, VecNorm::P(p)).expect("valid p-norm")
    }

    pub fn norm(&self, v: &[Scalar]) -> Scalar {
        debug_assert_eq!(v.len(), self.dim);
        match &self.norm {
            VecNorm::Sup => v
                .iter()
                .map(Scalar::abs)
                .fold(Scalar::zero(), Scalar::max_real),
            VecNorm::P(p) => {
                let sum = v
                    .iter()
                    .map(|x| x.abs_pow(p))
                    .fold(Scalar::zero(), |acc, t| &acc + &t);
                if p.is_one() {
                    sum
                } else {
                    sum.abs_pow(&p.recip())
                }
            }
        }
    }

    /// Norm of a functional `v ↦ Σ φ_i v_i` in the dual of this space.
    /// Exact for the sup, 1 and sub-1 cases, float otherwise.
    pub fn dual_norm(&self, phi: &[Q]) -> Scalar {
        let abs: Vec<Scalar> = phi.iter().map(|c| Scalar::Rational(c.abs())).collect();
        match &self.norm {
            VecNorm::Sup => abs.iter().fold(Scalar::zero(), |acc, t| &acc + t),
            VecNorm::P(p) if *p <= Q::one() => {
                abs.into_iter().fold(Scalar::zero(), Scalar::max_real)
            }
            VecNorm::P(p) => {
                // Hölder conjugate q = p / (p - 1).
                let conj = p / (p - Q::one());
                let sum = abs
                    .iter()
                    .map(|x| x.abs_pow(&conj))
                    .fold(Scalar::zero(), |acc, t| &acc + &t);
                sum.abs_pow(&conj.recip())
            }
        }
    }

    /// Whether the dual unit ball is a polytope whose vertices are the
    /// ones enumerated by [`crate::weak::FunctionalFamily`].
    pub fn dual_ball_is_polytope(&self) -> bool {
        match &self.norm {
            VecNorm::Sup => true,
            VecNorm::P(p) => *p <= Q::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Scalar,
    Vector(VectorSpaceSpec),
}

/// What a sequence's coordinates are.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueKind {
    pub field: ScalarField,
    pub shape: Shape,
}

impl ValueKind {
    pub fn scalar(field: ScalarField) -> Self {
        ValueKind {
            field,
            shape: Shape::Scalar,
        }
    }

    pub fn vector(field: ScalarField, space: VectorSpaceSpec) -> Self {
        ValueKind {
            field,
            shape: Shape::Vector(space),
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Scalar => 1,
            Shape::Vector(v) => v.dim,
        }
    }

    pub fn zero(&self) -> Value {
        match &self.shape {
            Shape::Scalar => Value::Scalar(Scalar::zero()),
            Shape::Vector(v) => Value::Vector(vec![Scalar::zero(); v.dim]),
        }
    }

    /// `‖v‖_X` of a coordinate value.
    pub fn magnitude(&self, v: &Value) -> Scalar {
        match (&self.shape, v) {
            (Shape::Scalar, Value::Scalar(s)) => s.abs(),
            (Shape::Vector(space), Value::Vector(xs)) => space.norm(xs),
            (Shape::Vector(space), Value::Scalar(s)) if space.dim == 1 => s.abs(),
            (Shape::Scalar, Value::Vector(xs)) if xs.len() == 1 => xs[0].abs(),
            _ => panic!("value does not match its sequence kind"),
        }
    }

    /// Same shape, ignoring the scalar field.
    pub fn same_shape(&self, other: &ValueKind) -> bool {
        self.shape == other.shape
    }
}

/// A coordinate `x_j`: a scalar or a vector of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(Scalar),
    Vector(Vec<Scalar>),
}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Scalar(s) => s.is_zero(),
            Value::Vector(v) => v.iter().all(Scalar::is_zero),
        }
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            Value::Scalar(s) => Some(s),
            Value::Vector(_) => None,
        }
    }

    pub fn components(&self) -> &[Scalar] {
        match self {
            Value::Scalar(s) => std::slice::from_ref(s),
            Value::Vector(v) => v,
        }
    }

    pub fn scale(&self, c: &Scalar) -> Value {
        match self {
            Value::Scalar(s) => Value::Scalar(c * s),
            Value::Vector(v) => Value::Vector(v.iter().map(|x| c * x).collect()),
        }
    }

    pub fn add(&self, other: &Value) -> Result<Value> {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(a + b)),
            (Value::Vector(a), Value::Vector(b)) if a.len() == b.len() => Ok(Value::Vector(
                a.iter().zip(b).map(|(x, y)| x + y).collect(),
            )),
            _ => Err(Error::IncompatibleKinds(
                "cannot add values of different shapes".into(),
            )),
        }
    }

    /// Exact equality where both sides are exact.
    pub fn exact_eq(&self, other: &Value) -> Option<bool> {
        let a = self.components();
        let b = other.components();
        if a.len() != b.len() {
            return Some(false);
        }
        let mut all = true;
        for (x, y) in a.iter().zip(b) {
            match x.exact_eq(y) {
                Some(true) => {}
                Some(false) => return Some(false),
                None => all = false,
            }
        }
        if all {
            Some(true)
        } else {
            None
        }
    }

    pub fn approx_eq(&self, other: &Value, eps: f64) -> bool {
        let a = self.components();
        let b = other.components();
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, eps))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(s) => write!(f, "{s}"),
            Value::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Scalar(x) => x.serialize(s),
            Value::Vector(v) => v.serialize(s),
        }
    }
}
