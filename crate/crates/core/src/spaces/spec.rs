use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, qvec, Q};
use crate::seqcore::Shape;

/// An exponent in `(0, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Q),
    Infinity,
}

impl Exponent {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
            (Exponent::Finite(_), Exponent::Infinity) => Ordering::Less,
            (Exponent::Infinity, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Infinity, Exponent::Infinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{}", format_q(p)),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p = parse_q(other)?;
                if !p.is_positive() {
                    return Err(Error::InvalidSpace(format!("exponent {other} is not positive")));
                }
                Ok(Exponent::Finite(p))
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = crate::scalar::StringOrNumber::deserialize(d)?;
        raw.0.parse().map_err(serde::de::Error::custom)
    }
}

/// Weights `w` of the functional `x ↦ Σ w_j x_j` on `ℓ₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelWeights {
    /// `w_j = 1` for every `j`.
    Ones,
    /// `w_j` as listed, zero beyond the list.
    Explicit(Vec<Q>),
}

impl KernelWeights {
    pub fn weight(&self, j: u64) -> Q {
        match self {
            KernelWeights::Ones => Q::one(),
            KernelWeights::Explicit(w) => w
                .get(j as usize - 1)
                .cloned()
                .unwrap_or_else(|| Q::from_integer(0.into())),
        }
    }
}

impl Serialize for KernelWeights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KernelWeights::Ones => s.serialize_str("ones"),
            KernelWeights::Explicit(w) => qvec::serialize(w, s),
        }
    }
}

impl<'de> Deserialize<'de> for KernelWeights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) if s == "ones" => Ok(KernelWeights::Ones),
            serde_json::Value::Array(_) => {
                let w = qvec::deserialize(v).map_err(serde::de::Error::custom)?;
                Ok(KernelWeights::Explicit(w))
            }
            other => Err(serde::de::Error::custom(format!(
                "kernel weights must be \"ones\" or a list, got {other}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceKind {
    Lp { p: Exponent },
    C0,
    C,
    C00,
    /// `{x ∈ ℓ₁ : Σ w_j x_j = 0}`.
    Kernel { weights: KernelWeights },
}

fn is_scalar(s: &Shape) -> bool {
    *s == Shape::Scalar
}

fn scalar_shape() -> Shape {
    Shape::Scalar
}

/// A sequence space `E` of `X`-valued sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub kind: SpaceKind,
    #[serde(default = "scalar_shape", skip_serializing_if = "is_scalar")]
    pub values: Shape,
}

impl SpaceSpec {
    pub fn new(kind: SpaceKind) -> Self {
        SpaceSpec {
            kind,
            values: Shape::Scalar,
        }
    }

    pub fn lp(p: Q) -> Self {
        assert!(p.is_positive(), "ℓ_p needs p > 0");
        Self::new(SpaceKind::Lp {
            p: Exponent::Finite(p),
        })
    }

    pub fn linf() -> Self {
        Self::new(SpaceKind::Lp {
            p: Exponent::Infinity,
        })
    }

    pub fn c0() -> Self {
        Self::new(SpaceKind::C0)
    }

    pub fn c() -> Self {
        Self::new(SpaceKind::C)
    }

    pub fn c00() -> Self {
        Self::new(SpaceKind::C00)
    }

    pub fn kernel_ones() -> Self {
        Self::new(SpaceKind::Kernel {
            weights: KernelWeights::Ones,
        })
    }

    pub fn with_values(mut self, values: Shape) -> Self {
        self.values = values;
        self
    }

    /// `s` with the norm `s`-subadditive: `min(p, 1)` for `ℓ_p`, else 1.
    pub fn quasi_exponent(&self) -> Q {
        match &self.kind {
            SpaceKind::Lp {
                p: Exponent::Finite(p),
            } if *p < Q::one() => p.clone(),
            _ => Q::one(),
        }
    }

    pub fn is_banach(&self) -> bool {
        self.quasi_exponent().is_one() && self.kind != SpaceKind::C00
    }

    pub fn lp_exponent(&self) -> Option<&Exponent> {
        match &self.kind {
            SpaceKind::Lp { p } => Some(p),
            _ => None,
        }
    }

    /// Subsequence-closed, invariant, contains `c₀₀`: the built-in `ℓ_p` and `c₀`.
    pub fn is_strongly_invariant_builtin(&self) -> bool {
        matches!(self.kind, SpaceKind::Lp { .. } | SpaceKind::C0)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpaceKind::Lp { p } => write!(f, "lp:{p}")?,
            SpaceKind::C0 => write!(f, "c0")?,
            SpaceKind::C => write!(f, "c")?,
            SpaceKind::C00 => write!(f, "c00")?,
            SpaceKind::Kernel {
                weights: KernelWeights::Ones,
            } => write!(f, "kernel")?,
            SpaceKind::Kernel {
                weights: KernelWeights::Explicit(w),
            } => write!(
                f,
                "kernel:{}",
                w.iter().map(format_q).collect::<Vec<_>>().join(",")
            )?,
        }
        if let Shape::Vector(v) = &self.values {
            write!(f, "({}^{}, {})", "K", v.dim, v.norm)?;
        }
        Ok(())
    }
}

/// Short syntax: `lp:2`, `lp:1/2`, `lp:inf`, `c0`, `c`, `c00`, `kernel`,
/// `kernel:1,-1,2`.
impl FromStr for SpaceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let kind = match (head, arg) {
            ("lp" | "l", Some(p)) => SpaceKind::Lp { p: p.parse()? },
            ("c0", None) => SpaceKind::C0,
            ("c", None) => SpaceKind::C,
            ("c00", None) => SpaceKind::C00,
            ("kernel", None | Some("ones")) => SpaceKind::Kernel {
                weights: KernelWeights::Ones,
            },
            ("kernel", Some(list)) => SpaceKind::Kernel {
                weights: KernelWeights::Explicit(
                    list.split(',').map(parse_q).collect::<Result<Vec<_>>>()?,
                ),
            },
            _ => return Err(Error::Parse(format!("unknown space {s:?}"))),
        };
        Ok(SpaceSpec::new(kind))
    }
}

/// Position of a family member in the inclusion order
/// `ℓ_p (p ↑) ⊂ c₀ ⊂ ℓ_∞`.
fn inclusion_rank(s: &SpaceSpec) -> Option<(u8, Option<Q>)> {
    match &s.kind {
        SpaceKind::Lp {
            p: Exponent::Finite(p),
        } => Some((0, Some(p.clone()))),
        SpaceKind::C0 => Some((1, None)),
        SpaceKind::Lp {
            p: Exponent::Infinity,
        } => Some((2, None)),
        _ => None,
    }
}

/// A family of spaces totally ordered by inclusion, smallest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SpaceSpec>", into = "Vec<SpaceSpec>")]
pub struct NestedFamily {
    members: Vec<SpaceSpec>,
}

impl NestedFamily {
    pub fn new(mut members: Vec<SpaceSpec>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::NotNested("a family needs at least one member".into()));
        }
        for m in &members {
            if inclusion_rank(m).is_none() {
                return Err(Error::NotNested(format!(
                    "{m} is not a strongly invariant built-in (lp or c0)"
                )));
            }
            if m.values != members[0].values {
                return Err(Error::NotNested("members take values in different spaces".into()));
            }
        }
        members.sort_by_key(|m| inclusion_rank(m).expect("checked"));
        members.dedup();
        Ok(NestedFamily { members })
    }

    pub fn members(&self) -> &[SpaceSpec] {
        &self.members
    }

    /// The largest member; escaping it escapes the union.
    pub fn maximal(&self) -> &SpaceSpec {
        self.members.last().expect("nonempty")
    }

    /// `a ⊂ b` in the declared order.
    pub fn contained(a: &SpaceSpec, b: &SpaceSpec) -> Option<bool> {
        Some(inclusion_rank(a)? <= inclusion_rank(b)?)
    }

    pub fn with_values(&self, values: Shape) -> Self {
        NestedFamily {
            members: self
                .members
                .iter()
                .map(|m| m.clone().with_values(values.clone()))
                .collect(),
        }
    }
}

impl TryFrom<Vec<SpaceSpec>> for NestedFamily {
    type Error = Error;
    fn try_from(v: Vec<SpaceSpec>) -> Result<Self> {
        NestedFamily::new(v)
    }
}

impl From<NestedFamily> for Vec<SpaceSpec> {
    fn from(f: NestedFamily) -> Self {
        f.members
    }
}

impl fmt::Display for NestedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.members.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", names.join(" ⊂ "))
    }
}
