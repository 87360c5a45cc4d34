//! Lazily evaluated sequences `x = (x_j)_{j≥1}`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::envelope::{Envelope, PowLogEnvelope};
use super::index::IndexSet;
use super::value::{Shape, Value, ValueKind, VectorSpaceSpec};
use crate::error::{Error, Result};
use crate::scalar::{format_q, q_to_f64, qstr, qvec, Scalar, ScalarField, Q};

pub type Generator = dyn Fn(u64) -> Result<Value> + Send + Sync;

/// What is known about where a sequence is nonzero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "n")]
pub enum SupportHint {
    /// Infinitely many nonzero coordinates.
    InfiniteSupport,
    /// Every coordinate beyond index `n` is zero.
    FiniteSupport(u64),
    Unknown,
}

/// Eventually periodic-geometric rational sequences: after `prefix`,
/// `x_{L + kP + i} = head[i-1]·ratio^k` for `1 ≤ i ≤ P`, `k ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    #[serde(with = "qvec")]
    pub prefix: Vec<Q>,
    #[serde(with = "qvec")]
    pub head: Vec<Q>,
    #[serde(with = "qstr")]
    pub ratio: Q,
}

impl Recurrence {
    pub fn new(prefix: Vec<Q>, head: Vec<Q>, ratio: Q) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::Parse("recurrence needs a nonempty period".into()));
        }
        Ok(Recurrence {
            prefix,
            head,
            ratio,
        })
    }

    pub fn value(&self, j: u64) -> Q {
        let l = self.prefix.len() as u64;
        if j <= l {
            return self.prefix[(j - 1) as usize].clone();
        }
        let t = j - l - 1;
        let p = self.head.len() as u64;
        let k = t / p;
        let h = &self.head[(t % p) as usize];
        if h.is_zero() || k == 0 {
            return h.clone();
        }
        h * num_traits::pow(self.ratio.clone(), k as usize)
    }

    /// The tail is identically zero.
    pub fn finitely_supported(&self) -> bool {
        self.head.iter().all(Zero::is_zero) || self.ratio.is_zero()
    }

    /// Index after which every coordinate is zero, for finitely supported ones.
    pub fn support_bound(&self) -> Option<u64> {
        if self.head.iter().all(Zero::is_zero) {
            Some(self.prefix.len() as u64)
        } else if self.ratio.is_zero() {
            Some((self.prefix.len() + self.head.len()) as u64)
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Recurrence {
            prefix: self.prefix.iter().map(|x| x * c).collect(),
            head: self.head.iter().map(|x| x * c).collect(),
            ratio: self.ratio.clone(),
        }
    }

    /// Restriction along `{c·m + d}`.
    pub fn along_progression(&self, c: u64, d: i64) -> Self {
        let l = self.prefix.len() as u64;
        let p = self.head.len() as u64;
        let g = num_integer::gcd(c, p);
        let lcm = c / g * p;
        let period = lcm / c;
        let steps = lcm / p;
        let idx = |m: u64| (c as i128 * m as i128 + d as i128) as u64;
        let mut m0 = 1;
        while idx(m0) <= l {
            m0 += 1;
        }
        Recurrence {
            prefix: (1..m0).map(|m| self.value(idx(m))).collect(),
            head: (m0..m0 + period).map(|m| self.value(idx(m))).collect(),
            ratio: num_traits::pow(self.ratio.clone(), steps as usize),
        }
    }

    /// The subsequence of nonzero coordinates, when the tail is not zero.
    pub fn zero_free(&self) -> Option<Self> {
        if self.finitely_supported() {
            return None;
        }
        Some(Recurrence {
            prefix: self.prefix.iter().filter(|x| !x.is_zero()).cloned().collect(),
            head: self.head.iter().filter(|x| !x.is_zero()).cloned().collect(),
            ratio: self.ratio.clone(),
        })
    }

    /// `Σ_j x_j` when the tail ratio has modulus below one.
    pub fn sum(&self) -> Option<Q> {
        if self.finitely_supported() {
            let n = self.support_bound().unwrap_or(0);
            return Some((1..=n).map(|j| self.value(j)).sum());
        }
        if self.ratio.abs() >= Q::one() {
            return None;
        }
        let pre: Q = self.prefix.iter().sum();
        let head: Q = self.head.iter().sum();
        Some(pre + head / (Q::one() - &self.ratio))
    }

    /// `Σ_j |x_j|^p` for integer `p ≥ 1`, when finite.
    pub fn abs_power_sum(&self, p: u32) -> Option<Q> {
        let pw = |x: &Q| num_traits::pow(x.abs(), p as usize);
        let mut r = Recurrence {
            prefix: self.prefix.iter().map(pw).collect(),
            head: self.head.iter().map(pw).collect(),
            ratio: pw(&self.ratio),
        };
        if self.finitely_supported() {
            r.head = vec![Q::zero()];
        }
        r.sum()
    }
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Q]| v.iter().map(format_q).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "prefix [{}], period [{}] × ({})^k",
            list(&self.prefix),
            list(&self.head),
            format_q(&self.ratio)
        )
    }
}

/// How a sequence was built from others; drives exact simplification.
#[derive(Clone)]
pub enum Structure {
    Opaque,
    Zero,
    Scaled { factor: Scalar, of: LazySequence },
    Combination(Vec<(Scalar, LazySequence)>),
    Restricted { of: LazySequence, along: IndexSet },
    Embedded { of: LazySequence, on: IndexSet },
    ZeroFree { of: LazySequence },
    Mapped { map: String, of: LazySequence },
}

#[derive(Clone)]
struct Inner {
    kind: ValueKind,
    generator: Arc<Generator>,
    envelope: Option<Envelope>,
    support: SupportHint,
    recurrence: Option<Recurrence>,
    components: Option<Vec<LazySequence>>,
    structure: Structure,
    label: String,
}

/// A countably indexed, deterministic sequence. Cloning is cheap.
#[derive(Clone)]
pub struct LazySequence {
    inner: Arc<Inner>,
}

impl fmt::Debug for LazySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazySequence")
            .field("label", &self.inner.label)
            .field("support", &self.inner.support)
            .field("envelope", &self.inner.envelope)
            .finish()
    }
}

impl fmt::Display for LazySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inner.label)
    }
}

impl LazySequence {
    /// A sequence from an arbitrary total generator.
    pub fn from_fn<F>(kind: ValueKind, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Value + Send + Sync + 'static,
    {
        Self::from_fallible(kind, label, move |j| Ok(f(j)))
    }

    /// A sequence whose generator may fail (only zero-free scans do).
    pub fn from_fallible<F>(kind: ValueKind, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Result<Value> + Send + Sync + 'static,
    {
        LazySequence {
            inner: Arc::new(Inner {
                kind,
                generator: Arc::new(f),
                envelope: None,
                support: SupportHint::Unknown,
                recurrence: None,
                components: None,
                structure: Structure::Opaque,
                label: label.into(),
            }),
        }
    }

    /// Scalar sequence from a function returning exact rationals.
    pub fn from_rational_fn<F>(field: ScalarField, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Q + Send + Sync + 'static,
    {
        Self::from_fn(ValueKind::scalar(field), label, move |j| {
            Value::Scalar(field.from_q(f(j)))
        })
    }

    pub fn zero(kind: ValueKind) -> Self {
        let z = kind.zero();
        Self::from_fn(kind, "0", move |_| z.clone())
            .with_support(SupportHint::FiniteSupport(0))
            .with_structure(Structure::Zero)
    }

    pub fn zero_scalar() -> Self {
        let s = Self::zero(ValueKind::scalar(ScalarField::rational()));
        s.with_recurrence(Recurrence {
            prefix: vec![],
            head: vec![Q::zero()],
            ratio: Q::one(),
        })
    }

    /// `c·k^(-a)·log(k+1)^(-b)` in the given field. Rational mode stores the
    /// exact binary value of the float evaluation, except when `b = 0` and
    /// `a` is a nonnegative integer, where `c/k^a` is computed exactly.
    pub fn powlog(field: ScalarField, a: Q, b: Q, c: Q) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Parse("powlog constant must be positive".into()));
        }
        let label = format!("powlog({},{},{})", format_q(&a), format_q(&b), format_q(&c));
        let exact_int = b.is_zero() && a.is_integer() && !a.is_negative() && a.numer().bits() <= 16;
        let (af, bf, cf) = (q_to_f64(&a), q_to_f64(&b), q_to_f64(&c));
        let (lower, upper) = if exact_int && field.is_exact() {
            (cf, cf)
        } else {
            (cf * (1.0 - 1e-9), cf * (1.0 + 1e-9))
        };
        let env = PowLogEnvelope::new(a.clone(), b.clone(), lower, upper);
        let seq = if exact_int {
            let n: usize = a.to_integer().try_into().unwrap_or(0);
            let c2 = c.clone();
            Self::from_rational_fn(field, label, move |k| {
                &c2 / num_traits::pow(Q::from_integer(k.into()), n)
            })
        } else {
            Self::from_fn(ValueKind::scalar(field), label, move |k| {
                let kf = k as f64;
                let v = cf * (-af * kf.ln() - bf * kf.ln_1p().ln()).exp();
                Value::Scalar(field.from_f64(v))
            })
        };
        Ok(seq
            .with_envelope(Envelope::full(env))
            .with_support(SupportHint::InfiniteSupport))
    }

    /// `x_j = ratio^j`.
    pub fn geometric(field: ScalarField, ratio: Q) -> Self {
        let label = format!("geometric({})", format_q(&ratio));
        let r = ratio.clone();
        let support = if ratio.is_zero() {
            SupportHint::FiniteSupport(0)
        } else {
            SupportHint::InfiniteSupport
        };
        let rec = Recurrence {
            prefix: vec![],
            head: vec![ratio.clone()],
            ratio,
        };
        Self::from_rational_fn(field, label, move |j| num_traits::pow(r.clone(), j as usize))
            .with_recurrence(rec)
            .with_support(support)
    }

    /// Finite list of values followed by zeros or by the same list repeated.
    pub fn explicit(field: ScalarField, values: Vec<Q>, periodic: bool) -> Result<Self> {
        if values.is_empty() && periodic {
            return Err(Error::Parse("periodic tail needs at least one value".into()));
        }
        let rec = if periodic {
            Recurrence::new(vec![], values, Q::one())?
        } else {
            Recurrence::new(values, vec![Q::zero()], Q::one())?
        };
        Ok(Self::recurrent(field, rec))
    }

    pub fn recurrent(field: ScalarField, rec: Recurrence) -> Self {
        let support = match rec.support_bound() {
            Some(n) => SupportHint::FiniteSupport(n),
            None => SupportHint::InfiniteSupport,
        };
        let r = rec.clone();
        Self::from_rational_fn(field, format!("recurrent({rec})"), move |j| r.value(j))
            .with_recurrence(rec)
            .with_support(support)
    }

    /// The unit vector `e_n`.
    pub fn unit(field: ScalarField, n: u64) -> Self {
        let mut prefix = vec![Q::zero(); n as usize];
        prefix[n as usize - 1] = Q::one();
        Self::recurrent(field, Recurrence::new(prefix, vec![Q::zero()], Q::one()).unwrap())
            .with_label(format!("e{n}"))
    }

    /// Vector-valued sequence with the given scalar coordinate sequences.
    pub fn from_components(space: VectorSpaceSpec, comps: Vec<LazySequence>) -> Result<Self> {
        if comps.len() != space.dim {
            return Err(Error::IncompatibleKinds(format!(
                "{} components for a {}-dimensional space",
                comps.len(),
                space.dim
            )));
        }
        let field = match comps.first() {
            Some(c) => c.kind().field,
            None => ScalarField::rational(),
        };
        for c in &comps {
            if c.kind().shape != Shape::Scalar {
                return Err(Error::IncompatibleKinds("components must be scalar".into()));
            }
        }
        let label = format!(
            "({})",
            comps.iter().map(|c| c.label().to_string()).collect::<Vec<_>>().join(", ")
        );
        let cs = comps.clone();
        let seq = Self::from_fallible(ValueKind::vector(field, space), label, move |j| {
            let mut out = Vec::with_capacity(cs.len());
            for c in &cs {
                out.push(c.try_eval(j)?.components()[0].clone());
            }
            Ok(Value::Vector(out))
        });
        let nonzero: Vec<&LazySequence> = comps.iter().filter(|c| !c.is_structurally_zero()).collect();
        let envelope = match nonzero.as_slice() {
            [only] => only.envelope().cloned(),
            _ => None,
        };
        let support = if comps.iter().all(|c| c.support() == SupportHint::FiniteSupport(0)) {
            SupportHint::FiniteSupport(0)
        } else if comps.iter().any(|c| c.support() == SupportHint::InfiniteSupport) {
            SupportHint::InfiniteSupport
        } else if comps.iter().all(|c| matches!(c.support(), SupportHint::FiniteSupport(_))) {
            let n = comps
                .iter()
                .map(|c| match c.support() {
                    SupportHint::FiniteSupport(n) => n,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            SupportHint::FiniteSupport(n)
        } else {
            SupportHint::Unknown
        };
        let mut seq = seq.with_support(support);
        if let Some(e) = envelope {
            seq = seq.with_envelope(e);
        }
        Ok(seq.with_components(comps))
    }

    fn modify(self, f: impl FnOnce(&mut Inner)) -> Self {
        let mut inner = Arc::try_unwrap(self.inner).unwrap_or_else(|arc| (*arc).clone());
        f(&mut inner);
        LazySequence {
            inner: Arc::new(inner),
        }
    }

    pub fn with_envelope(self, e: Envelope) -> Self {
        self.modify(|i| i.envelope = Some(e))
    }

    pub fn without_envelope(self) -> Self {
        self.modify(|i| i.envelope = None)
    }

    pub fn with_support(self, s: SupportHint) -> Self {
        self.modify(|i| i.support = s)
    }

    pub fn with_recurrence(self, r: Recurrence) -> Self {
        self.modify(|i| i.recurrence = Some(r))
    }

    pub fn with_components(self, c: Vec<LazySequence>) -> Self {
        self.modify(|i| i.components = Some(c))
    }

    pub fn with_structure(self, s: Structure) -> Self {
        self.modify(|i| i.structure = s)
    }

    pub fn with_label(self, l: impl Into<String>) -> Self {
        let l = l.into();
        self.modify(|i| i.label = l)
    }

    pub fn kind(&self) -> &ValueKind {
        &self.inner.kind
    }

    pub fn envelope(&self) -> Option<&Envelope> {
        self.inner.envelope.as_ref()
    }

    pub fn support(&self) -> SupportHint {
        self.inner.support
    }

    pub fn recurrence(&self) -> Option<&Recurrence> {
        self.inner.recurrence.as_ref()
    }

    pub fn components(&self) -> Option<&[LazySequence]> {
        self.inner.components.as_deref()
    }

    pub fn structure(&self) -> &Structure {
        &self.inner.structure
    }

    pub fn label(&self) -> &str {
        &self.inner.label
    }

    pub fn is_structurally_zero(&self) -> bool {
        matches!(self.inner.structure, Structure::Zero)
    }

    /// Whether both handles share one underlying sequence.
    pub fn same_as(&self, other: &LazySequence) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// `x_j`. Panics if `j = 0` or if the generator fails; use
    /// [`LazySequence::try_eval`] for zero-free scans of opaque sequences.
    pub fn eval(&self, j: u64) -> Value {
        match self.try_eval(j) {
            Ok(v) => v,
            Err(e) => panic!("evaluating {} at {j}: {e}", self.inner.label),
        }
    }

    pub fn try_eval(&self, j: u64) -> Result<Value> {
        assert!(j >= 1, "sequences are indexed from 1");
        (self.inner.generator)(j)
    }

    /// Scalar coordinate; panics on vector-valued sequences.
    pub fn eval_scalar(&self, j: u64) -> Scalar {
        match self.eval(j) {
            Value::Scalar(s) => s,
            Value::Vector(_) => panic!("{} is vector-valued", self.inner.label),
        }
    }

    /// `‖x_j‖_X`.
    pub fn magnitude(&self, j: u64) -> Scalar {
        self.inner.kind.magnitude(&self.eval(j))
    }

    /// First `n` coordinates.
    pub fn prefix(&self, n: u64) -> Vec<Value> {
        (1..=n).map(|j| self.eval(j)).collect()
    }

    /// Checks the envelope against the first `n` coordinates; returns the
    /// first index where it fails.
    pub fn envelope_violation(&self, n: u64) -> Option<u64> {
        let env = self.envelope()?;
        (1..=n).find(|&j| !env.brackets(j, self.magnitude(j).to_f64()))
    }

    pub(crate) fn generator(&self) -> Arc<Generator> {
        self.inner.generator.clone()
    }
}
