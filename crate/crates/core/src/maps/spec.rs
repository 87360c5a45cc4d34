use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, qstr, Scalar, Q};
use crate::seqcore::{
    embed, restrict, scale, LazySequence, Recurrence, Shape, Structure, Value, ValueKind,
};

/// A table point `(t, f(t))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablePoint(#[serde(with = "qstr")] pub Q, #[serde(with = "qstr")] pub Q);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapKind {
    Identity,
    /// `t ↦ sign(t)|t|^r`.
    Power {
        #[serde(with = "qstr")]
        r: Q,
    },
    /// `t ↦ t·max(0, 1 - |t|)`.
    ClippedLinear,
    /// Piecewise-linear interpolation of the table, constant beyond its ends.
    UserTable { points: Vec<TablePoint>, tag: String },
}

/// A map `f: X → Y` applied coordinatewise; always `f(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpecRaw", into = "MapSpecRaw")]
pub struct MapSpec {
    kind: MapKind,
    domain: Shape,
}

#[derive(Serialize, Deserialize)]
struct MapSpecRaw {
    #[serde(flatten)]
    kind: MapKind,
    #[serde(default = "scalar_shape", skip_serializing_if = "is_scalar")]
    domain: Shape,
}

fn scalar_shape() -> Shape {
    Shape::Scalar
}

fn is_scalar(s: &Shape) -> bool {
    *s == Shape::Scalar
}

impl TryFrom<MapSpecRaw> for MapSpec {
    type Error = Error;
    fn try_from(raw: MapSpecRaw) -> Result<Self> {
        MapSpec::new(raw.kind, raw.domain)
    }
}

impl From<MapSpec> for MapSpecRaw {
    fn from(m: MapSpec) -> Self {
        MapSpecRaw {
            kind: m.kind,
            domain: m.domain,
        }
    }
}

impl MapSpec {
    /// Validates the kind; rejects anything with `f(0) ≠ 0`.
    pub fn new(kind: MapKind, domain: Shape) -> Result<Self> {
        match &kind {
            MapKind::Power { r } if !r.is_positive() => {
                return Err(Error::InvalidMap("power map needs r > 0".into()));
            }
            MapKind::UserTable { points, .. } => {
                if points.is_empty() {
                    return Err(Error::InvalidMap("empty table".into()));
                }
                let mut xs: Vec<&Q> = points.iter().map(|p| &p.0).collect();
                xs.sort();
                if xs.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::InvalidMap("table has repeated abscissae".into()));
                }
            }
            _ => {}
        }
        let mut kind = kind;
        if let MapKind::UserTable { points, .. } = &mut kind {
            points.sort_by(|a, b| a.0.cmp(&b.0));
        }
        let spec = MapSpec { kind, domain };
        if !spec.apply_scalar(&Scalar::zero()).is_zero() {
            return Err(Error::InvalidMap("f(0) must be 0".into()));
        }
        Ok(spec)
    }

    pub fn identity() -> Self {
        MapSpec::new(MapKind::Identity, Shape::Scalar).expect("valid")
    }

    pub fn power(r: Q) -> Result<Self> {
        MapSpec::new(MapKind::Power { r }, Shape::Scalar)
    }

    pub fn clipped_linear() -> Self {
        MapSpec::new(MapKind::ClippedLinear, Shape::Scalar).expect("valid")
    }

    pub fn table(points: Vec<(Q, Q)>, tag: impl Into<String>) -> Result<Self> {
        MapSpec::new(
            MapKind::UserTable {
                points: points.into_iter().map(|(x, y)| TablePoint(x, y)).collect(),
                tag: tag.into(),
            },
            Shape::Scalar,
        )
    }

    /// The same map acting coordinatewise on `domain`.
    pub fn on(&self, domain: Shape) -> Self {
        MapSpec {
            kind: self.kind.clone(),
            domain,
        }
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &Shape {
        &self.domain
    }

    /// Positively homogeneous of degree `r` with `f(-t) = -f(t)`, so
    /// `f(αt) = sign(α)|α|^r f(t)`.
    pub fn homogeneity(&self) -> Option<Q> {
        match &self.kind {
            MapKind::Identity => Some(Q::one()),
            MapKind::Power { r } => Some(r.clone()),
            _ => None,
        }
    }

    pub fn apply_scalar(&self, t: &Scalar) -> Scalar {
        match &self.kind {
            MapKind::Identity => t.clone(),
            MapKind::Power { r } => {
                if t.is_zero() {
                    return Scalar::zero();
                }
                let m = t.abs_pow(r);
                match t {
                    Scalar::Complex(_) => {
                        let ph = t.unit_phase().unwrap_or(Complex64::new(1.0, 0.0));
                        Scalar::Complex(ph * m.to_f64())
                    }
                    _ if t.signum() < 0 => -&m,
                    _ => m,
                }
            }
            MapKind::ClippedLinear => {
                let gap = &Scalar::one() - &t.abs();
                if gap.signum() <= 0 {
                    Scalar::zero()
                } else {
                    t * &gap
                }
            }
            MapKind::UserTable { points, .. } => table_eval(points, t),
        }
    }

    pub fn apply(&self, v: &Value) -> Value {
        match v {
            Value::Scalar(t) => Value::Scalar(self.apply_scalar(t)),
            Value::Vector(xs) => Value::Vector(xs.iter().map(|t| self.apply_scalar(t)).collect()),
        }
    }

    /// `‖v‖` in the domain.
    pub fn norm(&self, v: &Value, field: crate::scalar::ScalarField) -> Scalar {
        ValueKind {
            field,
            shape: self.domain.clone(),
        }
        .magnitude(v)
    }
}

fn table_eval(points: &[TablePoint], t: &Scalar) -> Scalar {
    let Some(x) = t.to_rational() else {
        let tf = t.to_f64();
        let pts: Vec<(f64, f64)> = points
            .iter()
            .map(|p| (crate::scalar::q_to_f64(&p.0), crate::scalar::q_to_f64(&p.1)))
            .collect();
        let y = interp(&pts, tf);
        return Scalar::Float(y);
    };
    let first = &points[0];
    let last = &points[points.len() - 1];
    if x <= first.0 {
        return Scalar::Rational(first.1.clone());
    }
    if x >= last.0 {
        return Scalar::Rational(last.1.clone());
    }
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if x >= a.0 && x <= b.0 {
            let y = &a.1 + (&b.1 - &a.1) * (&x - &a.0) / (&b.0 - &a.0);
            return Scalar::Rational(y);
        }
    }
    unreachable!("x lies inside the table range")
}

fn interp(pts: &[(f64, f64)], x: f64) -> f64 {
    if x <= pts[0].0 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        if x <= w[1].0 {
            let (a, b) = (w[0], w[1]);
            return a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
        }
    }
    pts[pts.len() - 1].1
}

impl fmt::Display for MapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Identity => write!(f, "identity"),
            MapKind::Power { r } => write!(f, "power:{}", format_q(r)),
            MapKind::ClippedLinear => write!(f, "clipped-linear"),
            MapKind::UserTable { tag, .. } => write!(f, "table({tag})"),
        }
    }
}

/// Short syntax: `identity`, `power:1/2`, `clipped-linear`,
/// `table:-1=-2,0=0,1=2`.
impl FromStr for MapSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "identity" || s == "id" => Ok(MapSpec::identity()),
            None if s == "clipped-linear" || s == "clipped" => Ok(MapSpec::clipped_linear()),
            Some(("power", r)) => MapSpec::power(parse_q(r)?),
            Some(("table", list)) => {
                let pts = list
                    .split(',')
                    .map(|pair| {
                        let (x, y) = pair
                            .split_once('=')
                            .ok_or_else(|| Error::Parse(format!("table point {pair:?} needs x=y")))?;
                        Ok((parse_q(x)?, parse_q(y)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MapSpec::table(pts, list)
            }
            _ => Err(Error::Parse(format!("unknown map {s:?}"))),
        }
    }
}

/// `(f(x_j))_j`, carrying envelopes and structure through where `f` allows.
pub fn pushforward(f: &MapSpec, x: &LazySequence) -> LazySequence {
    if matches!(f.kind, MapKind::Identity) {
        return x.clone();
    }
    match x.structure() {
        Structure::Zero => return x.clone(),
        Structure::Embedded { of, on } => return embed(&pushforward(f, of), on),
        Structure::Restricted { of, along } => return restrict(&pushforward(f, of), along),
        Structure::Scaled { factor, of } if !factor.is_complex() => {
            if let Some(r) = f.homogeneity() {
                let m = factor.abs_pow(&r);
                let c = if factor.signum() < 0 { -&m } else { m };
                return scale(&c, &pushforward(f, of));
            }
        }
        _ => {}
    }
    if let Some(comps) = x.components() {
        if let Shape::Vector(space) = &x.kind().shape {
            let mapped: Vec<LazySequence> = comps.iter().map(|c| pushforward(f, c)).collect();
            if let Ok(seq) = LazySequence::from_components(space.clone(), mapped) {
                return seq.with_label(format!("{f}({x})"));
            }
        }
    }

    let g = x.clone();
    let map = f.clone();
    let mut out = LazySequence::from_fallible(x.kind().clone(), format!("{f}({x})"), move |j| {
        Ok(map.apply(&g.try_eval(j)?))
    })
    .with_structure(Structure::Mapped {
        map: f.to_string(),
        of: x.clone(),
    });
    if let MapKind::Power { r } = &f.kind {
        if let Some(env) = x.envelope() {
            if x.kind().dim() == 1 {
                out = out.with_envelope(env.power(r));
            }
        }
        out = out.with_support(x.support());
        if let Some(rec) = x.recurrence() {
            if let Some(mapped) = power_recurrence(rec, r) {
                out = out.with_recurrence(mapped);
            }
        }
    } else if let Some(rec) = x.recurrence() {
        if let Some(mapped) = entrywise_recurrence(f, rec) {
            out = out.with_recurrence(mapped);
        }
    }
    out
}

/// Ratios 0 and 1 survive any map with `f(0) = 0`; ratio -1 needs `f` odd.
fn entrywise_recurrence(f: &MapSpec, rec: &Recurrence) -> Option<Recurrence> {
    let odd = !matches!(f.kind, MapKind::UserTable { .. });
    let ratio_ok = rec.ratio.is_zero() || rec.ratio.is_one() || (odd && rec.ratio == -Q::one());
    if !ratio_ok {
        return None;
    }
    let prefix = rec.prefix.iter().map(|v| exact_image(f, v)).collect::<Option<Vec<_>>>()?;
    let head = rec.head.iter().map(|v| exact_image(f, v)).collect::<Option<Vec<_>>>()?;
    Recurrence::new(prefix, head, rec.ratio.clone()).ok()
}

fn exact_image(f: &MapSpec, v: &Q) -> Option<Q> {
    match f.apply_scalar(&Scalar::Rational(v.clone())) {
        Scalar::Rational(q) => Some(q),
        _ => None,
    }
}

fn power_recurrence(rec: &Recurrence, r: &Q) -> Option<Recurrence> {
    let f = MapSpec::power(r.clone()).ok()?;
    let prefix = rec.prefix.iter().map(|v| exact_image(&f, v)).collect::<Option<Vec<_>>>()?;
    let head = rec.head.iter().map(|v| exact_image(&f, v)).collect::<Option<Vec<_>>>()?;
    let ratio = exact_image(&f, &rec.ratio)?;
    if ratio.is_zero() && !rec.ratio.is_zero() {
        return None;
    }
    Recurrence::new(prefix, head, ratio).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, ScalarField};
    use crate::seqcore::{agree_on_prefix, IndexSet};

    fn r(x: Q) -> Scalar {
        Scalar::Rational(x)
    }

    #[test]
    fn every_kind_fixes_zero() {
        for f in [
            MapSpec::identity(),
            MapSpec::power(q(1, 2)).unwrap(),
            MapSpec::clipped_linear(),
            MapSpec::table(vec![(qi(-1), qi(-3)), (qi(0), qi(0)), (qi(2), qi(1))], "t").unwrap(),
        ] {
            assert!(f.apply_scalar(&Scalar::zero()).is_zero(), "{f}");
        }
        assert!(MapSpec::table(vec![(qi(0), qi(1))], "bad").is_err());
        assert!(MapSpec::power(qi(0)).is_err());
    }

    #[test]
    fn scalar_values() {
        let sq = MapSpec::power(qi(2)).unwrap();
        assert_eq!(sq.apply_scalar(&r(qi(-3))), r(qi(-9)));
        let root = MapSpec::power(q(1, 2)).unwrap();
        assert_eq!(root.apply_scalar(&r(q(9, 4))), r(q(3, 2)));
        let clip = MapSpec::clipped_linear();
        assert_eq!(clip.apply_scalar(&r(q(1, 2))), r(q(1, 4)));
        assert!(clip.apply_scalar(&r(qi(1))).is_zero());
        assert!(clip.apply_scalar(&r(qi(2))).is_zero());
        let t = MapSpec::table(vec![(qi(0), qi(0)), (qi(2), qi(1))], "t").unwrap();
        assert_eq!(t.apply_scalar(&r(qi(1))), r(q(1, 2)));
        assert_eq!(t.apply_scalar(&r(qi(5))), r(qi(1)));
    }

    #[test]
    fn literals() {
        let m: MapSpec = serde_json::from_str(r#"{"kind":"power","r":"1/2"}"#).unwrap();
        assert_eq!(m, MapSpec::power(q(1, 2)).unwrap());
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"kind":"power","r":"1/2"}"#);
        let id: MapSpec = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(id, MapSpec::identity());
        let c: MapSpec = "clipped-linear".parse().unwrap();
        assert_eq!(c, MapSpec::clipped_linear());
        assert!(serde_json::from_str::<MapSpec>(r#"{"kind":"power","r":"-1"}"#).is_err());
        let t: MapSpec = "table:-1=-2,0=0,1=2".parse().unwrap();
        assert_eq!(t.apply_scalar(&r(q(1, 2))), r(qi(1)));
    }

    #[test]
    fn power_pushforward_squares_envelope() {
        let f = ScalarField::rational();
        let h = LazySequence::powlog(f, qi(1), qi(0), qi(1)).unwrap();
        let sq = pushforward(&MapSpec::power(qi(2)).unwrap(), &h);
        let env = sq.envelope().unwrap();
        assert_eq!((env.bound.a.clone(), env.bound.b.clone()), (qi(2), qi(0)));
        assert_eq!(sq.envelope_violation(1000), None);
        let direct = LazySequence::powlog(f, qi(2), qi(0), qi(1)).unwrap();
        assert_eq!(agree_on_prefix(&sq, &direct, 1000), None);
    }

    #[test]
    fn constant_sequences_stay_recurrent() {
        let half = LazySequence::explicit(ScalarField::rational(), vec![q(1, 2)], true).unwrap();
        let clip = MapSpec::clipped_linear();
        let fx = pushforward(&clip, &half);
        assert_eq!(fx.recurrence().unwrap().head, vec![q(1, 4)]);
        let f2x = pushforward(&clip, &scale(&r(qi(2)), &half));
        assert!(f2x.recurrence().unwrap().finitely_supported());
    }

    #[test]
    fn pushforward_commutes_with_restriction() {
        let f = ScalarField::rational();
        let x = LazySequence::powlog(f, q(1, 2), qi(1), qi(1)).unwrap();
        let map = MapSpec::power(q(1, 3)).unwrap();
        for s in [IndexSet::odds(), IndexSet::dyadic_ray(3).unwrap()] {
            let a = restrict(&pushforward(&map, &x), &s);
            let b = pushforward(&map, &restrict(&x, &s));
            assert_eq!(agree_on_prefix(&a, &b, 1000), None);
        }
    }
}
