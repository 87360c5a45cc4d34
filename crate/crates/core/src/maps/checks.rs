//! Non-contractivity and compatibility checks for maps.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::spec::{pushforward, MapKind, MapSpec};
use crate::scalar::{q, qi, Scalar, ScalarField, Q};
use crate::seqcore::{scale, LazySequence, Shape, Value};
use crate::spaces::{certify, decide_membership_symbolic, ProbeOptions, SpaceSpec, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapVerdict {
    ProvenSymbolic,
    HoldsOnSamples,
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Property {
    NonContractive,
    StronglyNonContractive,
    Compatible { space: SpaceSpec },
}

/// A counterexample, or the pair attaining the smallest ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub alpha: Scalar,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<Vec<String>>,
    /// `‖f(αx)‖`, `|φ(f(αx))|`, or the verdict for `f(αx)`.
    pub scaled: String,
    /// `‖f(x)‖`, `|φ(f(x))|`, or the verdict for `f(x)`.
    pub base: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaBound {
    pub alpha: Scalar,
    /// Closed-form `K(α)` when the map is homogeneous.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Scalar>,
    /// Smallest observed ratio over the samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inf_ratio: Option<f64>,
    /// Whether `K(α)` was attained exactly on every sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_on_grid: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapPropertyReport {
    pub property: Property,
    pub map: MapSpec,
    pub verdict: MapVerdict,
    pub alphas: Vec<AlphaBound>,
    pub witnesses: Vec<Witness>,
    pub samples: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl MapPropertyReport {
    pub fn holds(&self) -> bool {
        self.verdict != MapVerdict::Refuted
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self.verdict {
            MapVerdict::Refuted => self.witnesses.first(),
            _ => None,
        }
    }
}

/// `±2^k` for `-3 ≤ k ≤ 3`.
pub fn default_alphas() -> Vec<Scalar> {
    let mut out = Vec::new();
    for k in -3i32..=3 {
        let m = if k >= 0 { qi(1 << k) } else { q(1, 1 << -k) };
        out.push(Scalar::Rational(m.clone()));
        out.push(Scalar::Rational(-m));
    }
    out
}

/// A grid of nonzero sample points in `domain`.
pub fn default_samples(domain: &Shape) -> Vec<Value> {
    let grid: Vec<Q> = [
        q(1, 8),
        q(1, 4),
        q(1, 3),
        q(1, 2),
        q(3, 4),
        qi(1),
        q(3, 2),
        qi(2),
        qi(3),
        qi(5),
    ]
    .into_iter()
    .flat_map(|x| [x.clone(), -x])
    .collect();
    match domain {
        Shape::Scalar => grid.into_iter().map(|x| Value::Scalar(Scalar::Rational(x))).collect(),
        Shape::Vector(space) => {
            let d = space.dim;
            let mut out = Vec::new();
            for (i, x) in grid.iter().enumerate() {
                let v: Vec<Scalar> = (0..d)
                    .map(|c| {
                        let y = &grid[(i + 3 * c) % grid.len()];
                        Scalar::Rational(if c == 0 { x.clone() } else { y.clone() })
                    })
                    .collect();
                out.push(Value::Vector(v));
                let mut e = vec![Scalar::zero(); d];
                e[i % d] = Scalar::Rational(x.clone());
                out.push(Value::Vector(e));
            }
            out
        }
    }
}

fn symbolic_k(f: &MapSpec, alpha: &Scalar) -> Option<Scalar> {
    let r = f.homogeneity()?;
    Some(if r.is_one() { alpha.abs() } else { alpha.abs_pow(&r) })
}

fn ratio(num: &Scalar, den: &Scalar) -> f64 {
    num.to_f64() / den.to_f64()
}

fn show_phi(phi: &[Q]) -> Vec<String> {
    phi.iter().map(crate::scalar::format_q).collect()
}

fn pair_value(phi: &[Q], v: &Value) -> Scalar {
    v.components()
        .iter()
        .zip(phi)
        .fold(Scalar::zero(), |acc, (t, c)| &acc + &(&Scalar::Rational(c.clone()) * t))
}

struct Sweep {
    bound: AlphaBound,
    refutation: Option<Witness>,
    worst: Option<Witness>,
}

/// Shared driver: `pairs(α)` yields `(scaled, base, witness)` magnitudes.
fn sweep<F>(f: &MapSpec, alpha: &Scalar, pairs: F) -> Sweep
where
    F: Fn(&Scalar) -> Vec<(Scalar, Scalar, Witness)>,
{
    let k = symbolic_k(f, alpha);
    let mut inf: Option<f64> = None;
    let mut exact = k.as_ref().map(|_| true);
    let mut refutation = None;
    let mut worst = None;
    for (scaled, base, w) in pairs(alpha) {
        if base.is_zero() {
            continue;
        }
        if scaled.is_zero() {
            refutation.get_or_insert(w);
            inf = Some(0.0);
            continue;
        }
        let r = ratio(&scaled, &base);
        if inf.is_none_or(|m| r < m) {
            inf = Some(r);
            worst = Some(w);
        }
        if let Some(k) = &k {
            let target = k * &base;
            let eq = match scaled.exact_eq(&target) {
                Some(b) => b,
                None => scaled.approx_eq(&target, 1e-12),
            };
            if !eq {
                exact = Some(false);
            }
        }
    }
    Sweep {
        bound: AlphaBound {
            alpha: alpha.clone(),
            k,
            inf_ratio: inf,
            exact_on_grid: exact,
        },
        refutation,
        worst,
    }
}

fn assemble(
    property: Property,
    f: &MapSpec,
    sweeps: Vec<Sweep>,
    samples: usize,
    mut notes: Vec<String>,
) -> MapPropertyReport {
    let refutations: Vec<Witness> = sweeps.iter().filter_map(|s| s.refutation.clone()).collect();
    let symbolic = f.homogeneity().is_some();
    let all_exact = sweeps.iter().all(|s| s.bound.exact_on_grid != Some(false));
    let verdict = if !refutations.is_empty() {
        MapVerdict::Refuted
    } else if symbolic && all_exact {
        MapVerdict::ProvenSymbolic
    } else {
        if symbolic {
            notes.push("closed-form K(α) not attained on every sample".into());
        }
        MapVerdict::HoldsOnSamples
    };
    let witnesses = if refutations.is_empty() {
        sweeps.iter().filter_map(|s| s.worst.clone()).collect()
    } else {
        refutations
    };
    MapPropertyReport {
        property,
        map: f.clone(),
        verdict,
        alphas: sweeps.into_iter().map(|s| s.bound).collect(),
        witnesses,
        samples,
        notes,
    }
}

/// `‖f(αx)‖ ≥ K(α)‖f(x)‖` with `K(α) > 0`.
pub fn check_non_contractive(f: &MapSpec, alphas: &[Scalar], xs: &[Value]) -> MapPropertyReport {
    let field = ScalarField::rational();
    let sweeps = alphas
        .iter()
        .map(|alpha| {
            sweep(f, alpha, |a| {
                xs.iter()
                    .map(|x| {
                        let scaled = f.norm(&f.apply(&x.scale(a)), field);
                        let base = f.norm(&f.apply(x), field);
                        let w = Witness {
                            alpha: a.clone(),
                            x: Some(x.clone()),
                            sequence: None,
                            functional: None,
                            scaled: scaled.to_string(),
                            base: base.to_string(),
                        };
                        (scaled, base, w)
                    })
                    .collect()
            })
        })
        .collect();
    assemble(Property::NonContractive, f, sweeps, xs.len(), Vec::new())
}

/// `|φ(f(αx))| ≥ K(α)|φ(f(x))|` for every sampled functional `φ`.
pub fn check_strongly_non_contractive(
    f: &MapSpec,
    alphas: &[Scalar],
    xs: &[Value],
    functionals: &[Vec<Q>],
) -> MapPropertyReport {
    let sweeps = alphas
        .iter()
        .map(|alpha| {
            sweep(f, alpha, |a| {
                let mut out = Vec::new();
                for x in xs {
                    let fx = f.apply(x);
                    let fax = f.apply(&x.scale(a));
                    for phi in functionals {
                        let scaled = pair_value(phi, &fax).abs();
                        let base = pair_value(phi, &fx).abs();
                        let w = Witness {
                            alpha: a.clone(),
                            x: Some(x.clone()),
                            sequence: None,
                            functional: Some(show_phi(phi)),
                            scaled: scaled.to_string(),
                            base: base.to_string(),
                        };
                        out.push((scaled, base, w));
                    }
                }
                out
            })
        })
        .collect();
    assemble(
        Property::StronglyNonContractive,
        f,
        sweeps,
        xs.len() * functionals.len(),
        Vec::new(),
    )
}

fn verdict_of(space: &SpaceSpec, x: &LazySequence, opts: ProbeOptions) -> (Verdict, bool) {
    match decide_membership_symbolic(space, x) {
        Ok(c) => (c.verdict, true),
        Err(_) => (certify(space, x, opts).verdict, false),
    }
}

/// `f(x) ∉ E ⇒ f(αx) ∉ E` for every sampled `x` and `α ≠ 0`.
pub fn check_compatible(
    f: &MapSpec,
    space: &SpaceSpec,
    alphas: &[Scalar],
    seqs: &[LazySequence],
    opts: ProbeOptions,
) -> MapPropertyReport {
    let property = Property::Compatible {
        space: space.clone(),
    };
    if matches!(f.kind(), MapKind::Identity) {
        return MapPropertyReport {
            property,
            map: f.clone(),
            verdict: MapVerdict::ProvenSymbolic,
            alphas: alphas
                .iter()
                .map(|a| AlphaBound {
                    alpha: a.clone(),
                    k: symbolic_k(f, a),
                    inf_ratio: None,
                    exact_on_grid: None,
                })
                .collect(),
            witnesses: Vec::new(),
            samples: 0,
            notes: vec!["E is closed under nonzero scaling".into()],
        };
    }

    let cases: Vec<(usize, usize)> = (0..seqs.len())
        .flat_map(|i| (0..alphas.len()).map(move |a| (i, a)))
        .collect();
    let results: Vec<(usize, Verdict, Verdict, bool)> = cases
        .par_iter()
        .filter(|(_, a)| !alphas[*a].is_zero())
        .map(|&(i, a)| {
            let x = &seqs[i];
            let (base, sb) = verdict_of(space, &pushforward(f, x), opts);
            let (scaled, ss) = verdict_of(space, &pushforward(f, &scale(&alphas[a], x)), opts);
            (i * alphas.len() + a, base, scaled, sb && ss)
        })
        .collect();

    let mut witnesses = Vec::new();
    let mut all_symbolic = true;
    let mut inconclusive = 0usize;
    for (idx, base, scaled, symbolic) in &results {
        all_symbolic &= *symbolic;
        if *base == Verdict::Inconclusive || *scaled == Verdict::Inconclusive {
            inconclusive += 1;
        }
        if *base == Verdict::Out && *scaled == Verdict::In {
            let (i, a) = (idx / alphas.len(), idx % alphas.len());
            witnesses.push(Witness {
                alpha: alphas[a].clone(),
                x: None,
                sequence: Some(seqs[i].to_string()),
                functional: None,
                scaled: format!("{scaled:?}"),
                base: format!("{base:?}"),
            });
        }
    }
    let mut notes = Vec::new();
    if inconclusive > 0 {
        notes.push(format!("{inconclusive} sample pairs inconclusive"));
    }
    let verdict = if !witnesses.is_empty() {
        MapVerdict::Refuted
    } else if f.homogeneity().is_some() && all_symbolic && space.lp_exponent().is_some() {
        notes.push("f(αx) = sign(α)|α|^r f(x) leaves membership unchanged".into());
        MapVerdict::ProvenSymbolic
    } else {
        MapVerdict::HoldsOnSamples
    };
    MapPropertyReport {
        property,
        map: f.clone(),
        verdict,
        alphas: alphas
            .iter()
            .map(|a| AlphaBound {
                alpha: a.clone(),
                k: symbolic_k(f, a),
                inf_ratio: None,
                exact_on_grid: None,
            })
            .collect(),
        witnesses,
        samples: results.len(),
        notes,
    }
}

/// Extreme points `±e_i` of the dual ball for scalar or vector domains.
pub fn unit_functionals(domain: &Shape) -> Vec<Vec<Q>> {
    let d = match domain {
        Shape::Scalar => 1,
        Shape::Vector(s) => s.dim,
    };
    let mut out = Vec::new();
    for i in 0..d {
        for s in [Q::one(), -Q::one()] {
            let mut e = vec![Q::zero(); d];
            e[i] = s;
            out.push(e);
        }
    }
    out
}
