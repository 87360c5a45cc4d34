//! Weak sequence classes `F^w(Y)` over a finite-dimensional `Y`.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{FamilyProbe, GSpec, GeneratedSubspace};
use crate::error::{Error, Result};
use crate::maps::{
    check_strongly_non_contractive, default_samples, pushforward, AlphaBound, MapPropertyReport,
    MapSpec, MapVerdict, Property, Witness,
};
use crate::scalar::{format_q, qvec, Scalar, Q};
use crate::seqcore::{
    linear_combine, scale, LazySequence, Shape, ValueKind, VecNorm, VectorSpaceSpec,
};
use crate::spaces::{
    certify, decide_membership_symbolic, partial_norm, Evidence, Exponent, MembershipCertificate,
    Method, NestedFamily, ProbeOptions, SpaceKind, SpaceSpec, Verdict,
};

pub const DEFAULT_RANDOM_FUNCTIONALS: usize = 32;

/// A functional on `Y`, written in coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Functional(#[serde(with = "qvec")] pub Vec<Q>);

/// Extreme points of the dual unit ball plus seeded random functionals of
/// dual norm at most one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalFamily {
    pub space: VectorSpaceSpec,
    pub extreme_points: Vec<Functional>,
    pub random: Vec<Functional>,
    pub seed: u64,
    /// The extreme points are every vertex of a polytope dual ball.
    pub exhaustive: bool,
}

impl FunctionalFamily {
    pub fn new(space: VectorSpaceSpec, random: usize, seed: u64) -> Self {
        let d = space.dim;
        let exhaustive = space.dual_ball_is_polytope();
        let sign_vectors = matches!(&space.norm, VecNorm::P(p) if *p <= Q::one());
        let extreme_points = if sign_vectors {
            (0..1u64 << d)
                .map(|mask| {
                    Functional(
                        (0..d)
                            .map(|i| if mask >> i & 1 == 0 { Q::one() } else { -Q::one() })
                            .collect(),
                    )
                })
                .collect()
        } else {
            (0..d)
                .flat_map(|i| {
                    [Q::one(), -Q::one()].into_iter().map(move |s| {
                        let mut e = vec![Q::zero(); d];
                        e[i] = s;
                        Functional(e)
                    })
                })
                .collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random = (0..random)
            .map(|_| {
                let raw: Vec<Q> = (0..d)
                    .map(|_| Q::new(rng.gen_range(-1024i64..=1024).into(), 1024.into()))
                    .collect();
                Functional(normalize(&space, raw))
            })
            .collect();
        FunctionalFamily {
            space,
            extreme_points,
            random,
            seed,
            exhaustive,
        }
    }

    /// Extreme points plus 32 functionals drawn with seed 0.
    pub fn standard(space: VectorSpaceSpec) -> Self {
        Self::new(space, DEFAULT_RANDOM_FUNCTIONALS, 0)
    }

    /// A family holding exactly the given functionals.
    pub fn from_list(space: VectorSpaceSpec, list: Vec<Vec<Q>>) -> Self {
        FunctionalFamily {
            space,
            extreme_points: list.into_iter().map(Functional).collect(),
            random: Vec::new(),
            seed: 0,
            exhaustive: false,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Functional> {
        self.extreme_points.iter().chain(&self.random)
    }

    pub fn len(&self) -> usize {
        self.extreme_points.len() + self.random.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rescales so the dual norm is at most one: by the max entry when the dual
/// norm is the max, by the sum of entries otherwise.
fn normalize(space: &VectorSpaceSpec, raw: Vec<Q>) -> Vec<Q> {
    let by_max = matches!(&space.norm, VecNorm::P(p) if *p <= Q::one());
    let size = if by_max {
        raw.iter().map(Signed::abs).max().unwrap_or_else(Q::zero)
    } else {
        raw.iter().map(Signed::abs).sum()
    };
    if size.is_zero() || size <= Q::one() && !by_max {
        return raw;
    }
    raw.into_iter().map(|x| x / &size).collect()
}

/// `F^w(Y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakSpec {
    pub f: SpaceSpec,
    pub y: VectorSpaceSpec,
}

impl WeakSpec {
    pub fn new(f: SpaceSpec, y: VectorSpaceSpec) -> Result<Self> {
        if !matches!(f.kind, SpaceKind::Lp { .. } | SpaceKind::C0) || f.values != Shape::Scalar {
            return Err(Error::InvalidSpace(format!(
                "weak classes need a scalar lp or c0, got {f}"
            )));
        }
        Ok(WeakSpec { f, y })
    }
}

fn coordinates(seq: &LazySequence) -> Vec<LazySequence> {
    match seq.components() {
        Some(c) => c.to_vec(),
        None if seq.kind().shape == Shape::Scalar => vec![seq.clone()],
        None => {
            let d = seq.kind().dim();
            let field = seq.kind().field;
            (0..d)
                .map(|i| {
                    let s = seq.clone();
                    LazySequence::from_fallible(ValueKind::scalar(field), format!("{seq}[{i}]"), move |j| {
                        Ok(crate::seqcore::Value::Scalar(s.try_eval(j)?.components()[i].clone()))
                    })
                })
                .collect()
        }
    }
}

/// `(φ(x_j))_j`.
pub fn apply_functional(phi: &Functional, seq: &LazySequence) -> Result<LazySequence> {
    let coords = coordinates(seq);
    if coords.len() != phi.0.len() {
        return Err(Error::IncompatibleKinds(format!(
            "functional of length {} on {}-dimensional values",
            phi.0.len(),
            coords.len()
        )));
    }
    let terms: Vec<(Scalar, LazySequence)> = phi
        .0
        .iter()
        .zip(coords)
        .map(|(c, s)| (Scalar::Rational(c.clone()), s))
        .collect();
    let out = linear_combine(&terms)?;
    let shown = phi.0.iter().map(format_q).collect::<Vec<_>>().join(",");
    Ok(out.with_label(format!("φ({shown})∘{seq}")))
}

fn show(phi: &Functional) -> String {
    format!("({})", phi.0.iter().map(format_q).collect::<Vec<_>>().join(", "))
}

fn prepend(cert: MembershipCertificate, step: String, space: &SpaceSpec, label: &str) -> MembershipCertificate {
    let evidence = match cert.evidence {
        Evidence::Decision {
            mut steps,
            envelope,
            functional_value,
        } => {
            steps.insert(0, step);
            Evidence::Decision {
                steps,
                envelope,
                functional_value,
            }
        }
        other => other,
    };
    MembershipCertificate {
        verdict: cert.verdict,
        method: cert.method,
        space: space.clone(),
        sequence: label.to_string(),
        evidence,
    }
}

/// `Out` on the first functional whose image leaves `F`; `In` when every
/// coordinate sequence lies in `F`, since each `φ(x)` is then a finite
/// combination of them; `Inconclusive` otherwise.
pub fn weak_membership_probe(
    ws: &WeakSpec,
    seq: &LazySequence,
    fam: &FunctionalFamily,
    opts: ProbeOptions,
) -> MembershipCertificate {
    let weak_space = ws.f.clone().with_values(Shape::Vector(ws.y.clone()));
    let label = seq.label();
    if seq.is_structurally_zero() {
        return MembershipCertificate {
            verdict: Verdict::In,
            method: Method::SymbolicStructure,
            space: weak_space,
            sequence: label.to_string(),
            evidence: Evidence::Decision {
                steps: vec!["zero sequence".into()],
                envelope: None,
                functional_value: None,
            },
        };
    }
    let phis: Vec<&Functional> = fam.all().collect();
    let certs: Vec<Option<MembershipCertificate>> = phis
        .par_iter()
        .map(|phi| {
            apply_functional(phi, seq)
                .ok()
                .map(|s| certify(&ws.f, &s, opts))
        })
        .collect();
    if let Some((phi, cert)) = phis
        .iter()
        .zip(&certs)
        .find_map(|(phi, c)| c.as_ref().filter(|c| c.verdict == Verdict::Out).map(|c| (phi, c)))
    {
        let step = format!("φ = {} sends the sequence outside {}", show(phi), ws.f);
        return prepend(cert.clone(), step, &weak_space, label);
    }

    let coords = coordinates(seq);
    let coord_certs: Vec<MembershipCertificate> =
        coords.par_iter().map(|c| certify(&ws.f, c, opts)).collect();
    if coord_certs.iter().all(|c| c.verdict == Verdict::In) {
        let mut steps = vec![format!(
            "every φ(x) is a combination of the {} coordinate sequences",
            coords.len()
        )];
        for (i, c) in coord_certs.iter().enumerate() {
            steps.push(format!("coordinate {} is In {} ({:?})", i + 1, ws.f, c.method));
        }
        let symbolic = coord_certs.iter().all(|c| c.method.is_symbolic());
        return MembershipCertificate {
            verdict: Verdict::In,
            method: if symbolic {
                Method::SymbolicStructure
            } else {
                coord_certs[0].method
            },
            space: weak_space,
            sequence: label.to_string(),
            evidence: Evidence::Decision {
                steps,
                envelope: None,
                functional_value: None,
            },
        };
    }
    let last = certs
        .into_iter()
        .flatten()
        .next()
        .unwrap_or_else(|| coord_certs[0].clone());
    MembershipCertificate {
        verdict: Verdict::Inconclusive,
        ..prepend(last, "no functional decided Out".into(), &weak_space, label)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakNormReport {
    pub n: u64,
    pub value: Scalar,
    pub attained_by: Functional,
    /// The maximum over the family is the supremum over the dual ball.
    pub exact_supremum: bool,
}

/// `max_φ ‖(φ(x_j))_{j ≤ n}‖_F` over the family. For a polytope dual ball
/// the convex objective peaks at a vertex, so the extreme points suffice.
pub fn weak_sup_norm(
    ws: &WeakSpec,
    seq: &LazySequence,
    fam: &FunctionalFamily,
    n: u64,
) -> Result<WeakNormReport> {
    match &ws.f.kind {
        SpaceKind::Lp {
            p: Exponent::Finite(p),
        } if *p >= Q::one() => {}
        SpaceKind::Lp {
            p: Exponent::Infinity,
        } => {}
        _ => {
            return Err(Error::UnsupportedSpace(format!(
                "weak sup norm needs lp with p ≥ 1, got {}",
                ws.f
            )))
        }
    }
    let phis: Vec<&Functional> = fam.all().collect();
    let values: Vec<Scalar> = phis
        .par_iter()
        .map(|phi| Ok(partial_norm(&ws.f, &apply_functional(phi, seq)?, n)))
        .collect::<Result<_>>()?;
    let (best, value) = values
        .into_iter()
        .enumerate()
        .reduce(|a, b| {
            if b.1.real_cmp(&a.1) == std::cmp::Ordering::Greater {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| Error::InvalidSpace("empty functional family".into()))?;
    Ok(WeakNormReport {
        n,
        value,
        attained_by: phis[best].clone(),
        exact_supremum: fam.exhaustive,
    })
}

/// Compatibility of every `φ ∘ f` with `F`, sampled over sequences and
/// scalars, together with the sufficient condition that `f` is strongly
/// non-contractive.
pub fn check_strongly_compatible(
    f: &MapSpec,
    ws: &WeakSpec,
    fam: &FunctionalFamily,
    seqs: &[LazySequence],
    alphas: &[Scalar],
    opts: ProbeOptions,
) -> MapPropertyReport {
    let phis: Vec<&Functional> = fam.all().collect();
    let mut cases = Vec::new();
    for (i, _) in seqs.iter().enumerate() {
        for (a, alpha) in alphas.iter().enumerate() {
            if alpha.is_zero() {
                continue;
            }
            for p in 0..phis.len() {
                cases.push((i, a, p));
            }
        }
    }
    let outcomes: Vec<(usize, usize, usize, Verdict, Verdict, bool)> = cases
        .par_iter()
        .filter_map(|&(i, a, p)| {
            let base = apply_functional(phis[p], &pushforward(f, &seqs[i])).ok()?;
            let scaled =
                apply_functional(phis[p], &pushforward(f, &scale(&alphas[a], &seqs[i]))).ok()?;
            let sb = decide_membership_symbolic(&ws.f, &base);
            let ss = decide_membership_symbolic(&ws.f, &scaled);
            let symbolic = sb.is_ok() && ss.is_ok();
            let vb = sb.map(|c| c.verdict).unwrap_or_else(|_| certify(&ws.f, &base, opts).verdict);
            let vs = ss.map(|c| c.verdict).unwrap_or_else(|_| certify(&ws.f, &scaled, opts).verdict);
            Some((i, a, p, vb, vs, symbolic))
        })
        .collect();

    let mut witnesses = Vec::new();
    let mut all_symbolic = true;
    for (i, a, p, vb, vs, symbolic) in &outcomes {
        all_symbolic &= *symbolic;
        if *vb == Verdict::Out && *vs == Verdict::In {
            witnesses.push(Witness {
                alpha: alphas[*a].clone(),
                x: None,
                sequence: Some(seqs[*i].to_string()),
                functional: Some(phis[*p].0.iter().map(format_q).collect()),
                scaled: format!("{vs:?}"),
                base: format!("{vb:?}"),
            });
        }
    }
    let domain = Shape::Vector(ws.y.clone());
    let f_on = f.on(domain.clone());
    let functionals: Vec<Vec<Q>> = phis.iter().map(|p| p.0.clone()).collect();
    let strong_nc =
        check_strongly_non_contractive(&f_on, alphas, &default_samples(&domain), &functionals);
    let mut notes = vec![format!(
        "strongly non-contractive: {:?} (sufficient for strong compatibility with weak lp)",
        strong_nc.verdict
    )];
    let verdict = if !witnesses.is_empty() {
        MapVerdict::Refuted
    } else if all_symbolic && f.homogeneity().is_some() {
        notes.push("φ∘f(αx) = sign(α)|α|^r φ∘f(x) for coordinatewise homogeneous f".into());
        MapVerdict::ProvenSymbolic
    } else {
        MapVerdict::HoldsOnSamples
    };
    MapPropertyReport {
        property: Property::Compatible {
            space: ws.f.clone().with_values(domain),
        },
        map: f_on,
        verdict,
        alphas: alphas
            .iter()
            .map(|a| AlphaBound {
                alpha: a.clone(),
                k: None,
                inf_ratio: None,
                exact_on_grid: None,
            })
            .collect(),
        witnesses,
        samples: outcomes.len(),
        notes,
    }
}

/// Family membership decided through weak probes.
#[derive(Clone, Debug)]
pub struct WeakProbe {
    pub y: VectorSpaceSpec,
    pub functionals: FunctionalFamily,
    pub opts: ProbeOptions,
}

impl FamilyProbe for WeakProbe {
    fn certify(&self, space: &SpaceSpec, x: &LazySequence) -> MembershipCertificate {
        let ws = WeakSpec {
            f: space.clone().with_values(Shape::Scalar),
            y: self.y.clone(),
        };
        weak_membership_probe(&ws, x, &self.functionals, self.opts)
    }
}

/// The construction pipeline for `G^w(E, f, (F_λ^w(Y)))`, with every family
/// membership check replaced by a weak probe.
pub fn generate_weak(
    x: LazySequence,
    e: SpaceSpec,
    f: MapSpec,
    family: NestedFamily,
    fam: FunctionalFamily,
    opts: ProbeOptions,
) -> Result<GeneratedSubspace> {
    for m in family.members() {
        WeakSpec::new(m.clone().with_values(Shape::Scalar), fam.space.clone())?;
    }
    let probe = WeakProbe {
        y: fam.space.clone(),
        functionals: fam,
        opts,
    };
    let gspec = GSpec { e, f, family };
    GeneratedSubspace::with_probe(gspec, x, opts, Arc::new(probe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, ScalarField};

    fn k2() -> VectorSpaceSpec {
        VectorSpaceSpec::sup(2)
    }

    fn on_e1(x: LazySequence) -> LazySequence {
        let zero = LazySequence::zero_scalar();
        LazySequence::from_components(k2(), vec![x, zero]).unwrap()
    }

    fn powlog(a: Q, b: Q) -> LazySequence {
        LazySequence::powlog(ScalarField::rational(), a, b, qi(1)).unwrap()
    }

    #[test]
    fn family_shapes() {
        let fam = FunctionalFamily::standard(VectorSpaceSpec::p(3, qi(1)));
        assert_eq!(fam.extreme_points.len(), 8);
        assert_eq!(fam.random.len(), 32);
        for phi in fam.all() {
            let n = fam.space.dual_norm(&phi.0);
            assert!(n.real_cmp(&Scalar::one()) != std::cmp::Ordering::Greater);
        }
        let sup = FunctionalFamily::standard(k2());
        assert_eq!(sup.extreme_points.len(), 4);
        assert_eq!(FunctionalFamily::standard(k2()), sup);
    }

    #[test]
    fn weak_membership_examples() {
        let fam = FunctionalFamily::standard(k2());
        let ws = WeakSpec::new(SpaceSpec::lp(qi(1)), k2()).unwrap();
        let opts = ProbeOptions::default();
        let c = weak_membership_probe(&ws, &on_e1(powlog(qi(2), qi(0))), &fam, opts);
        assert_eq!(c.verdict, Verdict::In);
        let c = weak_membership_probe(&ws, &on_e1(powlog(qi(1), qi(0))), &fam, opts);
        assert_eq!(c.verdict, Verdict::Out);
        let zero = LazySequence::zero(ValueKind::vector(ScalarField::rational(), k2()));
        assert_eq!(weak_membership_probe(&ws, &zero, &fam, opts).verdict, Verdict::In);
    }

    #[test]
    fn sup_norm_of_geometric() {
        let fam = FunctionalFamily::standard(k2());
        let ws = WeakSpec::new(SpaceSpec::lp(qi(1)), k2()).unwrap();
        let g = on_e1(LazySequence::geometric(ScalarField::rational(), q(1, 2)));
        let rep = weak_sup_norm(&ws, &g, &fam, 10).unwrap();
        assert_eq!(rep.value, Scalar::Rational(q(1023, 1024)));
        assert!(rep.exact_supremum);
        let twice = weak_sup_norm(&ws, &scale(&Scalar::Rational(qi(2)), &g), &fam, 10).unwrap();
        assert_eq!(twice.value, Scalar::Rational(q(1023, 512)));
    }

    #[test]
    fn clipped_lift_refuted() {
        let fam = FunctionalFamily::from_list(k2(), vec![vec![qi(1), qi(0)]]);
        let ws = WeakSpec::new(SpaceSpec::lp(qi(1)), k2()).unwrap();
        let half = LazySequence::explicit(ScalarField::rational(), vec![q(1, 2)], true).unwrap();
        let rep = check_strongly_compatible(
            &MapSpec::clipped_linear(),
            &ws,
            &fam,
            &[on_e1(half)],
            &[Scalar::Rational(qi(2))],
            ProbeOptions::default(),
        );
        assert_eq!(rep.verdict, MapVerdict::Refuted);
        let id = check_strongly_compatible(
            &MapSpec::identity(),
            &ws,
            &FunctionalFamily::standard(k2()),
            &[on_e1(powlog(qi(1), qi(0)))],
            &crate::maps::default_alphas(),
            ProbeOptions::default(),
        );
        assert_eq!(id.verdict, MapVerdict::ProvenSymbolic);
    }
}
