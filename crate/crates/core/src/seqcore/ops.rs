//! Operations on lazy sequences. Each one propagates whatever structure it
//! can (envelopes, recurrences, components) so later decisions stay exact.

use std::sync::{Arc, Mutex};

use super::envelope::Envelope;
use super::index::IndexSet;
use super::sequence::{LazySequence, Structure, SupportHint};
use super::value::Value;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default number of indices scanned per nonzero coordinate by
/// [`zero_free_version`].
pub const DEFAULT_ZERO_FREE_BUDGET: u64 = 1_000_000;

/// `m ↦ x_{s_m}` for the enumeration `s` of `set`.
pub fn restrict(x: &LazySequence, set: &IndexSet) -> LazySequence {
    if set.is_all() {
        return x.clone();
    }
    let kind = x.kind().clone();
    if let Some(n) = set.cardinality() {
        if n == 0 {
            return LazySequence::zero(kind);
        }
    }
    match x.structure() {
        Structure::Zero => return LazySequence::zero(kind),
        Structure::Embedded { of, on } => {
            if on == set {
                return of.clone();
            }
            if on.disjoint_from(set) == Some(true) {
                return LazySequence::zero(kind);
            }
        }
        Structure::Scaled { factor, of } => return scale(factor, &restrict(of, set)),
        Structure::Combination(terms) => {
            let parts: Vec<(Scalar, LazySequence)> = terms
                .iter()
                .map(|(c, y)| (c.clone(), restrict(y, set)))
                .collect();
            return linear_combine(&parts).expect("terms already share a kind");
        }
        Structure::Restricted { of, along } => {
            return restrict(of, &IndexSet::image(along.clone(), set.clone()));
        }
        _ => {}
    }

    let g = x.generator();
    let s = set.clone();
    let zero = kind.zero();
    let finite = set.cardinality();
    let mut out = LazySequence::from_fallible(kind, format!("{x}|{set}"), move |m| {
        match s.nth(m) {
            Some(j) => g(j),
            None => Ok(zero.clone()),
        }
    })
    .with_structure(Structure::Restricted {
        of: x.clone(),
        along: set.clone(),
    });

    let envelope_full = matches!(x.envelope(), Some(Envelope { on: None, .. }));
    if let (Some(Envelope { bound, on: None }), Some(rho)) = (x.envelope(), set.ratio_bounds()) {
        out = out.with_envelope(Envelope::full(bound.along(rho)));
    }
    if let (Some(rec), IndexSet::ArithmeticProgression { c, d }) = (x.recurrence(), set) {
        out = out.with_recurrence(rec.along_progression(*c, *d));
    }
    if let Some(comps) = x.components() {
        out = out.with_components(comps.iter().map(|c| restrict(c, set)).collect());
    }
    let support = match (finite, x.support()) {
        (Some(n), _) => SupportHint::FiniteSupport(n),
        (None, SupportHint::FiniteSupport(n)) => SupportHint::FiniteSupport(set.count_le(n)),
        (None, _) if envelope_full => SupportHint::InfiniteSupport,
        _ => match out.recurrence() {
            Some(r) => match r.support_bound() {
                Some(n) => SupportHint::FiniteSupport(n),
                None => SupportHint::InfiniteSupport,
            },
            None => SupportHint::Unknown,
        },
    };
    out.with_support(support)
}

/// `Σ_k x_k ⊗ e_{s_k}`: coordinate `s_k` holds `x_k`, all others are zero.
pub fn embed(x: &LazySequence, set: &IndexSet) -> LazySequence {
    if set.is_all() {
        return x.clone();
    }
    let kind = x.kind().clone();
    if x.is_structurally_zero() || set.cardinality() == Some(0) {
        return LazySequence::zero(kind);
    }
    let g = x.generator();
    let s = set.clone();
    let zero = kind.zero();
    let len = set.cardinality();
    let mut out = LazySequence::from_fallible(kind, format!("{x}→{set}"), move |j| {
        match s.rank(j) {
            Some(m) => g(m),
            None => Ok(zero.clone()),
        }
    })
    .with_structure(Structure::Embedded {
        of: x.clone(),
        on: set.clone(),
    });
    if let (Some(Envelope { bound, on: None }), Some(rho)) = (x.envelope(), set.ratio_bounds()) {
        out = out.with_envelope(Envelope::on(bound.onto(rho), set.clone()));
    }
    if let Some(comps) = x.components() {
        out = out.with_components(comps.iter().map(|c| embed(c, set)).collect());
    }
    let support = match x.support() {
        SupportHint::FiniteSupport(0) => SupportHint::FiniteSupport(0),
        SupportHint::FiniteSupport(n) => match set.nth(n.min(len.unwrap_or(n))) {
            Some(j) => SupportHint::FiniteSupport(j),
            None => SupportHint::Unknown,
        },
        SupportHint::InfiniteSupport if len.is_none() => SupportHint::InfiniteSupport,
        _ if len.is_some() => SupportHint::FiniteSupport(set.nth(len.unwrap()).unwrap_or(0)),
        _ => SupportHint::Unknown,
    };
    out.with_support(support)
}

/// `c·x`.
pub fn scale(c: &Scalar, x: &LazySequence) -> LazySequence {
    let kind = x.kind().clone();
    if c.is_zero() || x.is_structurally_zero() {
        return LazySequence::zero(kind);
    }
    if c.exact_eq(&Scalar::one()) == Some(true) {
        return x.clone();
    }
    if let Structure::Scaled { factor, of } = x.structure() {
        return scale(&(c * factor), of);
    }
    let g = x.generator();
    let factor = c.clone();
    let mut out = LazySequence::from_fallible(kind, format!("{c}·{x}"), move |j| {
        Ok(g(j)?.scale(&factor))
    })
    .with_structure(Structure::Scaled {
        factor: c.clone(),
        of: x.clone(),
    })
    .with_support(x.support());
    if let Some(env) = x.envelope() {
        out = out.with_envelope(env.scale(c.abs().to_f64()));
    }
    if let (Some(rec), Some(cq)) = (x.recurrence(), c.to_rational()) {
        if matches!(c, Scalar::Rational(_)) {
            out = out.with_recurrence(rec.scale(&cq));
        }
    }
    if let Some(comps) = x.components() {
        out = out.with_components(comps.iter().map(|y| scale(c, y)).collect());
    }
    out
}

/// `Σ a_i x_i` for a finite list of terms sharing one value kind.
pub fn linear_combine(terms: &[(Scalar, LazySequence)]) -> Result<LazySequence> {
    let Some((_, first)) = terms.first() else {
        return Err(Error::IncompatibleKinds("empty combination".into()));
    };
    let kind = first.kind().clone();
    for (_, y) in terms {
        if !y.kind().same_shape(&kind) {
            return Err(Error::IncompatibleKinds(format!(
                "{} and {} have different value kinds",
                first.label(),
                y.label()
            )));
        }
    }
    let live: Vec<(Scalar, LazySequence)> = terms
        .iter()
        .filter(|(c, y)| !c.is_zero() && !y.is_structurally_zero())
        .cloned()
        .collect();
    match live.as_slice() {
        [] => return Ok(LazySequence::zero(kind)),
        [(c, y)] => return Ok(scale(c, y)),
        _ => {}
    }
    let gens: Vec<(Scalar, Arc<super::sequence::Generator>)> =
        live.iter().map(|(c, y)| (c.clone(), y.generator())).collect();
    let zero = kind.zero();
    let label = live
        .iter()
        .map(|(c, y)| format!("{c}·{y}"))
        .collect::<Vec<_>>()
        .join(" + ");
    let mut out = LazySequence::from_fallible(kind, label, move |j| {
        let mut acc = zero.clone();
        for (c, g) in &gens {
            acc = acc.add(&g(j)?.scale(c))?;
        }
        Ok(acc)
    })
    .with_structure(Structure::Combination(live.clone()));
    let supports: Vec<SupportHint> = live.iter().map(|(_, y)| y.support()).collect();
    if supports.iter().all(|s| matches!(s, SupportHint::FiniteSupport(_))) {
        let n = supports
            .iter()
            .map(|s| match s {
                SupportHint::FiniteSupport(n) => *n,
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        out = out.with_support(SupportHint::FiniteSupport(n));
    }
    if live.iter().all(|(_, y)| y.components().is_some()) {
        let d = live[0].1.components().unwrap().len();
        let comps: Result<Vec<LazySequence>> = (0..d)
            .map(|i| {
                let parts: Vec<(Scalar, LazySequence)> = live
                    .iter()
                    .map(|(c, y)| (c.clone(), y.components().unwrap()[i].clone()))
                    .collect();
                linear_combine(&parts)
            })
            .collect();
        out = out.with_components(comps?);
    }
    Ok(out)
}

/// `(u, v)` with `u = x` on `set` and zero elsewhere, `v = x - u`.
pub fn split(x: &LazySequence, set: &IndexSet) -> (LazySequence, LazySequence) {
    let rest = IndexSet::complement(set.clone());
    let u = embed(&restrict(x, set), set);
    let v = embed(&restrict(x, &rest), &rest);
    (u, v)
}

/// The zero-free version `x⁰`: the nonzero coordinates of `x` in order, or
/// the zero sequence when only finitely many are nonzero.
///
/// Structure is used where available. Opaque sequences are scanned lazily;
/// a scan that passes `budget` consecutive zeros fails with
/// [`Error::BudgetExhausted`] through [`LazySequence::try_eval`].
pub fn zero_free_version(x: &LazySequence, budget: u64) -> LazySequence {
    let kind = x.kind().clone();
    if let SupportHint::FiniteSupport(_) = x.support() {
        return LazySequence::zero(kind);
    }
    match x.structure() {
        Structure::Zero => return LazySequence::zero(kind),
        Structure::Embedded { of, on } if on.is_infinite() => {
            return zero_free_version(of, budget);
        }
        Structure::Scaled { factor, of } => return scale(factor, &zero_free_version(of, budget)),
        Structure::ZeroFree { .. } => return x.clone(),
        _ => {}
    }
    match x.envelope() {
        Some(Envelope { on: None, .. }) => return x.clone(),
        Some(Envelope { on: Some(s), .. }) if s.ratio_bounds().is_some() => {
            return restrict(x, s);
        }
        _ => {}
    }
    if let Some(rec) = x.recurrence() {
        return match rec.zero_free() {
            None => LazySequence::zero(kind),
            Some(r) if r == *rec => x.clone(),
            Some(r) => LazySequence::recurrent(kind.field, r)
                .with_structure(Structure::ZeroFree { of: x.clone() }),
        };
    }
    scanned_zero_free(x, budget)
}

struct Scan {
    positions: Vec<u64>,
    scanned_to: u64,
}

fn scanned_zero_free(x: &LazySequence, budget: u64) -> LazySequence {
    let g = x.generator();
    let state = Arc::new(Mutex::new(Scan {
        positions: Vec::new(),
        scanned_to: 0,
    }));
    let budget = budget.max(1);
    LazySequence::from_fallible(x.kind().clone(), format!("{x}⁰"), move |m| {
        let mut st = state.lock().unwrap_or_else(|p| p.into_inner());
        while (st.positions.len() as u64) < m {
            let since = st.positions.last().copied().unwrap_or(0);
            if st.scanned_to - since >= budget {
                return Err(Error::BudgetExhausted {
                    requested: m,
                    found: st.positions.len() as u64,
                    scanned: st.scanned_to,
                });
            }
            let j = st.scanned_to + 1;
            st.scanned_to = j;
            if !g(j)?.is_zero() {
                st.positions.push(j);
            }
        }
        let j = st.positions[m as usize - 1];
        drop(st);
        g(j)
    })
    .with_support(x.support())
    .with_structure(Structure::ZeroFree { of: x.clone() })
}

/// Checks `x = y` exactly (or within epsilon for float values) on `1..=n`.
pub fn agree_on_prefix(x: &LazySequence, y: &LazySequence, n: u64) -> Option<u64> {
    let eps = x.kind().field.epsilon;
    (1..=n).find(|&j| {
        let (a, b): (Value, Value) = (x.eval(j), y.eval(j));
        !a.approx_eq(&b, eps)
    })
}

/// First nonzero coordinate at or below `limit`.
pub fn first_nonzero(x: &LazySequence, limit: u64) -> Option<u64> {
    (1..=limit).find(|&j| !x.eval(j).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, Q, ScalarField};
    use crate::seqcore::value::ValueKind;

    fn rat() -> ScalarField {
        ScalarField::rational()
    }

    fn harmonic() -> LazySequence {
        LazySequence::powlog(rat(), qi(1), qi(0), qi(1)).unwrap()
    }

    fn opaque_interleaved() -> LazySequence {
        LazySequence::from_rational_fn(rat(), "interleaved", |j| {
            if j % 2 == 1 {
                Q::from_integer(((j + 1) / 2).into())
            } else {
                qi(0)
            }
        })
    }

    fn r(x: Q) -> Scalar {
        Scalar::Rational(x)
    }

    #[test]
    fn zero_free_removes_interleaved_zeros() {
        let x0 = zero_free_version(&opaque_interleaved(), 10);
        for m in 1..50 {
            assert_eq!(x0.eval_scalar(m), r(Q::from_integer(m.into())));
        }
    }

    #[test]
    fn zero_free_of_finite_support_is_zero() {
        let x = LazySequence::explicit(rat(), vec![qi(1), qi(1)], false).unwrap();
        let x0 = zero_free_version(&x, 10);
        assert!(x0.is_structurally_zero());
        assert!((1..100).all(|j| x0.eval(j).is_zero()));
    }

    #[test]
    fn zero_free_budget_exhaustion_is_reported() {
        let x = LazySequence::from_rational_fn(rat(), "two-ones", |j| {
            if j <= 2 {
                qi(1)
            } else {
                qi(0)
            }
        });
        let x0 = zero_free_version(&x, 100);
        assert_eq!(x0.try_eval(2).unwrap(), Value::Scalar(Scalar::one()));
        match x0.try_eval(3) {
            Err(Error::BudgetExhausted { requested, found, .. }) => {
                assert_eq!((requested, found), (3, 2));
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn zero_free_without_zeros_is_identity() {
        let h = harmonic();
        let h0 = zero_free_version(&h, 10);
        assert_eq!(agree_on_prefix(&h, &h0, 100), None);
        let opaque = LazySequence::from_rational_fn(rat(), "ones", |_| qi(1));
        let o0 = zero_free_version(&opaque, 10);
        assert_eq!(agree_on_prefix(&opaque, &o0, 100), None);
    }

    #[test]
    fn restrict_and_embed() {
        let h = harmonic();
        let odd = restrict(&h, &IndexSet::odds());
        assert_eq!(odd.eval_scalar(2), r(q(1, 3)));
        let e = embed(&h, &IndexSet::evens());
        let vals: Vec<Scalar> = (1..=6).map(|j| e.eval_scalar(j)).collect();
        assert_eq!(vals, vec![r(qi(0)), r(qi(1)), r(qi(0)), r(q(1, 2)), r(qi(0)), r(q(1, 3))]);
        let back = restrict(&e, &IndexSet::evens());
        assert_eq!(agree_on_prefix(&back, &h, 1000), None);
        let fin = restrict(&h, &IndexSet::finite(vec![2, 4]).unwrap());
        assert_eq!(fin.support(), SupportHint::FiniteSupport(2));
        assert_eq!(fin.eval_scalar(2), r(q(1, 4)));
        assert!(fin.eval(3).is_zero());
    }

    #[test]
    fn embedded_zero_free_is_the_original() {
        let h = harmonic();
        let set = IndexSet::image(IndexSet::evens(), IndexSet::dyadic_ray(2).unwrap());
        let y = embed(&h, &set);
        let y0 = zero_free_version(&y, 1000);
        assert_eq!(agree_on_prefix(&y0, &h, 1000), None);
        // The same through the opaque scanner.
        let opaque = LazySequence::from_fn(y.kind().clone(), "opaque", {
            let y = y.clone();
            move |j| y.eval(j)
        });
        let s0 = zero_free_version(&opaque, 1000);
        assert_eq!(agree_on_prefix(&s0, &h, 200), None);
    }

    #[test]
    fn combinations() {
        let h = harmonic();
        let g = LazySequence::geometric(rat(), q(1, 2));
        let c = linear_combine(&[(Scalar::one(), h.clone()), (Scalar::zero(), g.clone())]).unwrap();
        assert_eq!(agree_on_prefix(&c, &h, 100), None);
        let z = linear_combine(&[(Scalar::one(), h.clone()), (r(qi(-1)), h.clone())]).unwrap();
        assert!((1..100).all(|j| z.eval(j).is_zero()));
        let d = linear_combine(&[(r(qi(2)), g.clone())]).unwrap();
        assert!((1..60u64).all(|j| d.eval_scalar(j) == r(Q::new(2.into(), num_traits::pow(num_bigint::BigInt::from(2), j as usize)))));
        let vk = ValueKind::vector(rat(), crate::seqcore::value::VectorSpaceSpec::sup(2));
        let bad = linear_combine(&[(Scalar::one(), h), (Scalar::one(), LazySequence::zero(vk))]);
        assert!(matches!(bad, Err(Error::IncompatibleKinds(_))));
    }

    #[test]
    fn split_reconstructs() {
        let h = harmonic();
        let (u, v) = split(&h, &IndexSet::odds());
        assert_eq!(u.eval_scalar(3), r(q(1, 3)));
        assert!(u.eval(2).is_zero());
        assert_eq!(v.eval_scalar(2), r(q(1, 2)));
        let sum = linear_combine(&[(Scalar::one(), u.clone()), (Scalar::one(), v)]).unwrap();
        assert_eq!(agree_on_prefix(&sum, &h, 1000), None);
        let u0 = zero_free_version(&u, 10);
        assert_eq!(agree_on_prefix(&u0, &restrict(&h, &IndexSet::odds()), 500), None);
        let (e, rest) = split(&h, &IndexSet::empty());
        assert!(e.is_structurally_zero());
        assert_eq!(agree_on_prefix(&rest, &h, 100), None);
    }

    #[test]
    fn restricted_envelope_brackets() {
        let x = LazySequence::powlog(rat(), q(1, 2), qi(4), qi(1)).unwrap();
        for i in 1..8 {
            let y = restrict(&x, &IndexSet::dyadic_ray(i).unwrap());
            assert!(y.envelope().is_some());
            assert_eq!(y.envelope_violation(1000), None, "ray {i}");
        }
    }

    #[test]
    fn concurrent_zero_free_scans_agree() {
        use rayon::prelude::*;
        let x0 = zero_free_version(&opaque_interleaved(), 10);
        let vals: Vec<Value> = (1..=2000u64).into_par_iter().map(|m| x0.eval(2001 - m)).collect();
        for (i, v) in vals.iter().rev().enumerate() {
            assert_eq!(*v, Value::Scalar(r(Q::from_integer((i as u64 + 1).into()))));
        }
    }
}
