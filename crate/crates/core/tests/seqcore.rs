use proptest::prelude::*;
use rayon::prelude::*;

use pointwise::scalar::{q, qi, Scalar, ScalarField, Q};
use pointwise::seqcore::{
    agree_on_prefix, embed, linear_combine, restrict, scale, split, zero_free_version, IndexSet,
    LazySequence, SupportHint, Value, VectorSpaceSpec, DEFAULT_ZERO_FREE_BUDGET,
};

const PREFIX: u64 = 1000;

fn rat() -> ScalarField {
    ScalarField::rational()
}

fn powlog(a: Q, b: Q) -> LazySequence {
    LazySequence::powlog(rat(), a, b, qi(1)).unwrap()
}

fn scalar_at(x: &LazySequence, j: u64) -> Q {
    x.eval_scalar(j).to_rational().unwrap()
}

#[test]
fn eval_examples() {
    let half_pow = scale(&Scalar::Rational(q(1, 2)), &LazySequence::geometric(rat(), q(1, 2)));
    assert_eq!(scalar_at(&LazySequence::geometric(rat(), q(1, 2)), 3), q(1, 8));
    assert_eq!(scalar_at(&half_pow, 3), q(1, 16));
    assert!(LazySequence::zero_scalar().eval(1_000_000).is_zero());
    assert_eq!(scalar_at(&powlog(qi(1), qi(0)), 5), q(1, 5));
}

#[test]
fn zero_free_examples() {
    let x = LazySequence::from_rational_fn(rat(), "interleaved", |j| {
        if j % 2 == 1 {
            Q::from_integer(((j + 1) / 2).into())
        } else {
            qi(0)
        }
    })
    .with_support(SupportHint::InfiniteSupport);
    let x0 = zero_free_version(&x, DEFAULT_ZERO_FREE_BUDGET);
    for k in 1..=100 {
        assert_eq!(scalar_at(&x0, k), qi(k as i64));
    }
    let finite = LazySequence::explicit(rat(), vec![qi(1), qi(1)], false).unwrap();
    assert_eq!(finite.support(), SupportHint::FiniteSupport(2));
    assert!(zero_free_version(&finite, DEFAULT_ZERO_FREE_BUDGET).is_structurally_zero());
    let h = powlog(qi(1), qi(0));
    assert_eq!(agree_on_prefix(&zero_free_version(&h, DEFAULT_ZERO_FREE_BUDGET), &h, 100), None);
}

#[test]
fn restrict_and_embed_examples() {
    let h = powlog(qi(1), qi(0));
    let odd = restrict(&h, &IndexSet::odds());
    assert_eq!((1..=3).map(|m| scalar_at(&odd, m)).collect::<Vec<_>>(), [qi(1), q(1, 3), q(1, 5)]);
    let fin = restrict(&h, &IndexSet::finite(vec![2, 4]).unwrap());
    assert_eq!(fin.support(), SupportHint::FiniteSupport(2));
    assert!(fin.eval(3).is_zero());

    let nat = LazySequence::from_rational_fn(rat(), "n", |j| Q::from_integer(j.into()));
    let e = embed(&nat, &IndexSet::evens());
    let got: Vec<Q> = (1..=6).map(|j| scalar_at(&e, j)).collect();
    assert_eq!(got, [qi(0), qi(1), qi(0), qi(2), qi(0), qi(3)]);
    let e0 = zero_free_version(&e, DEFAULT_ZERO_FREE_BUDGET);
    assert_eq!(agree_on_prefix(&e0, &nat, 200), None);
}

#[test]
fn linear_combination_examples() {
    let x = powlog(qi(1), qi(0));
    let y = LazySequence::geometric(rat(), q(1, 3));
    let one = Scalar::Rational(qi(1));
    let zero = Scalar::Rational(qi(0));
    let same = linear_combine(&[(one.clone(), x.clone()), (zero, y)]).unwrap();
    assert_eq!(agree_on_prefix(&same, &x, 100), None);
    let cancel = linear_combine(&[(one.clone(), x.clone()), (Scalar::Rational(qi(-1)), x.clone())]).unwrap();
    assert!((1..=100).all(|j| cancel.eval(j).is_zero()));
    let v = LazySequence::from_components(VectorSpaceSpec::sup(2), vec![x.clone(), x.clone()]).unwrap();
    assert!(linear_combine(&[(one.clone(), x), (one, v)]).is_err());
}

#[test]
fn split_examples() {
    let h = powlog(qi(1), qi(0));
    let (u, v) = split(&h, &IndexSet::odds());
    assert_eq!((1..=4).map(|j| scalar_at(&u, j)).collect::<Vec<_>>(), [qi(1), qi(0), q(1, 3), qi(0)]);
    assert_eq!((1..=4).map(|j| scalar_at(&v, j)).collect::<Vec<_>>(), [qi(0), q(1, 2), qi(0), q(1, 4)]);
    let (u, v) = split(&h, &IndexSet::finite(vec![]).unwrap());
    assert!((1..=50).all(|j| u.eval(j).is_zero()));
    assert_eq!(agree_on_prefix(&v, &h, 50), None);
}

#[test]
fn evaluation_is_repeatable_under_concurrency() {
    let x = restrict(&powlog(q(1, 2), qi(1)), &IndexSet::dyadic_ray(3).unwrap());
    let first: Vec<Value> = (1..=500).map(|j| x.eval(j)).collect();
    let again: Vec<Value> = (1..=500u64).into_par_iter().map(|j| x.eval(j)).collect();
    assert_eq!(first, again);
}

fn index_set() -> impl Strategy<Value = IndexSet> {
    prop_oneof![
        (1u64..7)
            .prop_flat_map(|c| (Just(c), (1 - c as i64)..5))
            .prop_map(|(c, d)| IndexSet::progression(c, d).unwrap()),
        (1u32..8).prop_map(|i| IndexSet::dyadic_ray(i).unwrap()),
        Just(IndexSet::complement(IndexSet::odds())),
        (1u32..5).prop_map(|i| IndexSet::image(IndexSet::evens(), IndexSet::dyadic_ray(i).unwrap())),
        (1u32..5).prop_map(|i| IndexSet::complement(IndexSet::dyadic_ray(i).unwrap())),
    ]
}

fn small_q() -> impl Strategy<Value = Q> {
    (-8i64..=8, 1i64..=4).prop_map(|(n, d)| q(n, d))
}

fn sequence() -> impl Strategy<Value = LazySequence> {
    prop_oneof![
        (small_q(), small_q()).prop_map(|(a, b)| powlog(a, b)),
        (-3i64..=3, 1i64..=4)
            .prop_filter("nonzero", |(n, _)| *n != 0)
            .prop_map(|(n, d)| LazySequence::geometric(rat(), q(n, d))),
        prop::collection::vec(small_q(), 1..6)
            .prop_map(|v| LazySequence::explicit(rat(), v, true).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enumeration_and_rank_agree(s in index_set()) {
        let mut last = 0;
        for m in 1..=300 {
            let j = s.nth(m).unwrap();
            prop_assert!(j > last);
            prop_assert_eq!(s.rank(j), Some(m));
            prop_assert!(s.contains(j));
            last = j;
        }
        for j in 1..=last {
            prop_assert_eq!(s.contains(j), s.rank(j).is_some());
        }
    }

    #[test]
    fn restrict_inverts_embed(x in sequence(), s in index_set()) {
        let back = restrict(&embed(&x, &s), &s);
        prop_assert_eq!(agree_on_prefix(&back, &x, PREFIX), None);
    }

    #[test]
    fn split_reassembles_with_disjoint_supports(x in sequence(), s in index_set()) {
        let (u, v) = split(&x, &s);
        for j in 1..=PREFIX {
            let (uj, vj) = (u.eval(j), v.eval(j));
            prop_assert!(uj.is_zero() || vj.is_zero());
            prop_assert_eq!(uj.add(&vj).unwrap(), x.eval(j));
        }
    }

    #[test]
    fn zero_free_is_idempotent_without_zeros(a in small_q(), b in small_q()) {
        let x = powlog(a, b);
        let x0 = zero_free_version(&x, DEFAULT_ZERO_FREE_BUDGET);
        prop_assert_eq!(agree_on_prefix(&x0, &x, PREFIX), None);
        let x00 = zero_free_version(&x0, DEFAULT_ZERO_FREE_BUDGET);
        prop_assert_eq!(agree_on_prefix(&x00, &x0, PREFIX), None);
    }

    #[test]
    fn envelope_survives_dyadic_restriction(a in small_q(), b in small_q(), i in 1u32..8) {
        let r = restrict(&powlog(a.clone(), b.clone()), &IndexSet::dyadic_ray(i).unwrap());
        let env = r.envelope().expect("envelope transported");
        prop_assert_eq!(&env.bound.a, &a);
        prop_assert_eq!(&env.bound.b, &b);
        for m in 1..=PREFIX {
            prop_assert!(env.brackets(m, r.magnitude(m).to_f64()), "m = {}", m);
        }
    }

    #[test]
    fn declared_envelopes_bracket_values(a in small_q(), b in small_q(), c in 1i64..5) {
        let x = LazySequence::powlog(rat(), a, b, qi(c)).unwrap();
        prop_assert_eq!(x.envelope_violation(PREFIX), None);
    }
}
