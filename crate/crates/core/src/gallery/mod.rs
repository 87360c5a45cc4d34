//! Worked examples and counterexamples as executable regressions, and the
//! catalog of mother vectors.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, rank};
use crate::scalar::{format_q, q, qi, qstr, qvec, ScalarField, Q};
use crate::seqcore::{restrict, IndexSet, LazySequence, Recurrence};
use crate::spaces::{
    certify, check_invariant_axioms, check_strongly_invariant, decide_membership_symbolic,
    partial_norm, AxiomReport, MembershipCertificate, ProbeOptions, SpaceSpec,
    StrongInvarianceReport, Verdict, Violation,
};

#[derive(Clone, Debug, Serialize)]
pub struct KernelRegression {
    pub space: SpaceSpec,
    pub witness_in: MembershipCertificate,
    pub odd_subsequence_out: MembershipCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_functional_value: Option<String>,
    pub e1_out: MembershipCertificate,
    pub functional_partial_sums: Vec<String>,
    /// `‖w‖₁` from the closed form.
    pub l1_norm: Option<String>,
    /// `(n, ‖(w_1, …, w_n)‖₁)`.
    pub truncated_l1: Vec<(u64, String)>,
    pub axioms: AxiomReport,
    pub strong: StrongInvarianceReport,
    pub passed: bool,
}

/// `w = (1, -1, 1/2, -1/2, 1/4, -1/4, …)`.
pub fn kernel_witness() -> LazySequence {
    let rec = Recurrence::new(vec![], vec![qi(1), qi(-1)], q(1, 2)).expect("nonempty period");
    LazySequence::recurrent(ScalarField::rational(), rec).with_label("w")
}

/// The kernel of `x ↦ Σ x_j` inside `ℓ₁` is invariant but not strongly
/// invariant: `w` lies in it while its odd-indexed subsequence and `e₁` do not.
pub fn kernel_space_counterexample() -> Result<KernelRegression> {
    let space = SpaceSpec::kernel_ones();
    let opts = ProbeOptions::default();
    let w = kernel_witness();
    let witness_in = certify(&space, &w, opts);
    let odd = restrict(&w, &IndexSet::odds());
    let odd_subsequence_out = certify(&space, &odd, opts);
    let odd_value = odd_subsequence_out.functional_value();
    let e1_out = certify(&space, &LazySequence::unit(ScalarField::rational(), 1), opts);

    let mut running = Q::zero();
    let functional_partial_sums = (1..=8)
        .map(|j| {
            running += w.eval_scalar(j).to_rational().expect("rational");
            format_q(&running)
        })
        .collect();
    let l1_norm = w.recurrence().and_then(|r| r.abs_power_sum(1));
    let l1 = SpaceSpec::lp(qi(1));
    let truncated_l1 = [2u64, 4, 8, 16, 32]
        .iter()
        .map(|&n| (n, partial_norm(&l1, &w, n).to_string()))
        .collect();

    let axioms = check_invariant_axioms(&space, &[w.clone()], 64, opts)?;
    let strong = check_strongly_invariant(&space, &[w], &[IndexSet::odds()], 64, opts)?;

    let subsequence_flagged = strong
        .violations
        .iter()
        .any(|v| matches!(v, Violation::Subsequence { .. }));
    let e1_flagged = strong.violations.iter().any(|v| {
        matches!(v, Violation::FiniteSupport { probe, .. } if probe == "e1")
    });
    let norms_equal = axioms.samples.iter().all(|s| s.norms_equal == Some(true));
    let passed = witness_in.verdict == Verdict::In
        && odd_subsequence_out.verdict == Verdict::Out
        && odd_value == Some(qi(2))
        && e1_out.verdict == Verdict::Out
        && axioms.holds()
        && norms_equal
        && subsequence_flagged
        && e1_flagged
        && l1_norm == Some(qi(4));
    Ok(KernelRegression {
        space,
        witness_in,
        odd_subsequence_out,
        odd_functional_value: odd_value.as_ref().map(format_q),
        e1_out,
        functional_partial_sums,
        l1_norm: l1_norm.as_ref().map(format_q),
        truncated_l1,
        axioms,
        strong,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct R3Demo {
    #[serde(with = "qvec")]
    pub point: Vec<Q>,
    #[serde(with = "qvec")]
    pub doubled: Vec<Q>,
    /// `2·(1,1,1) ∉ A`, so no subspace through `(1,1,1)` fits in `A ∪ {0}`.
    pub doubled_in_a: bool,
    /// Rank of the basis of the plane `z = 0`.
    pub plane_dimension: usize,
    /// Every sampled combination of the plane basis lies in `A ∪ {0}`.
    pub plane_inside: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodDemo {
    pub d: usize,
    pub functionals: Vec<Vec<String>>,
    #[serde(with = "qstr")]
    pub epsilon: Q,
    #[serde(with = "qvec")]
    pub y0: Vec<Q>,
    #[serde(with = "qstr")]
    pub delta: Q,
    #[serde(with = "qstr")]
    pub alpha: Q,
    #[serde(with = "qvec")]
    pub alpha_y0: Vec<Q>,
    pub alpha_y0_in_a: bool,
    #[serde(with = "qstr")]
    pub lambda: Q,
    #[serde(with = "qvec")]
    pub scaled: Vec<Q>,
    pub scaled_in_a: bool,
    /// Sampled vectors of `⋂ ker φ_i` under sampled scalings all stay in `A`.
    pub kernel_stays_in_a: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteDimRegression {
    pub r3: R3Demo,
    pub neighborhood: NeighborhoodDemo,
    pub passed: bool,
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scaled(c: &Q, v: &[Q]) -> Vec<Q> {
    v.iter().map(|x| c * x).collect()
}

fn in_r3_set(v: &[Q]) -> bool {
    v[2].is_zero() || v.iter().all(One::is_one)
}

fn r3_demo() -> R3Demo {
    let point = vec![qi(1), qi(1), qi(1)];
    let doubled = scaled(&qi(2), &point);
    let basis = vec![vec![qi(1), qi(0), qi(0)], vec![qi(0), qi(1), qi(0)]];
    let grid = [qi(-2), q(-1, 2), qi(0), q(1, 3), qi(1), qi(5)];
    let plane_inside = grid.iter().all(|a| {
        grid.iter().all(|b| {
            let v: Vec<Q> = (0..3).map(|i| a * &basis[0][i] + b * &basis[1][i]).collect();
            v.iter().all(Zero::is_zero) || in_r3_set(&v)
        })
    });
    R3Demo {
        doubled_in_a: in_r3_set(&doubled),
        point,
        doubled,
        plane_dimension: rank(&basis),
        plane_inside,
    }
}

/// `A = {x : |φ_i(x)| < ε}` in `K^d`: `⋂ ker φ_i ⊂ A`, `αy₀ ∈ A` for
/// `α = ε/(2δ)`, and `λαy₀ ∉ A` for `λ = (ε+1)/|φ_i(αy₀)|`.
pub fn neighborhood_demo(functionals: Vec<Vec<Q>>, epsilon: Q, y0: Vec<Q>) -> Result<NeighborhoodDemo> {
    let d = y0.len();
    if functionals.is_empty() || functionals.iter().any(|f| f.len() != d) {
        return Err(Error::InvalidSpace("functionals must match the dimension of y0".into()));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidSpace("epsilon must be positive".into()));
    }
    let in_a = |v: &[Q]| functionals.iter().all(|f| dot(f, v).abs() < epsilon);
    let delta = functionals
        .iter()
        .map(|f| dot(f, &y0).abs())
        .max()
        .unwrap_or_else(Q::zero);
    if delta.is_zero() {
        return Err(Error::InvalidSpace("y0 lies in every kernel".into()));
    }
    let alpha = &epsilon / (qi(2) * &delta);
    let alpha_y0 = scaled(&alpha, &y0);
    let (_, top) = functionals
        .iter()
        .map(|f| dot(f, &alpha_y0).abs())
        .enumerate()
        .max_by(|a, b| a.1.cmp(&b.1))
        .expect("nonempty");
    let lambda = (&epsilon + qi(1)) / top;
    let scaled_v = scaled(&lambda, &alpha_y0);

    let kernel = nullspace(&functionals, d);
    let scalings = [qi(-1000), qi(-3), q(1, 7), qi(1), qi(2), qi(1_000_000)];
    let kernel_stays_in_a = kernel.iter().all(|k| scalings.iter().all(|c| in_a(&scaled(c, k))));

    Ok(NeighborhoodDemo {
        d,
        functionals: functionals
            .iter()
            .map(|f| f.iter().map(format_q).collect())
            .collect(),
        alpha_y0_in_a: in_a(&alpha_y0),
        scaled_in_a: in_a(&scaled_v),
        epsilon,
        y0,
        delta,
        alpha,
        alpha_y0,
        lambda,
        scaled: scaled_v,
        kernel_stays_in_a,
    })
}

/// The `ℝ³` set and the weak-neighborhood example with `d = 3`, `φ` the third
/// coordinate, `ε = 1`.
pub fn finite_dim_pointwise_failure() -> Result<FiniteDimRegression> {
    let r3 = r3_demo();
    let neighborhood = neighborhood_demo(
        vec![vec![qi(0), qi(0), qi(1)]],
        qi(1),
        vec![qi(0), qi(0), qi(1)],
    )?;
    let passed = !r3.doubled_in_a
        && r3.plane_dimension == 2
        && r3.plane_inside
        && neighborhood.alpha_y0_in_a
        && !neighborhood.scaled_in_a
        && neighborhood.kernel_stays_in_a;
    Ok(FiniteDimRegression {
        r3,
        neighborhood,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    #[serde(skip)]
    pub sequence: LazySequence,
    pub label: String,
    #[serde(with = "qstr")]
    pub a: Q,
    #[serde(with = "qstr")]
    pub b: Q,
    pub certificates: Vec<MembershipCertificate>,
}

/// Mothers in `ℓ_p` outside every `ℓ_q`, `q ∈ Γ`; the first is
/// `powlog(1/p, 2/p)`.
pub fn mother_vector_catalog(p: &Q, gamma: &[Q]) -> Result<Vec<CatalogEntry>> {
    if !p.is_positive() {
        return Err(Error::InvalidSpace(format!("p = {} must be positive", format_q(p))));
    }
    if let Some(q) = gamma.iter().find(|q| *q >= p) {
        return Err(Error::EmptyCatalog(format!(
            "ℓ_{} already contains ℓ_{}",
            format_q(q),
            format_q(p)
        )));
    }
    let a = p.recip();
    [qi(2), qi(3)]
        .into_iter()
        .map(|k| {
            let b = &k / p;
            let x = LazySequence::powlog(ScalarField::rational(), a.clone(), b.clone(), qi(1))?;
            let mut certificates = vec![decide_membership_symbolic(&SpaceSpec::lp(p.clone()), &x)?];
            for q in gamma {
                certificates.push(decide_membership_symbolic(&SpaceSpec::lp(q.clone()), &x)?);
            }
            let expected = std::iter::once(Verdict::In).chain(gamma.iter().map(|_| Verdict::Out));
            if !certificates.iter().map(|c| c.verdict).eq(expected) {
                return Err(Error::Inconclusive(format!("catalog entry {x} misclassified")));
            }
            Ok(CatalogEntry {
                label: x.label().to_string(),
                sequence: x,
                a: a.clone(),
                b,
                certificates,
            })
        })
        .collect()
}

/// The exponents `p ∈ {1/2, 1, 2}` with two smaller probes each.
pub fn standard_catalog_inputs() -> Vec<(Q, Vec<Q>)> {
    vec![
        (q(1, 2), vec![q(1, 4), q(1, 3)]),
        (qi(1), vec![q(1, 2), q(3, 4)]),
        (qi(2), vec![qi(1), q(3, 2)]),
    ]
}

/// Twenty envelope-backed sequences `powlog(a, b)` spanning convergent,
/// borderline, divergent and unbounded behaviour.
pub fn envelope_corpus() -> Vec<LazySequence> {
    const AB: [((i64, i64), (i64, i64)); 20] = [
        ((2, 1), (4, 1)),
        ((1, 1), (2, 1)),
        ((1, 2), (1, 1)),
        ((1, 1), (0, 1)),
        ((0, 1), (0, 1)),
        ((0, 1), (1, 1)),
        ((1, 4), (0, 1)),
        ((1, 3), (0, 1)),
        ((1, 2), (0, 1)),
        ((2, 3), (0, 1)),
        ((3, 4), (0, 1)),
        ((3, 2), (0, 1)),
        ((2, 1), (0, 1)),
        ((1, 1), (1, 1)),
        ((1, 1), (3, 1)),
        ((1, 10), (0, 1)),
        ((1, 5), (1, 1)),
        ((3, 1), (0, 1)),
        ((-1, 2), (0, 1)),
        ((0, 1), (-1, 1)),
    ];
    AB.iter()
        .map(|&((an, ad), (bn, bd))| {
            LazySequence::powlog(ScalarField::rational(), q(an, ad), q(bn, bd), qi(1))
                .expect("valid envelope")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_twenty_envelopes() {
        let c = envelope_corpus();
        assert_eq!(c.len(), 20);
        assert!(c.iter().all(|x| x.envelope().is_some()));
    }

    #[test]
    fn kernel_regression_passes() {
        let rep = kernel_space_counterexample().unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert_eq!(rep.functional_partial_sums[..4], ["1", "0", "1/2", "0"]);
        assert_eq!(rep.odd_functional_value.as_deref(), Some("2"));
    }

    #[test]
    fn finite_dim_regression_passes() {
        let rep = finite_dim_pointwise_failure().unwrap();
        assert!(rep.passed);
        assert_eq!(rep.neighborhood.alpha_y0, vec![qi(0), qi(0), q(1, 2)]);
        assert_eq!(rep.neighborhood.lambda, qi(4));
    }

    #[test]
    fn catalog() {
        let c = mother_vector_catalog(&qi(2), &[qi(1)]).unwrap();
        assert_eq!((c[0].a.clone(), c[0].b.clone()), (q(1, 2), qi(1)));
        assert!(matches!(
            mother_vector_catalog(&qi(2), &[qi(2)]),
            Err(Error::EmptyCatalog(_))
        ));
        for (p, gamma) in standard_catalog_inputs() {
            assert_eq!(mother_vector_catalog(&p, &gamma).unwrap().len(), 2);
        }
    }
}
