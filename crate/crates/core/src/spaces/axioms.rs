//! Checks of the invariance axioms on sample sequences.

use rayon::prelude::*;
use serde::Serialize;

use super::membership::{certify, partial_norm, MembershipCertificate, ProbeOptions, Verdict};
use super::spec::SpaceSpec;
use crate::error::{Error, Result};
use crate::scalar::{format_q, Scalar, ScalarField, Q};
use crate::seqcore::{zero_free_version, IndexSet, LazySequence, DEFAULT_ZERO_FREE_BUDGET};

#[derive(Clone, Debug, Serialize)]
pub struct SampleAxioms {
    pub sample: String,
    /// `max_{j≤n} ‖x_j‖ ≤ ‖(x_1, …, x_n)‖`.
    pub b2_holds: bool,
    pub max_coordinate: Scalar,
    pub partial_norm: Scalar,
    /// Nonzero coordinates among the first `n`.
    pub nonzeros: u64,
    /// Truncated norm of `x⁰` over those nonzeros.
    pub zero_free_norm: Scalar,
    /// `‖x‖ / ‖x⁰‖` at truncation; 1 when both vanish.
    pub ratio: f64,
    /// Exact comparison of the two truncated norms, when both are exact.
    pub norms_equal: Option<bool>,
    pub verdict: Verdict,
    pub zero_free_verdict: Verdict,
    /// `None` when either verdict is inconclusive.
    pub verdicts_agree: Option<bool>,
    /// `x⁰ = 0`: (b1) says nothing about this sample.
    pub b1_vacuous: bool,
    pub b1_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub space: SpaceSpec,
    pub n: u64,
    /// The known constant of the built-in spaces.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_declared: Option<String>,
    /// `max ‖x‖/‖x⁰‖` over the samples.
    pub k_empirical: f64,
    pub samples: Vec<SampleAxioms>,
    pub b1_holds: bool,
    pub b2_holds: bool,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.b1_holds && self.b2_holds
    }
}

fn count_nonzeros(x: &LazySequence, n: u64) -> u64 {
    (1..=n).filter(|&j| !x.eval(j).is_zero()).count() as u64
}

fn ratio_f64(a: &Scalar, b: &Scalar) -> f64 {
    match (a.to_rational(), b.to_rational(), a.is_exact() && b.is_exact()) {
        (Some(x), Some(y), true) if y != Q::from_integer(0.into()) => {
            crate::scalar::q_to_f64(&(x / y))
        }
        _ => {
            let (x, y) = (a.to_f64(), b.to_f64());
            if y == 0.0 {
                if x == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                x / y
            }
        }
    }
}

fn check_sample(space: &SpaceSpec, x: &LazySequence, n: u64, opts: ProbeOptions) -> SampleAxioms {
    let norm = partial_norm(space, x, n);
    let max = (1..=n)
        .map(|j| x.magnitude(j))
        .fold(Scalar::zero(), Scalar::max_real);
    let b2_holds = max.real_cmp(&norm) != std::cmp::Ordering::Greater;

    let x0 = zero_free_version(x, DEFAULT_ZERO_FREE_BUDGET);
    let b1_vacuous = x0.is_structurally_zero();
    let nonzeros = count_nonzeros(x, n);
    let zf_norm = if nonzeros == 0 || b1_vacuous {
        Scalar::zero()
    } else {
        partial_norm(space, &x0, nonzeros)
    };
    let ratio = ratio_f64(&norm, &zf_norm);
    let norms_equal = norm.exact_eq(&zf_norm);

    let verdict = certify(space, x, opts).verdict;
    let zero_free_verdict = certify(space, &x0, opts).verdict;
    let verdicts_agree = if verdict.is_decided() && zero_free_verdict.is_decided() {
        Some(verdict == zero_free_verdict)
    } else {
        None
    };
    let k_ok = if space.is_strongly_invariant_builtin() || matches!(space.kind, super::SpaceKind::Kernel { .. }) {
        norms_equal.unwrap_or(ratio <= 1.0 + space_eps(x))
    } else {
        true
    };
    SampleAxioms {
        sample: x.label().to_string(),
        b2_holds,
        max_coordinate: max,
        partial_norm: norm,
        nonzeros,
        zero_free_norm: zf_norm,
        ratio,
        norms_equal,
        verdict,
        zero_free_verdict,
        verdicts_agree,
        b1_vacuous,
        b1_holds: b1_vacuous || (verdicts_agree != Some(false) && k_ok),
    }
}

fn space_eps(x: &LazySequence) -> f64 {
    let f: ScalarField = x.kind().field;
    if f.is_exact() {
        1e-12
    } else {
        f.epsilon
    }
}

/// Checks (b2) coordinate domination and (b1) agreement of `x` and `x⁰` on
/// every sample, at truncation `n`.
pub fn check_invariant_axioms(
    space: &SpaceSpec,
    samples: &[LazySequence],
    n: u64,
    opts: ProbeOptions,
) -> Result<AxiomReport> {
    if samples.is_empty() {
        return Err(Error::Inconclusive("no samples".into()));
    }
    let reports: Vec<SampleAxioms> = samples
        .par_iter()
        .map(|x| check_sample(space, x, n, opts))
        .collect();
    let k_empirical = reports
        .iter()
        .filter(|r| !r.b1_vacuous)
        .map(|r| r.ratio)
        .fold(0.0, f64::max);
    let k_declared = (space.is_strongly_invariant_builtin()).then(|| "1".to_string());
    Ok(AxiomReport {
        space: space.clone(),
        n,
        k_declared,
        k_empirical,
        b1_holds: reports.iter().all(|r| r.b1_holds),
        b2_holds: reports.iter().all(|r| r.b2_holds),
        samples: reports,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsequenceCheck {
    pub sample: String,
    pub pattern: IndexSet,
    pub sample_verdict: Verdict,
    pub certificate: MembershipCertificate,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// A member with a subsequence outside the space.
    Subsequence {
        sample: String,
        pattern: IndexSet,
        certificate: MembershipCertificate,
    },
    /// A finitely supported sequence outside the space.
    FiniteSupport {
        probe: String,
        certificate: MembershipCertificate,
    },
    /// The invariance axioms themselves fail.
    Axioms { detail: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongInvarianceReport {
    pub space: SpaceSpec,
    pub invariant: AxiomReport,
    pub subsequence_checks: Vec<SubsequenceCheck>,
    pub finite_support_probes: Vec<MembershipCertificate>,
    pub violations: Vec<Violation>,
}

impl StrongInvarianceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Finitely supported probes used for the `c₀₀ ⊂ E` check.
pub fn finite_support_probes() -> Vec<LazySequence> {
    let f = ScalarField::rational();
    vec![
        LazySequence::unit(f, 1),
        LazySequence::unit(f, 2),
        LazySequence::explicit(f, vec![Q::from_integer(1.into()), Q::from_integer((-1).into())], false)
            .expect("nonempty")
            .with_label("(1,-1,0,…)"),
        LazySequence::explicit(
            f,
            vec![Q::from_integer(1.into()), Q::from_integer(2.into()), Q::from_integer(3.into())],
            false,
        )
        .expect("nonempty")
        .with_label("(1,2,3,0,…)"),
    ]
}

/// Checks that members stay members along every pattern and that `c₀₀ ⊂ E`.
pub fn check_strongly_invariant(
    space: &SpaceSpec,
    samples: &[LazySequence],
    patterns: &[IndexSet],
    n: u64,
    opts: ProbeOptions,
) -> Result<StrongInvarianceReport> {
    if let Some(p) = patterns.iter().find(|p| !p.is_infinite()) {
        return Err(Error::InvalidIndexSet(format!("pattern {p} is finite")));
    }
    let invariant = check_invariant_axioms(space, samples, n, opts)?;
    let mut violations = Vec::new();
    if !invariant.holds() {
        violations.push(Violation::Axioms {
            detail: format!(
                "b1 {} / b2 {}",
                if invariant.b1_holds { "holds" } else { "fails" },
                if invariant.b2_holds { "holds" } else { "fails" }
            ),
        });
    }

    let jobs: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|s| (0..patterns.len()).map(move |p| (s, p)))
        .collect();
    let verdicts: Vec<Verdict> = samples.par_iter().map(|x| certify(space, x, opts).verdict).collect();
    let checks: Vec<SubsequenceCheck> = jobs
        .par_iter()
        .filter(|(s, _)| verdicts[*s] == Verdict::In)
        .map(|&(s, p)| {
            let sub = crate::seqcore::restrict(&samples[s], &patterns[p]);
            SubsequenceCheck {
                sample: samples[s].label().to_string(),
                pattern: patterns[p].clone(),
                sample_verdict: verdicts[s],
                certificate: certify(space, &sub, opts),
            }
        })
        .collect();
    for c in &checks {
        if c.certificate.verdict == Verdict::Out {
            violations.push(Violation::Subsequence {
                sample: c.sample.clone(),
                pattern: c.pattern.clone(),
                certificate: c.certificate.clone(),
            });
        }
    }

    let probes: Vec<MembershipCertificate> = finite_support_probes()
        .par_iter()
        .map(|e| certify(space, e, opts))
        .collect();
    for c in &probes {
        if c.verdict == Verdict::Out {
            violations.push(Violation::FiniteSupport {
                probe: c.sequence.clone(),
                certificate: c.clone(),
            });
        }
    }
    Ok(StrongInvarianceReport {
        space: space.clone(),
        invariant,
        subsequence_checks: checks,
        finite_support_probes: probes,
        violations,
    })
}

/// Human-readable one-liner for a functional value.
pub fn describe_value(v: &Option<Q>) -> String {
    v.as_ref().map(format_q).unwrap_or_else(|| "?".into())
}
