use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::partition::{build_partition, Branch, IndexPartition};
use crate::error::{Error, Result};
use crate::linalg::rank_profile;
use crate::maps::{pushforward, MapSpec};
use crate::scalar::{q_from_f64, Scalar, Q};
use crate::seqcore::{
    embed, first_nonzero, linear_combine, restrict, scale, zero_free_version, IndexSet,
    LazySequence, SupportHint, Value, DEFAULT_ZERO_FREE_BUDGET,
};
use crate::spaces::{
    certify, partial_norm, MembershipCertificate, NestedFamily, ProbeOptions, SpaceKind,
    SpaceSpec, Verdict,
};

/// The data defining `G(E, f, (E_λ))`: sequences in `E` whose image under
/// `f` escapes every `E_λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GSpec {
    pub e: SpaceSpec,
    pub f: MapSpec,
    pub family: NestedFamily,
}

/// How membership of `f`-images in a family member is decided.
pub trait FamilyProbe: Send + Sync + fmt::Debug {
    fn certify(&self, space: &SpaceSpec, x: &LazySequence) -> MembershipCertificate;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StrongProbe {
    pub opts: ProbeOptions,
}

impl FamilyProbe for StrongProbe {
    fn certify(&self, space: &SpaceSpec, x: &LazySequence) -> MembershipCertificate {
        certify(space, x, self.opts)
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedSubspace {
    gspec: GSpec,
    mother: LazySequence,
    partition: IndexPartition,
    stilde: Q,
    mother_in_e: MembershipCertificate,
    escape: MembershipCertificate,
    divergence: MembershipCertificate,
    opts: ProbeOptions,
    probe: Arc<dyn FamilyProbe>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceSummary {
    pub gspec: GSpec,
    pub mother: String,
    pub branch: Branch,
    pub n1: IndexSet,
    #[serde(with = "crate::scalar::qstr")]
    pub stilde: Q,
    pub mother_in_e: MembershipCertificate,
    pub divergence: MembershipCertificate,
}

fn is_degenerate(x: &LazySequence) -> bool {
    if let SupportHint::FiniteSupport(_) = x.support() {
        return true;
    }
    if x.recurrence().is_some_and(|r| r.finitely_supported()) {
        return true;
    }
    x.support() != SupportHint::InfiniteSupport && x.envelope().is_none()
}

/// `N' = odds` if `f(x)` restricted to the odds escapes the largest family
/// member, else `evens`; either way the returned certificate is `Out`.
pub fn select_divergent_half(
    x: &LazySequence,
    gspec: &GSpec,
    probe: &dyn FamilyProbe,
) -> Result<(IndexSet, MembershipCertificate)> {
    let top = gspec.family.maximal();
    let fx = pushforward(&gspec.f, x);
    let whole = probe.certify(top, &fx);
    match whole.verdict {
        Verdict::Out => {}
        Verdict::In => {
            return Err(Error::NotInG(format!("f(x) lies in {top}")));
        }
        Verdict::Inconclusive => {
            return Err(Error::Inconclusive(format!("f(x) against {top}")));
        }
    }
    for half in [IndexSet::odds(), IndexSet::evens()] {
        let cert = probe.certify(top, &restrict(&fx, &half));
        if cert.verdict == Verdict::Out {
            return Ok((half, cert));
        }
    }
    Err(Error::InconclusiveSplit)
}

impl GeneratedSubspace {
    pub fn new(gspec: GSpec, mother: LazySequence, opts: ProbeOptions) -> Result<Self> {
        Self::with_probe(gspec, mother, opts, Arc::new(StrongProbe { opts }))
    }

    /// As [`GeneratedSubspace::new`], deciding family membership with `probe`.
    pub fn with_probe(
        gspec: GSpec,
        mother: LazySequence,
        opts: ProbeOptions,
        probe: Arc<dyn FamilyProbe>,
    ) -> Result<Self> {
        if is_degenerate(&mother) {
            return Err(Error::DegenerateMother(format!(
                "{mother} has no infinite-support hint or envelope"
            )));
        }
        let mother_in_e = certify(&gspec.e, &mother, opts);
        if mother_in_e.verdict == Verdict::Out {
            return Err(Error::NotInG(format!("{mother} is not in {}", gspec.e)));
        }
        let (half, divergence) = select_divergent_half(&mother, &gspec, probe.as_ref())?;
        let escape = probe.certify(gspec.family.maximal(), &pushforward(&gspec.f, &mother));
        let partition = build_partition(half)?;
        let stilde = gspec.e.quasi_exponent();
        Ok(GeneratedSubspace {
            gspec,
            mother,
            partition,
            stilde,
            mother_in_e,
            escape,
            divergence,
            opts,
            probe,
        })
    }

    pub fn gspec(&self) -> &GSpec {
        &self.gspec
    }

    pub fn mother(&self) -> &LazySequence {
        &self.mother
    }

    pub fn partition(&self) -> &IndexPartition {
        &self.partition
    }

    /// `s̃`: 1 for Banach `E`, the quasi-norm exponent otherwise.
    pub fn stilde(&self) -> &Q {
        &self.stilde
    }

    pub fn mother_in_e(&self) -> &MembershipCertificate {
        &self.mother_in_e
    }

    pub fn divergence(&self) -> &MembershipCertificate {
        &self.divergence
    }

    pub fn summary(&self) -> SubspaceSummary {
        SubspaceSummary {
            gspec: self.gspec.clone(),
            mother: self.mother.label().to_string(),
            branch: self.partition.branch,
            n1: self.partition.n1.clone(),
            stilde: self.stilde.clone(),
            mother_in_e: self.mother_in_e.clone(),
            divergence: self.divergence.clone(),
        }
    }
}

/// `y_1 = x`, and `y_i` places `x_k` at the `k`-th index of `N_i`.
pub fn generate_basis(sub: &GeneratedSubspace, i: usize) -> LazySequence {
    assert!(i >= 1, "basis vectors are numbered from 1");
    if i == 1 {
        return sub.mother.clone();
    }
    embed(&sub.mother, &sub.partition.block(i)).with_label(format!("y{i}"))
}

/// `z = Σ a_i y_i` as a lazy sum and through the coordinate formula.
#[derive(Clone, Debug)]
pub struct Combination {
    pub coefficients: Vec<Scalar>,
    pub lazy: LazySequence,
    pub closed: LazySequence,
}

pub fn combine(sub: &GeneratedSubspace, a: &[Scalar]) -> Result<Combination> {
    let kind = sub.mother.kind().clone();
    let lazy = if a.is_empty() {
        LazySequence::zero(kind.clone())
    } else {
        let terms: Vec<(Scalar, LazySequence)> = a
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), generate_basis(sub, i + 1)))
            .collect();
        linear_combine(&terms)?
    };
    let coeffs = a.to_vec();
    let x = sub.mother.clone();
    let part = sub.partition.clone();
    let zero = kind.zero();
    let closed = LazySequence::from_fallible(kind, "closed-form", move |r| {
        let Some(a1) = coeffs.first() else {
            return Ok(zero.clone());
        };
        let here = x.try_eval(r)?.scale(a1);
        let pos = part.locate(r);
        match coeffs.get(pos.block - 1) {
            Some(ai) if pos.block >= 2 && !ai.is_zero() => here.add(&x.try_eval(pos.m)?.scale(ai)),
            _ => Ok(here),
        }
    });
    Ok(Combination {
        coefficients: a.to_vec(),
        lazy,
        closed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub k: usize,
    pub n_requested: u64,
    /// Largest column index used; at least `n_requested` when expansion was needed.
    pub n_used: u64,
    /// Columns of the truncation matrix fed to elimination.
    pub columns: Vec<u64>,
    /// Rank of the first `j` rows, `j = 1..=k`.
    pub rank_profile: Vec<usize>,
    pub rank: usize,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.k
    }
}

const LEADING_COLUMNS: u64 = 64;
const NONZERO_SEARCH: u64 = 1_000_000;

fn exact_entries(v: &Value) -> Vec<Q> {
    v.components()
        .iter()
        .map(|s| {
            s.to_rational()
                .or_else(|| q_from_f64(s.to_f64()))
                .unwrap_or_else(Q::zero)
        })
        .collect()
}

/// Exact rank of the `k × n` truncation of `y_1, …, y_k`.
///
/// The matrix is restricted to the leading columns plus, for each `y_i`, the
/// index where it first becomes nonzero. A submatrix of rank `k` certifies
/// rank `k` for the whole truncation, so `n` is expanded to cover those
/// witness columns when needed.
pub fn verify_independence(sub: &GeneratedSubspace, k: usize, n: u64) -> Result<RankReport> {
    let m0 = first_nonzero(&sub.mother, NONZERO_SEARCH).ok_or_else(|| {
        Error::InsufficientTruncation(format!("no nonzero coordinate below {NONZERO_SEARCH}"))
    })?;
    let mut columns: Vec<u64> = (1..=n.min(LEADING_COLUMNS)).collect();
    for i in 1..=k {
        columns.push(if i == 1 { m0 } else { sub.partition.position(i, m0) });
    }
    columns.sort_unstable();
    columns.dedup();
    let basis: Vec<LazySequence> = (1..=k).map(|i| generate_basis(sub, i)).collect();
    let rows: Vec<Vec<Q>> = basis
        .par_iter()
        .map(|y| columns.iter().flat_map(|&j| exact_entries(&y.eval(j))).collect())
        .collect();
    let profile = rank_profile(&rows);
    let n_used = n.max(*columns.last().unwrap_or(&n));
    Ok(RankReport {
        k,
        n_requested: n,
        n_used,
        columns,
        rank: profile.last().copied().unwrap_or(0),
        rank_profile: profile,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    A1Nonzero,
    A1ZeroApNonzero,
    AllZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombinationVerdict {
    /// `z ∈ E` and `f(z)` escapes every family member.
    InG,
    /// `z = 0`.
    Zero,
    NotInG,
    Inconclusive,
}

/// Membership of `f(z)` in one family member, lifted from its escaping
/// subsequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyCertificate {
    pub space: SpaceSpec,
    pub verdict: Verdict,
    pub steps: Vec<String>,
    pub subsequence: MembershipCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CombinationCertificate {
    pub coefficients: Vec<Scalar>,
    pub case: Case,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escaping_block: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escaping_subsequence: Option<IndexSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_e: Option<MembershipCertificate>,
    pub membership: Vec<FamilyCertificate>,
    pub verdict: CombinationVerdict,
}

impl CombinationCertificate {
    /// Every family verdict is an `Out` reached without numeric probing.
    pub fn exact(&self) -> bool {
        self.membership
            .iter()
            .all(|m| m.verdict == Verdict::Out && m.subsequence.method.is_symbolic())
    }
}

/// Identifies the proof case for `z = Σ a_i y_i` and certifies `z ∈ G`.
pub fn verify_membership(sub: &GeneratedSubspace, a: &[Scalar]) -> Result<CombinationCertificate> {
    let Some(p) = a.iter().position(|c| !c.is_zero()) else {
        return Ok(CombinationCertificate {
            coefficients: a.to_vec(),
            case: Case::AllZero,
            escaping_block: None,
            escaping_subsequence: None,
            in_e: None,
            membership: Vec::new(),
            verdict: CombinationVerdict::Zero,
        });
    };
    let block = p + 1;
    let ap = &a[p];
    let escaping = sub.partition.block(block);
    let case = if block == 1 {
        Case::A1Nonzero
    } else {
        Case::A1ZeroApNonzero
    };
    // On N1, z = a1·x; on N_p with a1 = 0, z reads a_p·x in order.
    let (sub_seq, identity) = if block == 1 {
        (
            scale(ap, &restrict(&sub.mother, &escaping)),
            format!("z restricted to N1 = {ap}·(x_j) for j in N1"),
        )
    } else {
        (
            scale(ap, &sub.mother),
            format!("a1 = 0, so z restricted to N{block} = {ap}·x"),
        )
    };
    let f = &sub.gspec.f;
    let image = pushforward(f, &sub_seq);
    let known_out = if block == 1 {
        &sub.divergence
    } else {
        &sub.escape
    };
    let membership: Vec<FamilyCertificate> = sub
        .gspec
        .family
        .members()
        .iter()
        .map(|space| {
            let cert = sub.probe.certify(space, &image);
            let mut steps = vec![identity.clone()];
            let mut verdict = cert.verdict;
            if verdict == Verdict::Inconclusive
                && f.homogeneity().is_some()
                && known_out.verdict == Verdict::Out
            {
                // f(a·t) = ±|a|^r f(t) carries the known Out certificate over.
                steps.push(format!(
                    "{f} is homogeneous, hence compatible with {space}; {} is Out",
                    known_out.sequence
                ));
                verdict = Verdict::Out;
            }
            if verdict == Verdict::Out {
                steps.push(format!(
                    "{space} is strongly invariant: a subsequence of f(z) outside it puts f(z) outside it"
                ));
            }
            FamilyCertificate {
                space: space.clone(),
                verdict,
                steps,
                subsequence: cert,
            }
        })
        .collect();

    let z = combine(sub, a)?.lazy;
    let in_e = certify(&sub.gspec.e, &z, sub.opts);
    let verdict = if membership.iter().any(|m| m.verdict == Verdict::In) || in_e.verdict == Verdict::Out {
        CombinationVerdict::NotInG
    } else if membership.iter().all(|m| m.verdict == Verdict::Out) && in_e.verdict == Verdict::In {
        CombinationVerdict::InG
    } else {
        CombinationVerdict::Inconclusive
    };
    Ok(CombinationCertificate {
        coefficients: a.to_vec(),
        case,
        escaping_block: Some(block),
        escaping_subsequence: Some(escaping),
        in_e: Some(in_e),
        membership,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesTerm {
    pub i: usize,
    /// Nonzero coordinates of `y_i` among the first `n`.
    pub nonzeros: u64,
    pub lhs: Scalar,
    pub rhs: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesBoundReport {
    pub n: u64,
    #[serde(with = "crate::scalar::qstr")]
    pub stilde: Q,
    #[serde(with = "crate::scalar::qstr")]
    pub k: Q,
    pub terms: Vec<SeriesTerm>,
    /// `Σ |a_i|^s̃ ‖y_i‖^s̃` at truncation `n`.
    pub lhs: Scalar,
    /// `K^s̃ Σ |a_i|^s̃ ‖x⁰‖^s̃`, each term truncated at the matching nonzero count.
    pub rhs: Scalar,
    pub holds: bool,
    pub equal: bool,
}

fn same_value(a: &Scalar, b: &Scalar) -> bool {
    match a.exact_eq(b) {
        Some(eq) => eq,
        None => a.to_f64() == b.to_f64(),
    }
}

/// `Σ|a_i|^s̃‖y_i‖^s̃ ≤ K^s̃ Σ|a_i|^s̃‖x⁰‖^s̃` at truncation with `K = 1`.
pub fn series_bound_check(sub: &GeneratedSubspace, a: &[Scalar], n: u64) -> Result<SeriesBoundReport> {
    let e = &sub.gspec.e;
    if !matches!(e.kind, SpaceKind::Lp { .. }) {
        return Err(Error::UnsupportedSpace(format!(
            "series bound needs an lp space, got {e}"
        )));
    }
    let s = &sub.stilde;
    let x0 = zero_free_version(&sub.mother, DEFAULT_ZERO_FREE_BUDGET);
    let pow = |v: Scalar| if s.is_one() { v } else { v.abs_pow(s) };
    let terms: Vec<SeriesTerm> = a
        .par_iter()
        .enumerate()
        .map(|(idx, c)| {
            let y = generate_basis(sub, idx + 1);
            let nonzeros = (1..=n).filter(|&j| !y.eval(j).is_zero()).count() as u64;
            let weight = if c.is_zero() { Scalar::zero() } else { pow(c.abs()) };
            let lhs = &weight * &pow(partial_norm(e, &y, n));
            let rhs = &weight * &pow(partial_norm(e, &x0, nonzeros));
            SeriesTerm {
                i: idx + 1,
                nonzeros,
                lhs,
                rhs,
            }
        })
        .collect();
    let lhs = terms.iter().fold(Scalar::zero(), |acc, t| &acc + &t.lhs);
    let rhs = terms.iter().fold(Scalar::zero(), |acc, t| &acc + &t.rhs);
    let equal = terms.iter().all(|t| same_value(&t.lhs, &t.rhs)) && same_value(&lhs, &rhs);
    let holds = equal || lhs.real_cmp(&rhs) != std::cmp::Ordering::Greater;
    Ok(SeriesBoundReport {
        n,
        stilde: s.clone(),
        k: Q::one(),
        terms,
        lhs,
        rhs,
        holds,
        equal,
    })
}

impl fmt::Display for RankReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} of {} (n = {}, {} columns)",
            self.rank,
            self.k,
            self.n_used,
            self.columns.len()
        )
    }
}
