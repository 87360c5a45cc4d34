//! Truncated norms, exact membership decisions and numeric probes.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::spec::{Exponent, KernelWeights, SpaceKind, SpaceSpec};
use crate::error::{Error, Result};
use crate::scalar::{format_q, parse_q, q_to_f64, Scalar, Q};
use crate::seqcore::{
    Envelope, IndexSet, LazySequence, PowLogEnvelope, Recurrence, Shape, Structure, SupportHint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    In,
    Out,
    Inconclusive,
}

impl Verdict {
    pub fn is_decided(self) -> bool {
        self != Verdict::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SymbolicPowlog,
    SymbolicRecurrence,
    SymbolicStructure,
    PartialNormProbe,
    FunctionalEvaluation,
}

impl Method {
    pub fn is_symbolic(self) -> bool {
        matches!(
            self,
            Method::SymbolicPowlog | Method::SymbolicRecurrence | Method::SymbolicStructure
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Evidence {
    /// An exact decision: the chain of reductions ending in a rule.
    Decision {
        steps: Vec<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        envelope: Option<PowLogEnvelope>,
        #[serde(skip_serializing_if = "Option::is_none")]
        functional_value: Option<String>,
    },
    /// Partial norms at checkpoints.
    Trace {
        budget: u64,
        threshold: f64,
        trace: Vec<(u64, f64)>,
    },
    /// Partial functional sums with a tail bound.
    Functional {
        budget: u64,
        l1_partial: f64,
        partial_sums: Vec<(u64, f64)>,
        #[serde(skip_serializing_if = "Option::is_none")]
        recurrence: Option<Recurrence>,
        declared: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        limit: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tail_bound: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    pub method: Method,
    pub space: SpaceSpec,
    pub sequence: String,
    pub evidence: Evidence,
}

impl MembershipCertificate {
    /// The exact value of the defining functional, when the evidence has one.
    pub fn functional_value(&self) -> Option<Q> {
        match &self.evidence {
            Evidence::Decision {
                functional_value: Some(v),
                ..
            }
            | Evidence::Functional { limit: Some(v), .. } => parse_q(v).ok(),
            _ => None,
        }
    }

    pub fn trace(&self) -> &[(u64, f64)] {
        match &self.evidence {
            Evidence::Trace { trace, .. } => trace,
            Evidence::Functional { partial_sums, .. } => partial_sums,
            Evidence::Decision { .. } => &[],
        }
    }
}

/// Budgets for numeric probing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub budget: u64,
    pub threshold: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            budget: 100_000,
            threshold: 1e3,
        }
    }
}

/// Truncated norm of `x_1, …, x_n`: `(Σ‖x_j‖^p)^(1/p)` for `ℓ_p`, the max for
/// `ℓ_∞`, `c₀`, `c` and `c₀₀`, the `ℓ₁` norm for kernel spaces. Exact on exact
/// inputs whenever the powers involved stay exact.
pub fn partial_norm(space: &SpaceSpec, x: &LazySequence, n: u64) -> Scalar {
    let mags = (1..=n).map(|j| x.magnitude(j));
    match &space.kind {
        SpaceKind::Lp {
            p: Exponent::Finite(p),
        } => {
            if p.is_one() {
                mags.fold(Scalar::zero(), |acc, m| &acc + &m)
            } else {
                let sum = mags.fold(Scalar::zero(), |acc, m| &acc + &m.abs_pow(p));
                sum.abs_pow(&p.recip())
            }
        }
        SpaceKind::Kernel { .. } => mags.fold(Scalar::zero(), |acc, m| &acc + &m),
        _ => mags.fold(Scalar::zero(), Scalar::max_real),
    }
}

/// Checkpoints `1..=16`, then roughly geometric up to `n`, always ending at `n`.
pub fn checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n.min(16)).collect();
    let mut k = 16f64;
    loop {
        k *= 1.25;
        let v = k.round() as u64;
        if v >= n {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
    }
    if out.last() != Some(&n) && n > 0 {
        out.push(n);
    }
    out
}

/// Floating-point partial norms at every checkpoint up to `n`.
pub fn partial_norm_trace(space: &SpaceSpec, x: &LazySequence, n: u64) -> Vec<(u64, f64)> {
    let marks = checkpoints(n);
    let mut acc = NormAccumulator::new(space);
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    for j in 1..=n {
        acc.push(x.magnitude(j).to_f64());
        if next < marks.len() && marks[next] == j {
            out.push((j, acc.value()));
            next += 1;
        }
    }
    out
}

struct NormAccumulator {
    p: Option<f64>,
    sum: f64,
    comp: f64,
    max: f64,
}

impl NormAccumulator {
    fn new(space: &SpaceSpec) -> Self {
        let p = match &space.kind {
            SpaceKind::Lp {
                p: Exponent::Finite(p),
            } => Some(q_to_f64(p)),
            SpaceKind::Kernel { .. } => Some(1.0),
            _ => None,
        };
        NormAccumulator {
            p,
            sum: 0.0,
            comp: 0.0,
            max: 0.0,
        }
    }

    fn push(&mut self, m: f64) {
        match self.p {
            Some(p) => {
                // Neumaier summation keeps long traces accurate.
                let t = if p == 1.0 { m } else { m.powf(p) };
                let s = self.sum + t;
                if self.sum.abs() >= t.abs() {
                    self.comp += (self.sum - s) + t;
                } else {
                    self.comp += (t - s) + self.sum;
                }
                self.sum = s;
            }
            None => self.max = self.max.max(m),
        }
    }

    fn value(&self) -> f64 {
        match self.p {
            Some(p) => {
                let s = self.sum + self.comp;
                if p == 1.0 {
                    s
                } else {
                    s.powf(1.0 / p)
                }
            }
            None => self.max,
        }
    }
}

struct Decided {
    verdict: Verdict,
    method: Method,
    steps: Vec<String>,
    envelope: Option<PowLogEnvelope>,
    functional_value: Option<Q>,
}

impl Decided {
    fn new(verdict: Verdict, method: Method, step: String) -> Self {
        Decided {
            verdict,
            method,
            steps: vec![step],
            envelope: None,
            functional_value: None,
        }
    }

    fn then(mut self, step: String) -> Self {
        self.steps.insert(0, step);
        self
    }
}

fn in_out(b: bool) -> Verdict {
    if b {
        Verdict::In
    } else {
        Verdict::Out
    }
}

/// Exact verdict from the structure, recurrence or envelope carried by `x`.
///
/// Fails with [`Error::UnsupportedSpace`] when only an envelope is available
/// and the space is `c` or a kernel space, and with [`Error::Inconclusive`]
/// when `x` carries nothing symbolic.
pub fn decide_membership_symbolic(
    space: &SpaceSpec,
    x: &LazySequence,
) -> Result<MembershipCertificate> {
    let d = decide(space, x)?;
    Ok(MembershipCertificate {
        verdict: d.verdict,
        method: d.method,
        space: space.clone(),
        sequence: x.label().to_string(),
        evidence: Evidence::Decision {
            steps: d.steps,
            envelope: d.envelope,
            functional_value: d.functional_value.as_ref().map(format_q),
        },
    })
}

fn kernel_weights(space: &SpaceSpec) -> Option<&KernelWeights> {
    match &space.kind {
        SpaceKind::Kernel { weights } => Some(weights),
        _ => None,
    }
}

fn decide(space: &SpaceSpec, x: &LazySequence) -> Result<Decided> {
    let scalar = x.kind().shape == Shape::Scalar;
    if kernel_weights(space).is_some() && !scalar {
        return Err(Error::UnsupportedSpace(format!("{space} with vector values")));
    }

    if x.is_structurally_zero() {
        let mut d = Decided::new(Verdict::In, Method::SymbolicStructure, "zero sequence".into());
        if kernel_weights(space).is_some() {
            d.functional_value = Some(Q::zero());
        }
        return Ok(d);
    }

    if let SupportHint::FiniteSupport(n) = x.support() {
        let step = format!("supported in 1..={n}");
        return match kernel_weights(space) {
            None => Ok(Decided::new(Verdict::In, Method::SymbolicStructure, step)),
            Some(w) => {
                let mut sum = Q::zero();
                for j in 1..=n {
                    let v = x.eval_scalar(j).to_rational().ok_or_else(|| {
                        Error::Inconclusive(format!("{x}: inexact coordinate {j}"))
                    })?;
                    sum += w.weight(j) * v;
                }
                let mut d = Decided::new(
                    in_out(sum.is_zero()),
                    Method::SymbolicStructure,
                    format!("{step}; Σ w_j x_j = {}", format_q(&sum)),
                );
                d.functional_value = Some(sum);
                Ok(d)
            }
        };
    }

    if let (Some(rec), true) = (x.recurrence(), scalar) {
        return Ok(decide_recurrence(space, rec));
    }

    if let Some(env) = x.envelope() {
        if let Some(d) = decide_envelope(space, env)? {
            return Ok(d);
        }
    }

    match x.structure() {
        Structure::Scaled { factor, of } => {
            let d = decide(space, of)?;
            let step = format!("nonzero multiple ({factor}) of {of}");
            Ok(match d.functional_value.clone() {
                Some(v) => {
                    let scaled = factor.to_rational().map(|c| c * v);
                    let mut d = d.then(step);
                    d.functional_value = scaled;
                    d
                }
                None => d.then(step),
            })
        }
        Structure::ZeroFree { of } if space.is_strongly_invariant_builtin() => {
            Ok(decide(space, of)?.then(format!("zero-free version of {of}, same norm")))
        }
        Structure::Embedded { of, on } => match &space.kind {
            SpaceKind::Lp { .. } | SpaceKind::C0 | SpaceKind::C00 => {
                Ok(decide(space, of)?.then(format!("{of} placed on {on}, same nonzero coordinates")))
            }
            SpaceKind::Kernel {
                weights: KernelWeights::Ones,
            } => Ok(decide(space, of)?.then(format!("{of} placed on {on}, same sum and norm"))),
            SpaceKind::C if on.is_infinite() && IndexSet::complement(on.clone()).is_infinite() => {
                Ok(decide(&SpaceSpec::c0().with_values(space.values.clone()), of)?
                    .then(format!("{of} placed on {on} with infinitely many zeros: in c iff in c0")))
            }
            _ => Err(Error::Inconclusive(format!("{x} in {space}"))),
        },
        Structure::Restricted { of, along } => {
            let subsequence_closed = matches!(
                space.kind,
                SpaceKind::Lp { .. } | SpaceKind::C0 | SpaceKind::C | SpaceKind::C00
            );
            if subsequence_closed {
                let d = decide(space, of)?;
                if d.verdict == Verdict::In {
                    return Ok(d.then(format!("subsequence along {along} of a member")));
                }
            }
            Err(Error::Inconclusive(format!("{x} in {space}")))
        }
        Structure::Combination(terms) => {
            let mut ins = 0;
            let mut out_term = None;
            for (_, y) in terms {
                let d = decide(space, y)?;
                match d.verdict {
                    Verdict::In => ins += 1,
                    Verdict::Out if out_term.is_none() => out_term = Some(y.label().to_string()),
                    _ => return Err(Error::Inconclusive(format!("{x} in {space}"))),
                }
            }
            match out_term {
                None => Ok(Decided::new(
                    Verdict::In,
                    Method::SymbolicStructure,
                    format!("linear combination of {ins} members"),
                )),
                Some(label) => Ok(Decided::new(
                    Verdict::Out,
                    Method::SymbolicStructure,
                    format!("member plus the non-member {label}"),
                )),
            }
        }
        _ => match (&space.kind, x.envelope()) {
            (SpaceKind::C | SpaceKind::Kernel { .. }, Some(_)) => {
                Err(Error::UnsupportedSpace(format!("{space} has no envelope rule")))
            }
            _ => Err(Error::Inconclusive(format!("{x} has no symbolic form for {space}"))),
        },
    }
}

fn decide_envelope(space: &SpaceSpec, env: &Envelope) -> Result<Option<Decided>> {
    if let Some(s) = &env.on {
        if s.ratio_bounds().is_none() {
            return Ok(None);
        }
    }
    let e = &env.bound;
    let (a, b) = (format_q(&e.a), format_q(&e.b));
    let (verdict, rule) = match &space.kind {
        SpaceKind::Lp {
            p: Exponent::Finite(p),
        } => {
            let (qa, qb) = (p * &e.a, p * &e.b);
            let conv = e.summable_power(p);
            (
                in_out(conv),
                format!(
                    "Σ k^-(qa) log^-(qb): q = {}, qa = {}, qb = {} → {}",
                    format_q(p),
                    format_q(&qa),
                    format_q(&qb),
                    if conv { "converges" } else { "diverges" }
                ),
            )
        }
        SpaceKind::Lp {
            p: Exponent::Infinity,
        } => (
            in_out(e.bounded()),
            format!("a = {a}, b = {b}: profile {}", if e.bounded() { "bounded" } else { "unbounded" }),
        ),
        SpaceKind::C0 => (
            in_out(e.vanishes()),
            format!("a = {a}, b = {b}: profile {}", if e.vanishes() { "→ 0" } else { "does not tend to 0" }),
        ),
        SpaceKind::C00 => (Verdict::Out, "infinitely many nonzero coordinates".into()),
        SpaceKind::C if !e.bounded() => (Verdict::Out, format!("a = {a}, b = {b}: unbounded")),
        SpaceKind::Kernel { .. } if !e.summable_power(&Q::one()) => {
            (Verdict::Out, format!("a = {a}, b = {b}: not in ℓ1"))
        }
        _ => return Ok(None),
    };
    let rule = match &env.on {
        Some(s) => format!("envelope on {s}: {rule}"),
        None => format!("envelope: {rule}"),
    };
    let mut d = Decided::new(verdict, Method::SymbolicPowlog, rule);
    d.envelope = Some(e.clone());
    Ok(Some(d))
}

fn kernel_value(weights: &KernelWeights, rec: &Recurrence) -> Option<Q> {
    match weights {
        KernelWeights::Ones => rec.sum(),
        KernelWeights::Explicit(w) => Some(
            w.iter()
                .enumerate()
                .map(|(i, wi)| wi * rec.value(i as u64 + 1))
                .sum(),
        ),
    }
}

fn decide_recurrence(space: &SpaceSpec, rec: &Recurrence) -> Decided {
    let m = Method::SymbolicRecurrence;
    if let Some(n) = rec.support_bound() {
        let mut d = Decided::new(Verdict::In, m, format!("zero beyond index {n}"));
        if let Some(w) = kernel_weights(space) {
            let v = kernel_value(w, rec).expect("finite support");
            d.verdict = in_out(v.is_zero());
            d.steps[0] = format!("zero beyond index {n}; Σ w_j x_j = {}", format_q(&v));
            d.functional_value = Some(v);
        }
        return d;
    }
    let r = rec.ratio.abs();
    let one = Q::one();
    let tail = format!("tail ratio {}", format_q(&rec.ratio));
    if r < one {
        return match &space.kind {
            SpaceKind::C00 => Decided::new(Verdict::Out, m, format!("{tail}: infinitely many nonzeros")),
            SpaceKind::Kernel { weights } => {
                let v = kernel_value(weights, rec).expect("geometric tail converges");
                let mut d = Decided::new(
                    in_out(v.is_zero()),
                    m,
                    format!("{tail}: in ℓ1, Σ w_j x_j = {}", format_q(&v)),
                );
                d.functional_value = Some(v);
                d
            }
            _ => Decided::new(Verdict::In, m, format!("{tail}: geometric decay")),
        };
    }
    if r == one {
        let verdict = match &space.kind {
            SpaceKind::Lp {
                p: Exponent::Infinity,
            } => Verdict::In,
            SpaceKind::C => in_out(rec.ratio.is_one() && rec.head.iter().all(|h| *h == rec.head[0])),
            _ => Verdict::Out,
        };
        return Decided::new(verdict, m, format!("{tail}: periodic modulus, does not tend to 0"));
    }
    Decided::new(Verdict::Out, m, format!("{tail}: unbounded"))
}

/// Threshold-based probe. `Out` when the partial norm passes `threshold`
/// within `budget` coordinates; otherwise `Inconclusive` with the trace.
/// Kernel spaces are probed through their functional instead.
pub fn probe_membership_numeric(
    space: &SpaceSpec,
    x: &LazySequence,
    opts: ProbeOptions,
) -> MembershipCertificate {
    if let SpaceKind::Kernel { weights } = &space.kind {
        if x.kind().shape == Shape::Scalar {
            return probe_kernel(space, weights, x, opts);
        }
    }
    let budget = opts.budget.max(1);
    let marks = checkpoints(budget);
    let mut acc = NormAccumulator::new(space);
    let mut trace = Vec::new();
    let mut next = 0;
    let mut verdict = Verdict::Inconclusive;
    for j in 1..=budget {
        acc.push(x.magnitude(j).to_f64());
        let v = acc.value();
        if v > opts.threshold {
            trace.push((j, v));
            verdict = Verdict::Out;
            break;
        }
        if next < marks.len() && marks[next] == j {
            trace.push((j, v));
            next += 1;
        }
    }
    MembershipCertificate {
        verdict,
        method: Method::PartialNormProbe,
        space: space.clone(),
        sequence: x.label().to_string(),
        evidence: Evidence::Trace {
            budget,
            threshold: opts.threshold,
            trace,
        },
    }
}

/// Finds `x_{j+P} = ρ·x_j` for all sampled `j > L`, smallest `L + P` first.
pub fn detect_recurrence(values: &[Q]) -> Option<Recurrence> {
    let n = values.len();
    for total in 1..=64usize {
        for period in 1..=total {
            let l = total - period;
            if n < l + 4 * period {
                continue;
            }
            let Some(base) = (l..l + period).find(|&i| !values[i].is_zero()) else {
                if values[l..].iter().all(Zero::is_zero) {
                    return Recurrence::new(values[..l].to_vec(), vec![Q::zero()], Q::one()).ok();
                }
                continue;
            };
            let ratio = &values[base + period] / &values[base];
            let ok = (l..n - period).all(|i| values[i + period] == &ratio * &values[i]);
            if ok {
                return Recurrence::new(
                    values[..l].to_vec(),
                    values[l..l + period].to_vec(),
                    ratio,
                )
                .ok();
            }
        }
    }
    None
}

fn probe_kernel(
    space: &SpaceSpec,
    weights: &KernelWeights,
    x: &LazySequence,
    opts: ProbeOptions,
) -> MembershipCertificate {
    let budget = opts.budget.max(1);
    let sample = budget.min(512);
    let exact: Option<Vec<Q>> = (1..=sample).map(|j| x.eval_scalar(j).to_rational()).collect();
    let (rec, declared) = match x.recurrence() {
        Some(r) => (Some(r.clone()), true),
        None => (exact.as_deref().and_then(detect_recurrence), false),
    };

    let marks = checkpoints(budget);
    let mut l1 = 0.0f64;
    let mut s = 0.0f64;
    let mut partial_sums = Vec::new();
    let mut next = 0;
    let mut diverged = false;
    for j in 1..=budget {
        let v = x.eval_scalar(j).to_f64();
        l1 += v.abs();
        s += q_to_f64(&weights.weight(j)) * v;
        if next < marks.len() && marks[next] == j {
            partial_sums.push((j, s));
            next += 1;
        }
        if l1 > opts.threshold {
            partial_sums.push((j, s));
            diverged = true;
            break;
        }
    }

    let (verdict, limit, tail_bound) = if diverged {
        (Verdict::Out, None, None)
    } else {
        match &rec {
            Some(r) if r.support_bound().is_some() || r.ratio.abs() < Q::one() => {
                let limit = kernel_value(weights, r);
                let tail = r.abs_power_sum(1).map(|total| {
                    let seen: Q = (1..=sample).map(|j| r.value(j).abs()).sum();
                    q_to_f64(&(total - seen)).max(0.0)
                });
                match limit {
                    Some(v) => (in_out(v.is_zero()), Some(format_q(&v)), tail),
                    None => (Verdict::Inconclusive, None, tail),
                }
            }
            Some(_) => (Verdict::Out, None, None),
            None => (Verdict::Inconclusive, None, None),
        }
    };
    MembershipCertificate {
        verdict,
        method: Method::FunctionalEvaluation,
        space: space.clone(),
        sequence: x.label().to_string(),
        evidence: Evidence::Functional {
            budget,
            l1_partial: l1,
            partial_sums,
            recurrence: rec,
            declared,
            limit,
            tail_bound,
        },
    }
}

/// Symbolic decision when available, the numeric probe otherwise.
pub fn certify(space: &SpaceSpec, x: &LazySequence, opts: ProbeOptions) -> MembershipCertificate {
    match decide_membership_symbolic(space, x) {
        Ok(c) => c,
        Err(_) => probe_membership_numeric(space, x, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, ScalarField};

    fn rat() -> ScalarField {
        ScalarField::rational()
    }

    fn powlog(a: Q, b: Q) -> LazySequence {
        LazySequence::powlog(rat(), a, b, qi(1)).unwrap()
    }

    #[test]
    fn partial_norms() {
        let g = LazySequence::geometric(rat(), q(1, 2));
        assert_eq!(partial_norm(&SpaceSpec::lp(qi(1)), &g, 10), Scalar::Rational(q(1023, 1024)));
        let e1 = LazySequence::unit(rat(), 1);
        for n in [1, 5, 100] {
            assert_eq!(partial_norm(&SpaceSpec::lp(qi(2)), &e1, n), Scalar::one());
        }
        let h = powlog(qi(1), qi(0));
        let t = partial_norm_trace(&SpaceSpec::lp(qi(1)), &h, 1000);
        assert!(t.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(t.last().unwrap().1 > 5.0);
    }

    #[test]
    fn symbolic_rule() {
        let l1 = SpaceSpec::lp(qi(1));
        assert_eq!(decide_membership_symbolic(&l1, &powlog(qi(1), qi(2))).unwrap().verdict, Verdict::In);
        assert_eq!(decide_membership_symbolic(&l1, &powlog(qi(1), qi(0))).unwrap().verdict, Verdict::Out);
        let x = powlog(q(1, 2), qi(1));
        assert_eq!(decide_membership_symbolic(&SpaceSpec::lp(qi(2)), &x).unwrap().verdict, Verdict::In);
        assert_eq!(decide_membership_symbolic(&SpaceSpec::lp(q(3, 2)), &x).unwrap().verdict, Verdict::Out);
        assert!(matches!(
            decide_membership_symbolic(&SpaceSpec::c(), &x),
            Err(Error::UnsupportedSpace(_))
        ));
        assert_eq!(
            decide_membership_symbolic(&SpaceSpec::kernel_ones(), &x).unwrap().verdict,
            Verdict::Out
        );
        assert!(matches!(
            decide_membership_symbolic(&SpaceSpec::kernel_ones(), &powlog(qi(2), qi(0))),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn probes() {
        let h = powlog(qi(1), qi(0));
        let c = probe_membership_numeric(
            &SpaceSpec::lp(qi(1)),
            &h,
            ProbeOptions {
                budget: 100_000,
                threshold: 10.0,
            },
        );
        assert_eq!(c.verdict, Verdict::Out);
        let g = LazySequence::geometric(rat(), q(1, 2));
        let c = probe_membership_numeric(&SpaceSpec::lp(qi(1)), &g, ProbeOptions::default());
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert!(c.trace().iter().all(|&(_, v)| v <= 1.0));
    }

    #[test]
    fn kernel_probe_detects_geometric_tail() {
        let vals: Vec<Q> = (0..6)
            .flat_map(|k| {
                let p = num_traits::pow(q(1, 2), k);
                vec![p.clone(), -p]
            })
            .collect();
        let w = LazySequence::from_rational_fn(rat(), "w", move |j| {
            let k = (j - 1) / 2;
            let p = num_traits::pow(q(1, 2), k as usize);
            if j % 2 == 1 {
                p
            } else {
                -p
            }
        });
        assert_eq!(detect_recurrence(&vals).unwrap().ratio, q(1, 2));
        let c = probe_membership_numeric(&SpaceSpec::kernel_ones(), &w, ProbeOptions::default());
        assert_eq!(c.verdict, Verdict::In);
        assert_eq!(c.functional_value(), Some(qi(0)));
        let sums: Vec<f64> = c.trace().iter().take(4).map(|t| t.1).collect();
        assert_eq!(sums, vec![1.0, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn checkpoints_end_at_n() {
        assert_eq!(checkpoints(5), vec![1, 2, 3, 4, 5]);
        let c = checkpoints(100_000);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }
}
