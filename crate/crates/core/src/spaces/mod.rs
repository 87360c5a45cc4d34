//! Sequence spaces, truncated norms, membership certificates and the
//! invariance axioms.

pub mod axioms;
pub mod membership;
pub mod spec;

pub use axioms::{
    check_invariant_axioms, check_strongly_invariant, finite_support_probes, AxiomReport,
    SampleAxioms, StrongInvarianceReport, SubsequenceCheck, Violation,
};
pub use membership::{
    certify, checkpoints, decide_membership_symbolic, detect_recurrence, partial_norm,
    partial_norm_trace, probe_membership_numeric, Evidence, MembershipCertificate, Method,
    ProbeOptions, Verdict,
};
pub use spec::{Exponent, KernelWeights, NestedFamily, SpaceKind, SpaceSpec};
