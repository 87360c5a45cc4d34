//! Lazy sequences, index sets and the coordinate operations on them.

pub mod envelope;
pub mod index;
pub mod ops;
pub mod sequence;
pub mod value;

pub use envelope::{Envelope, PowLogEnvelope};
pub use index::IndexSet;
pub use ops::{
    agree_on_prefix, embed, first_nonzero, linear_combine, restrict, scale, split,
    zero_free_version, DEFAULT_ZERO_FREE_BUDGET,
};
pub use sequence::{LazySequence, Recurrence, Structure, SupportHint};
pub use value::{Shape, Value, ValueKind, VecNorm, VectorSpaceSpec};
