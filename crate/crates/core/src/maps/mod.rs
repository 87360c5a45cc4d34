//! Coordinatewise maps and their scaling properties.

mod checks;
mod spec;

pub use checks::{
    check_compatible, check_non_contractive, check_strongly_non_contractive, default_alphas,
    default_samples, unit_functionals, AlphaBound, MapPropertyReport, MapVerdict, Property,
    Witness,
};
pub use spec::{pushforward, MapKind, MapSpec, TablePoint};
