//! Pointwise spaceability: the subspace generated through a mother vector.

mod partition;
mod subspace;

pub use partition::{build_partition, BlockPosition, Branch, CoverReport, IndexPartition};
pub use subspace::{
    combine, generate_basis, select_divergent_half, series_bound_check, verify_independence,
    verify_membership, Case, Combination, CombinationCertificate, CombinationVerdict,
    FamilyCertificate, FamilyProbe, GSpec, GeneratedSubspace, RankReport, SeriesBoundReport,
    SeriesTerm, StrongProbe, SubspaceSummary,
};
