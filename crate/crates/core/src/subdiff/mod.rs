//! ε-subdifferentials of polyhedral functions, the threshold `ε_f(x)`,
//! the Brøndsted–Rockafellar construction and integration of subgradient
//! selections along segments.

mod brondsted;
mod eps;
mod integrate;

pub use brondsted::{brondsted_rockafellar, closest_subgradient, is_subgradient, BRWitness};
pub use eps::{
    eps_subdiff_from_conjugate, eps_subdiff_set, eps_threshold, eps_threshold_definitional,
    fenchel_gap,
};
pub(crate) use eps::{eps_offset, snap_zero};
pub use integrate::{integrate_subdiff, FnOracle, PolyhedralOracle, SubgradientOracle};
