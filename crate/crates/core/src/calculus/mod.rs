//! Verifiers for ε-subdifferential sum rules and the regularization
//! equality `co̅(f+g) = co̅f + co̅g`: truncated support-function set
//! comparison, the four equivalent statements and the conjugate identity,
//! qualification conditions, sequential witnesses, outer limits of
//! subdifferentials and closures of intersections.

mod harness;
mod intersection;
mod outer;
mod qualif;
mod rules;
mod sets;
mod witnesses;

pub use harness::{default_probe_grid, equivalence_harness, EquivalenceReport, Probe, ProbeOutcome};
pub use intersection::{check_intersection_closure, IntersectionReport};
pub use outer::{outer_limit_subdiff, OuterLimitReport, RadiusReport};
pub use qualif::{qualification_check, Qualification};
pub use rules::{
    check_conjugate_identity, check_regularization_equality, check_sum1d, check_sum_rules,
    check_summ1, exact_sum_rule_check, CheckParams, PointwiseGap, RuleDetail, RuleKind,
    RuleStatus, SumContext, SumRuleReport, SUM1B_TERMS,
};
pub use sets::{
    default_directions, sample_directions, set_compare, LiftedSet, SetCompareReport, SupportSet,
    UnionSet, VSet,
};
pub use witnesses::{product_function, sequential_witnesses, WitnessRow, WitnessTable};
