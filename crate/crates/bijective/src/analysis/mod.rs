//! Sequence enumeration, cost profiles, comparison measures, decoupling
//! checks, and the decision-tree oracle.

pub mod compare;
pub mod decouple;
pub mod oracle;
pub mod profile;

pub use compare::{
    additive_slack, best_matching_by_permutations, bijective_ratio, certified_rho,
    lower_bound_certificate, scalar_ratios, stochastic_dominance, ComparisonReport, CurvePoint,
    Dominance, RhoBound,
};
pub use decouple::{
    decoupling_check, line_potential_params, potential_value, DecouplingReport, PotentialKind,
};
pub use oracle::{
    count_opt_within, max_sequences_below, optimality_oracle, OracleCounterexample, OracleOutcome,
    TreeOracle, DEFAULT_TREE_BUDGET,
};
pub use profile::{
    anchored_cost_profile, cost_profile, enumerate_sequences, sample_profile_pair, sample_profiles,
    CostProfile, SequenceEnumerator, DEFAULT_SEQUENCE_BUDGET,
};
