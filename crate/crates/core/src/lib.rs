//! Conflict-constrained weighted bipartite matching for V2V sidelink
//! resource allocation.
//!
//! Vehicles of a cluster must transmit in distinct subframes, so the
//! vehicle-to-resource assignment is a matching with macro-vertex
//! constraints: all K resources of a subframe are aggregated into one
//! vertex, at most one vehicle per aggregate. Taking the per-vehicle
//! maximum over each aggregate reduces the problem to a standard N x N
//! assignment solved by Kuhn-Munkres, with no loss of optimality.
//!
//! Modules:
//! - [`matching`]: maximum-weight perfect matching plus a brute-force oracle
//! - [`reduction`]: macro-vertex aggregation, expansion and the
//!   constraint-matrix validation machinery
//! - [`baselines`]: exhaustive, greedy and random comparison algorithms
//! - [`scenario`]: SINR-driven instance generation with dummy padding
//! - [`harness`]: seeded multi-trial experiments, metrics, CDFs and reports

pub mod baselines;
pub mod error;
pub mod harness;
pub mod matching;
pub mod reduction;
pub mod scenario;

pub use error::{Error, Result};
pub use matching::{
    brute_force_assignment, matching_value, solve_assignment, validate_perfect_matching,
    PerfectMatching, WeightMatrix,
};
pub use reduction::{
    build_constrained_constraint_matrix, build_partition, build_unconstrained_constraint_matrix,
    check_total_unimodularity, expand_matching, reduce_hard, reduce_soft, solve_constrained,
    verify_assignment_feasibility, BinaryConstraintMatrix, MacroPartition, ReducedProblem,
    ResourceAssignment,
};
pub use scenario::{compute_weight, generate_scenario, pad_cluster, Scenario, ScenarioConfig};
