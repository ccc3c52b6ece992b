// SPDX-License-Identifier: Apache-2.0

//! Streaming algorithms for covering integer programs and set cover.
//!
//! Columns of `min c·x s.t. Ax >= b` arrive one at a time. The crate offers
//! an exact reference solver, a one-pass merging approximation, a one-pass
//! estimator of the optimum built from per-guess testers, generators for
//! hard input distributions, and a harness that drives them over streams.

pub mod cost;
pub mod estimator;
pub mod hard;
pub mod harness;
pub mod instance;
pub mod io;
pub mod merge;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod tester;

pub use cost::{cost_of_constraint, cost_of_instance, streaming_cost, Cost, CostTable};
pub use estimator::{
    binarize, binarize_events, estimate_opt, estimate_opt_unknown_cmax, multicover_estimate, EstimateError,
    EstimateReport, EstimatorConfig, GuessLadder, MulticoverReport,
};
pub use instance::{
    Assignment, ColumnEvent, CoveringInstance, InstanceError, SetSystem, SparseColumn, VariableKind,
};
pub use merge::{merge_approx, merge_approx_ilp, CoverCertificate, MergeError};
pub use oracle::{exact_opt, exact_opt_within, exact_set_cover, OracleError, OracleLimits, Solution};
pub use sampler::{sample_constraints, verify_sampling_lemma, SamplerError, SamplingReport};
pub use tester::{tester_init, ProjectionMode, PruneRule, TesterConfig, TesterState, Verdict};
