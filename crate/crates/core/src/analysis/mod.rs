//! Competitive-ratio measurement, closed-form bounds and brute-force oracles.

pub mod bounds;
pub mod lower_bound;
pub mod oracle;
pub mod report;

pub use bounds::{
    bound_c1, bound_c2, bound_det_unbounded, bound_quantum, bound_quantum_exact, to_f64, BoundSet,
};
pub use lower_bound::{state_lower_bound, BoundKind, StateLowerBound};
pub use oracle::{
    block_success_probabilities, expected_cost_closed_form, expected_cost_oracle,
    guess_expected_cost,
};
pub use report::{empirical_ratio, write_csv, CompetitiveReport, REPORT_SCHEMA_VERSION};
