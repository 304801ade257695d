//! Execution engines for deterministic, probabilistic and quantum streaming machines.

pub mod engine;
pub mod machines;
pub mod quantum;

pub use engine::{
    deterministic_outcome, run_deterministic, run_online, run_quantum, run_stochastic, trial_rng,
    Branch, RunMode, RunOutcome, DEFAULT_BRANCH_CAP, RNG_ID,
};
pub use machines::{
    AnyMachine, DeterministicAlgorithm, DeterministicMachine, DeterministicRunner, Layer,
    ProbabilisticMachine, QuantumMachine, QuantumOp, QuantumProgram, StochasticProgram,
};
pub use quantum::{random_unitary, Matrix, Measurement, QuantumState, C64};
