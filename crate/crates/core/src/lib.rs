//! Online algorithms, adversaries and competitive analysis for the Black Hats
//! streaming problem.

pub mod adversaries;
pub mod algorithms;
pub mod analysis;
pub mod automata;
pub mod error;
pub mod functions;
pub mod model;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    Answer, BhInstance, BhParams, BitString, FunctionSpec, InstanceFile, OutputTrace, Symbol,
};
