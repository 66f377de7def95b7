//! Evolutionary synthesis of approximate reversible circuits, with error
//! metrics, hardware cost models and a noisy-execution simulator.

pub mod circuit;
pub mod cost;
pub mod ea;
pub mod error;
pub mod experiment;
pub mod format;
pub mod metrics;
pub mod noise;
pub mod oracle;
pub mod restriction;
pub mod rng;
pub mod sim;

pub use circuit::{BitState, Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use oracle::BooleanFunction;
pub use restriction::Restriction;
