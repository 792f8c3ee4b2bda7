//! Simulation and verification tools for hitting times of random 0-1 matrix
//! processes.

pub mod campaign;
pub mod lofford;
pub mod matrix;
pub mod process;
pub mod rng;
pub mod stats;
pub mod structure;
pub mod walks;
