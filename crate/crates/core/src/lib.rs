//! Discrete quadratic models compiled to Ising/QUBO form.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole algorithmic
//! path of an encoding benchmark:
//!
//! * [`model`]: discrete and binary quadratic models, QUBO/Ising conversion
//! * [`encode`]: one-hot and domain-wall encodings, penalty selection, decoding
//! * [`problems`]: graph coloring and flight-gate assignment generators
//! * [`embed`]: Chimera graphs, greedy minor embedding, chains and chain repair
//! * [`sample`]: a seeded simulated-annealing sampler and an exhaustive solver
//! * [`bench`]: per-instance metrics, pipeline runs, sign tests and sweeps
//!
//! File formats, parallel execution and the command-line driver live in the
//! `dqmforge` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bench;
pub mod embed;
pub mod encode;
mod error;
pub mod model;
pub mod problems;
pub mod rng;
pub mod sample;

pub use error::{Error, Result};
