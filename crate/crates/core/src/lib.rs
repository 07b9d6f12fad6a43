//! Frobenius–Perron operators, Lyapunov-density certificates and sweeping
//! diagnostics for Markov processes driven by state-dependent iterated
//! function systems.
//!
//! Two models ship with the crate: quantum non-demolition measurement chains
//! on the complex unit sphere ([`qnd`]) and the cell-size-at-birth process on
//! the half-line ([`cell_cycle`]).

pub mod cell_cycle;
pub mod certify;
pub mod cli;
pub mod error;
pub mod markov;
pub mod numerics;
pub mod qnd;
pub mod state;

pub use error::{Error, Result};
pub use state::{QuantumState, C64};
