//! Asynchronous approximate distributed ADMM over directed graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`digraph`]: communication topology, random strongly connected
//!   generation, exact diameter and the column-stochastic broadcast weights.
//! * [`netsim`]: a seeded discrete-event simulator for bounded-delay message
//!   passing on a global logical clock.
//! * [`consensus`]: delayed ratio (push-sum) consensus, asynchronous
//!   max/min-consensus and the finite-time termination protocol built on them.
//! * [`problems`]: local cost functions and the distributed least-squares
//!   instance.
//! * [`oracle`]: centralized ground truth used by tests and diagnostics.
//! * [`admm`]: the outer optimization loop and its convergence diagnostics.

pub mod admm;
pub mod consensus;
pub mod digraph;
pub mod netsim;
pub mod oracle;
pub mod problems;

mod error;

pub use error::{Error, Result};

/// Dense real vector used for every per-node quantity.
pub type Vector = nalgebra::DVector<f64>;
