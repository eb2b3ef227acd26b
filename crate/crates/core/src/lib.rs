//! Classical simulation of nested amplitude amplification for the binary
//! knapsack problem.
//!
//! The crate provides:
//!
//! * a reproducible hard-knapsack instance generator ([`instances`]),
//! * exact solvers and marked-subspace extraction ([`ksolve`]),
//! * exact amplitude tracking of quantum-tree-generator state preparation
//!   and amplitude amplification over the marked subspaces ([`amptrack`]),
//! * the baseline Grover-adaptive-search protocol ([`gas`]) and the nested
//!   variant with its inner iteration finder ([`nested`]),
//! * a dense statevector simulator of the same circuits that serves as the
//!   ground truth for the tracking engine ([`qcheck`]).
//!
//! All amplitude arithmetic is generic over the scalar type through
//! [`real::Real`] (any IEEE float via `num-traits`); instance data is kept in
//! integers, and capacity/weight ratios are exact rationals. Concrete `f64`
//! aliases live at the crate root.

pub mod amptrack;
pub mod error;
pub mod gas;
pub mod instances;
pub mod ksolve;
pub mod nested;
pub mod qcheck;
pub mod real;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use instances::{Correlation, InstanceMetrics, ItemOrdering, KnapsackInstance};
pub use ksolve::{MarkedSet, MarkedState, Solution};
pub use real::Real;

/// Default scalar for protocol runs and the CLI.
pub type Scalar = f64;

/// Tracked marked-subspace ensemble over the default scalar.
pub type Ensemble64 = amptrack::MarkedEnsemble<f64>;
/// Single-precision ensemble, mostly useful for memory-bound sweeps.
pub type Ensemble32 = amptrack::MarkedEnsemble<f32>;
/// Dense statevector over the default scalar.
pub type StateVector64 = qcheck::StateVector<f64>;
/// Cost ledger over the default scalar.
pub type CostLedger64 = gas::CostLedger<f64>;
