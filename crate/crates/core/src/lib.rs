//! Restoration of missing sample runs ("gaps") in audio signals.
//!
//! The main route models the signal as sparse in a tight Gabor (time-frequency)
//! frame and fills gaps with proximal splitting solvers, optionally steered by
//! per-atom weights, iterative reweighting, gradual gap shrinking and an energy
//! compensation curve. An autoregressive interpolator is included as a baseline.
//!
//! Entry point for whole signals is [`pipeline::inpaint_signal`]; the individual
//! building blocks (frame operators, solvers, weights) are public for direct use.

pub mod error;
pub mod fixtures;
pub mod frame;
pub mod gap;
pub mod gradual;
pub mod janssen;
pub mod pipeline;
pub mod prox;
pub mod reweight;
pub mod solver;
pub mod spline;
pub mod tdc;
pub mod weights;

pub use error::{CoreError, Result};
pub use frame::{CoefGrid, GaborParams, OffsetKind, OffsetSpec, TightGaborFrame, WindowKind};
pub use gap::{GapSpec, ReliableMask};
pub use solver::{SolverConfig, SolverResult};
