//! Quantum reference frames made of copies of the system.
//!
//! An arbitrary unitary `U_S` on a `d`-level system is implemented, to trace
//! error `O(1/N)`, by letting the system interact with `N·(d² − 1)` frame
//! particles through partial SWAPs `exp(−i(α/N)·SWAP)`. Every interaction
//! commutes with every extensive charge, so the frame also acts as an
//! explicit battery for any set of (possibly non-commuting) conserved
//! quantities.
//!
//! Modules:
//!
//! - [`linalg`]: tensor products, partial traces, eigendecompositions, norms.
//! - [`basis`]: density-operator bases, their duals, generator decomposition.
//! - [`protocol`]: partial-SWAP steps, blocks, the full protocol, and the
//!   two-subsystem composite gate.
//! - [`conservation`]: extensive charges and conservation audits.
//! - [`bounds`]: explicit error bounds and convergence sweeps.
//! - [`thermo`]: generalized Gibbs states, work, and battery checks.

#![forbid(unsafe_code)]

pub mod basis;
pub mod bounds;
pub mod conservation;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod protocol;
pub mod random;
pub mod thermo;

pub use basis::{build_state_basis, GeneratorDecomposition, OperatorBasis};
pub use bounds::{BoundReport, ConvergenceTable};
pub use conservation::ExtensiveObservable;
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use operators::{DensityOperator, Unitary};
pub use protocol::{run_protocol, BatteryLedger, ProtocolResult, ProtocolSpec};
pub use random::Sampler;
pub use thermo::{ThermalSpec, WorkRecord};
