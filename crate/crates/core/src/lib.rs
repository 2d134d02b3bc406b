//! Numerical toolkit for the two-qudit unitary Yang–Baxter matrix `R̆(x)`.
//!
//! * [`tensor`]: dense complex matrices, Kronecker products, Hermitian eigensolver.
//! * [`yang_baxter`]: circulation matrices `P_r`, `M`, the weights `F`, `G`,
//!   `R̆(x)` and residual checks of the braid, Hecke and unitarity relations.
//! * [`entanglement`]: Schmidt decomposition, invariants `I_j`/`I′_j`, concurrence.
//! * [`generation`]: the state-generation pipeline, region sampling and coverage,
//!   and the inverse parameter solver.
//! * [`entangling_power`]: Monte-Carlo and closed-form entangling power.
//! * [`cli`]: the `ybx` command-line tool.

pub mod cli;
pub mod entanglement;
pub mod entangling_power;
pub mod error;
pub mod format;
pub mod generation;
pub mod parallel;
pub mod tensor;
pub mod yang_baxter;

pub use error::{Error, Result};
