//! Classical simulation and verification of continuous hidden-shift Fourier sampling.
//!
//! The instance lives on the lattice `ℤ_{2^q}ⁿ` with `q = 4k`. A hidden shift
//! `u = δũ` with `ũ ∈ {0, …, 2^k}ⁿ` is planted in a bump-windowed oracle; the
//! crate simulates the quantum state, samples the Fourier spectrum, counts
//! orthogonal lattice points and recovers `ũ` from samples.

pub mod error;
pub mod identities;
pub mod io;
pub mod lattice;
pub mod orthogonality;
pub mod pipeline;
pub mod recovery;
pub mod spectrum;
pub mod statevec;

pub use error::{Error, Result};
pub use lattice::{HiddenShift, OracleModel, Params};
pub use pipeline::{run_pipeline, run_sweep, RunConfig, ShiftChoice, SweepRow};
pub use recovery::{RecoveryReport, Strategy};
pub use spectrum::Sample;
