//! Loewner-framework model reduction from frequency-response data.
//!
//! The crate builds rational interpolants of LTI transfer-function samples
//! and selects the interpolation frequencies adaptively, so that systems
//! whose responses are expensive to evaluate can be approximated from as
//! few evaluations as possible.
//!
//! Module map:
//! * [`lti`] — state-space models, frequency grids, transfer evaluation,
//!   seeded resonant test-model generation.
//! * [`io`] — JSON model files and CSV sample tables.
//! * [`loewner`] — tangential data, the Loewner pencil, realification and
//!   SVD-based realization of the interpolant.
//! * [`cloe`] — the constructive interpolation loop (CLOE): grow the
//!   interpolation set at the strongest dynamics of the current interpolant.
//! * [`bench`] — relative L-infinity error, the coarse logarithmic baseline
//!   and the sweep harness producing figure-ready CSV records.

pub mod bench;
pub mod cloe;
pub mod io;
pub mod loewner;
pub mod lti;

pub use cloe::{run_cloe, CloeConfig, CloeTrace, ModelOracle, Oracle, TabulatedOracle};
pub use loewner::{Interpolant, LoewnerPencil, TangentialDataset};
pub use lti::{FrequencyGrid, FrequencySample, StateSpaceModel};
