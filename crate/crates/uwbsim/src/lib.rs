//! Scenario runner for the UWB link models: end-to-end runs in the three
//! test modes, parameter sweeps and spectral-mask checks.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mask;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::{Result, SimError};
pub use mask::{mask_check, MaskResult, SpectralMask};
pub use run::{run_scenario, LinkReport};
pub use scenario::{Mode, Scenario};
pub use sweep::{sweep, SweepRow};
