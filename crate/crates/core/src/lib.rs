//! Linearly implicit conservative finite-difference solver for the
//! generalized Rosenau-Kawahara-RLW equation
//!
//! ```text
//! u_t + a u_x + b u^m u_x + c u_xxx - α u_xxt + λ u_xxxxt - ν u_xxxxx = 0
//! ```
//!
//! on a bounded interval with `u = u_x = u_xx = 0` at both ends.
//!
//! - [`mesh`]: grids, mesh functions and the difference operators
//! - [`banded`]: band storage and LU with partial pivoting
//! - [`scheme`]: the three-level step, its Crank–Nicolson start-up and the driver
//! - [`diagnostics`]: discrete energy, error norms, drift
//! - [`exact`]: closed-form solitary waves used as reference solutions
//! - [`config`], [`csvio`], [`study`], [`properties`]: the experiment harness

pub mod banded;
pub mod config;
pub mod csvio;
pub mod diagnostics;
pub mod exact;
pub mod mesh;
pub mod properties;
pub mod scheme;
pub mod study;

pub use banded::{lu_factor, BandedLu, BandedMatrix, LinalgError};
pub use diagnostics::{discrete_energy, drift, error_report, EnergyRecord, ErrorReport};
pub use exact::{solve_ansatz, AnsatzSolution, Branch, SolutionKind};
pub use mesh::{apply_diff, inner_product, norm_l2, norm_max, DiffOp, Grid, MeshFn};
pub use scheme::{run, BootstrapOptions, SchemeParams, SimOutput, TimeGrid};
