//! The limiting (continuum) scattering problem: the volume integral
//! equation for the perturbed medium and its far-field amplitudes.

mod farfield;
mod grid;
mod solve;
mod weight;

pub use farfield::{far_field, FarFieldPattern};
pub use grid::LsGrid;
pub use solve::{exterior_field, solve_ls, solve_u0, LsSolution, SolveDiagnostics, LS_RESIDUAL_TOL};
pub use weight::self_cell_weight;

pub(crate) use solve::GridSystem;
