//! Acoustic material design by embedding small impedance particles.
//!
//! Given a background refraction coefficient `n0(x)` and a desired one `n(x)`
//! on a box domain, this crate computes the particle number density `N(x)` and
//! boundary impedance `zeta(x)` that realize the change, synthesizes concrete
//! particle configurations, solves the resulting many-body scattering problem,
//! and cross-checks the field against the limiting volume integral equation.

pub mod continuum;
pub mod design;
pub mod directions;
pub mod error;
pub mod greens;
pub mod io;
pub mod linalg;
pub mod manybody;
pub mod medium;
pub mod quad;
pub mod vec3;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
pub use num_complex::Complex64;

pub use continuum::{
    exterior_field, far_field, self_cell_weight, solve_ls, solve_u0, FarFieldPattern, LsGrid,
    LsSolution, SolveDiagnostics,
};
pub use design::{
    capacitance_ball, capacitance_mesh, effective_capacitance, icosphere, predicted_p,
    radius_for_target_count, recipe_general, recipe_soft, Impedance, ParticleRecipe, SurfaceMesh,
};
pub use greens::{far_field_factor, free_space_g, BackgroundField, BackgroundGreen, PlaneWave};
pub use manybody::{
    check_smallness, evaluate_field, far_field_discrete, place_particles, relative_volume,
    solve_system, ParticleSet, SmallnessReport, SolveResult,
};
pub use medium::{
    p_from_target, potential_from_refraction, refraction_from_potential, validate_passivity,
    BoxDomain, ComplexGridField, MediumSpec, RealGridField,
};
pub use verify::{all_passed, standard_checks, CheckOutcome};
