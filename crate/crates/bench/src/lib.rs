//! Benchmark-only crate; see the `benches/` directory. Shared fixture
//! builders live here so the benchmarks stay declarative.

use num_complex::Complex64;

use refrac_core::design::{radius_for_target_count, recipe_soft};
use refrac_core::manybody::{place_particles, ParticleSet};
use refrac_core::{BoxDomain, ComplexGridField, MediumSpec};

/// Vacuum medium on the unit cube.
pub fn unit_cube_medium(cells_per_side: usize) -> MediumSpec {
    let domain = BoxDomain::new([0.0; 3], [1.0; 3], [cells_per_side; 3]).unwrap();
    MediumSpec::vacuum(domain, 1.0, [0.0, 0.0, 1.0]).unwrap()
}

/// Constant potential on the medium's grid.
pub fn constant_field(medium: &MediumSpec, value: Complex64) -> ComplexGridField {
    ComplexGridField::constant(medium.domain().clone(), value)
}

/// A reproducible soft-particle cloud realizing p ≡ 2 with roughly `m`
/// particles.
pub fn soft_cloud(medium: &MediumSpec, m: usize) -> ParticleSet {
    let p = constant_field(medium, Complex64::new(2.0, 0.0));
    let a = radius_for_target_count(&p, m).unwrap();
    let recipe = recipe_soft(&p, a).unwrap();
    place_particles(&recipe, medium.domain(), 0).unwrap()
}
