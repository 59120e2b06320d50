//! Field evaluation and the discrete far-field amplitude of a solved
//! particle configuration.

use num_complex::Complex64;
use rayon::prelude::*;

use super::solve::SolveResult;
use super::ParticleSet;
use crate::continuum::FarFieldPattern;
use crate::error::{Error, Result};
use crate::greens::{far_field_factor, free_space_g, BackgroundField, BackgroundGreen, PlaneWave};
use crate::linalg::kahan_sum;
use crate::vec3::{dist, is_unit, Vec3};

/// Evaluate the total field `u(x) = u0(x) + Σ_m G(x, x_m) Q_m`.
///
/// The representation is only accurate at distances of order the particle
/// spacing `d` and beyond; evaluation closer than `d` logs a warning, and
/// closer than `2a` is a hard error.
pub fn evaluate_field(
    particles: &ParticleSet,
    result: &SolveResult,
    x: Vec3,
) -> Result<Complex64> {
    if !particles.is_empty() {
        let dmin = particles
            .centers()
            .iter()
            .map(|c| dist(*c, x))
            .fold(f64::INFINITY, f64::min);
        let limit = 2.0 * particles.radius();
        if dmin < limit {
            return Err(Error::InsideParticle { dist: dmin, limit });
        }
        let d = particles.min_spacing();
        if d.is_finite() && dmin < d {
            log::warn!(
                "field evaluated {dmin:.3e} from a particle center, inside the \
                 accuracy radius d = {d:.3e}"
            );
        }
    }
    // background field via the volume representation over the grid solution
    let u0 = match result.background() {
        None => result.incident(x),
        Some(bg) => {
            result.incident(x)
                - kahan_sum((0..bg.u_grid.len()).map(|l| {
                    bg.grid.point_weight(x, l) * bg.q0.values()[l] * bg.u_grid[l]
                }))
        }
    };
    let scattered = kahan_sum(
        particles
            .centers()
            .iter()
            .zip(result.charges())
            .map(|(c, q)| {
                free_space_g(x, *c, result.k()).expect("x is outside every particle") * q
            }),
    );
    Ok(u0 + scattered)
}

/// Discrete scattering amplitude `A_M(β, α) = (1/4π) Σ_m u0(x_m, -β) Q_m`,
/// sampled over a direction set; `u0` is the plane wave itself for a vacuum
/// background.
pub fn far_field_discrete(
    particles: &ParticleSet,
    result: &SolveResult,
    betas: &[Vec3],
) -> Result<FarFieldPattern> {
    for b in betas {
        if !is_unit(*b, 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "far-field direction must be a unit vector, got {b:?}"
            )));
        }
    }
    if particles.is_empty() {
        return FarFieldPattern::zeros(result.alpha(), betas.to_vec());
    }
    let amplitudes = match result.background() {
        None => {
            let pw = PlaneWave::new(result.k());
            sample_amplitudes(particles, result, &pw, betas)
        }
        Some(bg) => {
            let green = BackgroundGreen::new(&bg.q0, result.k())?;
            sample_amplitudes(particles, result, &green, betas)
        }
    };
    FarFieldPattern::new(result.alpha(), betas.to_vec(), amplitudes)
}

fn sample_amplitudes(
    particles: &ParticleSet,
    result: &SolveResult,
    background: &dyn BackgroundField,
    betas: &[Vec3],
) -> Vec<Complex64> {
    betas
        .par_iter()
        .map(|beta| {
            kahan_sum(
                particles
                    .centers()
                    .iter()
                    .zip(result.charges())
                    .map(|(x, q)| far_field_factor(*x, *beta, background) * q),
            )
        })
        .collect()
}
