//! Discrete many-particle scattering: placement of small impedance particles
//! from a recipe, the self-consistent point-scatterer system, and near/far
//! field evaluation of the resulting configuration.

mod field;
mod place;
mod solve;

pub use field::{evaluate_field, far_field_discrete};
pub use place::place_particles;
pub use solve::{solve_system, SolveResult};

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::design::{capacitance_ball, effective_capacitance, Impedance};
use crate::error::{Error, Result};
use crate::medium::{BoxDomain, MediumSpec};
use crate::vec3::{dist, Vec3};

/// A concrete configuration of `M` small balls of shared radius `a` with
/// per-particle boundary impedances, embedded in a box domain.
///
/// Construction enforces the geometric side conditions the point-scatterer
/// reduction rests on: centers strictly interior, pairwise distances above
/// the non-overlap bound `2a`, and no acoustically hard (`zeta = 0`)
/// particles. Effective capacitances are derived from the impedances at
/// construction and kept consistent by immutability.
#[derive(Debug, Clone)]
pub struct ParticleSet {
    domain: BoxDomain,
    centers: Vec<Vec3>,
    a: f64,
    zetas: Vec<Impedance>,
    c0s: Vec<f64>,
    ceffs: Vec<Complex64>,
    /// min pairwise center distance; infinite for fewer than two particles.
    min_dist: f64,
}

impl ParticleSet {
    pub fn new(
        domain: &BoxDomain,
        centers: Vec<Vec3>,
        a: f64,
        zetas: Vec<Impedance>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "particle radius must be positive, got {a}"
            )));
        }
        if zetas.len() != centers.len() {
            return Err(Error::InvalidArgument(format!(
                "{} impedances for {} particles",
                zetas.len(),
                centers.len()
            )));
        }
        for z in &zetas {
            if let Impedance::Finite(v) = z {
                if v.norm() == 0.0 {
                    return Err(Error::HardParticles);
                }
            }
        }
        for (m, x) in centers.iter().enumerate() {
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "particle {m} has non-finite center {x:?}"
                )));
            }
            let interior =
                (0..3).all(|i| x[i] > domain.lo()[i] && x[i] < domain.hi()[i]);
            if !interior {
                return Err(Error::InvalidArgument(format!(
                    "particle {m} at {x:?} is not strictly inside the domain"
                )));
            }
        }
        let min_dist = min_pairwise_distance(&centers);
        if min_dist <= 2.0 * a {
            return Err(Error::SpacingViolation {
                spacing: min_dist,
                limit: 2.0 * a,
            });
        }
        let c0 = capacitance_ball(a)?;
        let area = 4.0 * PI * a * a;
        let ceffs = zetas
            .iter()
            .map(|z| effective_capacitance(c0, *z, area))
            .collect::<Result<Vec<_>>>()?;
        let c0s = vec![c0; centers.len()];
        Ok(Self {
            domain: domain.clone(),
            centers,
            a,
            zetas,
            c0s,
            ceffs,
            min_dist,
        })
    }

    pub fn num_particles(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.a
    }

    pub fn zetas(&self) -> &[Impedance] {
        &self.zetas
    }

    pub fn c0s(&self) -> &[f64] {
        &self.c0s
    }

    /// Effective capacitances `C_eff = C0 / (1 + C0/(zeta |S|))` per particle.
    pub fn ceffs(&self) -> &[Complex64] {
        &self.ceffs
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    /// Minimal pairwise center distance `d`; `+inf` for fewer than two
    /// particles (the minimum over an empty pair set).
    pub fn min_spacing(&self) -> f64 {
        self.min_dist
    }
}

fn min_pairwise_distance(centers: &[Vec3]) -> f64 {
    if centers.len() < 2 {
        return f64::INFINITY;
    }
    (0..centers.len() - 1)
        .into_par_iter()
        .map(|m| {
            let mut best = f64::INFINITY;
            for j in m + 1..centers.len() {
                best = best.min(dist(centers[m], centers[j]));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Fraction of the domain occupied by the particles, `M (4/3)π a³ / |D|`.
pub fn relative_volume(particles: &ParticleSet, domain: &BoxDomain) -> f64 {
    let a = particles.radius();
    particles.num_particles() as f64 * (4.0 / 3.0) * PI * a * a * a / domain.volume()
}

/// Diagnostics for the smallness conditions the asymptotic theory assumes:
/// `n0 k a << 1` and `d >> a`.
#[derive(Debug, Clone, Copy)]
pub struct SmallnessReport {
    /// `max|n0| · k · a`.
    pub n0ka: f64,
    /// Minimal pairwise distance over the radius; `+inf` for `M < 2`.
    pub d_over_a: f64,
    /// Radius over minimal pairwise distance; `0` for `M < 2`.
    pub a_over_d: f64,
    /// `n0ka <= 0.1`.
    pub ka_ok: bool,
    /// `d/a >= 5`.
    pub spacing_ok: bool,
}

impl SmallnessReport {
    pub fn is_ok(&self) -> bool {
        self.ka_ok && self.spacing_ok
    }
}

/// Check the smallness conditions of the particle configuration against the
/// background medium; out-of-range values are reported, not errors.
pub fn check_smallness(particles: &ParticleSet, medium: &MediumSpec) -> SmallnessReport {
    let a = particles.radius();
    let n0_max = medium.n0().max_abs();
    let n0ka = n0_max * medium.k() * a;
    let d = particles.min_spacing();
    let d_over_a = d / a;
    let a_over_d = if d.is_finite() { a / d } else { 0.0 };
    SmallnessReport {
        n0ka,
        d_over_a,
        a_over_d,
        ka_ok: n0ka <= 0.1,
        spacing_ok: d_over_a >= 5.0,
    }
}
