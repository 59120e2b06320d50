//! The embedding recipe: from a desired potential perturbation `p(x)` to
//! particle density `N(x)` and boundary impedance `ζ(x)`, plus the
//! electrostatic capacitances the recipe is built on.

mod capacitance;
mod mesh;

pub use capacitance::{capacitance_mesh, triangle_potential};
pub use mesh::{icosphere, SurfaceMesh};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::medium::{ComplexGridField, RealGridField, PASSIVITY_TOL};

/// |1 + h| below this counts as the recipe pole.
const SINGULAR_TOL: f64 = 1e-12;

/// Boundary impedance of one particle; `Soft` is the ζ = ∞ (Dirichlet)
/// limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Impedance {
    Soft,
    Finite(Complex64),
}

impl Impedance {
    pub fn is_soft(&self) -> bool {
        matches!(self, Impedance::Soft)
    }
}

/// Capacitance of a ball in the Gaussian convention used throughout:
/// `C⁰ = 4πa`.
pub fn capacitance_ball(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("ball radius must be positive, got {a}")));
    }
    Ok(4.0 * PI * a)
}

/// `C_ζ = C⁰ / (1 + C⁰/(ζ·|S|))`; `C⁰` itself for soft (ζ = ∞) particles.
pub fn effective_capacitance(c0: f64, zeta: Impedance, area: f64) -> Result<Complex64> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacitance must be positive, got {c0}")));
    }
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::InvalidArgument(format!("surface area must be positive, got {area}")));
    }
    let z = match zeta {
        Impedance::Soft => return Ok(Complex64::new(c0, 0.0)),
        Impedance::Finite(z) => z,
    };
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("zeta = 0 is not an impedance (hard limit)".into()));
    }
    let denom = 1.0 + c0 / (z * area);
    if denom.norm() < SINGULAR_TOL {
        return Err(Error::SingularImpedance);
    }
    Ok(c0 / denom)
}

/// Everything needed to realize a desired `p(x)`: particle size, density
/// and impedance fields. `zeta` is `None` on cells with no particles.
#[derive(Debug, Clone)]
pub struct ParticleRecipe {
    a: f64,
    c0: f64,
    n_density: RealGridField,
    h: ComplexGridField,
    zeta: Vec<Option<Impedance>>,
}

impl ParticleRecipe {
    pub fn new(
        a: f64,
        c0: f64,
        n_density: RealGridField,
        h: ComplexGridField,
        zeta: Vec<Option<Impedance>>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("particle radius must be positive, got {a}")));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidArgument(format!("capacitance must be positive, got {c0}")));
        }
        if n_density.domain() != h.domain() {
            return Err(Error::GridMismatch {
                expected: n_density.domain().shape(),
                got: h.domain().shape(),
            });
        }
        if zeta.len() != n_density.values().len() {
            return Err(Error::InvalidArgument(format!(
                "zeta has {} entries for {} cells",
                zeta.len(),
                n_density.values().len()
            )));
        }
        let area = 4.0 * PI * a * a;
        for (j, (&n, (&h_j, z_j))) in n_density
            .values()
            .iter()
            .zip(h.values().iter().zip(&zeta))
            .enumerate()
        {
            if !(n >= 0.0 && n.is_finite()) {
                return Err(Error::Recipe(format!("N = {n} at cell {j}; densities must be >= 0")));
            }
            if n == 0.0 {
                continue;
            }
            if (1.0 + h_j).norm() < SINGULAR_TOL {
                return Err(Error::SingularRecipe { index: j });
            }
            // h = C0/(zeta |S|) must hold where particles exist
            let implied = match z_j {
                None => {
                    return Err(Error::Recipe(format!("cell {j} has N > 0 but no impedance")))
                }
                Some(Impedance::Soft) => Complex64::new(0.0, 0.0),
                Some(Impedance::Finite(z)) => c0 / (z * area),
            };
            if (implied - h_j).norm() > 1e-9 * (1.0 + h_j.norm()) {
                return Err(Error::Recipe(format!(
                    "cell {j}: zeta implies h = {implied}, stored h = {h_j}"
                )));
            }
        }
        Ok(Self {
            a,
            c0,
            n_density,
            h,
            zeta,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn surface_area(&self) -> f64 {
        4.0 * PI * self.a * self.a
    }

    pub fn n_density(&self) -> &RealGridField {
        &self.n_density
    }

    pub fn h(&self) -> &ComplexGridField {
        &self.h
    }

    pub fn zeta(&self) -> &[Option<Impedance>] {
        &self.zeta
    }

    pub fn domain(&self) -> &crate::medium::BoxDomain {
        self.n_density.domain()
    }

    /// `∫ N dx`: the number of particles the recipe asks for.
    pub fn expected_count(&self) -> f64 {
        self.n_density.integrate()
    }
}

/// Recipe for real `p ≥ 0`: soft particles, `N = p/C⁰`, `h = 0`.
pub fn recipe_soft(p: &ComplexGridField, a: f64) -> Result<ParticleRecipe> {
    let c0 = capacitance_ball(a)?;
    let mut n = Vec::with_capacity(p.values().len());
    let mut zeta = Vec::with_capacity(p.values().len());
    for (j, &pj) in p.values().iter().enumerate() {
        if pj.im.abs() > PASSIVITY_TOL {
            return Err(Error::Recipe(format!(
                "p = {pj} at cell {j} is not real; soft particles create only real p — use recipe_general"
            )));
        }
        if pj.re < -PASSIVITY_TOL {
            return Err(Error::Recipe(format!(
                "p = {pj} at cell {j} is negative; soft particles create only p >= 0 — use recipe_general"
            )));
        }
        let nj = pj.re.max(0.0) / c0;
        zeta.push(if nj > 0.0 { Some(Impedance::Soft) } else { None });
        n.push(nj);
    }
    ParticleRecipe::new(
        a,
        c0,
        RealGridField::new(p.domain().clone(), n)?,
        ComplexGridField::constant(p.domain().clone(), Complex64::new(0.0, 0.0)),
        zeta,
    )
}

/// Recipe for complex `p` with `Re p > 0`, `Im p ≤ 0` wherever `p ≠ 0`,
/// using the gauge `h₁ = 0`, `h₂ = -p₂/p₁`, which gives
/// `N = (p₁² + p₂²)/(p₁ C⁰)` and `ζ = C⁰/(h |S|)`.
pub fn recipe_general(p: &ComplexGridField, a: f64) -> Result<ParticleRecipe> {
    let c0 = capacitance_ball(a)?;
    recipe_with_c0(p, a, c0)
}

fn recipe_with_c0(p: &ComplexGridField, a: f64, c0: f64) -> Result<ParticleRecipe> {
    let area = 4.0 * PI * a * a;
    let scale = p.max_abs();
    let mut n = Vec::with_capacity(p.values().len());
    let mut h = Vec::with_capacity(p.values().len());
    let mut zeta = Vec::with_capacity(p.values().len());
    let mut gain_cells: Vec<usize> = Vec::new();
    for (j, &pj) in p.values().iter().enumerate() {
        if pj.norm() <= 1e-14 * scale {
            n.push(0.0);
            h.push(Complex64::new(0.0, 0.0));
            zeta.push(None);
            continue;
        }
        if pj.im > PASSIVITY_TOL {
            gain_cells.push(j);
            continue;
        }
        let p1 = pj.re;
        let p2 = pj.im.min(0.0);
        if p1 <= 0.0 {
            return Err(Error::Recipe(format!(
                "p = {pj} at cell {j} has Re p <= 0; the impedance recipe requires Re p > 0 where p != 0"
            )));
        }
        let h2 = -p2 / p1;
        let hj = Complex64::new(0.0, h2);
        // (p1^2 + p2^2)/(p1 C0), arranged to hit p1/C0 exactly when p2 = 0
        n.push((p1 + p2 * p2 / p1) / c0);
        h.push(hj);
        zeta.push(if h2 == 0.0 {
            Some(Impedance::Soft)
        } else {
            Some(Impedance::Finite(c0 / (hj * area)))
        });
    }
    if let Some(&first) = gain_cells.first() {
        return Err(Error::GainMedium {
            count: gain_cells.len(),
            first_index: first,
            first_coords: p.domain().coords(first),
            first_im: p.values()[first].im,
        });
    }
    ParticleRecipe::new(
        a,
        c0,
        RealGridField::new(p.domain().clone(), n)?,
        ComplexGridField::new(p.domain().clone(), h)?,
        zeta,
    )
}

/// Forward map of the recipe: the perturbation `p(x) = N(x)C⁰/(1 + h(x))`
/// it realizes in the limit medium.
pub fn predicted_p(recipe: &ParticleRecipe) -> Result<ComplexGridField> {
    let mut out = Vec::with_capacity(recipe.n_density.values().len());
    for (j, (&nj, &hj)) in recipe
        .n_density
        .values()
        .iter()
        .zip(recipe.h.values())
        .enumerate()
    {
        if nj == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let denom = 1.0 + hj;
        if denom.norm() < SINGULAR_TOL {
            return Err(Error::SingularRecipe { index: j });
        }
        out.push(nj * recipe.c0 / denom);
    }
    ComplexGridField::new(recipe.domain().clone(), out)
}

/// Particle radius that makes `∫N dx` equal `m` for the general recipe of
/// `p`: since `N C⁰ = Re(p(1+h))` and `C⁰ = 4πa`, `a = ∫Re(p(1+h))dx/(4πm)`.
pub fn radius_for_target_count(p: &ComplexGridField, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("target particle count must be positive".into()));
    }
    let scale = p.max_abs();
    let vol = p.domain().cell_volume();
    let mut integral = 0.0;
    for (j, &pj) in p.values().iter().enumerate() {
        if pj.norm() <= 1e-14 * scale {
            continue;
        }
        if pj.im > PASSIVITY_TOL {
            return Err(Error::GainMedium {
                count: 1,
                first_index: j,
                first_coords: p.domain().coords(j),
                first_im: pj.im,
            });
        }
        if pj.re <= 0.0 {
            return Err(Error::Recipe(format!(
                "p = {pj} at cell {j} has Re p <= 0; cannot size particles"
            )));
        }
        let p2 = pj.im.min(0.0);
        integral += (pj.re + p2 * p2 / pj.re) * vol;
    }
    if integral <= 0.0 {
        return Err(Error::Recipe("p vanishes everywhere; no particles to size".into()));
    }
    Ok(integral / (4.0 * PI * m as f64))
}
