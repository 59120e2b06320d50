//! Self-cell quadrature weight: the integral of the singular Helmholtz
//! kernel over the grid cell containing the singularity.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_01;
use crate::vec3::Vec3;

/// `∫_cell e^{ik|y|} / (4π|y|) dy` over a cube of side `cell_size` centered
/// at the singularity.
///
/// The static part `∫ 1/(4π|y|)` is evaluated in closed form; the smooth
/// remainder `∫ (e^{ik|y|} - 1)/(4π|y|)` by Gauss quadrature after a Duffy
/// transform. Requires `k * cell_size < 1`.
pub fn self_cell_weight(cell_size: f64, k: f64) -> Result<Complex64> {
    if !(cell_size > 0.0 && cell_size.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cell size must be positive, got {cell_size}"
        )));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("wavenumber must be >= 0, got {k}")));
    }
    let kh = k * cell_size;
    if kh >= 1.0 {
        return Err(Error::Resolution { kh });
    }
    Ok(self_weight_box([cell_size; 3], k))
}

/// Same integral over a general axis-aligned box centered at the origin.
pub(crate) fn self_weight_box(dims: Vec3, k: f64) -> Complex64 {
    Complex64::new(static_box_potential(dims), 0.0) + oscillatory_correction(dims, k)
}

/// `∫_box 1/(4π|y|) dy` for a box centered at the origin, via the classical
/// closed-form antiderivative of `1/r` (the box splits into 8 congruent
/// corner octants).
pub(crate) fn static_box_potential(dims: Vec3) -> f64 {
    8.0 * corner_box_inv_r(dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0) / (4.0 * PI)
}

/// `∫_0^a ∫_0^b ∫_0^c 1/|y| dy`.
fn corner_box_inv_r(a: f64, b: f64, c: f64) -> f64 {
    // F is an antiderivative of 1/r; terms with a vanishing coefficient are
    // skipped so the corner limits are well defined.
    let f = |x: f64, y: f64, z: f64| -> f64 {
        let r = (x * x + y * y + z * z).sqrt();
        let mut s = 0.0;
        if y * z != 0.0 {
            s += y * z * (x + r).ln();
        }
        if x * z != 0.0 {
            s += x * z * (y + r).ln();
        }
        if x * y != 0.0 {
            s += x * y * (z + r).ln();
        }
        if x != 0.0 {
            s -= 0.5 * x * x * (y * z).atan2(x * r);
        }
        if y != 0.0 {
            s -= 0.5 * y * y * (x * z).atan2(y * r);
        }
        if z != 0.0 {
            s -= 0.5 * z * z * (x * y).atan2(z * r);
        }
        s
    };
    f(a, b, c) - f(0.0, b, c) - f(a, 0.0, c) - f(a, b, 0.0)
        + f(a, 0.0, 0.0)
        + f(0.0, b, 0.0)
        + f(0.0, 0.0, c)
        - f(0.0, 0.0, 0.0)
}

/// `∫_box (e^{ik|y|} - 1)/(4π|y|) dy`, box centered at the origin.
///
/// The integrand is bounded but has a |y|-type kink at the origin, so each
/// corner octant is split into three Duffy pyramids on which it is smooth.
fn oscillatory_correction(dims: Vec3, k: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let half = [dims[0] / 2.0, dims[1] / 2.0, dims[2] / 2.0];
    // all 8 octants of a centered box are congruent
    8.0 * octant_correction(half, k)
}

fn octant_correction(e: Vec3, k: f64) -> Complex64 {
    let (nodes, weights) = gauss_legendre_01(12);
    let jac = e[0] * e[1] * e[2];
    let mut total = Complex64::new(0.0, 0.0);
    // pyramid `axis`: u runs along `axis`, the other coordinates are u*t, u*s
    for axis in 0..3 {
        let (ea, eb, ec) = (e[axis], e[(axis + 1) % 3], e[(axis + 2) % 3]);
        for (ti, &t) in nodes.iter().enumerate() {
            for (si, &s) in nodes.iter().enumerate() {
                let rho = (ea * ea + (eb * t) * (eb * t) + (ec * s) * (ec * s)).sqrt();
                let wts = weights[ti] * weights[si];
                let mut inner = Complex64::new(0.0, 0.0);
                for (ui, &u) in nodes.iter().enumerate() {
                    // (e^{ik u rho} - 1)/(4π u rho) * u^2, written to avoid
                    // cancellation for small arguments
                    let phase = k * u * rho;
                    let em1 = Complex64::new((phase / 2.0).sin().powi(2) * -2.0, phase.sin());
                    inner += weights[ui] * u * em1;
                }
                total += wts * inner / (4.0 * PI * rho);
            }
        }
    }
    total * jac
}
