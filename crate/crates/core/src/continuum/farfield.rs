//! Far-field amplitudes of the continuum solution.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::greens::BackgroundField;
use crate::linalg::kahan_sum;
use crate::medium::ComplexGridField;
use crate::vec3::{dist, is_unit, neg, Vec3};

/// Sampled scattering amplitude `A(beta, alpha)` over a direction set.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    pub alpha: Vec3,
    pub betas: Vec<Vec3>,
    pub amplitudes: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(alpha: Vec3, betas: Vec<Vec3>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if betas.len() != amplitudes.len() {
            return Err(Error::InvalidArgument(
                "one amplitude per direction required".into(),
            ));
        }
        for b in &betas {
            if !is_unit(*b, 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "far-field direction must be a unit vector, got {b:?}"
                )));
            }
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite far-field amplitude".into()));
        }
        Ok(Self {
            alpha,
            betas,
            amplitudes,
        })
    }

    pub fn zeros(alpha: Vec3, betas: Vec<Vec3>) -> Result<Self> {
        let n = betas.len();
        Self::new(alpha, betas, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Relative L2 distance to another pattern over the same directions.
    pub fn rel_l2_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "patterns sample different direction sets");
        for (a, b) in self.betas.iter().zip(&other.betas) {
            assert!(dist(*a, *b) < 1e-12, "patterns sample different direction sets");
        }
        crate::linalg::rel_l2_diff(&self.amplitudes, &other.amplitudes)
    }
}

/// Scattering amplitude of the perturbation: for each direction,
/// `A1(beta) = -(1/4π) Σ_cells u0(y, -beta) p(y) U(y) vol`, returned as
/// `A = A0 + A1` when a background pattern is supplied.
///
/// With a vacuum background pass a plane-wave evaluator and `a0 = None`.
pub fn far_field(
    u: &ComplexGridField,
    p: &ComplexGridField,
    background: &dyn BackgroundField,
    a0: Option<&FarFieldPattern>,
    betas: &[Vec3],
    alpha: Vec3,
) -> Result<FarFieldPattern> {
    u.check_same_grid(p)?;
    for b in betas {
        if !is_unit(*b, 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "far-field direction must be a unit vector, got {b:?}"
            )));
        }
    }
    if let Some(a0) = a0 {
        if a0.len() != betas.len()
            || a0
                .betas
                .iter()
                .zip(betas)
                .any(|(a, b)| dist(*a, *b) >= 1e-12)
        {
            return Err(Error::InvalidArgument(
                "background pattern sampled on a different direction set".into(),
            ));
        }
    }

    let domain = u.domain();
    let vol = domain.cell_volume();
    let centers = domain.cell_centers();
    let amplitudes: Vec<Complex64> = betas
        .par_iter()
        .enumerate()
        .map(|(bi, beta)| {
            let mb = neg(*beta);
            let a1 = kahan_sum(centers.iter().enumerate().map(|(j, y)| {
                background.eval(*y, mb) * p.values()[j] * u.values()[j]
            })) * Complex64::new(-vol / (4.0 * PI), 0.0);
            match a0 {
                Some(a0) => a0.amplitudes[bi] + a1,
                None => a1,
            }
        })
        .collect();
    FarFieldPattern::new(alpha, betas.to_vec(), amplitudes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::PlaneWave;
    use crate::medium::BoxDomain;

    #[test]
    fn zero_perturbation_returns_background_pattern() {
        let d = BoxDomain::unit_cube([4, 4, 4]).unwrap();
        let u = ComplexGridField::constant(d.clone(), Complex64::new(1.0, 0.5));
        let p = ComplexGridField::constant(d, Complex64::new(0.0, 0.0));
        let betas = crate::directions::cube_directions();
        let mut a0 = FarFieldPattern::zeros([0.0, 0.0, 1.0], betas.clone()).unwrap();
        a0.amplitudes[3] = Complex64::new(0.25, -0.5);
        let a = far_field(&u, &p, &PlaneWave::new(1.0), Some(&a0), &betas, [0.0, 0.0, 1.0]).unwrap();
        for (got, want) in a.amplitudes.iter().zip(&a0.amplitudes) {
            assert_eq!(got, want);
        }
    }

    #[test]
    fn grid_mismatch_is_configuration_error() {
        let d1 = BoxDomain::unit_cube([4, 4, 4]).unwrap();
        let d2 = BoxDomain::unit_cube([5, 5, 5]).unwrap();
        let u = ComplexGridField::constant(d1, Complex64::new(1.0, 0.0));
        let p = ComplexGridField::constant(d2, Complex64::new(1.0, 0.0));
        let betas = vec![[0.0, 0.0, 1.0]];
        let err = far_field(&u, &p, &PlaneWave::new(1.0), None, &betas, [0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::GridMismatch { .. }));
    }

    #[test]
    fn non_unit_direction_rejected() {
        let d = BoxDomain::unit_cube([2, 2, 2]).unwrap();
        let u = ComplexGridField::constant(d.clone(), Complex64::new(1.0, 0.0));
        let p = ComplexGridField::constant(d, Complex64::new(1.0, 0.0));
        let betas = vec![[0.0, 0.0, 1.1]];
        assert!(far_field(&u, &p, &PlaneWave::new(1.0), None, &betas, [0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn forward_amplitude_of_uniform_weak_cube() {
        // Born limit: A1(alpha) = -(q/4π)|D| for beta = alpha, U ≈ u0, since
        // u0(y,-beta)·u0(y,alpha) = 1 pointwise
        let d = BoxDomain::unit_cube([8, 8, 8]).unwrap();
        let k = 1.0;
        let alpha = [0.0, 0.0, 1.0];
        let q = 1e-4;
        let u = ComplexGridField::from_fn(d.clone(), |x| {
            Complex64::from_polar(1.0, k * x[2])
        });
        let p = ComplexGridField::constant(d, Complex64::new(q, 0.0));
        let a = far_field(&u, &p, &PlaneWave::new(k), None, &[alpha], alpha).unwrap();
        let want = -q / (4.0 * PI);
        assert!((a.amplitudes[0].re - want).abs() < 1e-9);
        assert!(a.amplitudes[0].im.abs() < 1e-9);
    }
}
