//! Box domains, grid-sampled fields, and refraction/potential conversions.
//!
//! All fields live on a regular grid over an axis-aligned box; values are
//! samples at cell centers and linear indices run x-fastest:
//! `i = ix + nx * (iy + ny * iz)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{dist, is_unit, Vec3};

/// Axis-aligned box partitioned into a regular grid of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lo: Vec3,
    hi: Vec3,
    shape: [usize; 3],
}

impl BoxDomain {
    pub fn new(lo: Vec3, hi: Vec3, shape: [usize; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(hi[i] > lo[i]) {
                return Err(Error::InvalidArgument(format!(
                    "domain extent must be positive on axis {i}: lo = {}, hi = {}",
                    lo[i], hi[i]
                )));
            }
            if shape[i] == 0 {
                return Err(Error::InvalidArgument(format!(
                    "grid shape must be nonzero on axis {i}"
                )));
            }
        }
        Ok(Self { lo, hi, shape })
    }

    /// Unit cube `[0,1]^3`.
    pub fn unit_cube(shape: [usize; 3]) -> Result<Self> {
        Self::new([0.0; 3], [1.0; 3], shape)
    }

    pub fn lo(&self) -> Vec3 {
        self.lo
    }

    pub fn hi(&self) -> Vec3 {
        self.hi
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn extent(&self) -> Vec3 {
        [
            self.hi[0] - self.lo[0],
            self.hi[1] - self.lo[1],
            self.hi[2] - self.lo[2],
        ]
    }

    pub fn num_cells(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn cell_size(&self) -> Vec3 {
        let e = self.extent();
        [
            e[0] / self.shape[0] as f64,
            e[1] / self.shape[1] as f64,
            e[2] / self.shape[2] as f64,
        ]
    }

    pub fn cell_volume(&self) -> f64 {
        let c = self.cell_size();
        c[0] * c[1] * c[2]
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1] * e[2]
    }

    pub fn diameter(&self) -> f64 {
        dist(self.lo, self.hi)
    }

    pub fn center(&self) -> Vec3 {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.5 * (self.lo[2] + self.hi[2]),
        ]
    }

    #[inline]
    pub fn index(&self, c: [usize; 3]) -> usize {
        debug_assert!(c[0] < self.shape[0] && c[1] < self.shape[1] && c[2] < self.shape[2]);
        c[0] + self.shape[0] * (c[1] + self.shape[1] * c[2])
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let nx = self.shape[0];
        let ny = self.shape[1];
        [i % nx, (i / nx) % ny, i / (nx * ny)]
    }

    #[inline]
    pub fn cell_center(&self, i: usize) -> Vec3 {
        let c = self.coords(i);
        let s = self.cell_size();
        [
            self.lo[0] + (c[0] as f64 + 0.5) * s[0],
            self.lo[1] + (c[1] as f64 + 0.5) * s[1],
            self.lo[2] + (c[2] as f64 + 0.5) * s[2],
        ]
    }

    pub fn cell_centers(&self) -> Vec<Vec3> {
        (0..self.num_cells()).map(|i| self.cell_center(i)).collect()
    }

    pub fn contains(&self, x: Vec3) -> bool {
        (0..3).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    /// Index of the cell containing `x` (clamped to the grid at the boundary).
    pub fn cell_of(&self, x: Vec3) -> usize {
        let s = self.cell_size();
        let mut c = [0usize; 3];
        for i in 0..3 {
            let f = ((x[i] - self.lo[i]) / s[i]).floor();
            c[i] = (f.max(0.0) as usize).min(self.shape[i] - 1);
        }
        self.index(c)
    }
}

/// Complex scalar field sampled at the cell centers of a [`BoxDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridField {
    domain: BoxDomain,
    values: Vec<Complex64>,
}

impl ComplexGridField {
    pub fn new(domain: BoxDomain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.num_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values but the grid has {} cells",
                values.len(),
                domain.num_cells()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: BoxDomain, value: Complex64) -> Self {
        let n = domain.num_cells();
        Self {
            domain,
            values: vec![value; n],
        }
    }

    pub fn from_fn(domain: BoxDomain, f: impl Fn(Vec3) -> Complex64) -> Self {
        let values = (0..domain.num_cells())
            .map(|i| f(domain.cell_center(i)))
            .collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            domain: self.domain.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::GridMismatch {
                expected: self.domain.shape(),
                got: other.domain.shape(),
            });
        }
        Ok(())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            domain: self.domain.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Trapezoid-free cell-sum integral: `sum(values) * cell_volume`.
    pub fn integrate(&self) -> Complex64 {
        let s: Complex64 = self.values.iter().sum();
        s * self.domain.cell_volume()
    }
}

/// Real scalar field on a grid; used for particle number densities.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGridField {
    domain: BoxDomain,
    values: Vec<f64>,
}

impl RealGridField {
    pub fn new(domain: BoxDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values but the grid has {} cells",
                values.len(),
                domain.num_cells()
            )));
        }
        Ok(Self { domain, values })
    }

    pub fn constant(domain: BoxDomain, value: f64) -> Self {
        let n = domain.num_cells();
        Self {
            domain,
            values: vec![value; n],
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_volume()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub const ALPHA_UNIT_TOL: f64 = 1e-12;

/// Scattering scenario: domain, wavenumber, incident direction, and the
/// background refraction coefficient `n0(x)` (`= 1` outside the domain).
#[derive(Debug, Clone)]
pub struct MediumSpec {
    domain: BoxDomain,
    k: f64,
    alpha: Vec3,
    n0: ComplexGridField,
}

impl MediumSpec {
    pub fn new(domain: BoxDomain, k: f64, alpha: Vec3, n0: ComplexGridField) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
        }
        if !is_unit(alpha, ALPHA_UNIT_TOL) {
            return Err(Error::InvalidArgument(format!(
                "incident direction must be a unit vector, |alpha| = {}",
                crate::vec3::norm(alpha)
            )));
        }
        if *n0.domain() != domain {
            return Err(Error::GridMismatch {
                expected: domain.shape(),
                got: n0.domain().shape(),
            });
        }
        Ok(Self { domain, k, alpha, n0 })
    }

    /// Vacuum background (`n0 = 1`) on the given domain.
    pub fn vacuum(domain: BoxDomain, k: f64, alpha: Vec3) -> Result<Self> {
        let n0 = ComplexGridField::constant(domain.clone(), Complex64::new(1.0, 0.0));
        Self::new(domain, k, alpha, n0)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> Vec3 {
        self.alpha
    }

    pub fn n0(&self) -> &ComplexGridField {
        &self.n0
    }

    /// Background potential `q0 = k^2 (1 - n0)`.
    pub fn q0(&self) -> ComplexGridField {
        potential_from_refraction(&self.n0, self.k)
    }

    /// True when `n0` is identically 1, so `q0` vanishes and the background
    /// Green's function is the free-space kernel.
    pub fn is_vacuum(&self) -> bool {
        self.n0.values().iter().all(|v| v.re == 1.0 && v.im == 0.0)
    }

    /// Incident plane wave `e^{i k alpha . x}`.
    pub fn incident(&self, x: Vec3) -> Complex64 {
        Complex64::from_polar(1.0, self.k * crate::vec3::dot(self.alpha, x))
    }
}

/// `q = k^2 (1 - n)`.
pub fn potential_from_refraction(n: &ComplexGridField, k: f64) -> ComplexGridField {
    let k2 = k * k;
    n.map(|v| (Complex64::new(1.0, 0.0) - v) * k2)
}

/// `n = 1 - q / k^2`, the inverse of [`potential_from_refraction`].
pub fn refraction_from_potential(q: &ComplexGridField, k: f64) -> ComplexGridField {
    let k2 = k * k;
    q.map(|v| Complex64::new(1.0, 0.0) - v / k2)
}

/// Perturbation `p = q - q0 = k^2 (n0 - n)` that turns the background `n0`
/// into the target `n`.
pub fn p_from_target(n0: &ComplexGridField, n: &ComplexGridField, k: f64) -> Result<ComplexGridField> {
    let k2 = k * k;
    n0.zip_map(n, |a, b| (a - b) * k2)
}

pub const PASSIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PassivityViolation {
    pub index: usize,
    pub coords: [usize; 3],
    pub im: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PassivityReport {
    pub violations: Vec<PassivityViolation>,
}

impl PassivityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::GainMedium {
                count: self.violations.len(),
                first_index: first.index,
                first_coords: first.coords,
                first_im: first.im,
            }),
        }
    }
}

/// A passive (absorbing or lossless) perturbation needs `Im p <= 0`
/// everywhere; positive imaginary parts describe gain and break uniqueness.
pub fn validate_passivity(p: &ComplexGridField) -> PassivityReport {
    let mut violations = Vec::new();
    for (i, v) in p.values().iter().enumerate() {
        if v.im > PASSIVITY_TOL {
            violations.push(PassivityViolation {
                index: i,
                coords: p.domain().coords(i),
                im: v.im,
            });
        }
    }
    PassivityReport { violations }
}
