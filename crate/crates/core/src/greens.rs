//! Free-space Helmholtz kernel and the background Green's function of the
//! inhomogeneous medium, with its near- and far-field asymptotics.

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use crate::continuum::GridSystem;
use crate::error::{Error, Result};
use crate::linalg::DIRECT_SOLVE_MAX_UNKNOWNS;
use crate::medium::ComplexGridField;
use crate::vec3::{dist, dot, neg, Vec3};

/// Pairs closer than this are treated as coincident (kernel singularity).
pub const MIN_SEPARATION: f64 = 1e-14;

/// `g(x,y) = e^{ik|x-y|} / (4π|x-y|)`.
pub fn free_space_g(x: Vec3, y: Vec3, k: f64) -> Result<Complex64> {
    let r = dist(x, y);
    if r < MIN_SEPARATION {
        return Err(Error::Singularity);
    }
    Ok(Complex64::from_polar(1.0 / (4.0 * PI * r), k * r))
}

/// Helmholtz kernel bound to a wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    pub k: f64,
}

impl Kernel {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn eval(&self, x: Vec3, y: Vec3) -> Result<Complex64> {
        free_space_g(x, y, self.k)
    }
}

/// Background scattering solution `u0(x, dir)` for a unit plane wave from
/// direction `dir` — the evaluator plugged into far-field factors.
pub trait BackgroundField: Sync {
    fn eval(&self, x: Vec3, dir: Vec3) -> Complex64;
}

/// Vacuum background: `u0` is the incident plane wave itself.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub k: f64,
}

impl PlaneWave {
    pub fn new(k: f64) -> Self {
        Self { k }
    }
}

impl BackgroundField for PlaneWave {
    fn eval(&self, x: Vec3, dir: Vec3) -> Complex64 {
        Complex64::from_polar(1.0, self.k * dot(dir, x))
    }
}

/// Far-field factor of the background Green's function: the coefficient
/// mapping a point-source strength at `y` to its contribution to the
/// amplitude observed in direction `beta`. Equals `u0(y, -beta)/(4π)`;
/// `e^{-ik beta . y}/(4π)` in vacuum.
pub fn far_field_factor(y: Vec3, beta: Vec3, background: &dyn BackgroundField) -> Complex64 {
    background.eval(y, neg(beta)) / (4.0 * PI)
}

/// Green's function `G` of the background medium,
/// `G(x,y) = g(x,y) - ∫_D g(x,z) q0(z) G(z,y) dz`,
/// discretized on the grid `q0` lives on.
///
/// `G = g` exactly when `q0 ≡ 0` (no solves). Otherwise each distinct source
/// point costs one grid solve, cached and reused; this is a verification
/// tool for small grids, not a production path — the solvers avoid `G`
/// entirely via the one-kernel formulation.
pub struct BackgroundGreen {
    q0: ComplexGridField,
    k: f64,
    vacuum: bool,
    system: Option<GridSystem>,
    /// G(z_j, y) on the grid per source point y, keyed by y's bit pattern.
    columns: RwLock<HashMap<[u64; 3], Arc<Vec<Complex64>>>>,
    /// grid solutions u0(z_j, dir) per incident direction.
    background: RwLock<HashMap<[u64; 3], Arc<Vec<Complex64>>>>,
}

fn point_key(x: Vec3) -> [u64; 3] {
    [x[0].to_bits(), x[1].to_bits(), x[2].to_bits()]
}

impl BackgroundGreen {
    pub fn new(q0: &ComplexGridField, k: f64) -> Result<Self> {
        let vacuum = q0.is_zero();
        let system = if vacuum {
            None
        } else {
            let n = q0.domain().num_cells();
            if n > DIRECT_SOLVE_MAX_UNKNOWNS {
                return Err(Error::InvalidArgument(format!(
                    "background Green's function supports verification grids up to \
                     {DIRECT_SOLVE_MAX_UNKNOWNS} cells, got {n}"
                )));
            }
            Some(GridSystem::build(q0, k)?)
        };
        Ok(Self {
            q0: q0.clone(),
            k,
            vacuum,
            system,
            columns: RwLock::new(HashMap::new()),
            background: RwLock::new(HashMap::new()),
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn is_vacuum(&self) -> bool {
        self.vacuum
    }

    /// Kernel weight for a source at `y` seen from grid cell `j`: the plain
    /// kernel times cell volume, except the self-cell integral when `y`
    /// falls into cell `j` itself.
    fn source_weights(&self, y: Vec3) -> Vec<Complex64> {
        let domain = self.q0.domain();
        let vol = domain.cell_volume();
        let grid = self
            .system
            .as_ref()
            .expect("source_weights used on non-vacuum background")
            .grid();
        (0..domain.num_cells())
            .map(|j| grid.point_weight(y, j) / vol)
            .collect()
    }

    /// `G(z_j, y)` for every grid cell `j`, solving
    /// `(I + T diag(q0)) G_col = ḡ(., y)` once per distinct `y`.
    fn column(&self, y: Vec3) -> Result<Arc<Vec<Complex64>>> {
        let key = point_key(y);
        if let Some(col) = self.columns.read().unwrap().get(&key) {
            return Ok(col.clone());
        }
        let rhs = self.source_weights(y);
        let sys = self.system.as_ref().expect("column used on vacuum background");
        let (col, _) = sys.solve(&rhs)?;
        let col = Arc::new(col);
        self.columns
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| col.clone());
        Ok(col)
    }

    /// Grid samples of `u0(., dir)`, one solve per distinct direction.
    fn background_grid(&self, dir: Vec3) -> Result<Arc<Vec<Complex64>>> {
        let key = point_key(dir);
        if let Some(u) = self.background.read().unwrap().get(&key) {
            return Ok(u.clone());
        }
        let sys = self.system.as_ref().expect("background_grid used on vacuum background");
        let domain = self.q0.domain();
        let rhs: Vec<Complex64> = (0..domain.num_cells())
            .map(|j| Complex64::from_polar(1.0, self.k * dot(dir, domain.cell_center(j))))
            .collect();
        let (u, _) = sys.solve(&rhs)?;
        let u = Arc::new(u);
        self.background
            .write()
            .unwrap()
            .entry(key)
            .or_insert_with(|| u.clone());
        Ok(u)
    }

    /// `G(x, y)`; exact `g` for a vacuum background.
    pub fn eval(&self, x: Vec3, y: Vec3) -> Result<Complex64> {
        if self.vacuum {
            return free_space_g(x, y, self.k);
        }
        if dist(x, y) < MIN_SEPARATION {
            return Err(Error::Singularity);
        }
        let col = self.column(y)?;
        let weights = self.source_weights(x);
        let vol = self.q0.domain().cell_volume();
        let correction = crate::linalg::kahan_sum(
            weights
                .iter()
                .zip(self.q0.values())
                .zip(col.iter())
                .map(|((w, q0), g)| w * q0 * g),
        ) * vol;
        Ok(free_space_g(x, y, self.k)? - correction)
    }

    /// Background scattering solution `u0(x, dir)` evaluated anywhere via
    /// the volume representation (exact plane wave in vacuum).
    pub fn u0(&self, x: Vec3, dir: Vec3) -> Result<Complex64> {
        let incident = Complex64::from_polar(1.0, self.k * dot(dir, x));
        if self.vacuum {
            return Ok(incident);
        }
        // at a grid center the stored solution is the collocation value
        let domain = self.q0.domain();
        let u = self.background_grid(dir)?;
        let j = domain.cell_of(x);
        if domain.contains(x) && dist(domain.cell_center(j), x) < 1e-13 {
            return Ok(u[j]);
        }
        let weights = self.source_weights(x);
        let vol = domain.cell_volume();
        let sum = crate::linalg::kahan_sum(
            weights
                .iter()
                .zip(self.q0.values())
                .zip(u.iter())
                .map(|((w, q0), uj)| w * q0 * uj),
        ) * vol;
        Ok(incident - sum)
    }

    /// Column `j` of the discretized background-Green operator:
    /// `w_i ≈ ∫_{cell_j} G(z_i, y) dy`, the weights a collocation scheme
    /// based on `G` would use.
    pub fn weight_column(&self, j: usize) -> Result<Vec<Complex64>> {
        let domain = self.q0.domain();
        let vol = domain.cell_volume();
        let y = domain.cell_center(j);
        if self.vacuum {
            // plain kernel weights with the singular cell handled exactly
            let grid = crate::continuum::LsGrid::new(domain, self.k)?;
            return Ok((0..domain.num_cells())
                .map(|i| {
                    if i == j {
                        grid.self_cell_integral()
                    } else {
                        free_space_g(domain.cell_center(i), y, self.k).unwrap() * vol
                    }
                })
                .collect());
        }
        let col = self.column(y)?;
        Ok(col.iter().map(|g| g * vol).collect())
    }
}

impl BackgroundField for BackgroundGreen {
    fn eval(&self, x: Vec3, dir: Vec3) -> Complex64 {
        self.u0(x, dir)
            .expect("background field evaluation failed")
    }
}
