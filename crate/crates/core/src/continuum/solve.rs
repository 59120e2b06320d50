//! Solvers for the volume (Lippmann-Schwinger) integral equation.

use num_complex::Complex64;

use super::farfield::{far_field, FarFieldPattern};
use super::grid::{KernelTable, LsGrid};
use crate::error::{Error, Result};
use crate::greens::PlaneWave;
use crate::linalg::{
    gmres, rel_l2_diff, DenseLu, LinearOp, COND_LIMIT, DIRECT_SOLVE_MAX_UNKNOWNS,
};
use crate::medium::{ComplexGridField, MediumSpec};
use crate::vec3::Vec3;

/// Relative residual the returned grid solution must satisfy.
pub const LS_RESIDUAL_TOL: f64 = 1e-8;
/// Iterative target, a notch tighter than the contract above.
const GMRES_TOL: f64 = 1e-9;
const GMRES_RESTART: usize = 100;
const GMRES_MAX_ITER: usize = 800;

#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub unknowns: usize,
    pub method: &'static str,
    pub iterations: Option<usize>,
    pub rel_residual: f64,
    pub condition_estimate: Option<f64>,
}

/// Grid solution of the volume integral equation plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub u: ComplexGridField,
    pub diagnostics: SolveDiagnostics,
}

/// The discretized operator `I + T diag(q)` with its factorization when the
/// grid is small enough for a direct solve.
pub(crate) struct GridSystem {
    grid: LsGrid,
    table: KernelTable,
    q: Vec<Complex64>,
    lu: Option<DenseLu>,
    cond: Option<f64>,
}

impl GridSystem {
    pub fn build(q: &ComplexGridField, k: f64) -> Result<Self> {
        let grid = LsGrid::new(q.domain(), k)?;
        let table = KernelTable::build(&grid);
        let n = q.domain().num_cells();
        let (lu, cond) = if n <= DIRECT_SOLVE_MAX_UNKNOWNS {
            let a = table.assemble_dense(q.values());
            let lu = DenseLu::factorize(a)?;
            let cond = lu.condition_estimate();
            if !cond.is_finite() || cond > COND_LIMIT {
                return Err(Error::Resonance {
                    cond,
                    limit: COND_LIMIT,
                });
            }
            (Some(lu), Some(cond))
        } else {
            (None, None)
        };
        Ok(Self {
            grid,
            table,
            q: q.values().to_vec(),
            lu,
            cond,
        })
    }

    pub fn grid(&self) -> &LsGrid {
        &self.grid
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<(Vec<Complex64>, SolveDiagnostics)> {
        let n = b.len();
        assert_eq!(n, self.q.len());
        let (x, method, iterations) = match &self.lu {
            Some(lu) => (lu.solve(b)?, "dense-lu", None),
            None => {
                let out = gmres(self, b, GMRES_TOL, GMRES_RESTART, GMRES_MAX_ITER)?;
                (out.x, "gmres", Some(out.iterations))
            }
        };
        let mut ax = vec![Complex64::new(0.0, 0.0); n];
        self.apply(&x, &mut ax);
        let rel = rel_l2_diff(&ax, b);
        if rel > LS_RESIDUAL_TOL {
            return Err(Error::Solver(format!(
                "grid solution residual {rel:.3e} exceeds {LS_RESIDUAL_TOL:.1e}"
            )));
        }
        Ok((
            x,
            SolveDiagnostics {
                unknowns: n,
                method,
                iterations,
                rel_residual: rel,
                condition_estimate: self.cond,
            },
        ))
    }
}

impl LinearOp for GridSystem {
    fn dim(&self) -> usize {
        self.q.len()
    }

    /// `y = x + T (q .* x)`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let qx: Vec<Complex64> = self.q.iter().zip(x).map(|(a, b)| a * b).collect();
        self.table.convolve(&qx, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += xi;
        }
    }
}

/// Solve `U(x) = e^{ik alpha . x} - ∫_D g(x,y) q(y) U(y) dy` by cell-center
/// collocation on the grid `q` lives on.
///
/// `q` is the full potential: with `q = q0 + p` this is the one-kernel form
/// of the scattering problem for the perturbed medium, so no background
/// Green's function is ever needed.
pub fn solve_ls(q: &ComplexGridField, medium: &MediumSpec) -> Result<LsSolution> {
    if q.domain() != medium.domain() {
        return Err(Error::GridMismatch {
            expected: medium.domain().shape(),
            got: q.domain().shape(),
        });
    }
    let sys = GridSystem::build(q, medium.k())?;
    let b: Vec<Complex64> = (0..q.domain().num_cells())
        .map(|i| medium.incident(q.domain().cell_center(i)))
        .collect();
    let (u, diagnostics) = sys.solve(&b)?;
    Ok(LsSolution {
        u: ComplexGridField::new(q.domain().clone(), u)?,
        diagnostics,
    })
}

/// Background scattering solution `u0` and its far-field pattern `A0` for
/// the potential `q0`. For a vacuum background this short-circuits to the
/// plane wave with `A0 = 0`, no solve.
pub fn solve_u0(
    q0: &ComplexGridField,
    medium: &MediumSpec,
    betas: &[Vec3],
) -> Result<(LsSolution, FarFieldPattern)> {
    if q0.is_zero() {
        let u = ComplexGridField::from_fn(medium.domain().clone(), |x| medium.incident(x));
        let sol = LsSolution {
            u,
            diagnostics: SolveDiagnostics {
                unknowns: medium.domain().num_cells(),
                method: "plane-wave",
                iterations: None,
                rel_residual: 0.0,
                condition_estimate: None,
            },
        };
        let a0 = FarFieldPattern::zeros(medium.alpha(), betas.to_vec())?;
        return Ok((sol, a0));
    }
    let sol = solve_ls(q0, medium)?;
    let a0 = far_field(
        &sol.u,
        q0,
        &PlaneWave::new(medium.k()),
        None,
        betas,
        medium.alpha(),
    )?;
    Ok((sol, a0))
}

/// Evaluate the solved field anywhere via the volume representation
/// `u(x) = e^{ik alpha . x} - Σ_j g(x, y_j) q_j U_j vol`.
///
/// Valid on and off the grid; for `x` inside the cell of some `y_j` the
/// singular term is replaced by the self-cell integral.
pub fn exterior_field(
    u: &ComplexGridField,
    q: &ComplexGridField,
    medium: &MediumSpec,
    x: Vec3,
) -> Result<Complex64> {
    u.check_same_grid(q)?;
    if u.domain() != medium.domain() {
        return Err(Error::GridMismatch {
            expected: medium.domain().shape(),
            got: u.domain().shape(),
        });
    }
    let domain = u.domain();
    let grid = LsGrid::new(domain, medium.k())?;
    let sum = crate::linalg::kahan_sum(
        (0..domain.num_cells())
            .map(|j| grid.point_weight(x, j) * q.values()[j] * u.values()[j]),
    );
    Ok(medium.incident(x) - sum)
}
