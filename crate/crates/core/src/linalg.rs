//! Dense and matrix-free complex linear algebra.
//!
//! Dense systems go through LAPACK (`zgetrf`/`zgetrs`); larger systems are
//! solved matrix-free with restarted GMRES so that translation-invariant
//! kernels never have to be materialized.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{FactorizeInto, LUFactorized, Solve};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Above this many unknowns a dense factorization is slower than the
/// convolution-based GMRES path on a single core (and the matrix alone costs
/// O(n^2) memory), so grid solvers switch to the iterative path.
pub const DIRECT_SOLVE_MAX_UNKNOWNS: usize = 8192;

/// Condition-number estimate beyond which a system is treated as resonant.
pub const COND_LIMIT: f64 = 1e12;

#[inline]
pub fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[inline]
pub fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `||a - b||_2 / ||b||_2`, with the convention that two zero vectors agree.
pub fn rel_l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let denom = norm2(b);
    if denom == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / denom
    }
}

/// Compensated summation (Kahan–Babuška / Neumaier variant, applied per
/// component); keeps deterministic reductions accurate under cancellation.
pub fn kahan_sum(values: impl Iterator<Item = Complex64>) -> Complex64 {
    fn step(s: &mut f64, c: &mut f64, v: f64) {
        let t = *s + v;
        if s.abs() >= v.abs() {
            *c += (*s - t) + v;
        } else {
            *c += (v - t) + *s;
        }
        *s = t;
    }
    let (mut sr, mut cr) = (0.0, 0.0);
    let (mut si, mut ci) = (0.0, 0.0);
    for v in values {
        step(&mut sr, &mut cr, v.re);
        step(&mut si, &mut ci, v.im);
    }
    Complex64::new(sr + cr, si + ci)
}

/// LU factorization of a dense complex matrix with a cached 1-norm for
/// condition estimation. Consumes the matrix (factorization is in place).
pub struct DenseLu {
    n: usize,
    norm1: f64,
    factors: LUFactorized<ndarray::OwnedRepr<Complex64>>,
}

impl DenseLu {
    pub fn factorize(a: Array2<Complex64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "matrix must be square");
        let norm1 = a
            .axis_iter(Axis(1))
            .map(|col| col.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let factors = a
            .factorize_into()
            .map_err(|e| Error::Solver(format!("LU factorization failed: {e}")))?;
        Ok(Self { n, norm1, factors })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn norm1(&self) -> f64 {
        self.norm1
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        assert_eq!(b.len(), self.n);
        let x = self
            .factors
            .solve_into(Array1::from(b.to_vec()))
            .map_err(|e| Error::Solver(format!("triangular solve failed: {e}")))?;
        Ok(x.into_raw_vec_and_offset().0)
    }

    /// Solve with the conjugate transpose, `A^H x = b`.
    pub fn solve_h(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        assert_eq!(b.len(), self.n);
        let x = self
            .factors
            .solve_h_into(Array1::from(b.to_vec()))
            .map_err(|e| Error::Solver(format!("triangular solve failed: {e}")))?;
        Ok(x.into_raw_vec_and_offset().0)
    }

    /// Hager-style 1-norm condition estimate using a few solves with `A`
    /// and `A^H`; deterministic and cheap next to the factorization.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0f64;
        let mut prev_j = usize::MAX;
        for _ in 0..5 {
            let y = match self.solve(&x) {
                Ok(y) => y,
                Err(_) => return f64::INFINITY,
            };
            est = est.max(y.iter().map(|v| v.norm()).sum());
            let xi: Vec<Complex64> = y
                .iter()
                .map(|v| {
                    let r = v.norm();
                    if r == 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        v / r
                    }
                })
                .collect();
            let z = match self.solve_h(&xi) {
                Ok(z) => z,
                Err(_) => return f64::INFINITY,
            };
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, 0.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            let zx: f64 = z.iter().zip(&x).map(|(zi, xi)| (zi.conj() * xi).re).sum();
            if zmax <= zx * (1.0 + 1e-12) || j == prev_j {
                break;
            }
            x = vec![Complex64::new(0.0, 0.0); n];
            x[j] = Complex64::new(1.0, 0.0);
            prev_j = j;
        }
        self.norm1 * est
    }
}

/// Matrix-free linear operator for the iterative solver.
pub trait LinearOp: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    pub rel_residual: f64,
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = (an * an + bn * bn).sqrt();
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
/// Fully deterministic for a fixed operator and right-hand side.
pub fn gmres(
    op: &dyn LinearOp,
    b: &[Complex64],
    rel_tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome> {
    let n = op.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![Complex64::new(0.0, 0.0); n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut total_iters = 0usize;

    loop {
        // true residual r = b - A x
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        if total_iters == 0 {
            r.copy_from_slice(b);
        } else {
            op.apply(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        }
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= rel_tol {
            return Ok(GmresOutcome {
                x,
                iterations: total_iters,
                rel_residual: rel,
            });
        }
        if total_iters >= max_iter {
            return Err(Error::Solver(format!(
                "gmres did not converge in {total_iters} iterations (relative residual {rel:.3e}); \
                 the system may be near-resonant"
            )));
        }

        let m = restart.min(max_iter - total_iters).max(1);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(beta, 0.0);

        let mut cols = 0usize;
        for j in 0..m {
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            op.apply(&basis[j], &mut w);
            for i in 0..=j {
                let hij = dotc(&basis[i], &w);
                h[i][j] = hij;
                for (wl, vl) in w.iter_mut().zip(&basis[i]) {
                    *wl -= hij * vl;
                }
            }
            let wn = norm2(&w);
            h[j + 1][j] = Complex64::new(wn, 0.0);

            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            h[j + 1][j] = Complex64::new(0.0, 0.0);
            g[j + 1] = -s.conj() * g[j];
            g[j] = c * g[j];

            total_iters += 1;
            cols = j + 1;
            let inner_rel = g[j + 1].norm() / bnorm;
            let breakdown = wn < 1e-30;
            if inner_rel <= rel_tol || breakdown || total_iters >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }

        // back substitution for the least-squares coefficients
        let mut y = vec![Complex64::new(0.0, 0.0); cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for l in (i + 1)..cols {
                s -= h[i][l] * y[l];
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::Solver("gmres breakdown: singular projected system".into()));
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xl, vl) in x.iter_mut().zip(&basis[j]) {
                *xl += yj * vl;
            }
        }
        // loop continues: the restart re-checks the true residual
    }
}
