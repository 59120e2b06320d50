//! Collocation grid for the volume integral equation and the
//! translation-invariant kernel table that drives its matrix action.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::weight::self_weight_box;
use crate::error::{Error, Result};
use crate::medium::BoxDomain;

/// Cell-center collocation grid with the precomputed singular self-cell
/// integral. Construction fails when the grid cannot resolve the wavelength
/// (`k * cell_size >= 1`).
#[derive(Debug, Clone)]
pub struct LsGrid {
    domain: BoxDomain,
    k: f64,
    self_weight: Complex64,
}

impl LsGrid {
    pub fn new(domain: &BoxDomain, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("wavenumber must be positive, got {k}")));
        }
        let cell = domain.cell_size();
        let kh = k * cell.iter().cloned().fold(0.0, f64::max);
        if kh >= 1.0 {
            return Err(Error::Resolution { kh });
        }
        let self_weight = self_weight_box(cell, k);
        debug_assert!(self_weight.re > 0.0 && self_weight.im.abs() < self_weight.re);
        Ok(Self {
            domain: domain.clone(),
            k,
            self_weight,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `∫_cell g_k(x_c, y) dy` over the cell containing the collocation
    /// point; the diagonal entry of the discretized integral operator is
    /// this instead of the (singular) kernel value times the cell volume.
    pub fn self_cell_integral(&self) -> Complex64 {
        self.self_weight
    }

    /// Collocation weight of grid cell `l` for an arbitrary point `x`:
    /// `g(x, z_l)·vol`, or the self-cell integral when `x` falls within half
    /// a cell of `z_l` (where the plain kernel would be near-singular).
    pub fn point_weight(&self, x: crate::vec3::Vec3, l: usize) -> Complex64 {
        let zl = self.domain.cell_center(l);
        let near = 0.5 * self.domain.cell_size().iter().cloned().fold(f64::INFINITY, f64::min);
        if crate::vec3::dist(x, zl) < near {
            self.self_weight
        } else {
            crate::greens::free_space_g(x, zl, self.k).expect("separation checked")
                * self.domain.cell_volume()
        }
    }
}

/// Kernel values for every lattice offset between two grid cells.
///
/// On a regular grid `g(x_i, x_j)` depends only on `i - j`, so the whole
/// matrix is described by a `(2nx-1)(2ny-1)(2nz-1)` table: O(n) storage for
/// the O(n^2) operator, and the basis of both the dense assembly and the
/// matrix-free product.
pub(crate) struct KernelTable {
    shape: [usize; 3],
    data: Vec<Complex64>,
}

impl KernelTable {
    pub fn build(grid: &LsGrid) -> Self {
        let shape = grid.domain().shape();
        let cell = grid.domain().cell_size();
        let vol = grid.domain().cell_volume();
        let k = grid.k();
        let self_weight = grid.self_cell_integral();
        let (sx, sy, sz) = (2 * shape[0] - 1, 2 * shape[1] - 1, 2 * shape[2] - 1);
        let mut data = vec![Complex64::new(0.0, 0.0); sx * sy * sz];
        data.par_chunks_mut(sx)
            .enumerate()
            .for_each(|(row, chunk)| {
                let dy = (row % sy) as i64 - (shape[1] as i64 - 1);
                let dz = (row / sy) as i64 - (shape[2] as i64 - 1);
                for (col, entry) in chunk.iter_mut().enumerate() {
                    let dx = col as i64 - (shape[0] as i64 - 1);
                    if dx == 0 && dy == 0 && dz == 0 {
                        *entry = self_weight;
                    } else {
                        let d = [dx as f64 * cell[0], dy as f64 * cell[1], dz as f64 * cell[2]];
                        let r = crate::vec3::norm(d);
                        *entry = Complex64::from_polar(vol / (4.0 * PI * r), k * r);
                    }
                }
            });
        Self { shape, data }
    }

    #[inline]
    fn stride(&self) -> (usize, usize, usize) {
        (
            2 * self.shape[0] - 1,
            2 * self.shape[1] - 1,
            2 * self.shape[2] - 1,
        )
    }

    /// Kernel weight for target cell `i` and source cell `j` given by grid
    /// offsets `d* = i* - j*`.
    #[cfg(test)]
    pub fn at(&self, dx: i64, dy: i64, dz: i64) -> Complex64 {
        let (sx, sy, _) = self.stride();
        let ix = (dx + self.shape[0] as i64 - 1) as usize;
        let iy = (dy + self.shape[1] as i64 - 1) as usize;
        let iz = (dz + self.shape[2] as i64 - 1) as usize;
        self.data[ix + sx * (iy + sy * iz)]
    }

    /// `out_i = Σ_j T[i-j] x_j`: the discretized volume-potential operator.
    /// Each output element is an independent sequential sum, so results are
    /// identical for every thread count.
    pub fn convolve(&self, x: &[Complex64], out: &mut [Complex64]) {
        let [nx, ny, nz] = self.shape;
        assert_eq!(x.len(), nx * ny * nz);
        assert_eq!(out.len(), x.len());
        let (sx, sy, _) = self.stride();
        out.par_chunks_mut(nx * ny).enumerate().for_each(|(iz, slab)| {
            for iy in 0..ny {
                for ix in 0..nx {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for jz in 0..nz {
                        let dz = iz as i64 - jz as i64 + nz as i64 - 1;
                        for jy in 0..ny {
                            let dy = iy as i64 - jy as i64 + ny as i64 - 1;
                            let base = (dz as usize * sy + dy as usize) * sx + nx - 1;
                            let xs = &x[(jz * ny + jy) * nx..][..nx];
                            // table index decreases as jx increases
                            for (jx, xv) in xs.iter().enumerate() {
                                let t = self.data[(base + ix) - jx];
                                acc += t * xv;
                            }
                        }
                    }
                    slab[iy * nx + ix] = acc;
                }
            }
        });
    }

    /// Dense collocation matrix `A = I + T diag(q)`.
    pub fn assemble_dense(&self, q: &[Complex64]) -> ndarray::Array2<Complex64> {
        let [nx, ny, nz] = self.shape;
        let n = nx * ny * nz;
        assert_eq!(q.len(), n);
        let (sx, sy, _) = self.stride();
        let mut a = ndarray::Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
        let slice = a.as_slice_mut().expect("row-major dense matrix");
        slice.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let ix = i % nx;
            let iy = (i / nx) % ny;
            let iz = i / (nx * ny);
            let mut j = 0usize;
            for jz in 0..nz {
                let dz = (iz as i64 - jz as i64 + nz as i64 - 1) as usize;
                for jy in 0..ny {
                    let dy = (iy as i64 - jy as i64 + ny as i64 - 1) as usize;
                    let base = (dz * sy + dy) * sx + nx - 1;
                    for jx in 0..nx {
                        row[j] = self.data[(base + ix) - jx] * q[j];
                        j += 1;
                    }
                }
            }
            row[i] += 1.0;
        });
        a
    }
}
