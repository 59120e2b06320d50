//! Plain-text serialization: CSV for grid fields, particle sets, solutions
//! and far-field patterns, JSON for particle recipes.
//!
//! Floats are written with Rust's shortest round-trip `Display`, so writing
//! and re-reading a file reproduces every value bit for bit, and identical
//! inputs always produce byte-identical files. Soft (Dirichlet) particles are
//! stored with the sentinel `inf` in the `re_zeta` column.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::design::{Impedance, ParticleRecipe};
use crate::error::{Error, Result};
use crate::manybody::{ParticleSet, SolveResult};
use crate::medium::{BoxDomain, ComplexGridField, RealGridField};
use crate::{continuum::FarFieldPattern, vec3::Vec3};

const FIELD_HEADER: &str = "x,y,z,re,im";
const PARTICLE_HEADER: &str = "x,y,z,re_zeta,im_zeta";
const SOLUTION_HEADER: &str = "x,y,z,re_u,im_u,re_Q,im_Q";
const FARFIELD_HEADER: &str = "bx,by,bz,re,im";

/// Writes a grid field as CSV, one row per cell in grid order, with the
/// cell-center coordinates in the first three columns.
pub fn write_field(w: &mut impl Write, field: &ComplexGridField) -> Result<()> {
    writeln!(w, "{FIELD_HEADER}")?;
    for (j, v) in field.values().iter().enumerate() {
        let c = field.domain().cell_center(j);
        writeln!(w, "{},{},{},{},{}", c[0], c[1], c[2], v.re, v.im)?;
    }
    Ok(())
}

/// Reads a grid field previously written by [`write_field`]. Rows must come
/// in grid order and their coordinates must match the cell centers of
/// `domain`; this catches files loaded against the wrong scenario.
pub fn read_field(r: impl Read, domain: &BoxDomain) -> Result<ComplexGridField> {
    let rows = read_rows(r, FIELD_HEADER, 5)?;
    if rows.len() != domain.num_cells() {
        return Err(Error::Parse(format!(
            "field file has {} rows, domain has {} cells",
            rows.len(),
            domain.num_cells()
        )));
    }
    let tol = coord_tolerance(domain);
    let mut values = Vec::with_capacity(rows.len());
    for (j, (lineno, f)) in rows.iter().enumerate() {
        check_cell_coords([f[0], f[1], f[2]], domain.cell_center(j), tol, *lineno)?;
        if !(f[3].is_finite() && f[4].is_finite()) {
            return Err(Error::Parse(format!(
                "line {lineno}: field value ({}, {}) is not finite",
                f[3], f[4]
            )));
        }
        values.push(Complex64::new(f[3], f[4]));
    }
    ComplexGridField::new(domain.clone(), values)
}

/// Writes a particle set as CSV: center coordinates and boundary impedance.
/// Soft particles get `inf,0` in the impedance columns.
pub fn write_particles(w: &mut impl Write, particles: &ParticleSet) -> Result<()> {
    writeln!(w, "{PARTICLE_HEADER}")?;
    for (c, z) in particles.centers().iter().zip(particles.zetas()) {
        let (re, im) = match z {
            Impedance::Soft => (f64::INFINITY, 0.0),
            Impedance::Finite(z) => (z.re, z.im),
        };
        writeln!(w, "{},{},{},{re},{im}", c[0], c[1], c[2])?;
    }
    Ok(())
}

/// Reads a particle set written by [`write_particles`]. The radius and the
/// enclosing domain are not stored in the file, so the caller supplies them;
/// the result goes through the full [`ParticleSet`] validation (interior
/// centers, pairwise separation > 2a, no zero impedance).
pub fn read_particles(r: impl Read, domain: &BoxDomain, a: f64) -> Result<ParticleSet> {
    let rows = read_rows(r, PARTICLE_HEADER, 5)?;
    let mut centers = Vec::with_capacity(rows.len());
    let mut zetas = Vec::with_capacity(rows.len());
    for (lineno, f) in rows {
        let c: Vec3 = [f[0], f[1], f[2]];
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse(format!(
                "line {lineno}: particle center ({}, {}, {}) is not finite",
                c[0], c[1], c[2]
            )));
        }
        let z = if f[3].is_infinite() && f[3] > 0.0 {
            Impedance::Soft
        } else if f[3].is_finite() && f[4].is_finite() {
            Impedance::Finite(Complex64::new(f[3], f[4]))
        } else {
            return Err(Error::Parse(format!(
                "line {lineno}: impedance must be finite or `inf` (soft), got ({}, {})",
                f[3], f[4]
            )));
        };
        centers.push(c);
        zetas.push(z);
    }
    ParticleSet::new(domain, centers, a, zetas)
}

/// Writes a solved configuration as CSV: one row per particle with its
/// center, the effective field `u` there and its induced charge `Q`.
pub fn write_solution(
    w: &mut impl Write,
    particles: &ParticleSet,
    result: &SolveResult,
) -> Result<()> {
    if particles.num_particles() != result.u_at_particles().len() {
        return Err(Error::InvalidArgument(format!(
            "solution has {} particles, set has {}",
            result.u_at_particles().len(),
            particles.num_particles()
        )));
    }
    writeln!(w, "{SOLUTION_HEADER}")?;
    let rows = particles
        .centers()
        .iter()
        .zip(result.u_at_particles().iter().zip(result.charges()));
    for (c, (u, q)) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c[0], c[1], c[2], u.re, u.im, q.re, q.im
        )?;
    }
    Ok(())
}

/// Writes a far-field pattern as CSV: unit direction and complex amplitude.
pub fn write_far_field(w: &mut impl Write, pattern: &FarFieldPattern) -> Result<()> {
    writeln!(w, "{FARFIELD_HEADER}")?;
    for (b, a) in pattern.betas.iter().zip(&pattern.amplitudes) {
        writeln!(w, "{},{},{},{},{}", b[0], b[1], b[2], a.re, a.im)?;
    }
    Ok(())
}

/// Serialized form of a [`ParticleRecipe`]. `zeta` entries are `null` on
/// cells without particles, the string `"soft"` for the Dirichlet limit, and
/// `[re, im]` otherwise; `h` is stored as `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct RecipeFile {
    a: f64,
    c0: f64,
    domain: DomainRepr,
    n: Vec<f64>,
    h: Vec<[f64; 2]>,
    zeta: Vec<Option<ZetaRepr>>,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    lo: [f64; 3],
    hi: [f64; 3],
    shape: [usize; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ZetaRepr {
    Soft(String),
    Finite([f64; 2]),
}

/// Writes a recipe as JSON with the particle radius, the single-particle
/// capacitance and the per-cell `N`, `h`, `zeta` arrays.
pub fn write_recipe(w: &mut impl Write, recipe: &ParticleRecipe) -> Result<()> {
    let domain = recipe.domain();
    let file = RecipeFile {
        a: recipe.a(),
        c0: recipe.c0(),
        domain: DomainRepr {
            lo: domain.lo(),
            hi: domain.hi(),
            shape: domain.shape(),
        },
        n: recipe.n_density().values().to_vec(),
        h: recipe.h().values().iter().map(|v| [v.re, v.im]).collect(),
        zeta: recipe
            .zeta()
            .iter()
            .map(|z| {
                z.map(|z| match z {
                    Impedance::Soft => ZetaRepr::Soft("soft".into()),
                    Impedance::Finite(z) => ZetaRepr::Finite([z.re, z.im]),
                })
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &file)
        .map_err(|e| Error::Parse(format!("recipe JSON: {e}")))?;
    writeln!(w)?;
    Ok(())
}

/// Reads a recipe written by [`write_recipe`]. The result goes through the
/// full [`ParticleRecipe`] validation, so a file whose `h` and `zeta` arrays
/// disagree (or that lists particles with no impedance) is rejected.
pub fn read_recipe(r: impl Read) -> Result<ParticleRecipe> {
    let file: RecipeFile =
        serde_json::from_reader(r).map_err(|e| Error::Parse(format!("recipe JSON: {e}")))?;
    let domain = BoxDomain::new(file.domain.lo, file.domain.hi, file.domain.shape)?;
    let n = RealGridField::new(domain.clone(), file.n)?;
    let h = ComplexGridField::new(
        domain,
        file.h.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
    )?;
    let mut zeta = Vec::with_capacity(file.zeta.len());
    for (j, z) in file.zeta.into_iter().enumerate() {
        zeta.push(match z {
            None => None,
            Some(ZetaRepr::Soft(s)) if s == "soft" => Some(Impedance::Soft),
            Some(ZetaRepr::Soft(s)) => {
                return Err(Error::Parse(format!(
                    "zeta[{j}]: expected \"soft\", a [re, im] pair or null, got {s:?}"
                )))
            }
            Some(ZetaRepr::Finite([re, im])) => Some(Impedance::Finite(Complex64::new(re, im))),
        });
    }
    ParticleRecipe::new(file.a, file.c0, n, h, zeta)
}

/// Path-based convenience wrappers around the stream functions. Errors are
/// annotated with the file name.
pub fn save_field(path: impl AsRef<Path>, field: &ComplexGridField) -> Result<()> {
    with_writer(path.as_ref(), |w| write_field(w, field))
}

pub fn load_field(path: impl AsRef<Path>, domain: &BoxDomain) -> Result<ComplexGridField> {
    with_reader(path.as_ref(), |r| read_field(r, domain))
}

pub fn save_particles(path: impl AsRef<Path>, particles: &ParticleSet) -> Result<()> {
    with_writer(path.as_ref(), |w| write_particles(w, particles))
}

pub fn load_particles(path: impl AsRef<Path>, domain: &BoxDomain, a: f64) -> Result<ParticleSet> {
    with_reader(path.as_ref(), |r| read_particles(r, domain, a))
}

pub fn save_solution(
    path: impl AsRef<Path>,
    particles: &ParticleSet,
    result: &SolveResult,
) -> Result<()> {
    with_writer(path.as_ref(), |w| write_solution(w, particles, result))
}

pub fn save_far_field(path: impl AsRef<Path>, pattern: &FarFieldPattern) -> Result<()> {
    with_writer(path.as_ref(), |w| write_far_field(w, pattern))
}

pub fn save_recipe(path: impl AsRef<Path>, recipe: &ParticleRecipe) -> Result<()> {
    with_writer(path.as_ref(), |w| write_recipe(w, recipe))
}

pub fn load_recipe(path: impl AsRef<Path>) -> Result<ParticleRecipe> {
    with_reader(path.as_ref(), read_recipe)
}

fn with_writer<T>(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<T>) -> Result<T> {
    let file = File::create(path).map_err(|e| annotate_io(path, e))?;
    let mut w = BufWriter::new(file);
    let out = f(&mut w).map_err(|e| annotate(path, e))?;
    w.flush().map_err(|e| annotate_io(path, e))?;
    Ok(out)
}

fn with_reader<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> Result<T>) -> Result<T> {
    let file = File::open(path).map_err(|e| annotate_io(path, e))?;
    f(BufReader::new(file)).map_err(|e| annotate(path, e))
}

fn annotate(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::Io(e) => annotate_io(path, e),
        other => other,
    }
}

fn annotate_io(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

/// Parses a headed CSV stream into `(line_number, fields)` rows, each with
/// exactly `width` numeric fields. Blank lines are skipped.
fn read_rows(r: impl Read, header: &str, width: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != header {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected header {header:?}, got {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != width {
            return Err(Error::Parse(format!(
                "line {lineno}: expected {width} comma-separated fields, got {}",
                parts.len()
            )));
        }
        let fields = parts
            .iter()
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| Error::Parse(format!("line {lineno}: invalid number {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno, fields));
    }
    if !saw_header {
        return Err(Error::Parse(format!("empty file, expected header {header:?}")));
    }
    Ok(rows)
}

fn coord_tolerance(domain: &BoxDomain) -> f64 {
    1e-6 * domain.cell_size().iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_cell_coords(got: Vec3, want: Vec3, tol: f64, lineno: usize) -> Result<()> {
    if crate::vec3::dist(got, want) > tol {
        return Err(Error::Parse(format!(
            "line {lineno}: coordinates ({}, {}, {}) do not match the cell center ({}, {}, {}) \
             of the expected grid",
            got[0], got[1], got[2], want[0], want[1], want[2]
        )));
    }
    Ok(())
}
