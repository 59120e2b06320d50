//! Deterministic stratified placement of particles from a recipe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParticleSet;
use crate::design::{Impedance, ParticleRecipe};
use crate::error::{Error, Result};
use crate::medium::BoxDomain;
use crate::vec3::Vec3;

/// Realize a recipe as a concrete particle configuration.
///
/// The domain is partitioned into cells matched to the local density and one
/// particle is dropped near each chosen cell center with a uniform jitter of
/// ±δ/4 per axis. The jitter bound keeps adjacent particles at least half a
/// cell apart, so the non-overlap condition `d > 2a` holds by construction
/// whenever every local cell side exceeds `4a`. The same seed always
/// reproduces the same configuration bit for bit.
///
/// The total count is `round(∫N dx)` exactly; for a uniform density whose
/// per-axis counts are integers (e.g. `N ≡ 1000` on the unit cube) the
/// layout is the corresponding regular lattice.
pub fn place_particles(
    recipe: &ParticleRecipe,
    domain: &BoxDomain,
    seed: u64,
) -> Result<ParticleSet> {
    if domain != recipe.domain() {
        return Err(Error::GridMismatch {
            expected: recipe.domain().shape(),
            got: domain.shape(),
        });
    }
    let a = recipe.a();
    let n = recipe.n_density();
    let n_max = n.max();
    if n_max == 0.0 {
        return ParticleSet::new(domain, Vec::new(), a, Vec::new());
    }
    // nominal spacing at the densest point must clear the 4a bound
    let delta_min = n_max.powf(-1.0 / 3.0);
    if delta_min <= 4.0 * a {
        return Err(Error::SpacingViolation {
            spacing: delta_min,
            limit: 4.0 * a,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = n.values().iter().all(|&v| v == n_max);
    let (centers, cells) = if uniform {
        place_uniform(domain, n_max, a, &mut rng)?
    } else {
        place_stratified(recipe, domain, a, &mut rng)?
    };
    let zetas = cells
        .iter()
        .map(|&j| {
            recipe.zeta()[j].ok_or_else(|| {
                Error::Recipe(format!("no impedance for populated recipe cell {j}"))
            })
        })
        .collect::<Result<Vec<Impedance>>>()?;
    ParticleSet::new(domain, centers, a, zetas)
}

/// Global lattice for a constant density: `m_i = round(L_i N^{1/3})` cells
/// per axis, one particle per cell.
fn place_uniform(
    domain: &BoxDomain,
    density: f64,
    a: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec3>, Vec<usize>)> {
    let ext = domain.extent();
    let per_unit = density.powf(1.0 / 3.0);
    let mut m = [0usize; 3];
    let mut delta = [0.0f64; 3];
    for i in 0..3 {
        m[i] = ((ext[i] * per_unit).round() as usize).max(1);
        delta[i] = ext[i] / m[i] as f64;
        if delta[i] <= 4.0 * a {
            return Err(Error::SpacingViolation {
                spacing: delta[i],
                limit: 4.0 * a,
            });
        }
    }
    let lo = domain.lo();
    let mut centers = Vec::with_capacity(m[0] * m[1] * m[2]);
    let mut cells = Vec::with_capacity(centers.capacity());
    for iz in 0..m[2] {
        for iy in 0..m[1] {
            for ix in 0..m[0] {
                let base = [
                    lo[0] + (ix as f64 + 0.5) * delta[0],
                    lo[1] + (iy as f64 + 0.5) * delta[1],
                    lo[2] + (iz as f64 + 0.5) * delta[2],
                ];
                let x = jittered(base, delta, rng);
                cells.push(domain.cell_of(x));
                centers.push(x);
            }
        }
    }
    Ok((centers, cells))
}

/// Per-grid-cell placement for varying density. Cell `j` receives
/// `c_j = round(Σ_{i≤j} λ_i) - round(Σ_{i<j} λ_i)` particles with
/// `λ_j = N_j·vol` — error diffusion that makes the total `round(∫N dx)`
/// exactly and leaves zero-density cells empty. Within a cell, `c_j`
/// positions are drawn from an `s×s×s` sub-lattice with `s = ⌈c_j^{1/3}⌉`.
fn place_stratified(
    recipe: &ParticleRecipe,
    domain: &BoxDomain,
    a: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec3>, Vec<usize>)> {
    let vol = domain.cell_volume();
    let cell = domain.cell_size();
    let mut centers = Vec::new();
    let mut cells = Vec::new();
    let mut cum = 0.0f64;
    let mut emitted = 0i64;
    for (j, &nj) in recipe.n_density().values().iter().enumerate() {
        cum += nj * vol;
        let count = (cum.round() as i64 - emitted).max(0);
        emitted += count;
        if count == 0 {
            continue;
        }
        let count = count as usize;
        let s = (count as f64).cbrt().ceil() as usize;
        let sub = [
            cell[0] / s as f64,
            cell[1] / s as f64,
            cell[2] / s as f64,
        ];
        let sub_min = sub.iter().cloned().fold(f64::INFINITY, f64::min);
        if sub_min <= 4.0 * a {
            return Err(Error::SpacingViolation {
                spacing: sub_min,
                limit: 4.0 * a,
            });
        }
        let corner = {
            let c = domain.cell_center(j);
            [
                c[0] - 0.5 * cell[0],
                c[1] - 0.5 * cell[1],
                c[2] - 0.5 * cell[2],
            ]
        };
        let mut picks = rand::seq::index::sample(rng, s * s * s, count).into_vec();
        picks.sort_unstable();
        for p in picks {
            let (ix, iy, iz) = (p % s, (p / s) % s, p / (s * s));
            let base = [
                corner[0] + (ix as f64 + 0.5) * sub[0],
                corner[1] + (iy as f64 + 0.5) * sub[1],
                corner[2] + (iz as f64 + 0.5) * sub[2],
            ];
            centers.push(jittered(base, sub, rng));
            cells.push(j);
        }
    }
    Ok((centers, cells))
}

fn jittered(base: Vec3, delta: [f64; 3], rng: &mut ChaCha8Rng) -> Vec3 {
    let mut x = base;
    for i in 0..3 {
        let h = 0.25 * delta[i];
        x[i] += rng.gen_range(-h..h);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::recipe_soft;
    use crate::medium::ComplexGridField;
    use crate::vec3::dist;
    use num_complex::Complex64;

    fn unit_domain(shape: [usize; 3]) -> BoxDomain {
        BoxDomain::unit_cube(shape).unwrap()
    }

    fn constant_recipe(domain: &BoxDomain, p: f64, a: f64) -> ParticleRecipe {
        let field = ComplexGridField::constant(domain.clone(), Complex64::new(p, 0.0));
        recipe_soft(&field, a).unwrap()
    }

    #[test]
    fn zero_density_gives_empty_set() {
        let d = unit_domain([4, 4, 4]);
        let p = ComplexGridField::constant(d.clone(), Complex64::new(0.0, 0.0));
        let r = recipe_soft(&p, 0.01).unwrap();
        let ps = place_particles(&r, &d, 7).unwrap();
        assert!(ps.is_empty());
    }

    #[test]
    fn uniform_thousand_on_unit_cube() {
        let d = unit_domain([5, 5, 5]);
        // N = p/C0 = 1000 per unit volume
        let a = 0.001;
        let p = 1000.0 * 4.0 * std::f64::consts::PI * a;
        let r = constant_recipe(&d, p, a);
        assert!((r.expected_count() - 1000.0).abs() < 1e-9);
        let ps = place_particles(&r, &d, 42).unwrap();
        assert_eq!(ps.num_particles(), 1000);
        // one particle inside each 0.1-cell of the 10x10x10 lattice
        let mut seen = vec![false; 1000];
        for x in ps.centers() {
            let c: Vec<usize> = (0..3).map(|i| (x[i] / 0.1).floor() as usize).collect();
            let idx = c[0] + 10 * (c[1] + 10 * c[2]);
            assert!(!seen[idx], "two particles in lattice cell {idx}");
            seen[idx] = true;
            // jitter stays within the inner half of the cell
            for i in 0..3 {
                let off = x[i] - (c[i] as f64 + 0.5) * 0.1;
                assert!(off.abs() <= 0.025 + 1e-12);
            }
        }
        assert!(ps.min_spacing() > 2.0 * a);
        assert!(ps.min_spacing() >= 0.05 - 1e-12);
    }

    #[test]
    fn fixed_seed_reproduces_bitwise() {
        let d = unit_domain([4, 4, 4]);
        let r = constant_recipe(&d, 1.0, 0.001);
        let p1 = place_particles(&r, &d, 123).unwrap();
        let p2 = place_particles(&r, &d, 123).unwrap();
        assert_eq!(p1.centers(), p2.centers());
        let p3 = place_particles(&r, &d, 124).unwrap();
        assert_ne!(p1.centers(), p3.centers());
    }

    #[test]
    fn spacing_violation_when_particles_too_large() {
        let d = unit_domain([5, 5, 5]);
        // N = 1000 => delta = 0.1; a = 0.03 has 4a = 0.12 > delta
        let a = 0.03;
        let p = 1000.0 * 4.0 * std::f64::consts::PI * a;
        let r = constant_recipe(&d, p, a);
        let err = place_particles(&r, &d, 1).unwrap_err();
        match err {
            Error::SpacingViolation { spacing, limit } => {
                assert!((spacing - 0.1).abs() < 1e-12);
                assert!((limit - 0.12).abs() < 1e-15);
            }
            other => panic!("expected SpacingViolation, got {other:?}"),
        }
    }

    #[test]
    fn varying_density_matches_integral_and_support() {
        let d = unit_domain([4, 4, 4]);
        // density only in the lower-z half
        let a = 1e-4;
        let c0 = 4.0 * std::f64::consts::PI * a;
        let p = ComplexGridField::from_fn(d.clone(), |x| {
            if x[2] < 0.5 {
                Complex64::new(800.0 * c0 * (1.0 + x[0]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let r = recipe_soft(&p, a).unwrap();
        let ps = place_particles(&r, &d, 9).unwrap();
        let expected = r.expected_count();
        assert_eq!(ps.num_particles(), expected.round() as usize);
        for x in ps.centers() {
            assert!(x[2] < 0.5, "particle at {x:?} outside the density support");
        }
        assert!(ps.min_spacing() > 2.0 * a);
    }

    #[test]
    fn stratified_counts_follow_local_density() {
        let d = unit_domain([2, 1, 1]);
        let a = 1e-4;
        let c0 = 4.0 * std::f64::consts::PI * a;
        // left cell: lambda = 100, right cell: lambda = 300
        let p = ComplexGridField::from_fn(d.clone(), |x| {
            let n = if x[0] < 0.5 { 200.0 } else { 600.0 };
            Complex64::new(n * c0, 0.0)
        });
        let r = recipe_soft(&p, a).unwrap();
        let ps = place_particles(&r, &d, 3).unwrap();
        assert_eq!(ps.num_particles(), 400);
        let left = ps.centers().iter().filter(|x| x[0] < 0.5).count();
        assert_eq!(left, 100);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let d = unit_domain([4, 4, 4]);
        let other = unit_domain([5, 5, 5]);
        let r = constant_recipe(&d, 1.0, 0.001);
        assert!(matches!(
            place_particles(&r, &other, 0),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn all_centers_strictly_interior() {
        let d = BoxDomain::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0], [3, 3, 3]).unwrap();
        let a = 1e-3;
        let c0 = 4.0 * std::f64::consts::PI * a;
        let p = ComplexGridField::from_fn(d.clone(), |x| {
            Complex64::new((50.0 + 20.0 * x[1]) * c0, 0.0)
        });
        let r = recipe_soft(&p, a).unwrap();
        let ps = place_particles(&r, &d, 11).unwrap();
        assert!(ps.num_particles() > 0);
        for x in ps.centers() {
            for i in 0..3 {
                assert!(x[i] > -1.0 && x[i] < 1.0);
            }
        }
        // pairwise separation exceeds the construction bound
        let mut dmin = f64::INFINITY;
        for (m, xm) in ps.centers().iter().enumerate() {
            for xj in &ps.centers()[m + 1..] {
                dmin = dmin.min(dist(*xm, *xj));
            }
        }
        assert!(dmin > 2.0 * a);
    }
}
