//! Electrostatic capacitance of a closed surface via the double layer
//! integral `J = ∫∫ |s-t|⁻¹ ds dt` and `C = 4π|S|²/J`.
//!
//! The inner integral over each triangle is evaluated analytically; the
//! outer one by symmetric triangle rules whose order grows as the pair gets
//! closer, with subdivision for touching pairs and the self term.

use rayon::prelude::*;
use std::f64::consts::PI;

use super::mesh::SurfaceMesh;
use crate::quad::{subdivide4, TriangleRule};
use crate::vec3::{cross, dist, norm, scale, sub, Vec3};

/// `∫_T |r - r'|⁻¹ dA'` in closed form (per-edge antiderivatives of the
/// single-layer kernel). Exact up to rounding for any observation point,
/// including points in the triangle's plane and on its boundary.
pub fn triangle_potential(v: &[Vec3; 3], r: Vec3) -> f64 {
    let normal = cross(sub(v[1], v[0]), sub(v[2], v[0]));
    let nn = norm(normal);
    debug_assert!(nn > 0.0, "degenerate triangle");
    let nhat = scale(normal, 1.0 / nn);
    let w0 = crate::vec3::dot(nhat, sub(r, v[0]));
    let scale_len = (0..3)
        .map(|e| dist(v[e], v[(e + 1) % 3]))
        .fold(0.0f64, f64::max);
    let mut total = 0.0;
    for e in 0..3 {
        let a = v[e];
        let b = v[(e + 1) % 3];
        let len = dist(a, b);
        let shat = scale(sub(b, a), 1.0 / len);
        let mhat = cross(shat, nhat); // outward in-plane normal (CCW order)
        let sa = crate::vec3::dot(sub(a, r), shat);
        let sb = crate::vec3::dot(sub(b, r), shat);
        let t0 = crate::vec3::dot(sub(a, r), mhat);
        let r0_sq = t0 * t0 + w0 * w0;
        // observation point on the edge line: the edge contributes nothing
        if r0_sq < (1e-13 * scale_len) * (1e-13 * scale_len) {
            continue;
        }
        let ra = dist(r, a);
        let rb = dist(r, b);
        // ln((Rb+sb)/(Ra+sa)), written with the non-cancelling pair
        let f = if sa + sb >= 0.0 {
            ((rb + sb) / (ra + sa)).ln()
        } else {
            ((ra - sa) / (rb - sb)).ln()
        };
        let wa = w0.abs();
        let beta = (t0 * sb).atan2(r0_sq + wa * rb) - (t0 * sa).atan2(r0_sq + wa * ra);
        total += t0 * f - wa * beta;
    }
    total
}

struct TriInfo {
    verts: [Vec3; 3],
    centroid: Vec3,
    radius: f64,
    area: f64,
}

fn tri_info(mesh: &SurfaceMesh, t: usize) -> TriInfo {
    let verts = mesh.triangle_vertices(t);
    let centroid = scale(crate::vec3::add(crate::vec3::add(verts[0], verts[1]), verts[2]), 1.0 / 3.0);
    let radius = verts.iter().map(|&p| dist(p, centroid)).fold(0.0f64, f64::max);
    let area = 0.5 * norm(cross(sub(verts[1], verts[0]), sub(verts[2], verts[0])));
    TriInfo {
        verts,
        centroid,
        radius,
        area,
    }
}

/// Outer-rule points for one triangle subdivided `levels` times.
fn subdivided_points(verts: &[Vec3; 3], area: f64, rule: &TriangleRule, levels: usize) -> Vec<(Vec3, f64)> {
    if levels == 0 {
        return rule.on_triangle(verts, area);
    }
    let mut out = Vec::new();
    for sub_tri in subdivide4(verts) {
        out.extend(subdivided_points(&sub_tri, area / 4.0, rule, levels - 1));
    }
    out
}

/// Electrostatic capacitance `4π|S|²/J` of a closed mesh, where `J` is the
/// double surface integral of `1/|s - t|`.
///
/// Parallel over rows of the pair matrix; each row is summed in a fixed
/// order and rows are combined sequentially, so the result is identical for
/// every thread count.
pub fn capacitance_mesh(mesh: &SurfaceMesh) -> f64 {
    let tris: Vec<TriInfo> = (0..mesh.num_triangles()).map(|t| tri_info(mesh, t)).collect();
    let deg5 = TriangleRule::degree5();
    let mid = TriangleRule::midpoints();

    let rows: Vec<f64> = tris
        .par_iter()
        .map(|ti| {
            let mut row = 0.0f64;
            let mut comp = 0.0f64;
            for tj in &tris {
                let same = std::ptr::eq(ti, tj);
                let ratio = if same {
                    0.0
                } else {
                    dist(ti.centroid, tj.centroid) / (ti.radius + tj.radius)
                };
                // outer rule over T_i; inner integral over T_j is analytic
                let outer = if same {
                    subdivided_points(&ti.verts, ti.area, &deg5, 2)
                } else if ratio < 2.0 {
                    subdivided_points(&ti.verts, ti.area, &deg5, 1)
                } else if ratio < 6.0 {
                    deg5.on_triangle(&ti.verts, ti.area)
                } else {
                    mid.on_triangle(&ti.verts, ti.area)
                };
                let mut pair = 0.0;
                for (x, w) in outer {
                    pair += w * triangle_potential(&tj.verts, x);
                }
                // Neumaier update keeps the row sum partition-independent
                let t = row + pair;
                comp += if row.abs() >= pair.abs() { (row - t) + pair } else { (pair - t) + row };
                row = t;
            }
            row + comp
        })
        .collect();

    let mut j = 0.0f64;
    let mut comp = 0.0f64;
    for row in rows {
        let t = j + row;
        comp += if j.abs() >= row.abs() { (j - t) + row } else { (row - t) + j };
        j = t;
    }
    j += comp;

    let area = mesh.area();
    4.0 * PI * area * area / j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::mesh::icosphere;
    use approx::assert_abs_diff_eq;

    /// Brute-force oracle: recursive subdivision + degree-5 rule. Only valid
    /// for observation points off the triangle's plane or outside it.
    fn potential_oracle(v: &[Vec3; 3], r: Vec3, levels: usize) -> f64 {
        let area = 0.5 * norm(cross(sub(v[1], v[0]), sub(v[2], v[0])));
        subdivided_points(v, area, &TriangleRule::degree5(), levels)
            .into_iter()
            .map(|(x, w)| w / dist(x, r))
            .sum()
    }

    #[test]
    fn potential_matches_quadrature_off_plane() {
        let v = [[0.0, 0.0, 0.0], [1.2, 0.1, 0.0], [0.3, 0.9, 0.2]];
        for r in [
            [0.4, 0.3, 1.0],
            [0.4, 0.3, 0.15],
            [-2.0, 1.0, 0.5],
            [0.0, 0.0, -3.0],
        ] {
            let exact = triangle_potential(&v, r);
            let oracle = potential_oracle(&v, r, 6);
            assert_abs_diff_eq!(exact, oracle, epsilon = 1e-7 * exact.abs());
        }
    }

    #[test]
    fn potential_in_plane_outside_triangle() {
        let v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let r = [3.0, 2.0, 0.0];
        assert_abs_diff_eq!(
            triangle_potential(&v, r),
            potential_oracle(&v, r, 7),
            epsilon = 1e-8
        );
    }

    #[test]
    fn potential_at_vertex_closed_form() {
        // right isoceles triangle seen from its right-angle vertex:
        // ∫_0^{π/2} dθ/(cosθ + sinθ) = √2 ln(1+√2)
        let v = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let exact = 2.0f64.sqrt() * (1.0 + 2.0f64.sqrt()).ln();
        assert_abs_diff_eq!(triangle_potential(&v, [0.0; 3]), exact, epsilon = 1e-13);
    }

    #[test]
    fn potential_at_square_center_closed_form() {
        // ∫_{[-h,h]²} |x|⁻¹ dA = 8h ln(1+√2); split the square in two
        let t1 = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let t2 = [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let r = [0.5, 0.5, 0.0];
        let got = triangle_potential(&t1, r) + triangle_potential(&t2, r);
        let exact = 4.0 * (1.0 + 2.0f64.sqrt()).ln();
        assert_abs_diff_eq!(got, exact, epsilon = 1e-13);
    }

    #[test]
    fn potential_scales_linearly() {
        let v = [[0.0, 0.0, 0.0], [1.2, 0.1, 0.0], [0.3, 0.9, 0.2]];
        let r = [0.3, 0.2, 0.4];
        let s = 2.5;
        let vs = [scale(v[0], s), scale(v[1], s), scale(v[2], s)];
        assert_abs_diff_eq!(
            triangle_potential(&vs, scale(r, s)),
            s * triangle_potential(&v, r),
            epsilon = 1e-13
        );
    }

    #[test]
    fn sphere_capacitance_converges_to_4pi_a() {
        let a = 1.0;
        let exact = 4.0 * PI * a;
        let mut errs = Vec::new();
        for level in 0..4 {
            let c = capacitance_mesh(&icosphere(a, level).unwrap());
            errs.push((c - exact).abs() / exact);
        }
        // refinement convergence, allowing one non-monotone step
        let violations = errs.windows(2).filter(|w| w[1] >= w[0]).count();
        assert!(violations <= 1, "errors not decreasing: {errs:?}");
        assert!(errs[2] < 0.05, "1280-triangle error {:.3} above 5%", errs[2]);
        assert!(errs[3] < 0.02, "5120-triangle error {:.3} above 2%", errs[3]);
    }

    #[test]
    fn capacitance_is_homogeneous_of_degree_one() {
        let m = icosphere(0.7, 1).unwrap();
        let c1 = capacitance_mesh(&m);
        let c2 = capacitance_mesh(&m.scaled(2.0));
        assert_abs_diff_eq!(c2, 2.0 * c1, epsilon = 1e-11 * c2);
    }

    #[test]
    fn capacitance_independent_of_thread_count() {
        let m = icosphere(1.0, 1).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| capacitance_mesh(&m));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| capacitance_mesh(&m));
        assert_eq!(single, many);
    }
}
