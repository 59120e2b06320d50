//! Standard direction and probe-point sets used by the pipelines.

use crate::vec3::{add, normalized, scale, Vec3};

/// The 26 unit directions through the faces, edges, and corners of a cube,
/// in lexicographic order over the integer offsets `{-1,0,1}^3 \ {0}`.
pub fn cube_directions() -> Vec<Vec3> {
    let mut dirs = Vec::with_capacity(26);
    for i in -1i32..=1 {
        for j in -1i32..=1 {
            for k in -1i32..=1 {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                dirs.push(normalized([i as f64, j as f64, k as f64]));
            }
        }
    }
    dirs
}

/// Probe points on a sphere of radius `r` around `center`, one per cube
/// direction.
pub fn probe_sphere(center: Vec3, r: f64) -> Vec<Vec3> {
    cube_directions()
        .into_iter()
        .map(|d| add(center, scale(d, r)))
        .collect()
}
