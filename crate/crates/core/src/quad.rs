//! Quadrature rules: Gauss-Legendre nodes and symmetric triangle rules.

use crate::vec3::{add, scale, Vec3};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from Chebyshev initial guesses. Accurate to machine precision for
/// the small orders used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // cos gives descending nodes; flip to ascending for readability
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Same rule mapped to `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|t| 0.5 * t).collect(),
    )
}

/// Symmetric quadrature rule on the reference triangle, given as barycentric
/// coordinates and weights summing to 1 (so integrals come out as
/// `area * sum w_i f(x_i)`).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Degree-1 centroid rule.
    pub fn centroid() -> Self {
        Self {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        }
    }

    /// Degree-2 rule at the edge midpoints.
    pub fn midpoints() -> Self {
        Self {
            points: vec![
                [0.5, 0.5, 0.0],
                [0.0, 0.5, 0.5],
                [0.5, 0.0, 0.5],
            ],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Classic degree-5 seven-point rule (centroid plus two three-point orbits).
    pub fn degree5() -> Self {
        let s15 = 15.0f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let mut points = vec![[1.0 / 3.0; 3]];
        let mut weights = vec![9.0 / 40.0];
        for &(a, w) in &[(a1, w1), (a2, w2)] {
            let b = 1.0 - 2.0 * a;
            points.push([b, a, a]);
            points.push([a, b, a]);
            points.push([a, a, b]);
            weights.extend_from_slice(&[w, w, w]);
        }
        Self { points, weights }
    }

    /// Physical points and weights (including the area factor) on a triangle.
    pub fn on_triangle(&self, v: &[Vec3; 3], area: f64) -> Vec<(Vec3, f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(b, &w)| {
                let p = add(add(scale(v[0], b[0]), scale(v[1], b[1])), scale(v[2], b[2]));
                (p, w * area)
            })
            .collect()
    }
}

/// Split a triangle into 4 congruent children (midpoint subdivision).
pub fn subdivide4(v: &[Vec3; 3]) -> [[Vec3; 3]; 4] {
    let m01 = scale(add(v[0], v[1]), 0.5);
    let m12 = scale(add(v[1], v[2]), 0.5);
    let m20 = scale(add(v[2], v[0]), 0.5);
    [
        [v[0], m01, m20],
        [m01, v[1], m12],
        [m20, m12, v[2]],
        [m01, m12, m20],
    ]
}
