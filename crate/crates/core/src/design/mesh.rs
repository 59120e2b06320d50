//! Triangulated closed surfaces for capacitance computation.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vec3::{add, cross, dist, norm, scale, sub, Vec3};

/// Area below which a triangle counts as degenerate, relative to the squared
/// longest edge of the mesh.
const DEGENERATE_AREA_REL: f64 = 1e-12;

/// Closed oriented triangle mesh. Validation checks positive triangle areas
/// and that every edge is shared by exactly two triangles with opposite
/// orientation (closed, orientable surface).
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self { vertices, triangles };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        for v in &self.vertices {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(Error::Mesh(format!("non-finite vertex {v:?}")));
            }
        }
        let nv = self.vertices.len();
        let mut longest_edge_sq: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            for &i in tri {
                if i >= nv {
                    return Err(Error::Mesh(format!(
                        "triangle {t} references vertex {i}, mesh has {nv}"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} repeats a vertex")));
            }
            for e in 0..3 {
                let d = dist(self.vertices[tri[e]], self.vertices[tri[(e + 1) % 3]]);
                longest_edge_sq = longest_edge_sq.max(d * d);
            }
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(*tri);
            if !(area > DEGENERATE_AREA_REL * longest_edge_sq) {
                return Err(Error::Mesh(format!(
                    "triangle {t} is degenerate (area {area:.3e})"
                )));
            }
        }
        // closed + orientable: each directed edge once, its reverse once
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let k = (tri[e], tri[(e + 1) % 3]);
                *edges.entry(k).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edges {
            if count != 1 {
                return Err(Error::Mesh(format!(
                    "directed edge ({a},{b}) appears {count} times; mesh not orientable"
                )));
            }
            if !edges.contains_key(&(b, a)) {
                return Err(Error::Mesh(format!(
                    "edge ({a},{b}) has no opposite twin; mesh not closed"
                )));
            }
        }
        let euler = nv as i64 - (edges.len() / 2) as i64 + self.triangles.len() as i64;
        if euler != 2 {
            log::warn!("mesh Euler characteristic {euler} (not a topological sphere)");
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    fn triangle_area(&self, tri: [usize; 3]) -> f64 {
        let [a, b, c] = tri;
        let u = sub(self.vertices[b], self.vertices[a]);
        let v = sub(self.vertices[c], self.vertices[a]);
        0.5 * norm(cross(u, v))
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|&t| self.triangle_area(t)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&v| scale(v, factor)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Parse the OFF format (`OFF` header, counts line, vertices, faces).
    pub fn from_off_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
        if header != "OFF" {
            return Err(Error::Parse(format!("expected OFF header, got {header:?}")));
        }
        let counts = lines.next().ok_or_else(|| Error::Parse("missing OFF counts".into()))?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad OFF count {t:?}"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(Error::Parse("OFF counts line needs vertex and face counts".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines.next().ok_or_else(|| Error::Parse("OFF truncated in vertices".into()))?;
            let mut it = line.split_whitespace().map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse(format!("bad vertex coordinate {t:?}")))
            });
            let mut v = [0.0; 3];
            for c in &mut v {
                *c = it.next().ok_or_else(|| Error::Parse("vertex line too short".into()))??;
            }
            vertices.push(v);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = lines.next().ok_or_else(|| Error::Parse("OFF truncated in faces".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                return Err(Error::Parse("empty face line".into()));
            }
            let n: usize = toks[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad face arity {:?}", toks[0])))?;
            if n != 3 || toks.len() < 4 {
                return Err(Error::Parse(format!("only triangle faces supported, got {line:?}")));
            }
            let mut tri = [0usize; 3];
            for (slot, t) in tri.iter_mut().zip(&toks[1..4]) {
                *slot = t.parse().map_err(|_| Error::Parse(format!("bad vertex index {t:?}")))?;
            }
            triangles.push(tri);
        }
        Self::new(vertices, triangles)
    }

    /// Parse ASCII STL; coincident vertices are merged by exact coordinates.
    pub fn from_stl_str(text: &str) -> Result<Self> {
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut lookup: HashMap<[u64; 3], usize> = HashMap::new();
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        let mut seen_solid = false;
        for line in text.lines() {
            let line = line.trim();
            if line.starts_with("solid") {
                seen_solid = true;
            } else if let Some(rest) = line.strip_prefix("vertex") {
                let coords: Vec<f64> = rest
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad STL vertex {t:?}"))))
                    .collect::<Result<_>>()?;
                if coords.len() != 3 {
                    return Err(Error::Parse(format!("STL vertex needs 3 coordinates: {line:?}")));
                }
                let v = [coords[0], coords[1], coords[2]];
                let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
                let idx = *lookup.entry(key).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len() - 1
                });
                current.push(idx);
            } else if line.starts_with("endfacet") {
                if current.len() != 3 {
                    return Err(Error::Parse(format!(
                        "STL facet with {} vertices, expected 3",
                        current.len()
                    )));
                }
                triangles.push([current[0], current[1], current[2]]);
                current.clear();
            }
        }
        if !seen_solid {
            return Err(Error::Parse("not an ASCII STL file (no `solid` line)".into()));
        }
        Self::new(vertices, triangles)
    }

    /// Load a mesh from a `.off` or ASCII `.stl` file, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("off") | Some("OFF") => Self::from_off_str(&text),
            Some("stl") | Some("STL") => Self::from_stl_str(&text),
            other => Err(Error::Parse(format!(
                "unsupported mesh extension {other:?} (use .off or .stl)"
            ))),
        }
    }
}

/// Icosphere: icosahedron subdivided `level` times, vertices projected onto
/// the sphere of radius `a`. Triangle count is 20·4^level.
pub fn icosphere(a: f64, level: usize) -> Result<SurfaceMesh> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {a}")));
    }
    if level > 7 {
        return Err(Error::InvalidArgument(format!(
            "icosphere level {level} too fine (max 7 = 327680 triangles)"
        )));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw: [Vec3; 12] = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let project = |v: Vec3| scale(v, a / norm(v));
    let mut vertices: Vec<Vec3> = raw.iter().map(|&v| project(v)).collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |i: usize, j: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = (i.min(j), i.max(j));
            *midpoint.entry(key).or_insert_with(|| {
                let m = project(scale(add(vertices[i], vertices[j]), 0.5));
                vertices.push(m);
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [i, j, l] in triangles {
            let ij = mid(i, j, &mut vertices);
            let jl = mid(j, l, &mut vertices);
            let li = mid(l, i, &mut vertices);
            next.push([i, ij, li]);
            next.push([j, jl, ij]);
            next.push([l, li, jl]);
            next.push([ij, jl, li]);
        }
        triangles = next;
    }
    SurfaceMesh::new(vertices, triangles)
}
