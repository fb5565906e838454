//! Triangle soup with enough connectivity to clip, split, and measure.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Aabb;
use crate::tol;
use crate::{Error, Result};

/// Piecewise-linear surface in `R^3`: shared vertices plus index triples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "triangle index {i} out of range (V={})",
                        vertices.len()
                    )));
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        (b - a).cross(&(c - a)).norm() * 0.5
    }

    /// Total surface area; degenerate triangles contribute (essentially) zero.
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Indices of triangles with area below the degeneracy cutoff. These are
    /// tolerated by every operation but callers may want to know.
    pub fn degenerate_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&i| self.triangle_area(i) < tol::PREDICATE)
            .collect()
    }

    pub fn bbox(&self) -> Option<Aabb> {
        if self.vertices.is_empty() {
            return None;
        }
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices {
            for a in 0..3 {
                min[a] = min[a].min(v[a]);
                max[a] = max[a].max(v[a]);
            }
        }
        Some(Aabb { min, max })
    }

    pub fn translate(&mut self, d: &Vector3<f64>) {
        for v in &mut self.vertices {
            *v += d;
        }
    }

    pub fn translated(&self, d: &Vector3<f64>) -> TriMesh {
        let mut m = self.clone();
        m.translate(d);
        m
    }

    /// Applies an arbitrary point map to every vertex, keeping connectivity.
    pub fn mapped(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(f).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Uniform scaling about the origin. Areas scale by `c^2`.
    pub fn scaled(&self, c: f64) -> TriMesh {
        self.mapped(|p| Point3::from(p.coords * c))
    }

    /// Appends another mesh (disjoint union; no welding).
    pub fn append(&mut self, other: &TriMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
    }

    /// Edge → number of incident triangles.
    fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                *m.entry(key).or_insert(0) += 1;
            }
        }
        m
    }

    /// A closed surface: every edge is shared by exactly two triangles.
    pub fn is_closed(&self) -> bool {
        !self.is_empty() && self.edge_counts().values().all(|&c| c == 2)
    }

    /// V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i] = true;
            }
        }
        let v = used.iter().filter(|&&u| u).count() as i64;
        let e = self.edge_counts().len() as i64;
        let f = self.triangles.len() as i64;
        v - e + f
    }

    /// Connected components of the triangle adjacency graph (shared edges).
    /// Returns one triangle-index list per component.
    pub fn triangle_components(&self) -> Vec<Vec<usize>> {
        let mut edge_to_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_to_tris.entry((a.min(b), a.max(b))).or_default().push(ti);
            }
        }
        let mut comp = vec![usize::MAX; self.triangles.len()];
        let mut components = Vec::new();
        for start in 0..self.triangles.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            comp[start] = id;
            while let Some(ti) = stack.pop() {
                members.push(ti);
                let t = self.triangles[ti];
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    for &other in &edge_to_tris[&(a.min(b), a.max(b))] {
                        if comp[other] == usize::MAX {
                            comp[other] = id;
                            stack.push(other);
                        }
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Extracts the submesh formed by the given triangles, with vertices
    /// compacted.
    pub fn submesh(&self, triangle_indices: &[usize]) -> TriMesh {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(triangle_indices.len());
        for &ti in triangle_indices {
            let t = self.triangles[ti];
            let mut nt = [0usize; 3];
            for (k, &vi) in t.iter().enumerate() {
                let ni = *remap.entry(vi).or_insert_with(|| {
                    vertices.push(self.vertices[vi]);
                    vertices.len() - 1
                });
                nt[k] = ni;
            }
            triangles.push(nt);
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Splits every triangle along the plane `x_axis = offset`, keeping both
    /// sides. Cut points on shared edges are computed once per edge, so the
    /// refined mesh stays watertight. Vertices within the predicate
    /// tolerance of the plane are treated as lying on it (no sliver
    /// triangles are produced).
    pub fn split_by_plane(&self, axis: usize, offset: f64) -> TriMesh {
        let mut vertices = self.vertices.clone();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        let mut cut_cache: HashMap<(usize, usize), usize> = HashMap::new();

        let side = |v: &Point3<f64>| -> i8 {
            let d = v[axis] - offset;
            if d > tol::PREDICATE {
                1
            } else if d < -tol::PREDICATE {
                -1
            } else {
                0
            }
        };

        for t in &self.triangles {
            let sides = [
                side(&vertices[t[0]]),
                side(&vertices[t[1]]),
                side(&vertices[t[2]]),
            ];
            if !(sides.contains(&1) && sides.contains(&-1)) {
                triangles.push(*t);
                continue;
            }
            // Walk the triangle boundary, splitting crossing edges and
            // emitting the two side polygons in winding order.
            let mut pos: Vec<usize> = Vec::with_capacity(4);
            let mut neg: Vec<usize> = Vec::with_capacity(4);
            for k in 0..3 {
                let (i, j) = (t[k], t[(k + 1) % 3]);
                let (si, sj) = (sides[k], sides[(k + 1) % 3]);
                match si {
                    1 => pos.push(i),
                    -1 => neg.push(i),
                    _ => {
                        pos.push(i);
                        neg.push(i);
                    }
                }
                if si * sj == -1 {
                    let key = (i.min(j), i.max(j));
                    let cut = *cut_cache.entry(key).or_insert_with(|| {
                        let (lo, hi) = (vertices[key.0], vertices[key.1]);
                        let t = (offset - lo[axis]) / (hi[axis] - lo[axis]);
                        let mut p = lo + (hi - lo) * t;
                        p[axis] = offset;
                        vertices.push(p);
                        vertices.len() - 1
                    });
                    pos.push(cut);
                    neg.push(cut);
                }
            }
            for poly in [pos, neg] {
                for k in 1..poly.len().saturating_sub(1) {
                    let tri = [poly[0], poly[k], poly[k + 1]];
                    if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                        triangles.push(tri);
                    }
                }
            }
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Splits along all six planes of a box.
    pub fn split_by_box_planes(&self, cube: &Aabb) -> TriMesh {
        let mut m = self.clone();
        for axis in 0..3 {
            m = m.split_by_plane(axis, cube.min[axis]);
            m = m.split_by_plane(axis, cube.max[axis]);
        }
        m
    }

    /// Keeps the triangles whose centroid satisfies the predicate; vertices
    /// are compacted.
    pub fn filter_by_centroid(&self, keep: impl Fn(&Point3<f64>) -> bool) -> TriMesh {
        let kept: Vec<usize> = (0..self.triangles.len())
            .filter(|&i| {
                let [a, b, c] = self.triangle(i);
                let centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
                keep(&centroid)
            })
            .collect();
        self.submesh(&kept)
    }

    /// Area-weighted uniform surface samples, deterministic given the seed.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point3<f64>> {
        if self.is_empty() {
            return Vec::new();
        }
        let mut cumulative = Vec::with_capacity(self.triangles.len());
        let mut total = 0.0;
        for i in 0..self.triangles.len() {
            total += self.triangle_area(i);
            cumulative.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let target = rng.random::<f64>() * total;
            let ti = cumulative.partition_point(|&c| c < target).min(self.triangles.len() - 1);
            let [a, b, c] = self.triangle(ti);
            let mut u = rng.random::<f64>();
            let mut v = rng.random::<f64>();
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            out.push(Point3::from(
                a.coords + (b.coords - a.coords) * u + (c.coords - a.coords) * v,
            ));
        }
        out
    }
}

/// Total area of a mesh.
pub fn mesh_area(mesh: &TriMesh) -> f64 {
    mesh.area()
}

/// Clips a mesh to an axis-aligned cube: split along the six planes, keep
/// the inside. Clipped areas are additive across a lattice partition.
pub fn clip_mesh_to_cube(mesh: &TriMesh, cube: &Aabb) -> TriMesh {
    mesh.split_by_box_planes(cube)
        .filter_by_centroid(|c| cube.contains(c))
}
