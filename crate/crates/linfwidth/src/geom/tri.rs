//! Triangle intersection primitives: triangle–triangle segments,
//! segment–mesh transversal hits, and the triangle–box overlap test used
//! for voxelization.

use nalgebra::{Point3, Vector3};

use super::{Aabb, Segment, TriMesh};
use crate::tol;
use crate::{Error, Result};

/// Outcome of intersecting two triangles.
#[derive(Debug, Clone, PartialEq)]
pub enum TriTri {
    Empty,
    /// Transversal crossing along a segment of positive length.
    Segment(Segment),
    /// Near-coplanar configuration; measure-positive overlap is possible.
    /// Reported as a distinguished outcome so callers can re-jitter.
    Coplanar,
}

fn plane_of(t: &[Point3<f64>; 3]) -> Option<(Vector3<f64>, f64)> {
    let n = (t[1] - t[0]).cross(&(t[2] - t[0]));
    let norm = n.norm();
    if norm < tol::PREDICATE {
        return None;
    }
    let n = n / norm;
    Some((n, n.dot(&t[0].coords)))
}

/// Signed distances of the vertices of `t` to the plane `(n, d)`.
fn dists(t: &[Point3<f64>; 3], n: &Vector3<f64>, d: f64) -> [f64; 3] {
    [
        n.dot(&t[0].coords) - d,
        n.dot(&t[1].coords) - d,
        n.dot(&t[2].coords) - d,
    ]
}

/// The two points where the triangle's boundary crosses the zero set of the
/// signed distances, with their scalar positions along `dir`. A vertex
/// lying on the plane (within tolerance) counts as a crossing point.
fn crossing_points(
    t: &[Point3<f64>; 3],
    dist: &[f64; 3],
    dir: &Vector3<f64>,
) -> Option<[(f64, Point3<f64>); 2]> {
    let on_plane = |d: f64| d.abs() < tol::PREDICATE;
    let mut out: Vec<(f64, Point3<f64>)> = Vec::with_capacity(2);
    for k in 0..3 {
        if on_plane(dist[k]) {
            out.push((dir.dot(&t[k].coords), t[k]));
        }
        let (i, j) = (k, (k + 1) % 3);
        if !on_plane(dist[i]) && !on_plane(dist[j]) && dist[i] * dist[j] < 0.0 {
            let s = dist[i] / (dist[i] - dist[j]);
            let p = t[i] + (t[j] - t[i]) * s;
            out.push((dir.dot(&p.coords), p));
        }
    }
    if out.len() != 2 {
        return None;
    }
    if out[0].0 > out[1].0 {
        out.swap(0, 1);
    }
    Some([out[0], out[1]])
}

/// Intersects two non-degenerate triangles in `R^3`.
///
/// Transversal crossings yield the segment of intersection; contacts
/// shorter than the predicate tolerance count as empty; near-coplanar
/// poses are reported as [`TriTri::Coplanar`].
pub fn tri_tri_intersection(t1: &[Point3<f64>; 3], t2: &[Point3<f64>; 3]) -> TriTri {
    let Some((n1, d1)) = plane_of(t1) else {
        return TriTri::Empty;
    };
    let Some((n2, d2)) = plane_of(t2) else {
        return TriTri::Empty;
    };

    let d1s = dists(t1, &n2, d2);
    if d1s.iter().all(|&d| d.abs() < tol::PREDICATE) {
        return TriTri::Coplanar;
    }
    if d1s.iter().all(|&d| d > -tol::PREDICATE) || d1s.iter().all(|&d| d < tol::PREDICATE) {
        // All on one side (touching contacts within tolerance included).
        return TriTri::Empty;
    }
    let d2s = dists(t2, &n1, d1);
    if d2s.iter().all(|&d| d > -tol::PREDICATE) || d2s.iter().all(|&d| d < tol::PREDICATE) {
        return TriTri::Empty;
    }

    let dir = n1.cross(&n2);
    let Some([lo1, hi1]) = crossing_points(t1, &d1s, &dir) else {
        return TriTri::Empty;
    };
    let Some([lo2, hi2]) = crossing_points(t2, &d2s, &dir) else {
        return TriTri::Empty;
    };

    let (start, end) = (
        if lo1.0 > lo2.0 { lo1 } else { lo2 },
        if hi1.0 < hi2.0 { hi1 } else { hi2 },
    );
    if end.0 - start.0 < tol::PREDICATE {
        return TriTri::Empty;
    }
    TriTri::Segment(Segment::new(start.1, end.1))
}

/// A transversal crossing of a segment through a mesh triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Parameter along the segment in `[0, 1]`.
    pub t: f64,
    pub point: Point3<f64>,
    pub triangle: usize,
}

/// Transversal intersection points of a segment with a mesh, ordered along
/// the segment.
///
/// Grazing contact — a crossing within the predicate tolerance of a
/// triangle edge or endpoint, or a near-parallel pass within tolerance of
/// a triangle's plane — is reported as a degenerate pose; callers re-jitter
/// and retry.
pub fn segment_mesh_hits(seg: &Segment, mesh: &TriMesh) -> Result<Vec<Hit>> {
    let dir = seg.b - seg.a;
    if dir.norm() < tol::PREDICATE {
        return Err(Error::Precondition("degenerate segment".into()));
    }
    let mut hits = Vec::new();
    for ti in 0..mesh.num_triangles() {
        let tri = mesh.triangle(ti);
        let e1 = tri[1] - tri[0];
        let e2 = tri[2] - tri[0];
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        let scale = e1.norm() * e2.norm() * dir.norm();
        if det.abs() < tol::PREDICATE * scale {
            // Segment (nearly) parallel to the triangle plane: a miss unless
            // it passes through the plane's thickened slab over the triangle.
            if let Some((n, d)) = plane_of(&tri) {
                let da = n.dot(&seg.a.coords) - d;
                let db = n.dot(&seg.b.coords) - d;
                if da.abs() < tol::PREDICATE || db.abs() < tol::PREDICATE {
                    let bb = seg.bbox().grow(tol::PREDICATE);
                    let tb = triangle_bbox(&tri).grow(tol::PREDICATE);
                    if bb.intersects(&tb) {
                        return Err(Error::DegeneratePose(format!(
                            "segment nearly coplanar with triangle {ti}"
                        )));
                    }
                }
            }
            continue;
        }
        let inv = 1.0 / det;
        let tvec = seg.a - tri[0];
        let u = tvec.dot(&p) * inv;
        let q = tvec.cross(&e1);
        let v = dir.dot(&q) * inv;
        let t = e2.dot(&q) * inv;

        let eps = tol::PREDICATE;
        let inside = u > eps && v > eps && u + v < 1.0 - eps && t > eps && t < 1.0 - eps;
        let outside = u < -eps || v < -eps || u + v > 1.0 + eps || t < -eps || t > 1.0 + eps;
        if inside {
            hits.push(Hit {
                t,
                point: seg.point_at(t),
                triangle: ti,
            });
        } else if !outside {
            // Within tolerance of an edge, vertex, or segment endpoint.
            return Err(Error::DegeneratePose(format!(
                "grazing contact with triangle {ti} (u={u:.3e}, v={v:.3e}, t={t:.3e})"
            )));
        }
    }
    hits.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(hits)
}

fn triangle_bbox(t: &[Point3<f64>; 3]) -> Aabb {
    let mut min = t[0];
    let mut max = t[0];
    for p in &t[1..] {
        for a in 0..3 {
            min[a] = min[a].min(p[a]);
            max[a] = max[a].max(p[a]);
        }
    }
    Aabb { min, max }
}

/// Separating-axis triangle/axis-aligned-box overlap test.
pub fn tri_box_overlap(center: &Point3<f64>, half: &Vector3<f64>, tri: &[Point3<f64>; 3]) -> bool {
    let v: [Vector3<f64>; 3] = [tri[0] - center, tri[1] - center, tri[2] - center];

    // Box axes.
    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > half[a] || hi < -half[a] {
            return false;
        }
    }

    // Triangle plane.
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let n = e[0].cross(&(v[2] - v[0]));
    let r = half.x * n.x.abs() + half.y * n.y.abs() + half.z * n.z.abs();
    let d = n.dot(&v[0]);
    if d.abs() > r {
        return false;
    }

    // Nine cross-product axes.
    for edge in &e {
        for a in 0..3 {
            let mut axis = Vector3::zeros();
            axis[a] = 1.0;
            let ax = axis.cross(edge);
            if ax.norm_squared() < 1e-30 {
                continue;
            }
            let p: Vec<f64> = v.iter().map(|w| w.dot(&ax)).collect();
            let lo = p.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let r = half.x * ax.x.abs() + half.y * ax.y.abs() + half.z * ax.z.abs();
            if lo > r || hi < -r {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Point3<f64>; 3] {
        [Point3::from(a), Point3::from(b), Point3::from(c)]
    }

    #[test]
    fn parallel_disjoint_planes_miss() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]);
        assert_eq!(tri_tri_intersection(&t1, &t2), TriTri::Empty);
    }

    #[test]
    fn perpendicular_crossing_yields_expected_segment() {
        // Unit right triangle in z=0; a tall perpendicular triangle whose
        // plane is x=0.2 stabbing through its interior.
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.2, 0.1, -1.0], [0.2, 0.1, 1.0], [0.2, 0.7, 0.0]);
        match tri_tri_intersection(&t1, &t2) {
            TriTri::Segment(s) => {
                // The crossing lies on x=0.2, z=0. By hand: t2 meets z=0
                // along y ∈ [0.1, 0.7] (edge cut at y=0.1, apex at y=0.7)
                // and t1 meets x=0.2 along y ∈ [0, 0.8]; the overlap is
                // y ∈ [0.1, 0.7].
                let len = s.length();
                assert!((len - 0.6).abs() < 1e-12, "len={len}");
                for p in [s.a, s.b] {
                    assert!((p.x - 0.2).abs() < 1e-12);
                    assert!(p.z.abs() < 1e-12);
                }
                let (y0, y1) = (s.a.y.min(s.b.y), s.a.y.max(s.b.y));
                assert!((y0 - 0.1).abs() < 1e-12 && (y1 - 0.7).abs() < 1e-12);
            }
            other => panic!("expected segment, got {other:?}"),
        }
    }

    #[test]
    fn shared_vertex_only_is_empty() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]);
        assert_eq!(tri_tri_intersection(&t1, &t2), TriTri::Empty);
    }

    #[test]
    fn coplanar_is_flagged() {
        let t1 = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let t2 = tri([0.2, 0.2, 0.0], [0.8, 0.2, 0.0], [0.2, 0.8, 0.0]);
        assert_eq!(tri_tri_intersection(&t1, &t2), TriTri::Coplanar);
    }

    fn square_mesh() -> TriMesh {
        TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.5),
                Point3::new(1.0, 0.0, 0.5),
                Point3::new(1.0, 1.0, 0.5),
                Point3::new(0.0, 1.0, 0.5),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn segment_miss_and_hit() {
        let m = square_mesh();
        let miss = Segment::new(Point3::new(5.0, 5.0, 0.0), Point3::new(5.0, 5.0, 1.0));
        assert!(segment_mesh_hits(&miss, &m).unwrap().is_empty());

        let hit = Segment::new(Point3::new(0.3, 0.4, 0.0), Point3::new(0.3, 0.4, 1.0));
        let hits = segment_mesh_hits(&hit, &m).unwrap();
        assert_eq!(hits.len(), 1);
        assert!((hits[0].t - 0.5).abs() < 1e-12);
        assert!((hits[0].point - Point3::new(0.3, 0.4, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn grazing_vertex_is_degenerate() {
        let m = square_mesh();
        // Passes exactly through the shared diagonal edge.
        let graze = Segment::new(Point3::new(0.5, 0.5, 0.0), Point3::new(0.5, 0.5, 1.0));
        assert!(matches!(
            segment_mesh_hits(&graze, &m),
            Err(Error::DegeneratePose(_))
        ));
    }

    #[test]
    fn hits_are_ordered_along_segment() {
        let mut m = square_mesh();
        let above = square_mesh().translated(&Vector3::new(0.0, 0.0, 0.2));
        m.append(&above);
        let seg = Segment::new(Point3::new(0.3, 0.4, 0.0), Point3::new(0.3, 0.4, 1.0));
        let hits = segment_mesh_hits(&seg, &m).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits[0].t < hits[1].t);
    }

    #[test]
    fn tri_box_overlap_basic() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(tri_box_overlap(
            &Point3::new(0.2, 0.2, 0.0),
            &Vector3::new(0.1, 0.1, 0.1),
            &t
        ));
        assert!(!tri_box_overlap(
            &Point3::new(2.0, 2.0, 2.0),
            &Vector3::new(0.1, 0.1, 0.1),
            &t
        ));
        // Box pierced through the interior without containing any vertex.
        assert!(tri_box_overlap(
            &Point3::new(0.3, 0.3, 0.0),
            &Vector3::new(0.01, 0.01, 0.5),
            &t
        ));
    }
}
