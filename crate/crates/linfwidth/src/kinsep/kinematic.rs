//! Kinematic intersection averages: the expected measure of the
//! intersection of one body with a randomly posed copy of another, the
//! exact per-pose oracles for flat pieces, and coordinate-line avoidance.
//!
//! The shift integral over all of `R^3` is truncated to the Minkowski box
//! of the two bodies' bounding boxes — outside it the intersection is
//! empty, so the truncation is exact, and the integral equals the box
//! volume times the Monte Carlo mean over uniform shifts in the box.

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::foam::derive_seed;
use crate::geom::{segment_mesh_hits, tri_tri_intersection, Aabb, Segment, TriMesh, TriTri};
use crate::sgnperm::{enumerate_group, Subspace};
use crate::tol;
use crate::{Error, Result};

use super::Pose;

/// Shift-integral estimate for one signed permutation.
#[derive(Debug, Clone)]
pub struct PoseIntegral {
    /// Index of the signed permutation in enumeration order.
    pub group_index: usize,
    /// Monte Carlo estimate of `∫ measure(M ∩ (sP + x)) dx`.
    pub integral: f64,
    pub se: f64,
    /// Shifts that had to be re-jittered on a degeneracy flag.
    pub rejittered: usize,
}

/// Group-averaged shift integral with its bound.
#[derive(Debug, Clone)]
pub struct KinematicAverage {
    /// Mean over all 48 signed permutations of the per-pose shift integral.
    pub value: f64,
    pub se: f64,
    /// The kinematic bound: `√(m/N)·vol·vol` for hypersurface sections,
    /// `vol·vol/√C(N,m)` for point counts.
    pub bound: f64,
    pub per_pose: Vec<PoseIntegral>,
}

impl KinematicAverage {
    pub fn within_bound(&self, sigmas: f64) -> bool {
        self.value <= self.bound + sigmas * self.se
    }
}

/// Total length of the intersection curve of two meshes (sum over
/// triangle pairs of transversal segment lengths). Coplanar pairs raise a
/// degenerate-pose error.
fn intersection_length(a: &TriMesh, b: &TriMesh) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..a.num_triangles() {
        let ta = a.triangle(i);
        for j in 0..b.num_triangles() {
            let tb = b.triangle(j);
            match tri_tri_intersection(&ta, &tb) {
                TriTri::Empty => {}
                TriTri::Segment(s) => total += s.length(),
                TriTri::Coplanar => {
                    return Err(Error::DegeneratePose(format!(
                        "coplanar triangle pair ({i}, {j})"
                    )))
                }
            }
        }
    }
    Ok(total)
}

/// Minkowski shift box: the set of `x` for which `moving + x` can touch
/// `fixed`.
fn shift_box(fixed: &Aabb, moving: &Aabb) -> Aabb {
    Aabb {
        min: Point3::from(fixed.min.coords - moving.max.coords),
        max: Point3::from(fixed.max.coords - moving.min.coords),
    }
}

/// Per-pose shift integral by Monte Carlo over the Minkowski box, with the
/// seeded jitter-and-retry policy on degenerate poses.
fn pose_shift_integral(
    m: &TriMesh,
    posed_p: &TriMesh,
    samples: usize,
    seed: u64,
    measure: impl Fn(&TriMesh, &TriMesh) -> Result<f64>,
) -> (f64, f64, usize) {
    let (Some(bm), Some(bp)) = (m.bbox(), posed_p.bbox()) else {
        return (0.0, 0.0, 0);
    };
    let box_ = shift_box(&bm, &bp);
    let vol = box_.volume();
    if vol == 0.0 {
        return (0.0, 0.0, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut rejittered = 0;
    for _ in 0..samples {
        let base = Vector3::new(
            box_.min.x + rng.random::<f64>() * (box_.max.x - box_.min.x),
            box_.min.y + rng.random::<f64>() * (box_.max.y - box_.min.y),
            box_.min.z + rng.random::<f64>() * (box_.max.z - box_.min.z),
        );
        let mut value = None;
        for attempt in 0..=tol::JITTER_RETRIES {
            let jitter = if attempt == 0 {
                Vector3::zeros()
            } else {
                rejittered += 1;
                Vector3::new(
                    (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                    (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                    (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                )
            };
            let shifted = posed_p.translated(&(base + jitter));
            if let Ok(v) = measure(m, &shifted) {
                value = Some(v);
                break;
            }
        }
        let v = value.unwrap_or(0.0);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (vol * mean, vol * (var / n).sqrt(), rejittered)
}

fn group_average(
    m: &TriMesh,
    p: &TriMesh,
    shift_samples: usize,
    seed: u64,
    bound: f64,
    measure: impl Fn(&TriMesh, &TriMesh) -> Result<f64> + Sync,
) -> Result<KinematicAverage> {
    let group: Vec<_> = enumerate_group(3)?.collect();
    let per_pose: Vec<PoseIntegral> = group
        .par_iter()
        .enumerate()
        .map(|(gi, s)| {
            let pose = Pose::new(s.clone(), Vector3::zeros()).expect("dim 3");
            let posed = pose.apply_mesh(p);
            let (integral, se, rejittered) =
                pose_shift_integral(m, &posed, shift_samples, derive_seed(seed, gi as u64), &measure);
            PoseIntegral {
                group_index: gi,
                integral,
                se,
                rejittered,
            }
        })
        .collect();
    let value = per_pose.iter().map(|p| p.integral).sum::<f64>() / 48.0;
    let se = per_pose.iter().map(|p| p.se * p.se).sum::<f64>().sqrt() / 48.0;
    Ok(KinematicAverage {
        value,
        se,
        bound,
        per_pose,
    })
}

/// Group-averaged shift integral of the intersection length
/// `vol_1(M ∩ (sP + x))` for surfaces `M, P ⊂ R^3`, with the bound
/// `√(2/3)·area(M)·area(P)`.
pub fn kinematic_hypersurface_avg(
    m: &TriMesh,
    p: &TriMesh,
    shift_samples: usize,
    seed: u64,
) -> Result<KinematicAverage> {
    let bound = (2.0f64 / 3.0).sqrt() * m.area() * p.area();
    group_average(m, p, shift_samples, seed, bound, intersection_length)
}

/// Group-averaged shift integral of the hit count `|M ∩ (sP + x)|` for a
/// surface `M` and a segment set `P`, with the bound
/// `area(M)·length(P)/√3`.
pub fn kinematic_count_avg(
    m: &TriMesh,
    p: &[Segment],
    shift_samples: usize,
    seed: u64,
) -> Result<KinematicAverage> {
    let length: f64 = p.iter().map(Segment::length).sum();
    let bound = m.area() * length / 3.0f64.sqrt();
    let segs = p.to_vec();
    if segs.is_empty() || m.is_empty() {
        return Ok(KinematicAverage {
            value: 0.0,
            se: 0.0,
            bound,
            per_pose: Vec::new(),
        });
    }
    let group: Vec<_> = enumerate_group(3)?.collect();
    // Bounding box of the segment set.
    let mut sb = segs[0].bbox();
    for s in &segs[1..] {
        let b = s.bbox();
        for a in 0..3 {
            sb.min[a] = sb.min[a].min(b.min[a]);
            sb.max[a] = sb.max[a].max(b.max[a]);
        }
    }
    let per_pose: Vec<PoseIntegral> = group
        .par_iter()
        .enumerate()
        .map(|(gi, s)| {
            let pose = Pose::new(s.clone(), Vector3::zeros()).expect("dim 3");
            let posed: Vec<Segment> = segs.iter().map(|sg| pose.apply_segment(sg)).collect();
            let mut pb = posed[0].bbox();
            for sg in &posed[1..] {
                let b = sg.bbox();
                for a in 0..3 {
                    pb.min[a] = pb.min[a].min(b.min[a]);
                    pb.max[a] = pb.max[a].max(b.max[a]);
                }
            }
            let box_ = shift_box(&m.bbox().expect("nonempty mesh"), &pb);
            let vol = box_.volume();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, gi as u64));
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut rejittered = 0usize;
            for _ in 0..shift_samples {
                let base = Vector3::new(
                    box_.min.x + rng.random::<f64>() * (box_.max.x - box_.min.x),
                    box_.min.y + rng.random::<f64>() * (box_.max.y - box_.min.y),
                    box_.min.z + rng.random::<f64>() * (box_.max.z - box_.min.z),
                );
                let mut value = None;
                for attempt in 0..=tol::JITTER_RETRIES {
                    let jitter = if attempt == 0 {
                        Vector3::zeros()
                    } else {
                        rejittered += 1;
                        Vector3::new(
                            (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                            (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                            (rng.random::<f64>() - 0.5) * 2.0 * tol::JITTER,
                        )
                    };
                    let d = base + jitter;
                    let mut count = 0usize;
                    let mut ok = true;
                    for sg in &posed {
                        let moved = Segment::new(
                            Point3::from(sg.a.coords + d),
                            Point3::from(sg.b.coords + d),
                        );
                        match segment_mesh_hits(&moved, m) {
                            Ok(hits) => count += hits.len(),
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok {
                        value = Some(count as f64);
                        break;
                    }
                }
                let v = value.unwrap_or(0.0);
                sum += v;
                sum_sq += v * v;
            }
            let n = shift_samples as f64;
            let mean = sum / n;
            let var = (sum_sq / n - mean * mean).max(0.0);
            PoseIntegral {
                group_index: gi,
                integral: vol * mean,
                se: vol * (var / n).sqrt(),
                rejittered,
            }
        })
        .collect();
    let value = per_pose.iter().map(|p| p.integral).sum::<f64>() / 48.0;
    let se = per_pose.iter().map(|p| p.se * p.se).sum::<f64>().sqrt() / 48.0;
    Ok(KinematicAverage {
        value,
        se,
        bound,
        per_pose,
    })
}

/// Exact per-pose oracle for two flat pieces: the shift integral of the
/// intersection length of a flat piece of area `area_m` with unit normal
/// `n_m` and a posed flat piece of area `area_p` whose posed unit normal
/// is `n_p` equals `area_m · area_p · ‖proj onto the tangent plane of M of
/// n_p‖`. (The projection norm is the cosine of the angle between the two
/// planes.)
pub fn flat_hypersurface_oracle(
    area_m: f64,
    n_m: &Vector3<f64>,
    area_p: f64,
    posed_n_p: &Vector3<f64>,
) -> f64 {
    let dot = n_m.dot(posed_n_p);
    area_m * area_p * (1.0 - dot * dot).max(0.0).sqrt()
}

/// Exact per-pose oracle for a flat piece against a posed segment: the
/// shift integral of the hit count equals the projected area of the piece
/// along the segment direction times its length:
/// `area_m · len · |n_m · u|`.
pub fn flat_count_oracle(
    area_m: f64,
    n_m: &Vector3<f64>,
    len: f64,
    posed_dir: &Vector3<f64>,
) -> f64 {
    area_m * len * n_m.dot(posed_dir).abs()
}

/// Exact 48-element average of the flat-piece factor
/// `‖proj_{TanM}(g n_p)‖`: the mean projection length of the posed normal
/// onto M's tangent plane, bounded by `√(2/3)`.
pub fn group_avg_tangent_projection(n_m: &Vector3<f64>, n_p: &Vector3<f64>) -> Result<f64> {
    // Any orthonormal basis of the plane orthogonal to n_m.
    let t1 = orthonormal_complement(n_m);
    let t2 = n_m.cross(&t1);
    let plane = Subspace::new(vec![
        vec![t1.x, t1.y, t1.z],
        vec![t2.x, t2.y, t2.z],
    ])?;
    crate::sgnperm::avg_projection_length(&[n_p.x, n_p.y, n_p.z], &plane)
}

/// Exact 48-element average of `|n_m · g u|`, bounded by `1/√3`.
pub fn group_avg_abs_normal_dot(n_m: &Vector3<f64>, u: &Vector3<f64>) -> Result<f64> {
    crate::sgnperm::avg_abs_dot(&[n_m.x, n_m.y, n_m.z], &[u.x, u.y, u.z])
}

fn orthonormal_complement(n: &Vector3<f64>) -> Vector3<f64> {
    let trial = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    (trial - n * n.dot(&trial)).normalize()
}

/// Result of the coordinate-line avoidance search.
#[derive(Debug, Clone)]
pub struct AvoidResult {
    /// The shift with zero hits on every axis-parallel line family.
    pub shift: Vector3<f64>,
    /// Candidates tried before success.
    pub draws: usize,
    /// Fraction of failed candidates (estimates the bad-shift measure).
    pub bad_fraction: f64,
}

/// Searches for a shift `t ∈ [0,1)^3` such that the union of all
/// axis-parallel lines through the integer lattice translated by `t`
/// misses the mesh, by rejection sampling over seeded candidates and
/// exact hit counting. Requires `area(M) < 1/√3` (below that measure the
/// expected number of hits of a random shift is below 1, so good shifts
/// have positive measure).
pub fn avoid_shift(mesh: &TriMesh, max_draws: usize, seed: u64) -> Result<AvoidResult> {
    let threshold = 1.0 / 3.0f64.sqrt();
    if mesh.area() >= threshold {
        return Err(Error::Precondition(format!(
            "avoidance requires area(M) < 1/√3 ≈ {threshold:.6}, got {}",
            mesh.area()
        )));
    }
    let Some(bbox) = mesh.bbox() else {
        return Ok(AvoidResult {
            shift: Vector3::new(0.5, 0.5, 0.5),
            draws: 0,
            bad_fraction: 0.0,
        });
    };
    let pad = 0.125;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0usize;
    for draw in 1..=max_draws {
        let t = Vector3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        match count_lattice_line_hits(mesh, &t, &bbox, pad) {
            Ok(0) => {
                return Ok(AvoidResult {
                    shift: t,
                    draws: draw,
                    bad_fraction: bad as f64 / draw as f64,
                })
            }
            Ok(_) | Err(_) => bad += 1,
        }
    }
    Err(Error::SearchExhausted(format!(
        "no avoiding shift in {max_draws} draws; bad fraction {:.4}",
        bad as f64 / max_draws as f64
    )))
}

/// Total transversal hit count of the shifted axis-parallel line lattice
/// against the mesh. Degenerate grazing poses are reported as errors.
pub fn count_lattice_line_hits(
    mesh: &TriMesh,
    t: &Vector3<f64>,
    bbox: &Aabb,
    pad: f64,
) -> Result<usize> {
    let mut total = 0;
    for axis in 0..3usize {
        let (b, c) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let jb = (bbox.min[b] - t[b]).floor() as i64..=(bbox.max[b] - t[b]).ceil() as i64;
        for j in jb {
            let vb = t[b] + j as f64;
            if vb < bbox.min[b] - pad || vb > bbox.max[b] + pad {
                continue;
            }
            let kc = (bbox.min[c] - t[c]).floor() as i64..=(bbox.max[c] - t[c]).ceil() as i64;
            for k in kc {
                let vc = t[c] + k as f64;
                if vc < bbox.min[c] - pad || vc > bbox.max[c] + pad {
                    continue;
                }
                let mut a0 = Point3::origin();
                let mut a1 = Point3::origin();
                a0[axis] = bbox.min[axis] - pad;
                a1[axis] = bbox.max[axis] + pad;
                a0[b] = vb;
                a1[b] = vb;
                a0[c] = vc;
                a1[c] = vc;
                total += segment_mesh_hits(&Segment::new(a0, a1), mesh)?.len();
            }
        }
    }
    Ok(total)
}
