//! Nerve complexes of posed foam-complement covers and the induced
//! displacement-bounded map.
//!
//! Every copy shares one base grid: the occupancy of a posed copy at a
//! world point is the base grid's occupancy at the pulled-back point, so
//! component structure, distances, and lifts are computed once and reused
//! exactly for every pose.
//!
//! The map sends a point to the convex combination of one representative
//! vertex per covering copy (the deepest cell of the complement component
//! containing the point), weighted by the point's distance to that copy's
//! separator. Components have lifted extent below the grid period, so
//! every vertex stays within l∞ distance 1 of every point of its
//! component, and convexity of l∞ balls keeps the combination there too.

use std::collections::BTreeSet;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::{distance_to_occupied, grid_components, Labeling, TorusGrid};
use crate::{Error, Result};

use super::Pose;

/// Precomputed component data of the shared foam grid: labeling with
/// integer lifts, distance-to-separator transform, and one representative
/// (deepest) cell per component.
pub struct NerveAtlas {
    res: usize,
    occupied: Vec<bool>,
    labeling: Labeling,
    dist: Vec<u32>,
    vertex_cell: Vec<usize>,
}

impl NerveAtlas {
    /// Builds the atlas; the grid must be separated (no winding, all
    /// component extents below the period).
    pub fn build(grid: &TorusGrid) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::DimensionLimit(format!(
                "nerve atlas requires a 3-dimensional grid, got {}",
                grid.dim()
            )));
        }
        let labeling = grid_components(grid, true);
        if !labeling.separated(grid.res()) {
            return Err(Error::Precondition(
                "grid is not separated: a component winds or spans the period".into(),
            ));
        }
        let dist = distance_to_occupied(grid);
        let mut vertex_cell = vec![usize::MAX; labeling.components.len()];
        let mut vertex_depth = vec![0u32; labeling.components.len()];
        for cell in 0..grid.num_cells() {
            let label = labeling.label(cell);
            if label == crate::geom::NO_LABEL {
                continue;
            }
            let l = label as usize;
            if vertex_cell[l] == usize::MAX || dist[cell] > vertex_depth[l] {
                vertex_cell[l] = cell;
                vertex_depth[l] = dist[cell];
            }
        }
        Ok(Self {
            res: grid.res(),
            occupied: grid.occupied().to_vec(),
            labeling,
            dist,
            vertex_cell,
        })
    }

    pub fn num_components(&self) -> usize {
        self.labeling.components.len()
    }

    fn cell_of(&self, y: &Point3<f64>) -> (usize, [usize; 3], Vector3<f64>) {
        let res = self.res as f64;
        let mut coords = [0usize; 3];
        let mut frac = Vector3::zeros();
        for a in 0..3 {
            let w = y[a] - y[a].floor();
            let k = ((w * res) as usize).min(self.res - 1);
            coords[a] = k;
            frac[a] = w;
        }
        let idx = (coords[0] * self.res + coords[1]) * self.res + coords[2];
        (idx, coords, frac)
    }
}

/// A vertex of the nerve: one representative point per complement
/// component of one copy.
#[derive(Debug, Clone, PartialEq)]
pub struct NerveVertex {
    pub copy: usize,
    pub component: usize,
    /// Realized position in `R^3` (world frame, wrapped representative).
    pub point: Point3<f64>,
}

/// The nerve of the cover of the complement of the tower's top level by
/// the complement components of all copies. Simplices are sorted vertex
/// index lists; copy indices within a simplex are pairwise distinct by
/// construction (one component per copy can contain a point).
#[derive(Debug, Clone, Default)]
pub struct NerveComplex {
    pub vertices: Vec<NerveVertex>,
    pub simplices: BTreeSet<Vec<usize>>,
}

impl NerveComplex {
    pub fn dimension(&self) -> usize {
        self.simplices.iter().map(|s| s.len()).max().unwrap_or(0).saturating_sub(1)
    }

    /// Every simplex touches each copy at most once.
    pub fn copy_indices_pairwise_distinct(&self) -> bool {
        self.simplices.iter().all(|s| {
            let copies: Vec<usize> = s.iter().map(|&v| self.vertices[v].copy).collect();
            let set: BTreeSet<usize> = copies.iter().copied().collect();
            set.len() == copies.len()
        })
    }
}

/// Outcome of mapping a batch of queries through the nerve map.
#[derive(Debug, Clone)]
pub struct NerveMapResult {
    pub nerve: NerveComplex,
    /// `(x, φ(x))` pairs in query order.
    pub mapped: Vec<(Point3<f64>, Point3<f64>)>,
    pub sup_displacement: f64,
}

/// Maps query points through the nerve of the posed copies' complements.
/// Errors if a query lies on every copy's separator cells (inside the
/// rasterized top-level intersection).
pub fn nerve_map(
    atlas: &NerveAtlas,
    poses: &[Pose],
    queries: &[Point3<f64>],
) -> Result<NerveMapResult> {
    if poses.is_empty() {
        return Err(Error::Precondition("at least one copy is required".into()));
    }
    let res = atlas.res as f64;
    let inverses: Vec<Pose> = poses.iter().map(Pose::inverse).collect();

    let mut nerve = NerveComplex::default();
    let mut vertex_index: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new();
    let mut mapped = Vec::with_capacity(queries.len());
    let mut sup = 0.0f64;

    for (qi, x) in queries.iter().enumerate() {
        let mut total_weight = 0.0;
        let mut displacement = Vector3::zeros();
        let mut witness: Vec<usize> = Vec::with_capacity(poses.len());
        for (ci, (pose, inv)) in poses.iter().zip(&inverses).enumerate() {
            let y = inv.apply_point(x);
            let (cell, coords, frac) = atlas.cell_of(&y);
            if atlas.occupied[cell] {
                continue;
            }
            let label = atlas.labeling.label(cell) as usize;
            let weight = f64::from(atlas.dist[cell]);
            // Lift of the query in the component's frame.
            let lift_c = atlas.labeling.lift(cell);
            let x_lift = Vector3::new(
                frac.x + (f64::from(lift_c[0]) - coords[0] as f64) / res,
                frac.y + (f64::from(lift_c[1]) - coords[1] as f64) / res,
                frac.z + (f64::from(lift_c[2]) - coords[2] as f64) / res,
            );
            let vcell = atlas.vertex_cell[label];
            let lift_v = atlas.labeling.lift(vcell);
            let v_lift = Vector3::new(
                (f64::from(lift_v[0]) + 0.5) / res,
                (f64::from(lift_v[1]) + 0.5) / res,
                (f64::from(lift_v[2]) + 0.5) / res,
            );
            // World-frame displacement toward this copy's vertex: the
            // translation cancels, only the signed permutation acts.
            let d_world = pose.apply_vector(&(v_lift - x_lift));
            displacement += weight * d_world;
            total_weight += weight;

            let vid = *vertex_index.entry((ci, label)).or_insert_with(|| {
                let vc = vcell;
                let vx = vc / (atlas.res * atlas.res);
                let vy = vc / atlas.res % atlas.res;
                let vz = vc % atlas.res;
                let wrapped = Point3::new(
                    (vx as f64 + 0.5) / res,
                    (vy as f64 + 0.5) / res,
                    (vz as f64 + 0.5) / res,
                );
                nerve.vertices.push(NerveVertex {
                    copy: ci,
                    component: label,
                    point: pose.apply_point(&wrapped),
                });
                nerve.vertices.len() - 1
            });
            witness.push(vid);
        }
        if total_weight == 0.0 {
            return Err(Error::QueryOnSeparator { query: qi });
        }
        witness.sort_unstable();
        nerve.simplices.insert(witness);
        let phi = Point3::from(x.coords + displacement / total_weight);
        let disp = (phi - x).abs().max();
        sup = sup.max(disp);
        mapped.push((*x, phi));
    }

    Ok(NerveMapResult {
        nerve,
        mapped,
        sup_displacement: sup,
    })
}

/// Draws seeded uniform queries in `[0,1)^3`, rejecting points whose cell
/// is occupied in every posed copy (the rasterized top-level set, where
/// the map is undefined).
pub fn sample_free_queries(
    atlas: &NerveAtlas,
    poses: &[Pose],
    count: usize,
    seed: u64,
) -> Vec<Point3<f64>> {
    let inverses: Vec<Pose> = poses.iter().map(Pose::inverse).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = Point3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
        let free = inverses.iter().any(|inv| {
            let (cell, _, _) = atlas.cell_of(&inv.apply_point(&x));
            !atlas.occupied[cell]
        });
        if free {
            out.push(x);
        }
    }
    out
}
