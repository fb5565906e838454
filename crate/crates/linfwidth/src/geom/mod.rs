//! Geometry kernel: triangle meshes in `R^3`, periodic voxel grids,
//! Monte Carlo measure estimators, and the intersection primitives the
//! pipelines are built from.
//!
//! Ambient mesh dimension is fixed at 3; grids support dimensions up to 6.
//! All randomized estimators take explicit seeds and are deterministic,
//! including under internal parallelism (samples are split into fixed-size
//! chunks with per-chunk derived streams and merged in chunk order).

mod field;
mod grid;
mod iso;
mod mc;
mod mesh;
mod tri;

pub use field::ScalarField;
pub use grid::{distance_to_occupied, grid_components, ComponentInfo, Labeling, TorusGrid, NO_LABEL};
pub use iso::isosurface;
pub use mc::{level_set_area_mc, mc_volume, Estimate};
pub use mesh::{clip_mesh_to_cube, mesh_area, TriMesh};
pub use tri::{segment_mesh_hits, tri_box_overlap, tri_tri_intersection, Hit, TriTri};

use nalgebra::{Point3, Vector3};

/// Axis-aligned box in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        Self { min, max }
    }

    /// The cube `[min, min + side]^3`.
    pub fn cube(min: Point3<f64>, side: f64) -> Self {
        Self {
            min,
            max: min + Vector3::new(side, side, side),
        }
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|a| self.min[a] <= other.max[a] && self.max[a] >= other.min[a])
    }

    pub fn grow(&self, pad: f64) -> Aabb {
        let d = Vector3::new(pad, pad, pad);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extents();
        (e.x * e.y * e.z).max(0.0)
    }
}

/// Line segment in `R^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
}

impl Segment {
    pub fn new(a: Point3<f64>, b: Point3<f64>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn point_at(&self, t: f64) -> Point3<f64> {
        self.a + (self.b - self.a) * t
    }

    pub fn bbox(&self) -> Aabb {
        Aabb {
            min: Point3::new(
                self.a.x.min(self.b.x),
                self.a.y.min(self.b.y),
                self.a.z.min(self.b.z),
            ),
            max: Point3::new(
                self.a.x.max(self.b.x),
                self.a.y.max(self.b.y),
                self.a.z.max(self.b.z),
            ),
        }
    }
}
