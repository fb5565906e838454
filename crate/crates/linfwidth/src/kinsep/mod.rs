//! Kinematic intersection averages over the cube symmetry group, posed
//! separator towers with nerve complexes, and the high-codimension width
//! pipeline in `R^3`.
//!
//! A pose is a signed permutation followed by a translation — an isometry
//! of both the Euclidean and the l∞ metric that maps the integer lattice
//! to itself, so posed copies of Z³-periodic sets stay periodic.

mod kinematic;
mod nerve;
mod pipeline;
mod tower;

pub use kinematic::{
    avoid_shift, flat_count_oracle, flat_hypersurface_oracle, group_avg_abs_normal_dot,
    group_avg_tangent_projection, kinematic_count_avg, kinematic_hypersurface_avg, AvoidResult,
    KinematicAverage, PoseIntegral,
};
pub use nerve::{nerve_map, sample_free_queries, NerveAtlas, NerveComplex, NerveMapResult, NerveVertex};
pub use pipeline::{width_pipeline_highcodim, HighCodimReport, RouteOutcome, WidthCertificate};
pub use tower::{
    build_tower, clip_segment_to_box, level_bound, periodic_tiles, point_mesh_distance,
    LevelReport, SeparatorTower,
};

use nalgebra::{Point3, Vector3};

use crate::sgnperm::SignedPermutation;
use crate::{Error, Result};

/// An l∞ isometry: `y ↦ s(y) + x` with `s` a signed permutation of the
/// three coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    s: SignedPermutation,
    x: Vector3<f64>,
}

impl Pose {
    pub fn new(s: SignedPermutation, x: Vector3<f64>) -> Result<Self> {
        if s.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: s.dim(),
            });
        }
        Ok(Self { s, x })
    }

    pub fn identity() -> Self {
        Self {
            s: SignedPermutation::identity(3),
            x: Vector3::zeros(),
        }
    }

    pub fn signed_permutation(&self) -> &SignedPermutation {
        &self.s
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.x
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let w = self
            .s
            .apply(&[v.x, v.y, v.z])
            .expect("dimension 3 checked at construction");
        Vector3::new(w[0], w[1], w[2])
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.apply_vector(&p.coords) + self.x)
    }

    pub fn apply_mesh(&self, mesh: &crate::geom::TriMesh) -> crate::geom::TriMesh {
        mesh.mapped(|p| self.apply_point(p))
    }

    pub fn apply_segment(&self, seg: &crate::geom::Segment) -> crate::geom::Segment {
        crate::geom::Segment::new(self.apply_point(&seg.a), self.apply_point(&seg.b))
    }

    pub fn inverse(&self) -> Pose {
        let s_inv = self.s.inverse();
        let x = self
            .s
            .inverse()
            .apply(&[self.x.x, self.x.y, self.x.z])
            .expect("dimension 3");
        Pose {
            s: s_inv,
            x: -Vector3::new(x[0], x[1], x[2]),
        }
    }

    /// `self ∘ other`: apply `other`, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        // self(other(y)) = s1(s2 y + x2) + x1 = (s1 s2) y + s1 x2 + x1.
        let s = self.s.compose(&other.s).expect("dimension 3");
        Pose {
            s,
            x: self.apply_vector(&other.x) + self.x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sgnperm::sample_one;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pose_roundtrip_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let pose = Pose::new(
                sample_one(3, &mut rng),
                Vector3::new(0.3, -1.2, 0.7),
            )
            .unwrap();
            let p = Point3::new(0.1, 0.2, 0.3);
            let q = pose.apply_point(&p);
            let back = pose.inverse().apply_point(&q);
            assert!((back - p).norm() < 1e-14);

            let other = Pose::new(sample_one(3, &mut rng), Vector3::new(1.0, 0.5, -0.2)).unwrap();
            let composed = pose.compose(&other);
            let direct = pose.apply_point(&other.apply_point(&p));
            assert!((composed.apply_point(&p) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn pose_preserves_mesh_area() {
        let mesh = crate::meshgen::icosphere(0.5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let pose = Pose::new(sample_one(3, &mut rng), Vector3::new(0.4, 0.1, -0.9)).unwrap();
            let posed = pose.apply_mesh(&mesh);
            assert!((posed.area() - mesh.area()).abs() < 1e-12 * mesh.area().max(1.0));
        }
    }
}
