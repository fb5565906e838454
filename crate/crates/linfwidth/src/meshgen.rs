//! Test-manifold generators: icospheres, tori of revolution, and seeded
//! perturbed spheres. All outputs are closed orientable meshes and
//! deterministic given their parameters.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geom::TriMesh;
use crate::{Error, Result};

/// Icosphere: subdivided icosahedron projected to the sphere of radius `r`
/// centered at the origin. Subdivision `s` yields `20 · 4^s` triangles.
pub fn icosphere(radius: f64, subdivisions: u32) -> Result<TriMesh> {
    if radius <= 0.0 {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if subdivisions > 7 {
        return Err(Error::Precondition(format!(
            "subdivision limit is 7, got {subdivisions}"
        )));
    }
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = vec![
        Vector3::new(-1.0, phi, 0.0),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(-1.0, -phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(0.0, -1.0, phi),
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, -1.0, -phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(phi, 0.0, -1.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, -1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|v| v.normalize())
    .collect();

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

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    vertices.push((vertices[key.0] + vertices[key.1]).normalize());
                    vertices.len() - 1
                });
            }
            next.push([t[0], mid[0], mid[2]]);
            next.push([t[1], mid[1], mid[0]]);
            next.push([t[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }

    TriMesh::new(
        vertices
            .into_iter()
            .map(|v| Point3::from(v * radius))
            .collect(),
        triangles,
    )
}

/// Torus of revolution with major radius `major`, tube radius `minor`,
/// sampled on a `nu × nv` parameter grid. Genus 1; area converges to
/// `4π² · major · minor`.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> Result<TriMesh> {
    if !(major > minor && minor > 0.0) {
        return Err(Error::Precondition(format!(
            "torus radii must satisfy major > minor > 0, got {major}, {minor}"
        )));
    }
    if nu < 3 || nv < 3 {
        return Err(Error::Precondition(
            "torus grid must be at least 3×3".into(),
        ));
    }
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let ring = major + minor * v.cos();
            vertices.push(Point3::new(
                ring * u.cos(),
                ring * u.sin(),
                minor * v.sin(),
            ));
        }
    }
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let a = i * nv + j;
            let b = (i + 1) % nu * nv + j;
            let c = (i + 1) % nu * nv + (j + 1) % nv;
            let d = i * nv + (j + 1) % nv;
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Icosphere with a smooth seeded radial perturbation: radius multiplied
/// by `1 + amplitude · g(v)` with `g` a fixed small sum of cosine lobes
/// with seeded directions and phases, `|g| ≤ 1`. Amplitude 0 reproduces
/// the icosphere exactly.
pub fn perturbed_sphere(
    radius: f64,
    subdivisions: u32,
    amplitude: f64,
    seed: u64,
) -> Result<TriMesh> {
    if !(0.0..0.9).contains(&amplitude) {
        return Err(Error::Precondition(format!(
            "amplitude must lie in [0, 0.9), got {amplitude}"
        )));
    }
    let base = icosphere(radius, subdivisions)?;
    if amplitude == 0.0 {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const LOBES: usize = 4;
    let mut dirs = Vec::with_capacity(LOBES);
    let mut freqs = Vec::with_capacity(LOBES);
    let mut phases = Vec::with_capacity(LOBES);
    for _ in 0..LOBES {
        let v = Vector3::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        );
        dirs.push(if v.norm() > 1e-6 {
            v.normalize()
        } else {
            Vector3::x()
        });
        freqs.push(1.0 + 2.0 * rng.random::<f64>());
        phases.push(rng.random::<f64>() * 2.0 * std::f64::consts::PI);
    }
    Ok(base.mapped(|p| {
        let u = p.coords.normalize();
        let g: f64 = (0..LOBES)
            .map(|k| (freqs[k] * dirs[k].dot(&u) + phases[k]).cos())
            .sum::<f64>()
            / LOBES as f64;
        Point3::from(p.coords * (1.0 + amplitude * g))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosphere_area_close_to_sphere() {
        let m = icosphere(1.0, 4).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 2);
        let exact = 4.0 * PI;
        assert!(((m.area() - exact) / exact).abs() < 0.01);
        // Area scales by radius^2.
        let m2 = icosphere(2.0, 3).unwrap();
        assert!(((m2.area() - 16.0 * PI) / (16.0 * PI)).abs() < 0.01);
    }

    #[test]
    fn torus_area_close_to_analytic() {
        let m = torus(2.0, 0.5, 64, 32).unwrap();
        assert!(m.is_closed());
        assert_eq!(m.euler_characteristic(), 0);
        let exact = 4.0 * PI * PI * 2.0 * 0.5;
        assert!(
            ((m.area() - exact) / exact).abs() < 0.01,
            "area={} exact={exact}",
            m.area()
        );
    }

    #[test]
    fn perturbed_sphere_zero_amplitude_is_identity() {
        let a = icosphere(1.0, 2).unwrap();
        let b = perturbed_sphere(1.0, 2, 0.0, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbed_sphere_is_closed_and_seeded() {
        let a = perturbed_sphere(1.0, 3, 0.2, 7).unwrap();
        assert!(a.is_closed());
        assert_eq!(a.euler_characteristic(), 2);
        let b = perturbed_sphere(1.0, 3, 0.2, 7).unwrap();
        assert_eq!(a, b);
        let c = perturbed_sphere(1.0, 3, 0.2, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn parameter_validation() {
        assert!(icosphere(0.0, 1).is_err());
        assert!(icosphere(1.0, 8).is_err());
        assert!(torus(0.5, 0.5, 16, 16).is_err());
        assert!(perturbed_sphere(1.0, 2, 0.95, 1).is_err());
    }
}
