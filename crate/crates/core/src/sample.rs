//! Seeded random polyhedra for tests, benchmarks and optimizer restarts.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{self, Vec3, TAU};
use crate::poly::{HalfSpace, Polyhedron};

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = math::sqrt(1.0 - z * z);
    Vec3::new(r * math::cos(phi), r * math::sin(phi), z)
}

/// Random bounded intersection of `faces` halfspaces in which every
/// halfspace supports a face. Offsets lie in `[0.8, 1.2]`.
pub fn random_convex<R: Rng + ?Sized>(rng: &mut R, faces: usize) -> Result<Polyhedron> {
    if faces < 4 {
        return Err(Error::BadParameter(alloc::format!("{faces} faces")));
    }
    for _ in 0..10_000 {
        let hs: Vec<HalfSpace> = (0..faces)
            .map(|_| HalfSpace::new(random_unit(rng), rng.random_range(0.8..1.2)))
            .collect();
        let Ok(b) = Polyhedron::from_halfspaces_report(&hs) else {
            continue;
        };
        if b.dropped.is_empty() && well_shaped(&b.polyhedron) {
            return Ok(b.polyhedron);
        }
    }
    Err(Error::NumericalBreakdown)
}

/// Rejects samples with very short edges, nearly flat dihedrals or extreme
/// elongation, which make finite-difference checks ill-conditioned.
fn well_shaped(p: &Polyhedron) -> bool {
    let d = p.diameter();
    let short = p
        .edges()
        .iter()
        .all(|&[a, b]| p.vertices()[a].dist(p.vertices()[b]) > 0.02 * d);
    let flat = (0..p.num_edges()).all(|e| {
        let [f, g] = p.edge_faces(e);
        p.halfspaces()[f].normal.angle(p.halfspaces()[g].normal) > 0.05
    });
    short && flat && p.melzak_ratio().is_ok_and(|m| m < 4000.0)
}

/// Random convex polyhedron with only degree-3 vertices.
pub fn random_simple<R: Rng + ?Sized>(rng: &mut R, faces: usize) -> Result<Polyhedron> {
    for _ in 0..1000 {
        let p = random_convex(rng, faces)?;
        if (0..p.num_vertices()).all(|v| p.degree(v) == 3) {
            return Ok(p);
        }
    }
    Err(Error::NumericalBreakdown)
}

/// Pyramid over a random convex `n`-gon with the apex above a random interior
/// point. The apex has degree `n`.
pub fn random_pyramid<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Polyhedron> {
    if n < 3 {
        return Err(Error::BadParameter(alloc::format!("{n}-gon")));
    }
    // Jittered angles keep the polygon convex and away from degenerate.
    let mut angles: Vec<f64> = (0..n)
        .map(|k| (k as f64 + rng.random_range(-0.3..0.3)) * TAU / n as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    let r: f64 = 1.0;
    let base: Vec<Vec3> = angles
        .iter()
        .map(|&a| Vec3::new(r * math::cos(a), r * math::sin(a), 0.0))
        .collect();
    let apex = Vec3::new(
        rng.random_range(-0.3..0.3),
        rng.random_range(-0.3..0.3),
        rng.random_range(0.5..1.5),
    );
    let mut hs = alloc::vec![HalfSpace::new(-Vec3::Z, 0.0)];
    for i in 0..n {
        let a = base[i];
        let b = base[(i + 1) % n];
        let normal = (b - a).cross(apex - a);
        hs.push(HalfSpace::through(normal, a));
    }
    let p = Polyhedron::from_halfspaces(&hs)?;
    if p.num_faces() != n + 1 {
        return Err(Error::NumericalBreakdown);
    }
    Ok(p)
}

/// Rebuilds `p` after rotating every face normal by a random angle up to
/// `magnitude` and scaling its offset by up to `1 ± magnitude`.
pub fn jitter<R: Rng + ?Sized>(rng: &mut R, p: &Polyhedron, magnitude: f64) -> Result<Polyhedron> {
    let hs: Vec<HalfSpace> = p
        .halfspaces()
        .iter()
        .map(|h| {
            let axis = random_unit(rng);
            let tilt = axis - h.normal * axis.dot(h.normal);
            let n = (h.normal + tilt.normalized() * math::tan(rng.random_range(0.0..magnitude))).normalized();
            HalfSpace::new(n, h.offset * (1.0 + rng.random_range(-magnitude..magnitude)))
        })
        .collect();
    Polyhedron::from_halfspaces(&hs)
}
