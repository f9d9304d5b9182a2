//! Polyhedron representation: halfspaces plus vertex/edge/face incidence,
//! kept in sync, and the functionals `e(P)`, `v(P)` and `m(P) = e³/v`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, solve3, Vec3, PI, TAU};
use crate::tol::TOL;

/// Closed halfspace `⟨x, normal⟩ ≤ offset` with a unit outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfSpace {
    pub normal: Vec3,
    pub offset: f64,
}

impl HalfSpace {
    /// Builds a halfspace from any nonzero normal; the normal is rescaled to
    /// unit length and the offset with it.
    pub fn new(normal: Vec3, offset: f64) -> Self {
        let n = normal.norm();
        HalfSpace {
            normal: normal / n,
            offset: offset / n,
        }
    }

    /// Halfspace whose boundary plane passes through `point`.
    pub fn through(normal: Vec3, point: Vec3) -> Self {
        let n = normal.normalized();
        HalfSpace {
            normal: n,
            offset: n.dot(point),
        }
    }

    #[inline]
    pub fn signed_distance(&self, x: Vec3) -> f64 {
        x.dot(self.normal) - self.offset
    }

    pub fn is_valid(&self) -> bool {
        self.normal.is_finite() && self.offset.is_finite() && (self.normal.norm() - 1.0).abs() <= TOL.unit_norm
    }

    pub fn scaled(&self, s: f64) -> Self {
        HalfSpace {
            normal: self.normal,
            offset: self.offset * s,
        }
    }
}

/// A bounded sphere-type polyhedron with both representations.
///
/// Faces are cyclically ordered counter-clockwise when seen from outside, so
/// every edge is traversed once in each direction. `halfspaces[i]` is the
/// supporting halfspace of `faces[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron {
    vertices: Vec<Vec3>,
    edges: Vec<[usize; 2]>,
    faces: Vec<Vec<usize>>,
    halfspaces: Vec<HalfSpace>,
    convex: bool,
    /// `edge_faces[e] = [f, g]`: `f` traverses `edges[e][0] → edges[e][1]`, `g` the reverse.
    edge_faces: Vec<[usize; 2]>,
    vertex_edges: Vec<Vec<usize>>,
    edge_index: BTreeMap<(usize, usize), usize>,
}

/// Result of [`Polyhedron::from_halfspaces_report`].
#[derive(Clone, Debug)]
pub struct HalfspaceBuild {
    pub polyhedron: Polyhedron,
    /// Input indices of halfspaces that do not support a face.
    pub dropped: Vec<usize>,
    /// `face_source[f]` is the input index of the halfspace of face `f`.
    pub face_source: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub euler_ok: bool,
    pub coplanarity_max_error: f64,
    pub coplanarity_ok: bool,
    pub convexity_ok: bool,
    pub edge_manifold_ok: bool,
    pub dedup_ok: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.euler_ok && self.coplanarity_ok && self.convexity_ok && self.edge_manifold_ok && self.dedup_ok
    }
}

/// Named test solids. Cube, regular tetrahedron and optimal prism have unit
/// volume; the remaining shapes are built as parameterized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Cube,
    RegularTetrahedron,
    /// Right prism over an equilateral triangle with side equal to height.
    OptimalPrism,
    /// Regular `n`-gon base of circumradius `base_radius` in `z = 0`, apex at `(0, 0, height)`.
    NgonPyramid {
        n: usize,
        base_radius: f64,
        height: f64,
    },
    /// Axis-aligned box centred at the origin.
    Box {
        a: f64,
        b: f64,
        c: f64,
    },
    /// Regular octahedron with vertices at `±e_i`.
    Octahedron,
    /// Regular icosahedron with inradius 1.
    Icosahedron,
}

impl Polyhedron {
    /// Intersection of closed halfspaces.
    pub fn from_halfspaces(hs: &[HalfSpace]) -> Result<Polyhedron> {
        Ok(Self::from_halfspaces_report(hs)?.polyhedron)
    }

    /// Like [`Polyhedron::from_halfspaces`], also reporting which halfspaces
    /// were redundant and where each face came from.
    pub fn from_halfspaces_report(hs: &[HalfSpace]) -> Result<HalfspaceBuild> {
        if hs.len() < 4 {
            return Err(Error::DegenerateInput(format!(
                "need at least 4 halfspaces, got {}",
                hs.len()
            )));
        }
        let mut planes: Vec<HalfSpace> = Vec::with_capacity(hs.len() + 6);
        for (i, h) in hs.iter().enumerate() {
            let n = h.normal.norm();
            if !(n.is_finite() && n > 1e-300 && h.offset.is_finite()) {
                return Err(Error::DegenerateInput(format!("halfspace {i} is not finite")));
            }
            planes.push(HalfSpace::new(h.normal, h.offset));
        }
        let scale = planes.iter().fold(0.0f64, |m, h| m.max(h.offset.abs()));
        if scale == 0.0 {
            return Err(Error::EmptyInterior);
        }
        // Bounding box far outside the polytope; any vertex on it means the
        // intersection is unbounded.
        let far = 1e6 * scale;
        let n_in = planes.len();
        for axis in [Vec3::X, Vec3::Y, Vec3::Z] {
            planes.push(HalfSpace {
                normal: axis,
                offset: far,
            });
            planes.push(HalfSpace {
                normal: -axis,
                offset: far,
            });
        }

        let loose = 1e-9 * scale;
        let mut candidates: Vec<Vec3> = Vec::new();
        let np = planes.len();
        for i in 0..np {
            for j in (i + 1)..np {
                for k in (j + 1)..np {
                    let (a, b, c) = (planes[i], planes[j], planes[k]);
                    let Some(x) = solve3(a.normal, b.normal, c.normal, [a.offset, b.offset, c.offset], 1e-12) else {
                        continue;
                    };
                    if planes.iter().all(|h| h.signed_distance(x) <= loose) {
                        candidates.push(x);
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Err(Error::EmptyInterior);
        }
        if candidates.iter().any(|x| x.0.iter().any(|c| c.abs() > 0.5 * far)) {
            return Err(Error::UnboundedIntersection);
        }
        planes.truncate(n_in);

        let diam = bbox_diagonal(&candidates);
        if !(diam > 0.0) {
            return Err(Error::EmptyInterior);
        }
        let tol = TOL.dedup * diam;
        let feas = tol.max(1e-12 * scale);
        let mut vertices: Vec<Vec3> = Vec::new();
        for x in candidates {
            if planes.iter().any(|h| h.signed_distance(x) > feas) {
                continue;
            }
            if !vertices.iter().any(|v| v.dist(x) <= tol) {
                vertices.push(x);
            }
        }
        if vertices.len() < 4 {
            return Err(Error::EmptyInterior);
        }

        let mut faces: Vec<Vec<usize>> = Vec::new();
        let mut face_hs: Vec<HalfSpace> = Vec::new();
        let mut face_source = Vec::new();
        let mut dropped = Vec::new();
        let on_plane = TOL.coplanar * diam;
        for (i, h) in planes.iter().enumerate() {
            let members: Vec<usize> = (0..vertices.len())
                .filter(|&v| h.signed_distance(vertices[v]).abs() <= on_plane.max(feas))
                .collect();
            if members.len() < 3 {
                dropped.push(i);
                continue;
            }
            let cycle = order_ccw(&vertices, &members, h.normal);
            let mut sorted = cycle.clone();
            sorted.sort_unstable();
            let dup = faces.iter().any(|f| {
                let mut g = f.clone();
                g.sort_unstable();
                g == sorted
            });
            if dup {
                dropped.push(i);
                continue;
            }
            faces.push(cycle);
            face_hs.push(*h);
            face_source.push(i);
        }
        if faces.len() < 4 {
            return Err(Error::EmptyInterior);
        }
        // Keep only vertices that belong to some face (all of them, for a
        // consistent build) and renumber densely.
        let poly = Polyhedron::assemble(vertices, faces, face_hs, true).map_err(|e| match e {
            Error::NonManifold(m) => Error::DegenerateInput(m),
            other => other,
        })?;
        if poly.signed_volume() <= 1e-12 * diam * diam * diam {
            return Err(Error::EmptyInterior);
        }
        Ok(HalfspaceBuild {
            polyhedron: poly,
            dropped,
            face_source,
        })
    }

    /// Builds a polyhedron from an explicit mesh. Face cycles must be
    /// consistently oriented; supporting halfspaces come from Newell normals.
    /// The convex flag is set when every vertex satisfies every face
    /// halfspace within tolerance.
    pub fn from_mesh(vertices: Vec<Vec3>, faces: Vec<Vec<usize>>) -> Result<Polyhedron> {
        for (fi, f) in faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(Error::NonManifold(format!("face {fi} has fewer than 3 vertices")));
            }
            if let Some(&bad) = f.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::IndexOutOfRange {
                    what: "vertex",
                    index: bad,
                });
            }
        }
        let mut hs = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let n = newell_normal(&vertices, f);
            if !(n.norm() > 0.0) || !n.is_finite() {
                return Err(Error::DegenerateInput(format!("face {fi} has zero area")));
            }
            let c = centroid(&vertices, f);
            hs.push(HalfSpace::through(n, c));
        }
        let mut p = Polyhedron::assemble(vertices, faces, hs, false)?;
        let tol = TOL.convexity * p.diameter();
        p.convex = p
            .halfspaces
            .iter()
            .all(|h| p.vertices.iter().all(|&x| h.signed_distance(x) <= tol));
        Ok(p)
    }

    /// Derives edges and incidence; rejects non-manifold or inconsistently
    /// oriented face sets.
    fn assemble(
        vertices: Vec<Vec3>,
        faces: Vec<Vec<usize>>,
        halfspaces: Vec<HalfSpace>,
        convex: bool,
    ) -> Result<Polyhedron> {
        let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (fi, f) in faces.iter().enumerate() {
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                if a == b {
                    return Err(Error::NonManifold(format!("face {fi} repeats vertex {a}")));
                }
                if directed.insert((a, b), fi).is_some() {
                    return Err(Error::NonManifold(format!(
                        "directed edge {a}->{b} used twice (inconsistent orientation)"
                    )));
                }
            }
        }
        let mut edges = Vec::new();
        let mut edge_faces = Vec::new();
        let mut edge_index = BTreeMap::new();
        for (&(a, b), &f) in directed.iter() {
            if a < b {
                let Some(&g) = directed.get(&(b, a)) else {
                    return Err(Error::NonManifold(format!("edge {a}-{b} has only one face")));
                };
                edge_index.insert((a, b), edges.len());
                edges.push([a, b]);
                edge_faces.push([f, g]);
            } else if !directed.contains_key(&(b, a)) {
                return Err(Error::NonManifold(format!("edge {b}-{a} has only one face")));
            }
        }
        let mut vertex_edges = vec![Vec::new(); vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            vertex_edges[a].push(e);
            vertex_edges[b].push(e);
        }
        if let Some(v) = vertex_edges.iter().position(|es| es.is_empty()) {
            return Err(Error::NonManifold(format!("vertex {v} is not on any face")));
        }
        Ok(Polyhedron {
            vertices,
            edges,
            faces,
            halfspaces,
            convex,
            edge_faces,
            vertex_edges,
            edge_index,
        })
    }

    pub fn canonical(shape: Shape) -> Result<Polyhedron> {
        match shape {
            Shape::Cube => Polyhedron::canonical(Shape::Box { a: 1.0, b: 1.0, c: 1.0 }),
            Shape::Box { a, b, c } => {
                if !(a > 0.0 && b > 0.0 && c > 0.0) {
                    return Err(Error::BadParameter(format!("box sides {a}, {b}, {c}")));
                }
                let hs = [
                    HalfSpace::new(Vec3::X, a / 2.0),
                    HalfSpace::new(-Vec3::X, a / 2.0),
                    HalfSpace::new(Vec3::Y, b / 2.0),
                    HalfSpace::new(-Vec3::Y, b / 2.0),
                    HalfSpace::new(Vec3::Z, c / 2.0),
                    HalfSpace::new(-Vec3::Z, c / 2.0),
                ];
                Polyhedron::from_halfspaces(&hs)
            }
            Shape::RegularTetrahedron => {
                // Unit volume: a³/(6√2) = 1, inradius a/(2√6).
                let a = math::cbrt(6.0 * math::sqrt(2.0));
                let r = a / (2.0 * math::sqrt(6.0));
                let hs: Vec<HalfSpace> = [
                    Vec3::new(1.0, 1.0, 1.0),
                    Vec3::new(1.0, -1.0, -1.0),
                    Vec3::new(-1.0, 1.0, -1.0),
                    Vec3::new(-1.0, -1.0, 1.0),
                ]
                .iter()
                .map(|&n| HalfSpace::new(n, r * n.norm()))
                .collect();
                Polyhedron::from_halfspaces(&hs)
            }
            Shape::OptimalPrism => {
                // (√3/4)s³ = 1 with height s.
                let s = math::cbrt(4.0 / math::sqrt(3.0));
                let r = s / (2.0 * math::sqrt(3.0));
                let mut hs = vec![HalfSpace::new(Vec3::Z, s / 2.0), HalfSpace::new(-Vec3::Z, s / 2.0)];
                for k in 0..3 {
                    let phi = TAU * k as f64 / 3.0;
                    hs.push(HalfSpace::new(Vec3::new(math::cos(phi), math::sin(phi), 0.0), r));
                }
                Polyhedron::from_halfspaces(&hs)
            }
            Shape::NgonPyramid { n, base_radius, height } => {
                if n < 3 || !(base_radius > 0.0) || !(height > 0.0) {
                    return Err(Error::BadParameter(format!(
                        "pyramid n={n} radius={base_radius} height={height}"
                    )));
                }
                let inr = base_radius * math::cos(PI / n as f64);
                let mut hs = vec![HalfSpace::new(-Vec3::Z, 0.0)];
                for k in 0..n {
                    let phi = TAU * (k as f64 + 0.5) / n as f64;
                    let normal = Vec3::new(height * math::cos(phi), height * math::sin(phi), inr);
                    hs.push(HalfSpace::new(normal, height * inr));
                }
                Polyhedron::from_halfspaces(&hs)
            }
            Shape::Octahedron => {
                let mut hs = Vec::new();
                for sx in [1.0, -1.0] {
                    for sy in [1.0, -1.0] {
                        for sz in [1.0, -1.0] {
                            hs.push(HalfSpace::new(Vec3::new(sx, sy, sz), 1.0));
                        }
                    }
                }
                Polyhedron::from_halfspaces(&hs)
            }
            Shape::Icosahedron => {
                // Face normals of the icosahedron are the dodecahedron's vertex directions.
                let g = (1.0 + math::sqrt(5.0)) / 2.0;
                let mut dirs = Vec::new();
                for sx in [1.0, -1.0] {
                    for sy in [1.0, -1.0] {
                        for sz in [1.0, -1.0] {
                            dirs.push(Vec3::new(sx, sy, sz));
                        }
                    }
                }
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        dirs.push(Vec3::new(0.0, s1 / g, s2 * g));
                        dirs.push(Vec3::new(s1 / g, s2 * g, 0.0));
                        dirs.push(Vec3::new(s1 * g, 0.0, s2 / g));
                    }
                }
                let hs: Vec<HalfSpace> = dirs.iter().map(|&d| HalfSpace::new(d, d.norm())).collect();
                Polyhedron::from_halfspaces(&hs)
            }
        }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }
    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }
    pub fn is_convex(&self) -> bool {
        self.convex
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Faces on either side of edge `e`; the first traverses it as stored.
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }
    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.vertex_edges[v].len()
    }
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }
    /// The endpoint of `e` that is not `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }
    pub fn vertex_faces(&self, v: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.faces[f].contains(&v)).collect()
    }
    /// Predecessor and successor of `v` in the cycle of face `f`.
    pub fn face_neighbors(&self, f: usize, v: usize) -> Option<(usize, usize)> {
        let cyc = &self.faces[f];
        let i = cyc.iter().position(|&x| x == v)?;
        let n = cyc.len();
        Some((cyc[(i + n - 1) % n], cyc[(i + 1) % n]))
    }
    pub fn face_edges(&self, f: usize) -> Vec<usize> {
        let cyc = &self.faces[f];
        (0..cyc.len())
            .filter_map(|i| self.find_edge(cyc[i], cyc[(i + 1) % cyc.len()]))
            .collect()
    }

    pub fn edge_vector(&self, e: usize) -> Vec3 {
        let [a, b] = self.edges[e];
        self.vertices[b] - self.vertices[a]
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                d = d.max(self.vertices[i].dist(self.vertices[j]));
            }
        }
        d
    }

    /// Total edge length `e(P)`.
    pub fn edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| self.vertices[a].dist(self.vertices[b]))
            .sum()
    }

    /// Divergence-theorem volume; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        let mut six_v = 0.0;
        for f in &self.faces {
            let c = centroid(&self.vertices, f);
            for i in 0..f.len() {
                let a = self.vertices[f[i]];
                let b = self.vertices[f[(i + 1) % f.len()]];
                six_v += math::det3(c, a, b);
            }
        }
        six_v / 6.0
    }

    pub fn volume(&self) -> Result<f64> {
        let v = self.signed_volume();
        if !(v > 0.0) {
            return Err(Error::InconsistentOrientation(v));
        }
        Ok(v)
    }

    /// Melzak ratio `e(P)³ / v(P)`.
    pub fn melzak_ratio(&self) -> Result<f64> {
        let v = self.signed_volume();
        let d = self.diameter();
        if !(v.abs() > 1e-14 * d * d * d) {
            return Err(Error::ZeroVolume);
        }
        if v < 0.0 {
            return Err(Error::InconsistentOrientation(v));
        }
        let e = self.edge_length();
        Ok(e * e * e / v)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * newell_normal(&self.vertices, &self.faces[f]).norm()
    }

    /// Area centroid of face `f`.
    pub fn face_centroid(&self, f: usize) -> Vec3 {
        let cyc = &self.faces[f];
        let c0 = centroid(&self.vertices, cyc);
        let mut total = 0.0;
        let mut acc = Vec3::ZERO;
        for i in 0..cyc.len() {
            let a = self.vertices[cyc[i]];
            let b = self.vertices[cyc[(i + 1) % cyc.len()]];
            let w = 0.5 * (a - c0).cross(b - c0).norm();
            acc += (c0 + a + b) * (w / 3.0);
            total += w;
        }
        if total > 0.0 {
            acc / total
        } else {
            c0
        }
    }

    /// Interior angle of face `f` at its vertex `v`, in `(0, 2π)`.
    pub fn face_angle(&self, f: usize, v: usize) -> f64 {
        let (a, b) = self.face_neighbors(f, v).expect("vertex on face");
        let h = self.vertices[v];
        let to_prev = self.vertices[a] - h;
        let to_next = self.vertices[b] - h;
        let n = self.halfspaces[f].normal;
        let ang = math::atan2(to_next.cross(to_prev).dot(n), to_next.dot(to_prev));
        if ang < 0.0 {
            ang + TAU
        } else {
            ang
        }
    }

    /// Copy with every vertex multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Polyhedron {
        let mut p = self.clone();
        for v in &mut p.vertices {
            *v = *v * s;
        }
        for h in &mut p.halfspaces {
            *h = h.scaled(s);
        }
        p
    }

    /// Copy scaled to unit volume.
    pub fn normalized_volume(&self) -> Result<Polyhedron> {
        let v = self.volume()?;
        Ok(self.scaled(1.0 / math::cbrt(v)))
    }

    /// Same incidence and halfspaces with replaced vertex positions; used to
    /// build deliberately corrupted inputs for validation.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Polyhedron> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::BadParameter("vertex count mismatch".into()));
        }
        let mut p = self.clone();
        p.vertices = vertices;
        Ok(p)
    }

    /// Labelled combinatorial signature: for every vertex the sorted list of
    /// incident face indices, sorted. Two builds over the same indexed
    /// halfspaces have equal signatures iff their face lattices agree.
    pub fn combinatorial_signature(&self) -> Vec<Vec<usize>> {
        let mut inc: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (f, cyc) in self.faces.iter().enumerate() {
            for &v in cyc {
                inc[v].push(f);
            }
        }
        for l in &mut inc {
            l.sort_unstable();
        }
        inc.sort();
        inc
    }

    /// Checks every structural invariant and reports instead of failing.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport {
            euler_ok: true,
            coplanarity_ok: true,
            convexity_ok: true,
            edge_manifold_ok: true,
            dedup_ok: true,
            ..Default::default()
        };
        let diam = self.diameter();
        let chi = self.euler_characteristic();
        if chi != 2 {
            r.euler_ok = false;
            r.messages.push(format!("Euler characteristic {chi} != 2"));
        }
        let mut max_err: f64 = 0.0;
        for (f, cyc) in self.faces.iter().enumerate() {
            for &v in cyc {
                max_err = max_err.max(self.halfspaces[f].signed_distance(self.vertices[v]).abs());
            }
        }
        r.coplanarity_max_error = max_err;
        if max_err > TOL.coplanar * diam {
            r.coplanarity_ok = false;
            r.messages.push(format!("face vertices off plane by {max_err:e}"));
        }
        if let Some(h) = self.halfspaces.iter().position(|h| !h.is_valid()) {
            r.coplanarity_ok = false;
            r.messages.push(format!("halfspace {h} does not have a unit normal"));
        }
        if self.convex {
            let tol = TOL.convexity * diam;
            let mut worst: f64 = 0.0;
            for h in &self.halfspaces {
                for &x in &self.vertices {
                    worst = worst.max(h.signed_distance(x));
                }
            }
            if worst > tol {
                r.convexity_ok = false;
                r.messages
                    .push(format!("convex flag set but a constraint is violated by {worst:e}"));
            }
        }
        let mut count: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for cyc in &self.faces {
            for i in 0..cyc.len() {
                let (a, b) = (cyc[i], cyc[(i + 1) % cyc.len()]);
                let entry = count.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        if count.values().any(|&(x, y)| x != 1 || y != 1) {
            r.edge_manifold_ok = false;
            r.messages
                .push("edges not shared by exactly two consistently oriented faces".into());
        }
        if self.signed_volume() <= 0.0 {
            r.edge_manifold_ok = false;
            r.messages.push("face orientation is not outward".into());
        }
        let dedup = TOL.dedup * diam;
        'outer: for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                if self.vertices[i].dist(self.vertices[j]) < dedup {
                    r.dedup_ok = false;
                    r.messages.push(format!("vertices {i} and {j} coincide"));
                    break 'outer;
                }
            }
        }
        r
    }
}

pub(crate) fn centroid(vertices: &[Vec3], cycle: &[usize]) -> Vec3 {
    let mut c = Vec3::ZERO;
    for &v in cycle {
        c += vertices[v];
    }
    c / cycle.len() as f64
}

/// Newell's area vector (twice the vector area) of a polygon.
pub(crate) fn newell_normal(vertices: &[Vec3], cycle: &[usize]) -> Vec3 {
    let c = centroid(vertices, cycle);
    let mut n = Vec3::ZERO;
    for i in 0..cycle.len() {
        let a = vertices[cycle[i]] - c;
        let b = vertices[cycle[(i + 1) % cycle.len()]] - c;
        n += a.cross(b);
    }
    n
}

fn bbox_diagonal(points: &[Vec3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Vec3::new(hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]).norm()
}

/// Orders coplanar points counter-clockwise about `normal`.
fn order_ccw(vertices: &[Vec3], members: &[usize], normal: Vec3) -> Vec<usize> {
    let c = centroid(vertices, members);
    let e1 = normal.any_orthogonal();
    let e2 = normal.cross(e1);
    let mut keyed: Vec<(f64, usize)> = members
        .iter()
        .map(|&v| {
            let d = vertices[v] - c;
            (math::atan2(d.dot(e2), d.dot(e1)), v)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn cube_from_halfspaces() {
        let p = Polyhedron::canonical(Shape::Cube).unwrap();
        assert_eq!((p.num_vertices(), p.num_edges(), p.num_faces()), (8, 12, 6));
        assert!(close(p.edge_length(), 12.0, 1e-14));
        assert!(close(p.volume().unwrap(), 1.0, 1e-14));
        assert!(close(p.melzak_ratio().unwrap(), 1728.0, 1e-13));
        let r = p.validate();
        assert!(r.is_valid(), "{:?}", r.messages);
        assert!(r.coplanarity_max_error < 1e-15);
    }

    #[test]
    fn tetra_and_prism_closed_forms() {
        let t = Polyhedron::canonical(Shape::RegularTetrahedron).unwrap();
        assert_eq!((t.num_vertices(), t.num_edges(), t.num_faces()), (4, 6, 4));
        assert!(close(t.volume().unwrap(), 1.0, 1e-12));
        let e = 6.0 * math::cbrt(6.0 * math::sqrt(2.0));
        assert!(close(t.edge_length(), e, 1e-12));
        assert!(close(t.melzak_ratio().unwrap(), 1296.0 * math::sqrt(2.0), 1e-12));

        let p = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        assert_eq!((p.num_vertices(), p.num_edges(), p.num_faces()), (6, 9, 5));
        assert!(close(
            p.edge_length(),
            math::powf(2.0, 2.0 / 3.0) * math::powf(3.0, 11.0 / 6.0),
            1e-12
        ));
        assert!(close(p.melzak_ratio().unwrap(), 4.0 * math::powf(3.0, 5.5), 1e-12));
        assert_eq!(p.euler_characteristic(), 2);
    }

    #[test]
    fn box_and_pyramid() {
        let b = Polyhedron::canonical(Shape::Box { a: 1.0, b: 2.0, c: 3.0 }).unwrap();
        assert!(close(b.edge_length(), 24.0, 1e-14));
        assert!(close(b.volume().unwrap(), 6.0, 1e-14));
        let p = Polyhedron::canonical(Shape::NgonPyramid {
            n: 4,
            base_radius: 1.0,
            height: 1.0,
        })
        .unwrap();
        assert_eq!((p.num_vertices(), p.num_edges(), p.num_faces()), (5, 8, 5));
        // base square of side √2, volume (1/3)·2·1
        assert!(close(p.volume().unwrap(), 2.0 / 3.0, 1e-12));
        let apex = p.vertices().iter().position(|v| v.dist(Vec3::Z) < 1e-12).unwrap();
        assert_eq!(p.degree(apex), 4);
    }

    #[test]
    fn prism_from_five_halfspaces_matches_direct_vertices() {
        let s = 1.0;
        let r = s / (2.0 * math::sqrt(3.0));
        let mut hs = vec![HalfSpace::new(Vec3::Z, 0.5), HalfSpace::new(-Vec3::Z, 0.5)];
        for k in 0..3 {
            let phi = TAU * k as f64 / 3.0;
            hs.push(HalfSpace::new(Vec3::new(math::cos(phi), math::sin(phi), 0.0), r));
        }
        let p = Polyhedron::from_halfspaces(&hs).unwrap();
        assert_eq!((p.num_vertices(), p.num_edges(), p.num_faces()), (6, 9, 5));
        // Direct construction: triangle circumradius s/√3 with vertices at the
        // directions between consecutive side normals.
        let rc = s / math::sqrt(3.0);
        for k in 0..3 {
            let phi = TAU * (k as f64 + 0.5) / 3.0;
            for z in [-0.5, 0.5] {
                let q = Vec3::new(rc * math::cos(phi), rc * math::sin(phi), z);
                assert!(p.vertices().iter().any(|v| v.dist(q) < 1e-12), "missing {q:?}");
            }
        }
    }

    #[test]
    fn octahedron_and_icosahedron() {
        let o = Polyhedron::canonical(Shape::Octahedron).unwrap();
        assert_eq!((o.num_vertices(), o.num_edges(), o.num_faces()), (6, 12, 8));
        assert!((0..6).all(|v| o.degree(v) == 4));
        let i = Polyhedron::canonical(Shape::Icosahedron).unwrap();
        assert_eq!((i.num_vertices(), i.num_edges(), i.num_faces()), (12, 30, 20));
    }

    #[test]
    fn construction_errors() {
        let open = [
            HalfSpace::new(Vec3::X, 1.0),
            HalfSpace::new(-Vec3::X, 1.0),
            HalfSpace::new(Vec3::Y, 1.0),
            HalfSpace::new(-Vec3::Y, 1.0),
            HalfSpace::new(Vec3::Z, 1.0),
        ];
        assert_eq!(
            Polyhedron::from_halfspaces(&open).unwrap_err(),
            Error::UnboundedIntersection
        );
        let empty = [
            HalfSpace::new(Vec3::X, -1.0),
            HalfSpace::new(-Vec3::X, -1.0),
            HalfSpace::new(Vec3::Y, 1.0),
            HalfSpace::new(-Vec3::Y, 1.0),
            HalfSpace::new(Vec3::Z, 1.0),
            HalfSpace::new(-Vec3::Z, 1.0),
        ];
        assert_eq!(Polyhedron::from_halfspaces(&empty).unwrap_err(), Error::EmptyInterior);
        let nan = [HalfSpace {
            normal: Vec3::new(f64::NAN, 0.0, 0.0),
            offset: 1.0,
        }; 4];
        assert!(matches!(
            Polyhedron::from_halfspaces(&nan),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            Polyhedron::canonical(Shape::NgonPyramid {
                n: 2,
                base_radius: 1.0,
                height: 1.0
            }),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn redundant_halfspaces_are_dropped() {
        let mut hs: Vec<HalfSpace> = Polyhedron::canonical(Shape::Cube).unwrap().halfspaces().to_vec();
        hs.push(HalfSpace::new(Vec3::new(1.0, 1.0, 1.0), 10.0));
        hs.push(hs[0]);
        let b = Polyhedron::from_halfspaces_report(&hs).unwrap();
        assert_eq!(b.dropped, vec![6, 7]);
        assert_eq!(b.polyhedron.num_faces(), 6);
    }

    #[test]
    fn validation_detects_displaced_vertex() {
        let p = Polyhedron::canonical(Shape::Cube).unwrap();
        let mut vs = p.vertices().to_vec();
        vs[0] += Vec3::new(1e-3, 0.0, 0.0);
        let q = p.with_vertices(vs).unwrap();
        let r = q.validate();
        assert!(r.euler_ok);
        assert!(!r.coplanarity_ok);
        assert!(!r.is_valid());
    }

    #[test]
    fn scale_invariance_of_ratio() {
        let p = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        let m = p.melzak_ratio().unwrap();
        for s in [0.1, 1.0, 10.0] {
            let q = p.scaled(s);
            assert!((q.melzak_ratio().unwrap() - m).abs() / m < 1e-10);
        }
    }

    #[test]
    fn halfspace_roundtrip_reproduces_polyhedron() {
        let p = Polyhedron::canonical(Shape::NgonPyramid {
            n: 5,
            base_radius: 1.3,
            height: 0.7,
        })
        .unwrap();
        let q = Polyhedron::from_halfspaces(p.halfspaces()).unwrap();
        assert_eq!(p.num_vertices(), q.num_vertices());
        for v in p.vertices() {
            assert!(q.vertices().iter().any(|w| w.dist(*v) < 1e-9));
        }
    }

    #[test]
    fn face_angles_sum_to_polygon_total() {
        let p = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        for f in 0..p.num_faces() {
            let k = p.faces()[f].len();
            let s: f64 = p.faces()[f].iter().map(|&v| p.face_angle(f, v)).sum();
            assert!((s - (k as f64 - 2.0) * PI).abs() < 1e-12);
        }
    }
}
