//! Combinatorial types of small convex polyhedra, each with one
//! realization as a halfspace list.
//!
//! The shipped table holds every simple type with 4 to 8 faces and the
//! pyramids over 4- to 7-gons. It was produced by [`generate`] and is
//! checked against the known type counts when tests run.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gauss;
use crate::math::Vec3;
use crate::poly::{HalfSpace, Polyhedron};
use crate::sample;

/// Number of combinatorial types of simple polyhedra with `k` faces, for
/// `k = 4..=8`.
pub const SIMPLE_TYPE_COUNTS: [(usize, usize); 5] = [(4, 1), (5, 1), (6, 2), (7, 5), (8, 14)];

pub const MIN_FACES: usize = 4;
pub const MAX_FACES: usize = 8;

const DATA: &str = include_str!("../data/catalog.txt");

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub faces: usize,
    /// Every vertex has degree 3.
    pub simple: bool,
    pub halfspaces: Vec<HalfSpace>,
}

impl CatalogEntry {
    pub fn realize(&self) -> Result<Polyhedron> {
        Polyhedron::from_halfspaces(&self.halfspaces)
    }
}

/// The shipped table, in file order: by face count, simple types first.
pub fn catalog() -> Result<Vec<CatalogEntry>> {
    parse(DATA)
}

pub fn entries_with_faces(k: usize) -> Result<Vec<CatalogEntry>> {
    if !(MIN_FACES..=MAX_FACES).contains(&k) {
        return Err(Error::UnsupportedFaceCount(k));
    }
    Ok(catalog()?.into_iter().filter(|e| e.faces == k).collect())
}

/// Parses the table format: `type NAME FACES simple|pyramid` followed by
/// `h NX NY NZ D` lines. `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut out: Vec<CatalogEntry> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Catalog(format!("line {}: {raw}", lineno + 1));
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok[0] {
            "type" if tok.len() == 4 => out.push(CatalogEntry {
                name: tok[1].to_string(),
                faces: tok[2].parse().map_err(|_| bad())?,
                simple: match tok[3] {
                    "simple" => true,
                    "pyramid" => false,
                    _ => return Err(bad()),
                },
                halfspaces: Vec::new(),
            }),
            "h" if tok.len() == 5 => {
                let mut v = [0.0; 4];
                for i in 0..4 {
                    v[i] = tok[i + 1].parse().map_err(|_| bad())?;
                }
                let entry = out.last_mut().ok_or_else(bad)?;
                entry.halfspaces.push(HalfSpace::new(Vec3::new(v[0], v[1], v[2]), v[3]));
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

pub fn format_catalog(entries: &[CatalogEntry]) -> String {
    let mut s = String::from("# type NAME FACES simple|pyramid, then one line per halfspace: h NX NY NZ OFFSET\n");
    for e in entries {
        s += &format!(
            "type {} {} {}\n",
            e.name,
            e.faces,
            if e.simple { "simple" } else { "pyramid" }
        );
        for h in &e.halfspaces {
            let n = h.normal;
            s += &format!("h {:?} {:?} {:?} {:?}\n", n.x(), n.y(), n.z(), h.offset);
        }
    }
    s
}

/// Isomorphism invariant of the edge graph with its cyclic vertex orders,
/// identifying mirror images. Two convex polyhedra have the same code iff
/// they have the same combinatorial type.
pub fn canonical_code(p: &Polyhedron) -> Result<Vec<u32>> {
    let rot: Vec<Vec<usize>> = (0..p.num_vertices())
        .map(|v| gauss::vertex_star(p, v).map(|s| s.neighbors))
        .collect::<Result<_>>()?;
    let mut best: Option<Vec<u32>> = None;
    for u in 0..rot.len() {
        for &w in &rot[u] {
            for mirror in [false, true] {
                let code = traverse(&rot, u, w, mirror);
                if best.as_ref().is_none_or(|b| code < *b) {
                    best = Some(code);
                }
            }
        }
    }
    best.ok_or(Error::DegenerateInput("empty graph".into()))
}

fn traverse(rot: &[Vec<usize>], start: usize, first: usize, mirror: bool) -> Vec<u32> {
    const UNSET: u32 = u32::MAX;
    let mut label = alloc::vec![UNSET; rot.len()];
    let mut reference = alloc::vec![0usize; rot.len()];
    let mut order = alloc::vec![start];
    label[start] = 0;
    reference[start] = first;
    let mut code = Vec::new();
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        let nb = &rot[x];
        let k = nb.len();
        let at = nb.iter().position(|&y| y == reference[x]).unwrap_or(0);
        for j in 0..k {
            let idx = if mirror { (at + k - j) % k } else { (at + j) % k };
            let y = nb[idx];
            if label[y] == UNSET {
                label[y] = order.len() as u32;
                reference[y] = x;
                order.push(y);
            }
            code.push(label[y]);
        }
        code.push(UNSET);
    }
    code
}

/// Numbers of triangles, quadrilaterals, … up to octagons.
pub fn face_vector(p: &Polyhedron) -> [usize; 6] {
    let mut v = [0; 6];
    for f in p.faces() {
        v[(f.len() - 3).min(5)] += 1;
    }
    v
}

/// Face vector, then canonical code.
type TypeKey = ([usize; 6], Vec<u32>);

/// Random search for one realization of every simple type with `4..=max`
/// faces, plus pyramids over `4..max`-gons. Among realizations of the
/// same type the one with the lowest ratio is kept.
pub fn generate(seed: u64, max_faces: usize, tries_per_count: usize) -> Result<Vec<CatalogEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k in MIN_FACES..=max_faces {
        let mut found: BTreeMap<Vec<u32>, (f64, Polyhedron)> = BTreeMap::new();
        for _ in 0..tries_per_count {
            let Ok(p) = sample::random_convex(&mut rng, k) else {
                continue;
            };
            if (0..p.num_vertices()).any(|v| p.degree(v) != 3) {
                continue;
            }
            let code = canonical_code(&p)?;
            let m = p.melzak_ratio()?;
            if found.get(&code).is_none_or(|(best, _)| m < *best) {
                found.insert(code, (m, p));
            }
        }
        let mut types: Vec<(TypeKey, Polyhedron)> = found
            .into_iter()
            .map(|(code, (_, p))| ((face_vector(&p), code), p))
            .collect();
        types.sort_by(|a, b| b.0 .0.cmp(&a.0 .0).then(a.0 .1.cmp(&b.0 .1)));
        for (i, (_, p)) in types.into_iter().enumerate() {
            let q = p.normalized_volume()?;
            out.push(CatalogEntry {
                name: format!("s{k}.{}", i + 1),
                faces: k,
                simple: true,
                halfspaces: q.halfspaces().to_vec(),
            });
        }
        if k > 4 {
            let n = k - 1;
            let p = Polyhedron::canonical(crate::poly::Shape::NgonPyramid {
                n,
                base_radius: 1.0,
                height: 1.0,
            })?
            .normalized_volume()?;
            out.push(CatalogEntry {
                name: format!("pyramid{n}"),
                faces: k,
                simple: false,
                halfspaces: p.halfspaces().to_vec(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Shape;

    #[test]
    fn shipped_table_is_complete_and_consistent() {
        let cat = catalog().unwrap();
        let mut codes = Vec::new();
        for e in &cat {
            let p = e.realize().unwrap();
            assert_eq!(p.num_faces(), e.faces, "{}", e.name);
            assert_eq!(p.euler_characteristic(), 2);
            assert!(p.validate().is_valid());
            let simple = (0..p.num_vertices()).all(|v| p.degree(v) == 3);
            assert_eq!(simple, e.simple, "{}", e.name);
            if !e.simple {
                let apex = (0..p.num_vertices()).map(|v| p.degree(v)).max().unwrap();
                assert_eq!(apex, e.faces - 1);
            }
            codes.push(canonical_code(&p).unwrap());
        }
        let mut sorted = codes.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
        for (k, count) in SIMPLE_TYPE_COUNTS {
            assert_eq!(
                cat.iter().filter(|e| e.faces == k && e.simple).count(),
                count,
                "k = {k}"
            );
        }
        assert_eq!(cat.iter().filter(|e| e.faces == 4).count(), 1);
    }

    #[test]
    fn format_round_trips() {
        let cat = catalog().unwrap();
        let again = parse(&format_catalog(&cat)).unwrap();
        assert_eq!(again.len(), cat.len());
        for (a, b) in cat.iter().zip(&again) {
            assert_eq!((&a.name, a.faces, a.simple), (&b.name, b.faces, b.simple));
            for (x, y) in a.halfspaces.iter().zip(&b.halfspaces) {
                assert!(x.normal.dist(y.normal) < 1e-15 && (x.offset - y.offset).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn code_identifies_types() {
        let cube = Polyhedron::canonical(Shape::Cube).unwrap();
        let boxed = Polyhedron::canonical(Shape::Box { a: 1.0, b: 2.0, c: 0.5 }).unwrap();
        assert_eq!(canonical_code(&cube).unwrap(), canonical_code(&boxed).unwrap());
        let prism = Polyhedron::canonical(Shape::OptimalPrism).unwrap();
        let pyr = Polyhedron::canonical(Shape::NgonPyramid {
            n: 4,
            base_radius: 1.0,
            height: 1.0,
        })
        .unwrap();
        assert_ne!(canonical_code(&prism).unwrap(), canonical_code(&pyr).unwrap());
    }

    #[test]
    fn code_ignores_relabelling_and_mirroring() {
        let cat = catalog().unwrap();
        let e = cat.iter().find(|e| e.faces == 7).unwrap();
        let p = e.realize().unwrap();
        let mut hs = e.halfspaces.clone();
        hs.reverse();
        let mirrored: Vec<HalfSpace> = hs
            .iter()
            .map(|h| HalfSpace::new(Vec3::new(-h.normal.x(), h.normal.y(), h.normal.z()), h.offset))
            .collect();
        let q = Polyhedron::from_halfspaces(&mirrored).unwrap();
        assert_eq!(canonical_code(&p).unwrap(), canonical_code(&q).unwrap());
    }

    #[test]
    fn unsupported_counts() {
        assert!(matches!(entries_with_faces(3), Err(Error::UnsupportedFaceCount(3))));
        assert!(matches!(entries_with_faces(9), Err(Error::UnsupportedFaceCount(9))));
        assert_eq!(entries_with_faces(5).unwrap().len(), 2);
    }

    /// Rewrites the shipped table. Run with `--ignored` after changing the
    /// generator.
    #[test]
    #[ignore]
    fn regenerate_table() {
        let entries = generate(2024, MAX_FACES, 200_000).unwrap();
        for (k, count) in SIMPLE_TYPE_COUNTS {
            assert_eq!(
                entries.iter().filter(|e| e.faces == k && e.simple).count(),
                count,
                "k = {k}"
            );
        }
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/catalog.txt");
        std::fs::write(path, format_catalog(&entries)).unwrap();
    }
}
