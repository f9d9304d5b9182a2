//! ASCII OFF meshes.

use melzak_core::{Polyhedron, Vec3};

use crate::sig::sig12;

#[derive(Debug, thiserror::Error)]
pub enum OffError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] melzak_core::Error),
}

fn err(line: usize, msg: impl Into<String>) -> OffError {
    OffError::Parse { line, msg: msg.into() }
}

/// Parses `OFF`, a counts line `nv nf ne`, `nv` vertex lines and `nf` face
/// lines `k i1 … ik`. Blank lines and `#` comments are skipped. Extra
/// tokens after a face (colour values) are ignored.
pub fn parse_off(text: &str) -> Result<Polyhedron, OffError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
    // Some writers put the counts on the header line.
    let mut rest_of_header = match header.strip_prefix("OFF") {
        Some(r) if r.is_empty() || r.starts_with(char::is_whitespace) => r.trim(),
        _ => return Err(err(hl, format!("expected OFF header, found {header:?}"))),
    };
    let (cl, counts) = if rest_of_header.is_empty() {
        lines.next().ok_or_else(|| err(hl + 1, "missing counts line"))?
    } else {
        (hl, std::mem::take(&mut rest_of_header))
    };
    let c: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(cl, format!("bad count {t:?}"))))
        .collect::<Result<_, _>>()?;
    let (nv, nf) = match c.as_slice() {
        [nv, nf] | [nv, nf, _] => (*nv, *nf),
        _ => return Err(err(cl, "counts line must be `nv nf ne`")),
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, "unexpected end of file in vertex list"))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, format!("bad coordinate {t:?}"))))
            .collect::<Result<_, _>>()?;
        if xs.len() != 3 {
            return Err(err(ln, "vertex line must have 3 coordinates"));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(err(ln, "non-finite coordinate"));
        }
        vertices.push(Vec3::new(xs[0], xs[1], xs[2]));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, "unexpected end of file in face list"))?;
        let mut tok = l.split_whitespace();
        let k: usize = tok
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln, "face line must start with its vertex count"))?;
        let idx: Vec<usize> = tok
            .by_ref()
            .take(k)
            .map(|t| t.parse().map_err(|_| err(ln, format!("bad vertex index {t:?}"))))
            .collect::<Result<_, _>>()?;
        if idx.len() != k {
            return Err(err(ln, format!("face lists {} of {k} vertices", idx.len())));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(err(ln, format!("vertex index {bad} out of range")));
        }
        faces.push(idx);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing data after face list"));
    }
    Ok(Polyhedron::from_mesh(vertices, faces)?)
}

/// OFF text with coordinates at 12 significant digits.
pub fn emit_off(p: &Polyhedron) -> String {
    let mut s = format!("OFF\n{} {} {}\n", p.num_vertices(), p.num_faces(), p.num_edges());
    for v in p.vertices() {
        s += &format!("{} {} {}\n", sig12(v.x()), sig12(v.y()), sig12(v.z()));
    }
    for f in p.faces() {
        s += &f.len().to_string();
        for i in f {
            s += &format!(" {i}");
        }
        s.push('\n');
    }
    s
}
