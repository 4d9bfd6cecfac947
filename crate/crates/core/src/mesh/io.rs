//! Line-oriented mesh text format.
//!
//! ```text
//! # comment
//! dim n_vert n_elem n_bfacet
//! x [y]                 (n_vert lines)
//! i0 i1 [i2]            (n_elem lines, 0-based)
//! elem local_facet id   (n_bfacet lines)
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

fn parse_fields<T: FromStr>(line: usize, text: &str, count: usize, what: &str) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::Parse {
            line,
            message: format!("expected {count} fields for {what}, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<T>().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse `{f}` in {what}"),
            })
        })
        .collect()
}

/// Parse and validate a non-periodic mesh with explicit boundary pieces.
pub fn load_polygon_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let content = l.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "empty mesh file".into(),
    })?;
    let h: Vec<usize> = parse_fields(hl, header, 4, "header")?;
    let (dim, n_vert, n_elem, n_bfacet) = (h[0], h[1], h[2], h[3]);
    if dim != 1 && dim != 2 {
        return Err(Error::Parse {
            line: hl,
            message: format!("unsupported dimension {dim}"),
        });
    }
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of file while reading {what}"),
        })
    };
    let mut vertices = Vec::with_capacity(n_vert);
    for _ in 0..n_vert {
        let (l, t) = next("vertices")?;
        let c: Vec<f64> = parse_fields(l, t, dim, "vertex")?;
        vertices.push([c[0], if dim == 2 { c[1] } else { 0.0 }]);
    }
    let mut elements = Vec::with_capacity(n_elem * (dim + 1));
    for _ in 0..n_elem {
        let (l, t) = next("elements")?;
        let idx: Vec<usize> = parse_fields(l, t, dim + 1, "element")?;
        if let Some(&bad) = idx.iter().find(|&&i| i >= n_vert) {
            return Err(Error::Parse {
                line: l,
                message: format!("vertex index {bad} out of range"),
            });
        }
        elements.extend(idx);
    }
    let mut boundary = Vec::with_capacity(n_bfacet);
    for _ in 0..n_bfacet {
        let (l, t) = next("boundary facets")?;
        let b: Vec<usize> = parse_fields(l, t, 3, "boundary facet")?;
        boundary.push((b[0], b[1], b[2]));
    }
    if let Some((l, _)) = next("trailing").ok() {
        return Err(Error::Parse {
            line: l,
            message: "trailing content after boundary facets".into(),
        });
    }
    Mesh::new(dim, vertices, elements, [None, None], &boundary)
}

/// Serialize a non-periodic mesh in the format read by [`load_polygon_mesh`].
pub fn write_mesh(mesh: &Mesh) -> Result<String> {
    if mesh.periodic().iter().any(|p| p.is_some()) {
        return Err(Error::invalid("the mesh file format has no periodic identification"));
    }
    let dim = mesh.dim();
    let bf = mesh.boundary_facets();
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {} {}", dim, mesh.n_vertices(), mesh.n_elements(), bf.len());
    for p in mesh.vertices() {
        if dim == 1 {
            let _ = writeln!(s, "{}", p[0]);
        } else {
            let _ = writeln!(s, "{} {}", p[0], p[1]);
        }
    }
    for e in 0..mesh.n_elements() {
        let idx: Vec<String> = mesh.element(e).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
    }
    for (e, f, id) in bf {
        let _ = writeln!(s, "{e} {f} {id}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_triangle_domain_mesh;

    #[test]
    fn reference_triangle_file() {
        let text = "# one triangle\n2 3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 0 0\n0 1 1\n0 2 2\n";
        let m = load_polygon_mesh(text).unwrap();
        assert_eq!(m.boundary_pieces().len(), 3);
        assert_eq!(m.boundary_pieces()[0].normal, [0.0, -1.0]);
    }

    #[test]
    fn flipped_element_named() {
        let text = "2 4 2 0\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 3 2\n";
        match load_polygon_mesh(text) {
            Err(Error::MeshValidation { item, .. }) => assert_eq!(item, "element 1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        match load_polygon_mesh("2 3 1 3\n0 0\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_polygon_mesh("").is_err());
    }

    #[test]
    fn roundtrip_triangle_domain() {
        let m = build_triangle_domain_mesh(4).unwrap();
        let back = load_polygon_mesh(&write_mesh(&m).unwrap()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.boundary_pieces(), m.boundary_pieces());
    }
}
