//! Simplicial meshes (intervals and triangles) with periodic identification
//! and flat boundary pieces.

mod build;
mod io;
mod refine;

use std::collections::HashMap;

pub use build::{build_interval_mesh, build_rect_tri_mesh, build_triangle_domain_mesh, TRIANGLE_DOMAIN};
pub use io::{load_polygon_mesh, write_mesh};
pub use refine::{refine_uniform, refine_with_prolongation};

use crate::error::{Error, Result};

/// Tolerance for normal consistency of boundary facets.
pub const NORMAL_TOL: f64 = 1e-12;

/// Relative tolerance (times the bounding box size) for coordinate matching.
pub const MATCH_TOL: f64 = 1e-9;

/// A flat part of the boundary with a single outward normal.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPiece {
    pub id: usize,
    pub normal: [f64; 2],
    /// `(element, local facet)`
    pub facets: Vec<(usize, usize)>,
}

/// Two element facets glued together (possibly across a periodic seam).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetPair {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

/// Affine geometry of one P1 element.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub measure: f64,
    /// gradients of the barycentric coordinates (only the first `dim`
    /// components are meaningful)
    pub grads: [[f64; 2]; 3],
    pub points: [[f64; 2]; 3],
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<[f64; 2]>,
    elements: Vec<usize>,
    dof_map: Vec<usize>,
    n_dof: usize,
    pieces: Vec<BoundaryPiece>,
    periodic: [Option<(f64, f64)>; 2],
    interior_facets: Vec<FacetPair>,
    measures: Vec<f64>,
}

fn elem_item(e: usize) -> String {
    format!("element {e}")
}

impl Mesh {
    /// Build and validate a mesh.
    ///
    /// `boundary` lists `(element, local facet, piece id)`; every facet that
    /// is not glued to another one (directly or periodically) must appear
    /// exactly once.
    pub fn new(
        dim: usize,
        vertices: Vec<[f64; 2]>,
        elements: Vec<usize>,
        periodic: [Option<(f64, f64)>; 2],
        boundary: &[(usize, usize, usize)],
    ) -> Result<Mesh> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(format!("unsupported mesh dimension {dim}")));
        }
        let nv = dim + 1;
        if elements.is_empty() || elements.len() % nv != 0 {
            return Err(Error::invalid("element list is empty or has wrong stride"));
        }
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::invalid("non-finite vertex coordinate"));
        }
        if let Some(&bad) = elements.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::invalid(format!("vertex index {bad} out of range")));
        }
        for (k, p) in periodic.iter().enumerate() {
            if let Some((lo, hi)) = p {
                if k >= dim || !(lo < hi) {
                    return Err(Error::invalid("invalid periodic interval"));
                }
            }
        }
        let mut mesh = Mesh {
            dim,
            vertices,
            elements,
            dof_map: Vec::new(),
            n_dof: 0,
            pieces: Vec::new(),
            periodic,
            interior_facets: Vec::new(),
            measures: Vec::new(),
        };
        mesh.measures = (0..mesh.n_elements())
            .map(|e| mesh.signed_measure(e))
            .collect();
        if let Some(e) = mesh.measures.iter().position(|&m| !(m > 0.0)) {
            return Err(Error::MeshValidation {
                item: elem_item(e),
                message: format!("non-positive measure {:e} (inverted or degenerate)", mesh.measures[e]),
            });
        }
        mesh.build_dof_map();
        mesh.build_facets(boundary)?;
        Ok(mesh)
    }

    fn bbox_size(&self) -> f64 {
        let mut size: f64 = 0.0;
        for k in 0..self.dim {
            let lo = self.vertices.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = self.vertices.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            size = size.max(hi - lo);
        }
        size.max(f64::MIN_POSITIVE)
    }

    /// Quantized coordinates after wrapping periodic directions.
    fn match_key(&self, p: [f64; 2], tol: f64) -> [i64; 2] {
        let mut key = [0i64; 2];
        for k in 0..self.dim {
            let mut x = p[k];
            if let Some((lo, hi)) = self.periodic[k] {
                let period = hi - lo;
                x = (x - lo).rem_euclid(period);
                if (x - period).abs() < tol {
                    x = 0.0;
                }
            }
            key[k] = (x / tol).round() as i64;
        }
        key
    }

    fn build_dof_map(&mut self) {
        let n = self.vertices.len();
        if self.periodic.iter().all(|p| p.is_none()) {
            self.dof_map = (0..n).collect();
            self.n_dof = n;
            return;
        }
        let tol = MATCH_TOL * self.bbox_size();
        let mut seen: HashMap<[i64; 2], usize> = HashMap::new();
        let mut map = Vec::with_capacity(n);
        for i in 0..n {
            let key = self.match_key(self.vertices[i], tol);
            let next = seen.len();
            map.push(*seen.entry(key).or_insert(next));
        }
        self.n_dof = seen.len();
        self.dof_map = map;
    }

    fn build_facets(&mut self, boundary: &[(usize, usize, usize)]) -> Result<()> {
        let tol = MATCH_TOL * self.bbox_size();
        let mut groups: HashMap<[i64; 2], Vec<(usize, usize)>> = HashMap::new();
        let mut order: Vec<[i64; 2]> = Vec::new();
        for e in 0..self.n_elements() {
            for f in 0..self.dim + 1 {
                let key = self.match_key(self.facet_midpoint(e, f), tol);
                let g = groups.entry(key).or_default();
                if g.is_empty() {
                    order.push(key);
                }
                g.push((e, f));
            }
        }
        let mut boundary_facets: HashMap<(usize, usize), bool> = HashMap::new();
        for key in &order {
            let g = &groups[key];
            match g.len() {
                1 => {
                    boundary_facets.insert(g[0], false);
                }
                2 => self.interior_facets.push(FacetPair { a: g[0], b: g[1] }),
                _ => {
                    return Err(Error::MeshValidation {
                        item: format!("element {} facet {}", g[0].0, g[0].1),
                        message: format!("facet shared by {} elements (non-conforming)", g.len()),
                    })
                }
            }
        }

        let mut by_piece: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
        for (idx, &(e, f, id)) in boundary.iter().enumerate() {
            if e >= self.n_elements() || f > self.dim {
                return Err(Error::MeshValidation {
                    item: format!("boundary facet {idx}"),
                    message: format!("element {e} / local facet {f} out of range"),
                });
            }
            match boundary_facets.get_mut(&(e, f)) {
                None => {
                    return Err(Error::MeshValidation {
                        item: format!("boundary facet {idx}"),
                        message: format!("element {e} facet {f} is not on the boundary"),
                    })
                }
                Some(true) => {
                    return Err(Error::MeshValidation {
                        item: format!("boundary facet {idx}"),
                        message: "facet listed twice".into(),
                    })
                }
                Some(seen) => *seen = true,
            }
            match by_piece.iter_mut().find(|(pid, _)| *pid == id) {
                Some((_, v)) => v.push((e, f)),
                None => by_piece.push((id, vec![(e, f)])),
            }
        }
        if let Some((&(e, f), _)) = boundary_facets.iter().filter(|(_, &s)| !s).min_by_key(|(k, _)| **k) {
            return Err(Error::MeshValidation {
                item: format!("element {e} facet {f}"),
                message: "boundary facet not assigned to any piece".into(),
            });
        }
        by_piece.sort_by_key(|(id, _)| *id);
        for (id, facets) in by_piece {
            let normal = self.facet_normal(facets[0].0, facets[0].1);
            for &(e, f) in &facets[1..] {
                let n = self.facet_normal(e, f);
                let d = ((n[0] - normal[0]).powi(2) + (n[1] - normal[1]).powi(2)).sqrt();
                if d > NORMAL_TOL {
                    return Err(Error::MeshValidation {
                        item: format!("element {e} facet {f}"),
                        message: format!("normal differs from the rest of piece {id} by {d:e}"),
                    });
                }
            }
            self.pieces.push(BoundaryPiece { id, normal, facets });
        }
        Ok(())
    }

    fn signed_measure(&self, e: usize) -> f64 {
        let v = self.element(e);
        let p = |i: usize| self.vertices[v[i]];
        if self.dim == 1 {
            p(1)[0] - p(0)[0]
        } else {
            let (a, b, c) = (p(0), p(1), p(2));
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len() / (self.dim + 1)
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> [f64; 2] {
        self.vertices[i]
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elements[e * nv..(e + 1) * nv]
    }

    pub fn dof_map(&self) -> &[usize] {
        &self.dof_map
    }

    #[inline]
    pub fn dof(&self, vertex: usize) -> usize {
        self.dof_map[vertex]
    }

    /// Degrees of freedom of the vertices of element `e`.
    pub fn element_dofs(&self, e: usize) -> [usize; 3] {
        let v = self.element(e);
        let mut out = [0; 3];
        for (o, &vi) in out.iter_mut().zip(v) {
            *o = self.dof_map[vi];
        }
        out
    }

    pub fn boundary_pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    pub fn periodic(&self) -> [Option<(f64, f64)>; 2] {
        self.periodic
    }

    pub fn is_periodic(&self, k: usize) -> bool {
        self.periodic[k].is_some()
    }

    /// True if every coordinate direction is periodic.
    pub fn fully_periodic(&self) -> bool {
        (0..self.dim).all(|k| self.periodic[k].is_some())
    }

    pub fn interior_facets(&self) -> &[FacetPair] {
        &self.interior_facets
    }

    pub fn measure(&self, e: usize) -> f64 {
        self.measures[e]
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    /// Coordinates of one representative vertex per dof.
    pub fn dof_coords(&self) -> Vec<[f64; 2]> {
        let mut out = vec![[f64::NAN; 2]; self.n_dof];
        let mut set = vec![false; self.n_dof];
        for (i, &d) in self.dof_map.iter().enumerate() {
            if !set[d] {
                out[d] = self.vertices[i];
                set[d] = true;
            }
        }
        out
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        let v = self.element(e);
        let mut points = [[0.0; 2]; 3];
        for (p, &vi) in points.iter_mut().zip(v) {
            *p = self.vertices[vi];
        }
        let measure = self.measures[e];
        let mut grads = [[0.0; 2]; 3];
        if self.dim == 1 {
            grads[0][0] = -1.0 / measure;
            grads[1][0] = 1.0 / measure;
        } else {
            let [a, b, c] = points;
            let det = 2.0 * measure;
            // rows of the inverse Jacobian of x = a + J (l1, l2)
            grads[1] = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
            grads[2] = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
            grads[0] = [-grads[1][0] - grads[2][0], -grads[1][1] - grads[2][1]];
        }
        ElementGeometry {
            measure,
            grads,
            points,
        }
    }

    /// Local vertex positions (within the element) spanning facet `f`.
    pub fn facet_local_vertices(&self, f: usize) -> Vec<usize> {
        if self.dim == 1 {
            vec![f]
        } else {
            vec![f, (f + 1) % 3]
        }
    }

    pub fn facet_points(&self, e: usize, f: usize) -> Vec<[f64; 2]> {
        let v = self.element(e);
        self.facet_local_vertices(f)
            .into_iter()
            .map(|l| self.vertices[v[l]])
            .collect()
    }

    pub fn facet_midpoint(&self, e: usize, f: usize) -> [f64; 2] {
        let pts = self.facet_points(e, f);
        let n = pts.len() as f64;
        [
            pts.iter().map(|p| p[0]).sum::<f64>() / n,
            pts.iter().map(|p| p[1]).sum::<f64>() / n,
        ]
    }

    /// Facet measure: 1 for points, length for edges.
    pub fn facet_measure(&self, e: usize, f: usize) -> f64 {
        if self.dim == 1 {
            1.0
        } else {
            let p = self.facet_points(e, f);
            ((p[1][0] - p[0][0]).powi(2) + (p[1][1] - p[0][1]).powi(2)).sqrt()
        }
    }

    /// Outward unit normal of facet `f` of element `e`.
    pub fn facet_normal(&self, e: usize, f: usize) -> [f64; 2] {
        if self.dim == 1 {
            return if f == 0 { [-1.0, 0.0] } else { [1.0, 0.0] };
        }
        let p = self.facet_points(e, f);
        let d = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        [d[1] / len, -d[0] / len]
    }

    pub(crate) fn raw_elements(&self) -> &[usize] {
        &self.elements
    }

    /// All boundary facets as `(element, facet, piece id)`.
    pub fn boundary_facets(&self) -> Vec<(usize, usize, usize)> {
        self.pieces
            .iter()
            .flat_map(|p| p.facets.iter().map(move |&(e, f)| (e, f, p.id)))
            .collect()
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "dim {}\nvertices {}\nelements {}\ndofs {}\nmeasure {:.12}\n",
            self.dim,
            self.n_vertices(),
            self.n_elements(),
            self.n_dof,
            self.total_measure()
        );
        for k in 0..self.dim {
            if let Some((lo, hi)) = self.periodic[k] {
                s.push_str(&format!("periodic x{} [{lo}, {hi}]\n", k + 1));
            }
        }
        for p in &self.pieces {
            s.push_str(&format!(
                "piece {} normal ({:.6}, {:.6}) facets {}\n",
                p.id,
                p.normal[0],
                p.normal[1],
                p.facets.len()
            ));
        }
        s
    }
}
