//! P1 assembly of mass, transport, boundary, half-space and CIP matrices.

use crate::error::{Error, Result};
use crate::fem::quadrature::simplex_points;
use crate::linalg::SparseMatrix;
use crate::mesh::{BoundaryPiece, ElementGeometry, Mesh};
use crate::par;

/// Weight function for mass-type matrices.
#[derive(Clone, Copy)]
pub enum Weight<'a> {
    One,
    /// the coordinate `x_k`
    Coordinate(usize),
    /// `c + g . x`
    Affine { constant: f64, gradient: [f64; 2] },
    /// one constant per element
    Elementwise(&'a [f64]),
    /// `|x|^2`
    SquaredNorm,
    /// arbitrary pointwise weight (integrated by the degree-5 rule)
    Function(&'a (dyn Fn([f64; 2]) -> f64 + Sync)),
}

impl Weight<'_> {
    fn eval(&self, e: usize, p: [f64; 2]) -> f64 {
        match *self {
            Weight::One => 1.0,
            Weight::Coordinate(k) => p[k],
            Weight::Affine { constant, gradient } => constant + gradient[0] * p[0] + gradient[1] * p[1],
            Weight::Elementwise(w) => w[e],
            Weight::SquaredNorm => p[0] * p[0] + p[1] * p[1],
            Weight::Function(f) => f(p),
        }
    }
}

type Local = [[f64; 3]; 3];

/// Scatter per-element local matrices (computed in parallel, merged in
/// element order).
fn assemble_elementwise<F>(mesh: &Mesh, local: F) -> Result<SparseMatrix>
where
    F: Fn(usize, &ElementGeometry) -> Local + Sync + Send,
{
    let nloc = mesh.dim() + 1;
    let locals = par::map_range(mesh.n_elements(), |e| local(e, &mesh.geometry(e)));
    let mut triplets = Vec::with_capacity(locals.len() * nloc * nloc);
    for (e, m) in locals.iter().enumerate() {
        let d = mesh.element_dofs(e);
        for i in 0..nloc {
            for j in 0..nloc {
                if m[i][j] != 0.0 {
                    triplets.push((d[i], d[j], m[i][j]));
                }
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_dof(), mesh.n_dof(), &triplets)
}

fn weighted_local(dim: usize, e: usize, g: &ElementGeometry, w: &Weight) -> Local {
    let nloc = dim + 1;
    let mut m = [[0.0; 3]; 3];
    for (p, l, qw) in simplex_points(dim, &g.points[..nloc], g.measure) {
        let wv = qw * w.eval(e, p);
        for i in 0..nloc {
            for j in 0..nloc {
                m[i][j] += wv * l[i] * l[j];
            }
        }
    }
    m
}

/// `[int w phi_i phi_j]`.
pub fn assemble_mass(mesh: &Mesh, weight: Weight) -> Result<SparseMatrix> {
    if let Weight::Elementwise(w) = weight {
        if w.len() != mesh.n_elements() {
            return Err(Error::invalid("elementwise weight has wrong length"));
        }
    }
    if let Weight::Coordinate(k) = weight {
        if k >= mesh.dim() {
            return Err(Error::invalid(format!("coordinate {k} out of range")));
        }
    }
    let dim = mesh.dim();
    if let Weight::One | Weight::Elementwise(_) = weight {
        // constant per element: closed form |K| (1 + delta_ij) / ((d+1)(d+2))
        let denom = ((dim + 1) * (dim + 2)) as f64;
        return assemble_elementwise(mesh, |e, g| {
            let c = g.measure * weight.eval(e, [0.0; 2]) / denom;
            let mut m = [[0.0; 3]; 3];
            for (i, row) in m.iter_mut().enumerate().take(dim + 1) {
                for (j, v) in row.iter_mut().enumerate().take(dim + 1) {
                    *v = if i == j { 2.0 * c } else { c };
                }
            }
            m
        });
    }
    assemble_elementwise(mesh, |e, g| weighted_local(dim, e, g, &weight))
}

/// `[int phi_i d_k phi_j]`.
pub fn assemble_transport(mesh: &Mesh, k: usize) -> Result<SparseMatrix> {
    let dim = mesh.dim();
    if k >= dim {
        return Err(Error::invalid(format!("transport direction {k} >= dim {dim}")));
    }
    assemble_elementwise(mesh, |_, g| {
        let c = g.measure / (dim + 1) as f64;
        let mut m = [[0.0; 3]; 3];
        for row in m.iter_mut().take(dim + 1) {
            for (j, v) in row.iter_mut().enumerate().take(dim + 1) {
                *v = c * g.grads[j][k];
            }
        }
        m
    })
}

/// `[int grad phi_i . grad phi_j]`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SparseMatrix> {
    let nloc = mesh.dim() + 1;
    assemble_elementwise(mesh, |_, g| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..nloc {
            for j in 0..nloc {
                m[i][j] = g.measure * (g.grads[i][0] * g.grads[j][0] + g.grads[i][1] * g.grads[j][1]);
            }
        }
        m
    })
}

/// P1 mass on the facets of one boundary piece.
pub fn assemble_boundary_mass(mesh: &Mesh, piece: &BoundaryPiece) -> Result<SparseMatrix> {
    let mut triplets = Vec::new();
    for &(e, f) in &piece.facets {
        if e >= mesh.n_elements() || f > mesh.dim() {
            return Err(Error::invalid("boundary piece does not belong to this mesh"));
        }
        let verts = mesh.element(e);
        let local: Vec<usize> = mesh
            .facet_local_vertices(f)
            .into_iter()
            .map(|l| mesh.dof(verts[l]))
            .collect();
        if mesh.dim() == 1 {
            triplets.push((local[0], local[0], 1.0));
        } else {
            let h = mesh.facet_measure(e, f);
            for (a, &da) in local.iter().enumerate() {
                for (b, &db) in local.iter().enumerate() {
                    triplets.push((da, db, if a == b { h / 3.0 } else { h / 6.0 }));
                }
            }
        }
    }
    SparseMatrix::from_triplets(mesh.n_dof(), mesh.n_dof(), &triplets)
}

/// Keep the part of a convex polygon where `s <= 0`.
fn clip_polygon(poly: &[[f64; 2]], s: impl Fn([f64; 2]) -> f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (sp, sq) = (s(p), s(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// `[int_{n.v < 0} (n.v) phi_i phi_j]`, integrating exactly over the part of
/// each element cut off by the half-plane.
pub fn assemble_halfspace_mass(v_mesh: &Mesh, normal: [f64; 2]) -> Result<SparseMatrix> {
    let dim = v_mesh.dim();
    let nn = (normal[0] * normal[0] + if dim == 2 { normal[1] * normal[1] } else { 0.0 }).sqrt();
    if !(nn > 0.0) {
        return Err(Error::invalid("half-space normal has zero length"));
    }
    let n = if dim == 1 { [normal[0], 0.0] } else { normal };
    let s = move |p: [f64; 2]| n[0] * p[0] + n[1] * p[1];
    let nloc = dim + 1;
    assemble_elementwise(v_mesh, |_, g| {
        let mut m = [[0.0; 3]; 3];
        let sv: Vec<f64> = g.points[..nloc].iter().map(|&p| s(p)).collect();
        if sv.iter().all(|&x| x >= 0.0) {
            return m;
        }
        let pieces: Vec<(Vec<[f64; 2]>, f64)> = if sv.iter().all(|&x| x <= 0.0) {
            vec![(g.points[..nloc].to_vec(), g.measure)]
        } else if dim == 1 {
            let (a, b) = (g.points[0], g.points[1]);
            let t = sv[0] / (sv[0] - sv[1]);
            let c = [a[0] + t * (b[0] - a[0]), 0.0];
            let seg = if sv[0] < 0.0 { vec![a, c] } else { vec![c, b] };
            let len = seg[1][0] - seg[0][0];
            vec![(seg, len)]
        } else {
            let poly = clip_polygon(&g.points, s);
            (1..poly.len().saturating_sub(1))
                .map(|i| {
                    let (a, b, c) = (poly[0], poly[i], poly[i + 1]);
                    let area = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
                    (vec![a, b, c], area.abs())
                })
                .filter(|(_, area)| *area > 0.0)
                .collect()
        };
        let p0 = g.points[0];
        for (verts, measure) in pieces {
            for (p, _, qw) in simplex_points(dim, &verts, measure) {
                let mut lam = [0.0; 3];
                for (i, l) in lam.iter_mut().enumerate().take(nloc) {
                    let base = if i == 0 { 1.0 } else { 0.0 };
                    *l = base + g.grads[i][0] * (p[0] - p0[0]) + g.grads[i][1] * (p[1] - p0[1]);
                }
                let wv = qw * s(p);
                for i in 0..nloc {
                    for j in 0..nloc {
                        m[i][j] += wv * lam[i] * lam[j];
                    }
                }
            }
        }
        m
    })
}

/// Continuous interior penalty: `sum_F h_F^2 |F| [grad u] . [grad w]` over
/// interior (including periodic) facets.
pub fn assemble_cip(mesh: &Mesh) -> Result<SparseMatrix> {
    let dim = mesh.dim();
    let nloc = dim + 1;
    let facets = mesh.interior_facets();
    let locals = par::map_range(facets.len(), |i| {
        let pair = facets[i];
        let (e1, f1) = pair.a;
        let (e2, _) = pair.b;
        let (g1, g2) = (mesh.geometry(e1), mesh.geometry(e2));
        let (fm, h) = if dim == 1 {
            (1.0, 0.5 * (g1.measure + g2.measure))
        } else {
            let l = mesh.facet_measure(e1, f1);
            (l, l)
        };
        let c = h * h * fm;
        let (d1, d2) = (mesh.element_dofs(e1), mesh.element_dofs(e2));
        let mut jumps: Vec<(usize, [f64; 2])> = Vec::with_capacity(2 * nloc);
        for a in 0..nloc {
            jumps.push((d1[a], g1.grads[a]));
            jumps.push((d2[a], [-g2.grads[a][0], -g2.grads[a][1]]));
        }
        let mut t = Vec::with_capacity(jumps.len() * jumps.len());
        for &(di, gi) in &jumps {
            for &(dj, gj) in &jumps {
                let v = c * (gi[0] * gj[0] + gi[1] * gj[1]);
                if v != 0.0 {
                    t.push((di, dj, v));
                }
            }
        }
        t
    });
    let triplets: Vec<_> = locals.into_iter().flatten().collect();
    SparseMatrix::from_triplets(mesh.n_dof(), mesh.n_dof(), &triplets)
}
