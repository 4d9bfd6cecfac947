use std::collections::HashMap;

use crate::error::Result;
use crate::linalg::SparseMatrix;
use crate::mesh::Mesh;

pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    refine_with_prolongation(mesh).map(|(m, _)| m)
}

/// Midpoint refinement together with the P1 prolongation matrix
/// (`fine n_dof x coarse n_dof`).
pub fn refine_with_prolongation(mesh: &Mesh) -> Result<(Mesh, SparseMatrix)> {
    let dim = mesh.dim();
    let mut vertices: Vec<[f64; 2]> = mesh.vertices().to_vec();
    // fine vertex -> coarse vertex parents
    let mut parents: Vec<(usize, usize)> = (0..vertices.len()).map(|i| (i, i)).collect();
    let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoints.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            parents.push(key);
            vertices.len() - 1
        })
    };

    let mut elements = Vec::with_capacity(mesh.raw_elements().len() * if dim == 1 { 2 } else { 4 });
    for e in 0..mesh.n_elements() {
        let v = mesh.element(e);
        if dim == 1 {
            let m = midpoint(v[0], v[1], &mut vertices);
            elements.extend_from_slice(&[v[0], m, m, v[1]]);
        } else {
            let m01 = midpoint(v[0], v[1], &mut vertices);
            let m12 = midpoint(v[1], v[2], &mut vertices);
            let m20 = midpoint(v[2], v[0], &mut vertices);
            elements.extend_from_slice(&[
                v[0], m01, m20, //
                m01, v[1], m12, //
                m20, m12, v[2], //
                m01, m12, m20,
            ]);
        }
    }

    let mut boundary = Vec::new();
    for (e, f, id) in mesh.boundary_facets() {
        let children: [(usize, usize); 2] = if dim == 1 {
            [(2 * e + f, f), (2 * e + f, f)]
        } else {
            let c = 4 * e;
            match f {
                0 => [(c, 0), (c + 1, 0)],
                1 => [(c + 1, 1), (c + 2, 1)],
                _ => [(c, 2), (c + 2, 2)],
            }
        };
        boundary.push((children[0].0, children[0].1, id));
        if dim == 2 {
            boundary.push((children[1].0, children[1].1, id));
        }
    }

    let fine = Mesh::new(dim, vertices, elements, mesh.periodic(), &boundary)?;

    let mut done = vec![false; fine.n_dof()];
    let mut triplets = Vec::new();
    for (v, &(a, b)) in parents.iter().enumerate() {
        let d = fine.dof(v);
        if done[d] {
            continue;
        }
        done[d] = true;
        if a == b {
            triplets.push((d, mesh.dof(a), 1.0));
        } else {
            triplets.push((d, mesh.dof(a), 0.5));
            triplets.push((d, mesh.dof(b), 0.5));
        }
    }
    let p = SparseMatrix::from_triplets(fine.n_dof(), mesh.n_dof(), &triplets)?;
    Ok((fine, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_rect_tri_mesh, build_triangle_domain_mesh};

    #[test]
    fn single_triangle() {
        let m = Mesh::new(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![0, 1, 2],
            [None, None],
            &[(0, 0, 0), (0, 1, 1), (0, 2, 2)],
        )
        .unwrap();
        let r = refine_uniform(&m).unwrap();
        assert_eq!((r.n_elements(), r.n_vertices()), (4, 6));
        assert!((r.total_measure() - 0.5).abs() < 1e-15);
        for p in r.boundary_pieces() {
            assert_eq!(p.facets.len(), 2);
        }
    }

    #[test]
    fn periodic_box_twice() {
        let m = build_rect_tri_mesh((-4.0, 4.0), (-4.0, 4.0), 2, 2, (true, true)).unwrap();
        let r = refine_uniform(&refine_uniform(&m).unwrap()).unwrap();
        assert_eq!(r.n_dof(), 64);
        assert!((r.total_measure() - 64.0).abs() < 1e-12);
    }

    #[test]
    fn prolongation_reproduces_linears() {
        let m = build_triangle_domain_mesh(3).unwrap();
        let (f, p) = refine_with_prolongation(&m).unwrap();
        assert_eq!(f.n_elements(), 4 * m.n_elements());
        let lin = |q: [f64; 2]| 2.0 * q[0] - 3.0 * q[1] + 0.5;
        let coarse: Vec<f64> = m.dof_coords().into_iter().map(lin).collect();
        let fine = p.matvec(&coarse).unwrap();
        for (v, q) in fine.iter().zip(f.dof_coords()) {
            assert!((v - lin(q)).abs() < 1e-14);
        }
    }
}
