use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Corners (counter-clockwise) of the triangular spatial domain used by the
/// inflow experiment. Edge 0 (bottom), 1 (top) and 2 (left) are the boundary
/// pieces of [`build_triangle_domain_mesh`].
pub const TRIANGLE_DOMAIN: [[f64; 2]; 3] = [[-0.5, -0.5], [0.5, 0.0], [-0.5, 0.5]];

pub fn build_interval_mesh(a: f64, b: f64, n: usize, periodic: bool) -> Result<Mesh> {
    if !a.is_finite() || !b.is_finite() || !(a < b) || n == 0 {
        return Err(Error::invalid(format!("interval mesh needs a < b and n >= 1 (got [{a}, {b}], n = {n})")));
    }
    let h = (b - a) / n as f64;
    let vertices: Vec<[f64; 2]> = (0..=n)
        .map(|i| [if i == n { b } else { a + i as f64 * h }, 0.0])
        .collect();
    let elements: Vec<usize> = (0..n).flat_map(|i| [i, i + 1]).collect();
    if periodic {
        Mesh::new(1, vertices, elements, [Some((a, b)), None], &[])
    } else {
        Mesh::new(1, vertices, elements, [None, None], &[(0, 0, 0), (n - 1, 1, 1)])
    }
}

/// Structured triangulation of a rectangle, each cell split along its
/// lower-left to upper-right diagonal. Non-periodic sides become pieces
/// 0 (bottom), 1 (right), 2 (top), 3 (left).
pub fn build_rect_tri_mesh(
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
    periodic: (bool, bool),
) -> Result<Mesh> {
    let (x0, x1) = x_range;
    let (y0, y1) = y_range;
    let finite = [x0, x1, y0, y1].iter().all(|v| v.is_finite());
    if !finite || !(x0 < x1) || !(y0 < y1) || nx == 0 || ny == 0 {
        return Err(Error::invalid("rectangle mesh needs nondegenerate ranges and nx, ny >= 1"));
    }
    let coord = |lo: f64, hi: f64, n: usize, i: usize| {
        if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        }
    };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([coord(x0, x1, nx, i), coord(y0, y1, ny, j)]);
        }
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(6 * nx * ny);
    let mut boundary = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            let lower = elements.len() / 3;
            elements.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
            let upper = lower + 1;
            if !periodic.1 && j == 0 {
                boundary.push((lower, 0, 0));
            }
            if !periodic.0 && i == nx - 1 {
                boundary.push((lower, 1, 1));
            }
            if !periodic.1 && j == ny - 1 {
                boundary.push((upper, 1, 2));
            }
            if !periodic.0 && i == 0 {
                boundary.push((upper, 2, 3));
            }
        }
    }
    let per = [
        periodic.0.then_some((x0, x1)),
        periodic.1.then_some((y0, y1)),
    ];
    Mesh::new(2, vertices, elements, per, &boundary)
}

/// Structured triangulation of [`TRIANGLE_DOMAIN`] with `n` subdivisions per
/// edge (`(n + 1)(n + 2) / 2` vertices, `n^2` triangles).
pub fn build_triangle_domain_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("triangle domain mesh needs n >= 1"));
    }
    let [a, b, c] = TRIANGLE_DOMAIN;
    let mut index = vec![vec![usize::MAX; n + 1]; n + 1];
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n - j {
            let s = i as f64 / n as f64;
            let t = j as f64 / n as f64;
            index[i][j] = vertices.len();
            vertices.push([
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ]);
        }
    }
    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..n {
        for i in 0..n - j {
            let e = elements.len() / 3;
            elements.extend_from_slice(&[index[i][j], index[i + 1][j], index[i][j + 1]]);
            if j == 0 {
                boundary.push((e, 0, 0));
            }
            if i + j == n - 1 {
                boundary.push((e, 1, 1));
            }
            if i == 0 {
                boundary.push((e, 2, 2));
            }
            if i + j + 2 <= n {
                elements.extend_from_slice(&[index[i + 1][j], index[i + 1][j + 1], index[i][j + 1]]);
            }
        }
    }
    Mesh::new(2, vertices, elements, [None, None], &boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_examples() {
        let m = build_interval_mesh(0.0, 1.0, 4, false).unwrap();
        assert_eq!(m.n_dof(), 5);
        let normals: Vec<f64> = m.boundary_pieces().iter().map(|p| p.normal[0]).collect();
        assert_eq!(normals, vec![-1.0, 1.0]);

        let p = build_interval_mesh(0.0, 4.0 * PI, 64, true).unwrap();
        assert_eq!(p.n_dof(), 64);
        assert!(p.boundary_pieces().is_empty());

        let v = build_interval_mesh(-6.0, 6.0, 8, true).unwrap();
        assert_eq!(v.measure(0), 1.5);
        assert_eq!(v.dof(0), v.dof(8));
        assert!(build_interval_mesh(0.0, 1.0, 0, false).is_err());
        assert!(build_interval_mesh(0.0, f64::NAN, 3, false).is_err());
    }

    #[test]
    fn rect_examples() {
        let m = build_rect_tri_mesh((-6.0, 6.0), (-6.0, 6.0), 16, 16, (true, true)).unwrap();
        assert_eq!(m.n_dof(), 256);
        assert_eq!(m.n_elements(), 512);
        assert!(m.boundary_pieces().is_empty());

        let u = build_rect_tri_mesh((0.0, 1.0), (0.0, 1.0), 1, 1, (false, false)).unwrap();
        assert_eq!((u.n_dof(), u.n_elements(), u.boundary_pieces().len()), (4, 2, 4));

        let s = build_rect_tri_mesh((-4.0, 4.0), (-4.0, 4.0), 2, 2, (true, true)).unwrap();
        assert_eq!(s.n_dof(), 4);
        assert!(build_rect_tri_mesh((0.0, 0.0), (0.0, 1.0), 1, 1, (false, false)).is_err());
    }

    #[test]
    fn triangle_domain() {
        let m = build_triangle_domain_mesh(25).unwrap();
        assert_eq!(m.n_vertices(), 351);
        assert_eq!(m.n_elements(), 625);
        assert!((m.total_measure() - 0.5).abs() < 1e-12);
        assert_eq!(m.boundary_pieces().len(), 3);
        let k = 1.25f64.sqrt();
        let want = [[0.5 / k, -1.0 / k], [0.5 / k, 1.0 / k], [-1.0, 0.0]];
        for (p, w) in m.boundary_pieces().iter().zip(want) {
            assert!((p.normal[0] - w[0]).abs() < 1e-12 && (p.normal[1] - w[1]).abs() < 1e-12);
            assert_eq!(p.facets.len(), 25);
        }
    }
}
