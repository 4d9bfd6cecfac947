//! Fixed quadrature rules on simplices.

/// 7-point degree-5 rule on a triangle: barycentric points and weights
/// (weights sum to 1, multiply by the area).
pub fn triangle_rule() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let a2 = (6.0 + s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let w2 = (155.0 + s) / 1200.0;
    let b1 = 1.0 - 2.0 * a1;
    let b2 = 1.0 - 2.0 * a2;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

/// 3-point Gauss-Legendre rule on `[0, 1]` (degree 5).
pub fn interval_rule() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

/// Quadrature points of a simplex given by its vertices: physical point,
/// barycentric coordinates with respect to `vertices`, and absolute weight.
pub fn simplex_points(dim: usize, vertices: &[[f64; 2]], measure: f64) -> Vec<([f64; 2], [f64; 3], f64)> {
    if dim == 1 {
        let (a, b) = (vertices[0][0], vertices[1][0]);
        interval_rule()
            .iter()
            .map(|&(s, w)| ([a + s * (b - a), 0.0], [1.0 - s, s, 0.0], w * measure))
            .collect()
    } else {
        triangle_rule()
            .iter()
            .map(|&(l, w)| {
                let mut p = [0.0; 2];
                for (li, v) in l.iter().zip(vertices) {
                    p[0] += li * v[0];
                    p[1] += li * v[1];
                }
                (p, l, w * measure)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_rule_degree_five() {
        // int over reference triangle of x^a y^b = a! b! / (a + b + 2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        let pts = simplex_points(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 0.5);
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = pts.iter().map(|(p, _, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-15, "{a} {b}");
            }
        }
    }

    #[test]
    fn interval_rule_degree_five() {
        for k in 0..=5 {
            let q: f64 = interval_rule().iter().map(|(x, w)| w * x.powi(k)).sum();
            assert!((q - 1.0 / (k + 1) as f64).abs() < 1e-15);
        }
    }
}
