//! Quadrature rules on the reference tetrahedron and triangle.
//!
//! The rules are Stroud conical products of 1D Gauss-Jacobi rules, so all
//! weights are positive and the polynomial degree of exactness is 2n-1 for
//! n points per direction. Nodes and weights are generated at first use via
//! Golub-Welsch from the Jacobi recurrence coefficients.

use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Quadrature rule on the reference tetrahedron
/// `{x,y,z >= 0, x+y+z <= 1}`. Weights sum to 1/6 (the reference volume).
#[derive(Debug, Clone)]
pub struct TetRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Quadrature rule on the reference triangle `{x,y >= 0, x+y <= 1}`.
/// Weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

/// Gauss-Jacobi rule for the weight `(1-x)^alpha` on `[0,1]`.
fn gauss_jacobi_01(n: usize, alpha: u32) -> (Vec<f64>, Vec<f64>) {
    let a = alpha as f64;
    // Monic Jacobi recurrence coefficients on [-1,1] with beta = 0.
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    diag[0] = -a / (a + 2.0);
    for (k, d) in diag.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *d = -a * a / ((2.0 * k + a) * (2.0 * k + a + 2.0));
    }
    for (k, o) in off.iter_mut().enumerate() {
        let k = (k + 1) as f64; // b_k for k = 1..n-1
        let b = if k == 1.0 {
            4.0 * (1.0 + a) / ((2.0 + a) * (2.0 + a) * (3.0 + a))
        } else {
            4.0 * k * (k + a) * k * (k + a)
                / ((2.0 * k + a).powi(2) * (2.0 * k + a + 1.0) * (2.0 * k + a - 1.0))
        };
        *o = b.sqrt();
    }
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = diag[i];
        if i + 1 < n {
            jac[(i, i + 1)] = off[i];
            jac[(i + 1, i)] = off[i];
        }
    }
    let eig = jac.symmetric_eigen();
    let mu0 = 2f64.powi(alpha as i32 + 1) / (a + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (t, mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    // Shift [-1,1] -> [0,1]; weight picks up the 1/2^(alpha+1) factor.
    let scale = 0.5f64.powi(alpha as i32 + 1);
    let nodes = pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect();
    let weights = pairs.iter().map(|p| scale * p.1).collect();
    (nodes, weights)
}

fn conical_tet(n: usize) -> TetRule {
    let (xu, wu) = gauss_jacobi_01(n, 2);
    let (xv, wv) = gauss_jacobi_01(n, 1);
    let (xw, ww) = gauss_jacobi_01(n, 0);
    let mut points = Vec::with_capacity(n * n * n);
    let mut weights = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let u = xu[i];
                let v = xv[j] * (1.0 - u);
                let z = xw[k] * (1.0 - u) * (1.0 - xv[j]);
                points.push([u, v, z]);
                weights.push(wu[i] * wv[j] * ww[k]);
            }
        }
    }
    TetRule { points, weights }
}

fn conical_tri(n: usize) -> TriRule {
    let (xu, wu) = gauss_jacobi_01(n, 1);
    let (xv, wv) = gauss_jacobi_01(n, 0);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            points.push([xu[i], xv[j] * (1.0 - xu[i])]);
            weights.push(wu[i] * wv[j]);
        }
    }
    TriRule { points, weights }
}

impl TetRule {
    /// Rule exact for polynomials of total degree <= 3 (8 points).
    pub fn degree3() -> &'static TetRule {
        static RULE: OnceLock<TetRule> = OnceLock::new();
        RULE.get_or_init(|| conical_tet(2))
    }

    /// Rule exact for polynomials of total degree <= 5 (27 points).
    /// Used for all potential-term and product integrals.
    pub fn degree5() -> &'static TetRule {
        static RULE: OnceLock<TetRule> = OnceLock::new();
        RULE.get_or_init(|| conical_tet(3))
    }

    /// Barycentric coordinates of every point: `(1-x-y-z, x, y, z)`.
    pub fn barycentric(&self) -> Vec<[f64; 4]> {
        self.points
            .iter()
            .map(|p| [1.0 - p[0] - p[1] - p[2], p[0], p[1], p[2]])
            .collect()
    }
}

impl TriRule {
    /// Rule exact for polynomials of total degree <= 3 (4 points).
    pub fn degree3() -> &'static TriRule {
        static RULE: OnceLock<TriRule> = OnceLock::new();
        RULE.get_or_init(|| conical_tri(2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Exact integral of x^a y^b z^c over the reference tetrahedron.
    fn exact_tet(a: u32, b: u32, c: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        fact(a) * fact(b) * fact(c) / fact(a + b + c + 3)
    }

    fn apply_tet(rule: &TetRule, a: u32, b: u32, c: u32) -> f64 {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
            .sum()
    }

    #[test]
    fn degree3_rule_exact_for_cubics() {
        let rule = TetRule::degree3();
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                for c in 0..=(3 - a - b) {
                    assert_relative_eq!(
                        apply_tet(rule, a, b, c),
                        exact_tet(a, b, c),
                        max_relative = 1e-13
                    );
                }
            }
        }
    }

    #[test]
    fn degree5_rule_exact_for_quintics() {
        let rule = TetRule::degree5();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                for c in 0..=(5 - a - b) {
                    assert_relative_eq!(
                        apply_tet(rule, a, b, c),
                        exact_tet(a, b, c),
                        max_relative = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn weights_positive_and_sum_to_volume() {
        for rule in [TetRule::degree3(), TetRule::degree5()] {
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let s: f64 = rule.weights.iter().sum();
            assert_relative_eq!(s, 1.0 / 6.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn triangle_rule_exact_for_cubics() {
        fn exact_tri(a: u32, b: u32) -> f64 {
            fn fact(n: u32) -> f64 {
                (1..=n).map(|k| k as f64).product()
            }
            fact(a) * fact(b) / fact(a + b + 2)
        }
        let rule = TriRule::degree3();
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                assert_relative_eq!(
                    rule.points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum::<f64>(),
                    exact_tri(a, b),
                    max_relative = 1e-13
                );
            }
        }
    }
}
