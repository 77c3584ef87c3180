//! Quadrature on the reference triangle `{(x, y): x, y >= 0, x + y <= 1}`.

use crate::error::{Error, Result};

/// Points are barycentric `(L0, L1, L2)` with reference coordinates
/// `x = L1`, `y = L2`. Weights sum to the reference area 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates of point `q`.
    pub fn xy(&self, q: usize) -> (f64, f64) {
        (self.points[q][1], self.points[q][2])
    }

    /// Integral of `f(x, y)` over the reference triangle.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        (0..self.len())
            .map(|q| {
                let (x, y) = self.xy(q);
                self.weights[q] * f(x, y)
            })
            .sum()
    }
}

/// Rule exact for all polynomials of total degree `degree` (at most 5).
pub fn triangle_quadrature(degree: usize) -> Result<QuadratureRule> {
    match degree {
        0 | 1 => Ok(QuadratureRule { points: vec![[1.0 / 3.0; 3]], weights: vec![0.5], degree: 1 }),
        2 => {
            let a = 1.0 / 6.0;
            let b = 2.0 / 3.0;
            Ok(QuadratureRule { points: vec![[b, a, a], [a, b, a], [a, a, b]], weights: vec![1.0 / 6.0; 3], degree: 2 })
        }
        3..=5 => Ok(seven_point()),
        d => Err(Error::UnsupportedQuadrature(d)),
    }
}

/// Degree-5 seven-point rule (Radon).
pub fn seven_point() -> QuadratureRule {
    let s15 = 15f64.sqrt();
    let a1 = (6.0 - s15) / 21.0;
    let a2 = (6.0 + s15) / 21.0;
    let w1 = (155.0 - s15) / 2400.0;
    let w2 = (155.0 + s15) / 2400.0;
    let b1 = 1.0 - 2.0 * a1;
    let b2 = 1.0 - 2.0 * a2;
    QuadratureRule {
        points: vec![
            [1.0 / 3.0; 3],
            [b1, a1, a1],
            [a1, b1, a1],
            [a1, a1, b1],
            [b2, a2, a2],
            [a2, b2, a2],
            [a2, a2, b2],
        ],
        weights: vec![9.0 / 80.0, w1, w1, w1, w2, w2, w2],
        degree: 5,
    }
}

/// Three-point Gauss-Legendre rule on [0, 1]: (points, weights), exact to degree 5.
pub fn edge_gauss3() -> ([f64; 3], [f64; 3]) {
    let d = 0.5 * (0.6f64).sqrt();
    ([0.5 - d, 0.5, 0.5 + d], [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of x^i y^j over the reference triangle: i! j! / (i + j + 2)!
    fn monomial_exact(i: u32, j: u32) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn worked_integrals() {
        let q = triangle_quadrature(5).unwrap();
        assert!((q.integrate(|_, _| 1.0) - 0.5).abs() < 1e-15);
        assert!((q.integrate(|x, _| x) - 1.0 / 6.0).abs() < 1e-15);
        assert!((q.integrate(|x, y| x * x * y * y) - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_all_monomials_up_to_degree() {
        for deg in 0..=5 {
            let q = triangle_quadrature(deg).unwrap();
            assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            for i in 0..=q.degree as u32 {
                for j in 0..=(q.degree as u32 - i) {
                    let got = q.integrate(|x, y| x.powi(i as i32) * y.powi(j as i32));
                    assert!((got - monomial_exact(i, j)).abs() < 1e-14, "degree {deg} rule fails on x^{i} y^{j}");
                }
            }
        }
    }

    #[test]
    fn degree_attribute_is_sharp() {
        // some monomial one degree higher must be missed
        for deg in [1usize, 2, 5] {
            let q = triangle_quadrature(deg).unwrap();
            let d = q.degree as u32 + 1;
            let missed = (0..=d).any(|i| {
                let got = q.integrate(|x, y| x.powi(i as i32) * y.powi((d - i) as i32));
                (got - monomial_exact(i, d - i)).abs() > 1e-14
            });
            assert!(missed, "rule of degree {deg} is exact beyond its attribute");
        }
    }

    #[test]
    fn rejects_degree_six() {
        assert!(matches!(triangle_quadrature(6), Err(Error::UnsupportedQuadrature(6))));
    }

    #[test]
    fn edge_rule_degree_five() {
        let (p, w) = edge_gauss3();
        for k in 0..=5 {
            let got: f64 = p.iter().zip(&w).map(|(x, wi)| wi * x.powi(k)).sum();
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
