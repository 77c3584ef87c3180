//! P2 / P1 shape functions on affine triangles.
//!
//! Local P2 nodes: vertices 0, 1, 2, then midpoints of edges (0-1), (1-2), (2-0).

use crate::mesh::Mesh;
use crate::numerics::{seven_point, QuadratureRule};

pub const NQ: usize = 7;

/// `phi_i(L)` for barycentric coordinates `L`.
#[inline]
pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Physical gradients of the six P2 functions given the barycentric gradients.
#[inline]
pub fn p2_grads(l: [f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for d in 0..2 {
        g[0][d] = (4.0 * l[0] - 1.0) * gl[0][d];
        g[1][d] = (4.0 * l[1] - 1.0) * gl[1][d];
        g[2][d] = (4.0 * l[2] - 1.0) * gl[2][d];
        g[3][d] = 4.0 * (l[1] * gl[0][d] + l[0] * gl[1][d]);
        g[4][d] = 4.0 * (l[2] * gl[1][d] + l[1] * gl[2][d]);
        g[5][d] = 4.0 * (l[0] * gl[2][d] + l[2] * gl[0][d]);
    }
    g
}

/// Area and barycentric gradients of a counterclockwise triangle.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub area: f64,
    pub grad_l: [[f64; 2]; 3],
}

impl Geometry {
    pub fn new(p: [[f64; 2]; 3]) -> Self {
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let s = 1.0 / (2.0 * area);
        let grad_l = [
            [(p[1][1] - p[2][1]) * s, (p[2][0] - p[1][0]) * s],
            [(p[2][1] - p[0][1]) * s, (p[0][0] - p[2][0]) * s],
            [(p[0][1] - p[1][1]) * s, (p[1][0] - p[0][0]) * s],
        ];
        Self { area, grad_l }
    }
}

/// Shape data at the degree-5 quadrature points for every element.
#[derive(Debug, Clone)]
pub struct ElementTables {
    pub rule: QuadratureRule,
    /// `phi[q][i]`, identical on all elements.
    pub phi: [[f64; 6]; NQ],
    /// P1 values (the barycentrics) at each point.
    pub psi: [[f64; 3]; NQ],
    /// Physical integration weights `w_q * 2|T|`.
    pub weights: Vec<[f64; NQ]>,
    /// `grads[t][q][i]`
    pub grads: Vec<[[[f64; 2]; 6]; NQ]>,
    pub geometry: Vec<Geometry>,
}

impl ElementTables {
    pub fn new(mesh: &Mesh) -> Self {
        let rule = seven_point();
        let mut phi = [[0.0; 6]; NQ];
        let mut psi = [[0.0; 3]; NQ];
        for q in 0..NQ {
            phi[q] = p2_values(rule.points[q]);
            psi[q] = rule.points[q];
        }
        let v = mesh.vertices();
        let mut weights = Vec::with_capacity(mesh.num_triangles());
        let mut grads = Vec::with_capacity(mesh.num_triangles());
        let mut geometry = Vec::with_capacity(mesh.num_triangles());
        for tri in mesh.triangles() {
            let geo = Geometry::new([v[tri[0]], v[tri[1]], v[tri[2]]]);
            let mut w = [0.0; NQ];
            let mut g = [[[0.0; 2]; 6]; NQ];
            for q in 0..NQ {
                w[q] = rule.weights[q] * 2.0 * geo.area;
                g[q] = p2_grads(rule.points[q], &geo.grad_l);
            }
            weights.push(w);
            grads.push(g);
            geometry.push(geo);
        }
        Self { rule, phi, psi, weights, grads, geometry }
    }

    /// Physical coordinates of quadrature point `q` in triangle `t`.
    pub fn point(&self, mesh: &Mesh, t: usize, q: usize) -> [f64; 2] {
        let tri = mesh.triangles()[t];
        let l = self.rule.points[q];
        let v = mesh.vertices();
        let mut x = [0.0; 2];
        for k in 0..3 {
            for d in 0..2 {
                x[d] += l[k] * v[tri[k]][d];
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODES: [[f64; 3]; 6] =
        [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

    #[test]
    fn nodal_basis_is_kronecker() {
        for (i, l) in NODES.iter().enumerate() {
            let v = p2_values(*l);
            for (j, vj) in v.iter().enumerate() {
                assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = [[0.1, 0.2], [1.3, 0.4], [0.5, 1.1]];
        let geo = Geometry::new(p);
        let to_bary = |x: [f64; 2]| {
            // solve x = sum L_i p_i with sum L_i = 1
            let l1 = geo.grad_l[1][0] * (x[0] - p[0][0]) + geo.grad_l[1][1] * (x[1] - p[0][1]);
            let l2 = geo.grad_l[2][0] * (x[0] - p[0][0]) + geo.grad_l[2][1] * (x[1] - p[0][1]);
            [1.0 - l1 - l2, l1, l2]
        };
        let x = [0.6, 0.5];
        let g = p2_grads(to_bary(x), &geo.grad_l);
        let h = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let (vp, vm) = (p2_values(to_bary(xp)), p2_values(to_bary(xm)));
            for i in 0..6 {
                assert!(((vp[i] - vm[i]) / (2.0 * h) - g[i][d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let v = p2_values([0.2, 0.3, 0.5]);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let geo = Geometry::new([[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]);
        let g = p2_grads([0.2, 0.3, 0.5], &geo.grad_l);
        for d in 0..2 {
            assert!(g.iter().map(|gi| gi[d]).sum::<f64>().abs() < 1e-14);
        }
    }
}
