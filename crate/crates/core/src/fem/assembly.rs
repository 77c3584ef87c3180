use super::element::NQ;
use super::forms::NonlinearForm;
use super::space::TaylorHoodSpace;
use crate::error::Result;
use crate::numerics::{SparseMatrix, TripletBuilder};

/// Mass `M`, stiffness `K = nu (grad u, grad v)` and divergence
/// `(B u)_q = (div u, q)`.
#[derive(Debug, Clone)]
pub struct LinearOperators {
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    pub divergence: SparseMatrix,
}

pub fn assemble_linear_operators(space: &TaylorHoodSpace, nu: f64) -> LinearOperators {
    let nvel = space.n_velocity();
    let ne = space.mesh().num_triangles();
    let tab = space.tables();
    let mut m = TripletBuilder::with_capacity(nvel, nvel, ne * 72);
    let mut k = TripletBuilder::with_capacity(nvel, nvel, ne * 72);
    let mut b = TripletBuilder::with_capacity(space.n_pressure(), nvel, ne * 36);
    for t in 0..ne {
        let nodes = space.element_nodes(t);
        let pnodes = space.element_pressure_nodes(t);
        let mut me = [[0.0; 6]; 6];
        let mut ke = [[0.0; 6]; 6];
        let mut be = [[[0.0; 2]; 6]; 3];
        for q in 0..NQ {
            let w = tab.weights[t][q];
            let phi = &tab.phi[q];
            let g = &tab.grads[t][q];
            for i in 0..6 {
                for j in i..6 {
                    me[i][j] += w * phi[i] * phi[j];
                    ke[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
            for (p, psi) in tab.psi[q].iter().enumerate() {
                for j in 0..6 {
                    for c in 0..2 {
                        be[p][j][c] += w * psi * g[j][c];
                    }
                }
            }
        }
        for i in 0..6 {
            for j in 0..i {
                me[i][j] = me[j][i];
                ke[i][j] = ke[j][i];
            }
        }
        for i in 0..6 {
            for j in 0..6 {
                for c in 0..2 {
                    m.add(2 * nodes[i] + c, 2 * nodes[j] + c, me[i][j]);
                    k.add(2 * nodes[i] + c, 2 * nodes[j] + c, nu * ke[i][j]);
                }
            }
        }
        for p in 0..3 {
            for j in 0..6 {
                for c in 0..2 {
                    b.add(pnodes[p], 2 * nodes[j] + c, be[p][j][c]);
                }
            }
        }
    }
    LinearOperators { mass: m.finalize(), stiffness: k.finalize(), divergence: b.finalize() }
}

/// Local coefficients `[node][component]` of `u` on triangle `t`.
#[inline]
pub fn gather(space: &TaylorHoodSpace, t: usize, u: &[f64]) -> [[f64; 2]; 6] {
    let nodes = space.element_nodes(t);
    let mut c = [[0.0; 2]; 6];
    for i in 0..6 {
        c[i] = [u[2 * nodes[i]], u[2 * nodes[i] + 1]];
    }
    c
}

/// Value and gradient (`g[a][b] = d u_a / d x_b`) at quadrature point `q`.
#[inline]
pub fn eval_at(space: &TaylorHoodSpace, t: usize, q: usize, c: &[[f64; 2]; 6]) -> ([f64; 2], [[f64; 2]; 2]) {
    let tab = space.tables();
    let phi = &tab.phi[q];
    let g = &tab.grads[t][q];
    let mut v = [0.0; 2];
    let mut gv = [[0.0; 2]; 2];
    for i in 0..6 {
        for a in 0..2 {
            v[a] += phi[i] * c[i][a];
            for b in 0..2 {
                gv[a][b] += c[i][a] * g[i][b];
            }
        }
    }
    (v, gv)
}

/// `int f(x, u, grad u)` by the degree-5 rule.
pub fn integrate_field(
    space: &TaylorHoodSpace,
    u: &[f64],
    f: impl Fn([f64; 2], [f64; 2], &[[f64; 2]; 2]) -> f64,
) -> f64 {
    let tab = space.tables();
    let mut s = 0.0;
    for t in 0..space.mesh().num_triangles() {
        let c = gather(space, t, u);
        for q in 0..NQ {
            let (v, g) = eval_at(space, t, q, &c);
            s += tab.weights[t][q] * f(tab.point(space.mesh(), t, q), v, &g);
        }
    }
    s
}

/// `b(u, v, w)` for the given form.
pub fn trilinear_value(form: NonlinearForm, space: &TaylorHoodSpace, u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
    space.check_velocity(u)?;
    space.check_velocity(v)?;
    space.check_velocity(w)?;
    let tab = space.tables();
    let mut s = 0.0;
    for t in 0..space.mesh().num_triangles() {
        let (cu, cv, cw) = (gather(space, t, u), gather(space, t, v), gather(space, t, w));
        for q in 0..NQ {
            let (uq, gu) = eval_at(space, t, q, &cu);
            let (vq, gv) = eval_at(space, t, q, &cv);
            let (wq, _) = eval_at(space, t, q, &cw);
            let n = form.flux(uq, &gu, vq, &gv);
            s += tab.weights[t][q] * (n[0] * wq[0] + n[1] * wq[1]);
        }
    }
    Ok(s)
}

/// Element residual `b(u, u, phi_l)` and its derivative, local index `2 * node + comp`.
pub(crate) fn element_nonlinear(
    form: NonlinearForm,
    space: &TaylorHoodSpace,
    t: usize,
    u: &[f64],
    jac: Option<&mut [[f64; 12]; 12]>,
) -> [f64; 12] {
    let tab = space.tables();
    let c = gather(space, t, u);
    let mut res = [0.0; 12];
    let mut jac = jac;
    for q in 0..NQ {
        let w = tab.weights[t][q];
        let phi = &tab.phi[q];
        let g = &tab.grads[t][q];
        let (uq, gu) = eval_at(space, t, q, &c);
        let n = form.flux(uq, &gu, uq, &gu);
        for a in 0..6 {
            res[2 * a] += w * phi[a] * n[0];
            res[2 * a + 1] += w * phi[a] * n[1];
        }
        if let Some(jac) = jac.as_deref_mut() {
            for b in 0..6 {
                for d in 0..2 {
                    let mut du = [0.0; 2];
                    du[d] = phi[b];
                    let mut gd = [[0.0; 2]; 2];
                    gd[d] = g[b];
                    let j1 = form.flux(du, &gd, uq, &gu);
                    let j2 = form.flux(uq, &gu, du, &gd);
                    let jn = [j1[0] + j2[0], j1[1] + j2[1]];
                    let col = 2 * b + d;
                    for a in 0..6 {
                        let wp = w * phi[a];
                        jac[2 * a][col] += wp * jn[0];
                        jac[2 * a + 1][col] += wp * jn[1];
                    }
                }
            }
        }
    }
    res
}

/// `R_i = b(u, u, phi_i)`.
pub fn nonlinear_residual(form: NonlinearForm, space: &TaylorHoodSpace, u: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; space.n_velocity()];
    for t in 0..space.mesh().num_triangles() {
        let re = element_nonlinear(form, space, t, u, None);
        let nodes = space.element_nodes(t);
        for a in 0..6 {
            r[2 * nodes[a]] += re[2 * a];
            r[2 * nodes[a] + 1] += re[2 * a + 1];
        }
    }
    r
}

/// Residual `b(u, u, phi_i)` and Jacobian `b(du, u, phi_i) + b(u, du, phi_i)`.
pub fn nonlinear_residual_and_jacobian(
    form: NonlinearForm,
    space: &TaylorHoodSpace,
    u: &[f64],
) -> Result<(Vec<f64>, SparseMatrix)> {
    space.check_velocity(u)?;
    let n = space.n_velocity();
    let ne = space.mesh().num_triangles();
    let mut r = vec![0.0; n];
    let mut jb = TripletBuilder::with_capacity(n, n, ne * 144);
    for t in 0..ne {
        let mut je = [[0.0; 12]; 12];
        let re = element_nonlinear(form, space, t, u, Some(&mut je));
        let nodes = space.element_nodes(t);
        let dof = |l: usize| 2 * nodes[l / 2] + l % 2;
        for i in 0..12 {
            r[dof(i)] += re[i];
            for j in 0..12 {
                jb.add(dof(i), dof(j), je[i][j]);
            }
        }
    }
    Ok((r, jb.finalize()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldNorms {
    pub l2: f64,
    pub h1_semi: f64,
    pub div_l2: f64,
    pub curl_l2: f64,
}

/// `ops` must be assembled with `nu = 1`.
pub fn field_norms(space: &TaylorHoodSpace, ops: &LinearOperators, u: &[f64]) -> Result<FieldNorms> {
    space.check_velocity(u)?;
    let l2 = ops.mass.bilinear(u, u).max(0.0).sqrt();
    let h1 = ops.stiffness.bilinear(u, u).max(0.0).sqrt();
    let (div2, curl2) = div_curl_sq(space, u);
    Ok(FieldNorms { l2, h1_semi: h1, div_l2: div2.sqrt(), curl_l2: curl2.sqrt() })
}

/// `(||div u||^2, ||curl u||^2)` by quadrature.
pub fn div_curl_sq(space: &TaylorHoodSpace, u: &[f64]) -> (f64, f64) {
    let tab = space.tables();
    let (mut d2, mut c2) = (0.0, 0.0);
    for t in 0..space.mesh().num_triangles() {
        let c = gather(space, t, u);
        for q in 0..NQ {
            let (_, g) = eval_at(space, t, q, &c);
            let d = g[0][0] + g[1][1];
            let w = g[1][0] - g[0][1];
            d2 += tab.weights[t][q] * d * d;
            c2 += tab.weights[t][q] * w * w;
        }
    }
    (d2, c2)
}
