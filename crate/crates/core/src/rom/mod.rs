//! Galerkin reduced-order model on a POD basis: offline operator assembly and
//! online implicit stepping.
//!
//! With `u = mean + sum_j a_j psi_j` the projected momentum equation reads
//! `da/dt + (A + L1 + L2) a + N(a) + c = g`, where
//! `A_ij = nu (grad psi_j, grad psi_i)`, `N(a)_i = sum_jk T_ijk a_j a_k`,
//! `T_ijk = b(psi_j, psi_k, psi_i)`, `L1_ij = b(mean, psi_j, psi_i)`,
//! `L2_ij = b(psi_j, mean, psi_i)`, `c_i = b(mean, mean, psi_i) + nu (grad mean, grad psi_i)`
//! and `g_i = (f, psi_i)`. The reduced mass matrix is the identity.

mod pressure;

pub use pressure::{rom_drag_series, PressureRecovery};

use crate::error::{Error, Result};
use crate::fem::element::NQ;
use crate::fem::{eval_at, gather, LinearOperators, NonlinearForm, TaylorHoodSpace};
use crate::fom::{NewtonSettings, TimeScheme};
use crate::numerics::{dot, norm2, DenseMatrix};
use crate::pod::PodBasis;

#[derive(Debug, Clone, PartialEq)]
pub struct RomOperators {
    pub r: usize,
    pub form: NonlinearForm,
    pub nu: f64,
    pub centered: bool,
    /// `nu (grad psi_j, grad psi_i)`
    pub a: DenseMatrix,
    /// `T_ijk` stored at `(j * r + k) * r + i`.
    tensor: Vec<f64>,
    pub l1: DenseMatrix,
    pub l2: DenseMatrix,
    pub c: Vec<f64>,
    pub g: Vec<f64>,
}

impl RomOperators {
    /// Assembles from raw parts; `tensor[i][j][k]` in row-major order.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        form: NonlinearForm,
        nu: f64,
        centered: bool,
        a: DenseMatrix,
        tensor_ijk: &[f64],
        l1: DenseMatrix,
        l2: DenseMatrix,
        c: Vec<f64>,
        g: Vec<f64>,
    ) -> Result<Self> {
        let r = a.rows();
        let square = |m: &DenseMatrix| m.rows() == r && m.cols() == r;
        if !square(&a) || !square(&l1) || !square(&l2) || c.len() != r || g.len() != r || tensor_ijk.len() != r * r * r
        {
            return Err(Error::precondition(format!("inconsistent reduced operator sizes for r = {r}")));
        }
        let mut tensor = vec![0.0; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    tensor[(j * r + k) * r + i] = tensor_ijk[(i * r + j) * r + k];
                }
            }
        }
        Ok(Self { r, form, nu, centered, a, tensor, l1, l2, c, g })
    }

    /// `T_ijk = b(psi_j, psi_k, psi_i)`
    pub fn tensor(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensor[(j * self.r + k) * self.r + i]
    }

    /// Row-major `[i][j][k]` copy of the tensor.
    pub fn tensor_ijk(&self) -> Vec<f64> {
        let r = self.r;
        let mut out = vec![0.0; r * r * r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    out[(i * r + j) * r + k] = self.tensor(i, j, k);
                }
            }
        }
        out
    }

    /// `N(a)_i = sum_jk T_ijk a_j a_k`
    pub fn nonlinear(&self, a: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut out = vec![0.0; r];
        for j in 0..r {
            for k in 0..r {
                let s = a[j] * a[k];
                if s == 0.0 {
                    continue;
                }
                let col = &self.tensor[(j * r + k) * r..(j * r + k + 1) * r];
                for (o, t) in out.iter_mut().zip(col) {
                    *o += s * t;
                }
            }
        }
        out
    }

    /// `dN/da`, `J_im = sum_k (T_imk + T_ikm) a_k`
    pub fn nonlinear_jacobian(&self, a: &[f64]) -> DenseMatrix {
        let r = self.r;
        let mut jm = DenseMatrix::zeros(r, r);
        for m in 0..r {
            for k in 0..r {
                let ak = a[k];
                if ak == 0.0 {
                    continue;
                }
                let c1 = &self.tensor[(m * r + k) * r..(m * r + k + 1) * r];
                let c2 = &self.tensor[(k * r + m) * r..(k * r + m + 1) * r];
                for i in 0..r {
                    jm[(i, m)] += ak * (c1[i] + c2[i]);
                }
            }
        }
        jm
    }

    /// `(A + L1 + L2) a + N(a) + c - g`
    pub fn rhs_operator(&self, a: &[f64]) -> Vec<f64> {
        let mut out = self.nonlinear(a);
        let lin = self.linear_part();
        let la = lin.matvec(a);
        for i in 0..self.r {
            out[i] += la[i] + self.c[i] - self.g[i];
        }
        out
    }

    fn linear_part(&self) -> DenseMatrix {
        let mut m = self.a.clone();
        for (x, (y, z)) in m.as_mut_slice().iter_mut().zip(self.l1.as_slice().iter().zip(self.l2.as_slice())) {
            *x += y + z;
        }
        m
    }

    /// Largest tensor entry in magnitude.
    pub fn tensor_scale(&self) -> f64 {
        self.tensor.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Values and gradients of each field at every quadrature point of triangle `t`.
fn element_samples(space: &TaylorHoodSpace, t: usize, fields: &[&[f64]]) -> Vec<[([f64; 2], [[f64; 2]; 2]); NQ]> {
    fields
        .iter()
        .map(|f| {
            let c = gather(space, t, f);
            std::array::from_fn(|q| eval_at(space, t, q, &c))
        })
        .collect()
}

/// Offline stage. `ops` holds unit-viscosity operators; `load` is the FE
/// load vector `(f, phi)` or `None` for zero forcing.
pub fn assemble_rom_operators(
    basis: &PodBasis,
    r: usize,
    space: &TaylorHoodSpace,
    ops: &LinearOperators,
    form: NonlinearForm,
    nu: f64,
    load: Option<&[f64]>,
) -> Result<RomOperators> {
    if r > basis.rank() {
        return Err(Error::RankExceeded { requested: r, rank: basis.rank() });
    }
    if r == 0 {
        return Err(Error::precondition("a reduced model needs at least one mode"));
    }
    if basis.n_dofs() != space.n_velocity() {
        return Err(Error::SpaceMismatch(format!(
            "basis has {} entries, space {}",
            basis.n_dofs(),
            space.n_velocity()
        )));
    }
    let modes: Vec<&[f64]> = basis.modes[..r].iter().map(Vec::as_slice).collect();
    let kpsi: Vec<Vec<f64>> = modes.iter().map(|p| ops.stiffness.matvec(p)).collect();
    let mut a = DenseMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..=i {
            let v = nu * 0.5 * (dot(modes[i], &kpsi[j]) + dot(modes[j], &kpsi[i]));
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut tensor = vec![0.0; r * r * r];
    let mut l1 = DenseMatrix::zeros(r, r);
    let mut l2 = DenseMatrix::zeros(r, r);
    let mut c = vec![0.0; r];
    let mean = basis.mean.as_deref();
    let tab = space.tables();
    let mut fluxes = vec![[0.0; 2]; r * r];
    for t in 0..space.mesh().num_triangles() {
        let s = element_samples(space, t, &modes);
        let sm = mean.map(|m| element_samples(space, t, &[m]).pop().unwrap());
        for q in 0..NQ {
            let w = tab.weights[t][q];
            for j in 0..r {
                let (uj, gj) = &s[j][q];
                for k in 0..r {
                    let (uk, gk) = &s[k][q];
                    fluxes[j * r + k] = form.flux(*uj, gj, *uk, gk);
                }
            }
            for (jk, n) in fluxes.iter().enumerate() {
                let col = &mut tensor[jk * r..(jk + 1) * r];
                for (i, ti) in col.iter_mut().enumerate() {
                    let ui = s[i][q].0;
                    *ti += w * (n[0] * ui[0] + n[1] * ui[1]);
                }
            }
            if let Some(sm) = &sm {
                let (um, gm) = &sm[q];
                let nmm = form.flux(*um, gm, *um, gm);
                for i in 0..r {
                    let ui = s[i][q].0;
                    c[i] += w * (nmm[0] * ui[0] + nmm[1] * ui[1]);
                    for j in 0..r {
                        let (uj, gj) = &s[j][q];
                        let n1 = form.flux(*um, gm, *uj, gj);
                        let n2 = form.flux(*uj, gj, *um, gm);
                        l1[(i, j)] += w * (n1[0] * ui[0] + n1[1] * ui[1]);
                        l2[(i, j)] += w * (n2[0] * ui[0] + n2[1] * ui[1]);
                    }
                }
            }
        }
    }
    if let Some(m) = mean {
        let km = ops.stiffness.matvec(m);
        for i in 0..r {
            c[i] += nu * dot(modes[i], &km);
        }
    }
    let g = match load {
        Some(f) => modes.iter().map(|p| dot(p, f)).collect(),
        None => vec![0.0; r],
    };
    Ok(RomOperators { r, form, nu, centered: mean.is_some(), a, tensor, l1, l2, c, g })
}

/// Time grid and solver settings of an online run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RomRunConfig {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub scheme: TimeScheme,
    pub newton: NewtonSettings,
}

/// Coefficients `a^n` at `t0 + n dt`, `n = 0 .. steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct RomTrajectory {
    pub times: Vec<f64>,
    pub coefficients: Vec<Vec<f64>>,
    pub newton_iterations: Vec<usize>,
}

impl RomTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Online stage: `steps` implicit steps from `a0` with Newton on the
/// `r`-dimensional system. BDF2 starts with one backward Euler step.
pub fn run_rom(ops: &RomOperators, a0: &[f64], cfg: &RomRunConfig) -> Result<RomTrajectory> {
    let r = ops.r;
    if a0.len() != r {
        return Err(Error::precondition(format!("initial coefficients have length {}, expected {r}", a0.len())));
    }
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::Config(format!("dt must be positive, got {}", cfg.dt)));
    }
    let lin = ops.linear_part();
    let mut traj = RomTrajectory {
        times: vec![cfg.t0],
        coefficients: vec![a0.to_vec()],
        newton_iterations: Vec::with_capacity(cfg.steps),
    };
    let mut prev: Option<Vec<f64>> = None;
    let mut cur = a0.to_vec();
    for step in 1..=cfg.steps {
        let time = cfg.t0 + step as f64 * cfg.dt;
        let [c0, c1, c2] = cfg.scheme.coefficients(cfg.dt, prev.is_some());
        let hist: Vec<f64> = match &prev {
            Some(p) if c2 != 0.0 => cur.iter().zip(p).map(|(x, y)| c1 * x + c2 * y).collect(),
            _ => cur.iter().map(|x| c1 * x).collect(),
        };
        let mut a = cur.clone();
        let mut residual = f64::INFINITY;
        let mut done = None;
        for it in 1..=cfg.newton.max_iterations {
            let la = lin.matvec(&a);
            let na = ops.nonlinear(&a);
            let res: Vec<f64> = (0..r).map(|i| c0 * a[i] + hist[i] + la[i] + na[i] + ops.c[i] - ops.g[i]).collect();
            residual = norm2(&res);
            if !residual.is_finite() {
                break;
            }
            if residual <= cfg.newton.tolerance {
                done = Some(it);
                break;
            }
            if it == cfg.newton.max_iterations {
                break;
            }
            let mut jac = ops.nonlinear_jacobian(&a);
            for (x, y) in jac.as_mut_slice().iter_mut().zip(lin.as_slice()) {
                *x += y;
            }
            for i in 0..r {
                jac[(i, i)] += c0;
            }
            let delta = match jac.solve(&res) {
                Ok(d) => d,
                Err(_) => break,
            };
            for (x, d) in a.iter_mut().zip(&delta) {
                *x -= cfg.newton.damping * d;
            }
        }
        let Some(iterations) = done else {
            return Err(Error::NewtonDiverged { step, time, iterations: cfg.newton.max_iterations, residual });
        };
        traj.newton_iterations.push(iterations);
        traj.times.push(time);
        traj.coefficients.push(a.clone());
        prev = Some(std::mem::replace(&mut cur, a));
    }
    Ok(traj)
}

/// `mean + sum_j a_j psi_j`
pub fn reconstruct_field(basis: &PodBasis, a: &[f64]) -> Result<Vec<f64>> {
    basis.reconstruct(a)
}
