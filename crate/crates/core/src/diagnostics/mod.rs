//! Energy, enstrophy, drag, time norms and FOM/ROM error functionals.

mod trajectory;

pub use trajectory::{trajectory_error, TrajectoryError};

use crate::error::{Error, Result};
use crate::fem::element::{p2_grads, p2_values};
use crate::fem::{div_curl_sq, LinearOperators, TaylorHoodSpace};
use crate::numerics::edge_gauss3;

/// `(1/2 ||u||^2, 1/2 ||curl u||^2)`; `ops` assembled with unit viscosity.
pub fn energy_enstrophy(space: &TaylorHoodSpace, ops: &LinearOperators, u: &[f64]) -> Result<(f64, f64)> {
    space.check_velocity(u)?;
    let (_, curl2) = div_curl_sq(space, u);
    Ok((0.5 * ops.mass.bilinear(u, u).max(0.0), 0.5 * curl2))
}

/// `20 int_S (nu d(u.t)/dn n_y - p n_x) dS` over edges with `label`, where
/// `n` is the unit normal pointing from the obstacle into the fluid and
/// `t = (n_y, -n_x)`.
pub fn drag_coefficient(space: &TaylorHoodSpace, u: &[f64], p: &[f64], label: u32, nu: f64) -> Result<f64> {
    space.check_velocity(u)?;
    space.check_pressure(p)?;
    let mesh = space.mesh();
    if !mesh.has_label(label) {
        return Err(Error::Boundary(format!("no boundary edge carries drag label {label}")));
    }
    let (sp, sw) = edge_gauss3();
    let owners = mesh.boundary_edge_owners();
    let tab = space.tables();
    let mut total = 0.0;
    for (be, &(t, k)) in mesh.boundary_edges().iter().zip(&owners) {
        if be.label != label {
            continue;
        }
        let tri = mesh.triangles()[t];
        let (a, b) = (mesh.vertices()[tri[k]], mesh.vertices()[tri[(k + 1) % 3]]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        // the triangle is counterclockwise, so (dy, -dx) leaves the fluid
        let n = [-dy / len, dx / len];
        let tg = [n[1], -n[0]];
        let nodes = space.element_nodes(t);
        let pn = space.element_pressure_nodes(t);
        let geo = &tab.geometry[t];
        for (s, w) in sp.iter().zip(&sw) {
            let mut l = [0.0; 3];
            l[k] = 1.0 - s;
            l[(k + 1) % 3] = *s;
            let g = p2_grads(l, &geo.grad_l);
            let mut du = [[0.0; 2]; 2];
            for i in 0..6 {
                for c in 0..2 {
                    for d in 0..2 {
                        du[c][d] += u[2 * nodes[i] + c] * g[i][d];
                    }
                }
            }
            let mut dut_dn = 0.0;
            for c in 0..2 {
                for d in 0..2 {
                    dut_dn += tg[c] * du[c][d] * n[d];
                }
            }
            let pq: f64 = (0..3).map(|i| p[pn[i]] * l[i]).sum();
            total += w * len * (nu * dut_dn * n[1] - pq * n[0]);
        }
    }
    Ok(20.0 * total)
}

/// Velocity of `u` at barycentric point `l` of triangle `t`.
pub fn velocity_at(space: &TaylorHoodSpace, u: &[f64], t: usize, l: [f64; 3]) -> [f64; 2] {
    let phi = p2_values(l);
    let nodes = space.element_nodes(t);
    let mut v = [0.0; 2];
    for i in 0..6 {
        v[0] += phi[i] * u[2 * nodes[i]];
        v[1] += phi[i] * u[2 * nodes[i] + 1];
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeNormOrder {
    One,
    Two,
    Inf,
}

/// `(dt sum_n a_n^p)^(1/p)` of the per-step spatial norms `a_n`; `Inf` is the max.
pub fn time_norm(values: &[f64], dt: f64, p: TimeNormOrder) -> f64 {
    match p {
        TimeNormOrder::One => dt * values.iter().map(|v| v.abs()).sum::<f64>(),
        TimeNormOrder::Two => (dt * values.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        TimeNormOrder::Inf => values.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

/// Discrete time norm of a field series: spatial L2 (`k = 0`) or H1
/// seminorm (`k = 1`) per step, then [`time_norm`].
pub fn discrete_time_norm(ops: &LinearOperators, fields: &[Vec<f64>], dt: f64, p: TimeNormOrder, k: u8) -> Result<f64> {
    let m = match k {
        0 => &ops.mass,
        1 => &ops.stiffness,
        _ => return Err(Error::precondition(format!("spatial norm index {k} (expected 0 or 1)"))),
    };
    let norms: Vec<f64> = fields.iter().map(|f| m.bilinear(f, f).max(0.0).sqrt()).collect();
    Ok(time_norm(&norms, dt, p))
}

/// A labelled time series.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::precondition("series times and values differ in length"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::precondition("series times must increase strictly"));
        }
        Ok(Self { label: label.into(), times, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Lag (in samples, at least `min_lag`) of the first autocorrelation peak of
/// the mean-removed series after the correlation has turned negative, with
/// the correlation at that lag.
pub fn dominant_period(values: &[f64], min_lag: usize) -> Option<(usize, f64)> {
    let n = values.len();
    let lo = min_lag.max(1);
    if n < 2 * lo + 1 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var: f64 = c.iter().map(|v| v * v).sum();
    if var == 0.0 {
        return None;
    }
    let corr = |lag: usize| (0..n - lag).map(|i| c[i] * c[i + lag]).sum::<f64>() / var * n as f64 / (n - lag) as f64;
    let mut dipped = false;
    let mut best: Option<(usize, f64)> = None;
    for lag in lo..n / 2 {
        let r = corr(lag);
        if !dipped {
            dipped = r < 0.0;
            continue;
        }
        if r < 0.0 && best.is_some() {
            break;
        }
        if r > 0.0 && best.is_none_or(|(_, b)| r > b) {
            best = Some((lag, r));
        }
    }
    best
}
