use super::ScalarSeries;
use crate::error::{Error, Result};
use crate::fem::{div_curl_sq, LinearOperators, TaylorHoodSpace};
use crate::pod::{PodBasis, SnapshotSet};
use crate::rom::RomTrajectory;

/// Full-order/reduced-order error functionals over a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryError {
    /// `max_n ||w^n - u^n||`
    pub linf_l2: f64,
    /// `nu dt sum_{n>=1} ||grad(w^n - u^n)||^2`
    pub l2_h1: f64,
    /// `max_n ||grad u^n||`
    pub c_u: f64,
    /// `||div u^n||`
    pub div_series: ScalarSeries,
    /// `||w^n - u^n||` per step.
    pub l2_series: ScalarSeries,
}

/// Compares reconstructed ROM states with the snapshots at identical times.
/// `ops` must carry unit viscosity.
pub fn trajectory_error(
    space: &TaylorHoodSpace,
    ops: &LinearOperators,
    fom: &SnapshotSet,
    rom: &RomTrajectory,
    basis: &PodBasis,
    nu: f64,
    dt: f64,
) -> Result<TrajectoryError> {
    if fom.len() != rom.len() {
        return Err(Error::TimeGridMismatch(format!("{} full-order states vs {} reduced", fom.len(), rom.len())));
    }
    if fom.n_dofs() != space.n_velocity() {
        return Err(Error::SpaceMismatch("snapshots do not belong to the space".into()));
    }
    let tol = 1e-9 * dt.abs().max(f64::MIN_POSITIVE);
    for (n, (a, b)) in fom.times().iter().zip(&rom.times).enumerate() {
        if (a - b).abs() > tol {
            return Err(Error::TimeGridMismatch(format!("entry {n}: t = {a} vs {b}")));
        }
    }
    let mut linf: f64 = 0.0;
    let mut l2h1 = 0.0;
    let mut c_u: f64 = 0.0;
    let mut div = Vec::with_capacity(fom.len());
    let mut errs = Vec::with_capacity(fom.len());
    for (n, (u, a)) in fom.columns().iter().zip(&rom.coefficients).enumerate() {
        let w = basis.reconstruct(a)?;
        let e: Vec<f64> = w.iter().zip(u).map(|(x, y)| x - y).collect();
        let el2 = ops.mass.bilinear(&e, &e).max(0.0).sqrt();
        linf = linf.max(el2);
        errs.push(el2);
        if n > 0 {
            l2h1 += ops.stiffness.bilinear(&e, &e).max(0.0);
        }
        c_u = c_u.max(ops.stiffness.bilinear(u, u).max(0.0).sqrt());
        div.push(div_curl_sq(space, u).0.max(0.0).sqrt());
    }
    let times = fom.times().to_vec();
    Ok(TrajectoryError {
        linf_l2: linf,
        l2_h1: nu * dt * l2h1,
        c_u,
        div_series: ScalarSeries::new("div_error", times.clone(), div)?,
        l2_series: ScalarSeries::new("l2_error", times, errs)?,
    })
}
