//! Initial and boundary data of the built-in experiments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble_linear_operators, project_divergence_free, BoundaryCondition, BoundaryMap, TaylorHoodSpace};
use crate::mesh::{identify_periodic, labels, uniform_rect_mesh, Axis, Diagonal, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    KelvinHelmholtz,
    CylinderChannel,
    TaylorGreen,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::KelvinHelmholtz => "kelvin-helmholtz",
            Self::CylinderChannel => "cylinder-channel",
            Self::TaylorGreen => "taylor-green",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::KelvinHelmholtz, Self::CylinderChannel, Self::TaylorGreen]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem '{s}'")))
    }
}

/// Space, initial velocity and drag boundary of an experiment. For the
/// shear layer and the vortex array `u0` is the discretely divergence-free
/// L2 projection of the interpolated formula, so every recorded state lies in
/// the weakly divergence-free subspace.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub kind: ProblemKind,
    pub space: TaylorHoodSpace,
    pub u0: Vec<f64>,
    pub drag_label: Option<u32>,
}

/// Reynolds number 100 in the shear-layer scaling `Re = 1 / (28 nu)`.
pub fn kh_viscosity(re: f64) -> f64 {
    1.0 / (28.0 * re)
}

/// Shear layer `tanh(28(2y - 1))` plus a small divergence-free perturbation.
pub fn kh_initial_velocity(x: f64, y: f64) -> [f64; 2] {
    let g = (-(28.0f64 * 28.0) * (y - 0.5).powi(2)).exp();
    let c = (8.0 * PI * x).cos() + (20.0 * PI * x).cos();
    let dpsi_dy = -2.0 * 28.0 * 28.0 * (y - 0.5) * g * c;
    let dpsi_dx = g * (-8.0 * PI * (8.0 * PI * x).sin() - 20.0 * PI * (20.0 * PI * x).sin());
    [(28.0 * (2.0 * y - 1.0)).tanh() + 1e-3 * dpsi_dy, -1e-3 * dpsi_dx]
}

/// Parabolic channel profile with peak 1.5 at mid-height.
pub fn channel_profile(y: f64) -> f64 {
    6.0 / (0.41 * 0.41) * y * (0.41 - y)
}

/// Decaying vortex array; `[0, 2]^2`-periodic.
pub fn taylor_green_velocity(x: f64, y: f64, t: f64, nu: f64) -> [f64; 2] {
    let d = (-2.0 * PI * PI * nu * t).exp();
    [-(PI * x).cos() * (PI * y).sin() * d, (PI * x).sin() * (PI * y).cos() * d]
}

/// `g[a][b] = d u_a / d x_b`
pub fn taylor_green_gradient(x: f64, y: f64, t: f64, nu: f64) -> [[f64; 2]; 2] {
    let d = (-2.0 * PI * PI * nu * t).exp();
    let (sx, cx, sy, cy) = ((PI * x).sin(), (PI * x).cos(), (PI * y).sin(), (PI * y).cos());
    [[PI * sx * sy * d, -PI * cx * cy * d], [PI * cx * cy * d, -PI * sx * sy * d]]
}

fn solenoidal(space: &TaylorHoodSpace, u: Vec<f64>) -> Result<Vec<f64>> {
    project_divergence_free(space, &assemble_linear_operators(space, 1.0), &u)
}

/// Unit square periodic in x, no-penetration top and bottom, `n x n` cells.
pub fn kelvin_helmholtz(n: usize) -> Result<ProblemSetup> {
    let mesh = uniform_rect_mesh(n, n, 1.0, 1.0, Diagonal::Alternating)?;
    let mesh = identify_periodic(mesh, Axis::X, None)?;
    let mut bcs = BoundaryMap::new();
    bcs.insert(labels::BOTTOM, BoundaryCondition::NoPenetration);
    bcs.insert(labels::TOP, BoundaryCondition::NoPenetration);
    bcs.insert(labels::LEFT, BoundaryCondition::Periodic);
    bcs.insert(labels::RIGHT, BoundaryCondition::Periodic);
    let space = TaylorHoodSpace::new(mesh, bcs)?;
    let u0 = solenoidal(&space, build_initial_condition(ProblemKind::KelvinHelmholtz, &space, 0.0))?;
    Ok(ProblemSetup { kind: ProblemKind::KelvinHelmholtz, space, u0, drag_label: None })
}

/// Channel with the parabolic profile prescribed at inflow and outflow,
/// started from rest.
pub fn cylinder_channel(mesh: Mesh) -> Result<ProblemSetup> {
    let mut bcs = BoundaryMap::new();
    let inflow = BoundaryCondition::dirichlet(|_, y, _| [channel_profile(y), 0.0]);
    bcs.insert(labels::CHANNEL_WALLS, BoundaryCondition::NoSlip);
    bcs.insert(labels::CHANNEL_INFLOW, inflow.clone());
    bcs.insert(labels::CHANNEL_OUTFLOW, inflow);
    bcs.insert(labels::CYLINDER, BoundaryCondition::NoSlip);
    let space = TaylorHoodSpace::new(mesh, bcs)?;
    let mut u0 = vec![0.0; space.n_velocity()];
    space.apply_boundary_values(&mut u0, 0.0);
    Ok(ProblemSetup { kind: ProblemKind::CylinderChannel, space, u0, drag_label: Some(labels::CYLINDER) })
}

/// `[0, 2]^2`, periodic in both directions, `n x n` cells.
pub fn taylor_green(n: usize, nu: f64) -> Result<ProblemSetup> {
    let mesh = uniform_rect_mesh(n, n, 2.0, 2.0, Diagonal::Alternating)?;
    let mesh = identify_periodic(identify_periodic(mesh, Axis::X, None)?, Axis::Y, None)?;
    let bcs = [labels::BOTTOM, labels::RIGHT, labels::TOP, labels::LEFT]
        .into_iter()
        .map(|l| (l, BoundaryCondition::Periodic))
        .collect();
    let space = TaylorHoodSpace::new(mesh, bcs)?;
    let u0 = solenoidal(&space, build_initial_condition(ProblemKind::TaylorGreen, &space, nu))?;
    Ok(ProblemSetup { kind: ProblemKind::TaylorGreen, space, u0, drag_label: None })
}

/// Nodal interpolant of the problem's initial velocity on `space`.
pub fn build_initial_condition(kind: ProblemKind, space: &TaylorHoodSpace, nu: f64) -> Vec<f64> {
    let mut u = match kind {
        ProblemKind::KelvinHelmholtz => space.interpolate(kh_initial_velocity),
        ProblemKind::CylinderChannel => vec![0.0; space.n_velocity()],
        ProblemKind::TaylorGreen => space.interpolate(|x, y| taylor_green_velocity(x, y, 0.0, nu)),
    };
    space.apply_boundary_values(&mut u, 0.0);
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kh_centerline_and_top() {
        for x in [0.0, 0.13, 0.5, 0.77] {
            assert_eq!(kh_initial_velocity(x, 0.5)[0], 0.0);
        }
        let top = kh_initial_velocity(0.0, 1.0);
        assert!((top[0] - 1.0).abs() < 1e-10);
        assert!(top[1].abs() < 1e-80);
    }

    #[test]
    fn taylor_green_is_divergence_free() {
        for (x, y) in [(0.1, 0.3), (1.4, 0.2), (0.9, 1.9)] {
            let g = taylor_green_gradient(x, y, 0.3, 0.01);
            assert!((g[0][0] + g[1][1]).abs() < 1e-15);
            // gradient consistent with the field
            let h = 1e-6;
            let (up, um) = (taylor_green_velocity(x + h, y, 0.3, 0.01), taylor_green_velocity(x - h, y, 0.3, 0.01));
            assert!(((up[0] - um[0]) / (2.0 * h) - g[0][0]).abs() < 1e-8);
        }
    }

    #[test]
    fn setups_start_divergence_free() {
        for setup in [kelvin_helmholtz(4).unwrap(), taylor_green(4, 0.01).unwrap()] {
            let ops = assemble_linear_operators(&setup.space, 1.0);
            let bu = ops.divergence.matvec(&setup.u0);
            assert!(bu.iter().all(|v| v.abs() < 1e-12));
            let raw = build_initial_condition(setup.kind, &setup.space, 0.01);
            let d: Vec<f64> = raw.iter().zip(&setup.u0).map(|(a, b)| a - b).collect();
            assert!(ops.mass.bilinear(&d, &d).sqrt() < 0.05);
        }
    }

    #[test]
    fn inflow_peak() {
        assert!((channel_profile(0.205) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn problem_names() {
        assert_eq!("taylor-green".parse::<ProblemKind>().unwrap(), ProblemKind::TaylorGreen);
        assert!("lid-driven".parse::<ProblemKind>().is_err());
    }
}
