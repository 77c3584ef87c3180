//! Quick invariant checks behind the `verify` subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fem::{
    assemble_linear_operators, field_norms, nonlinear_residual, nonlinear_residual_and_jacobian, random_field,
    trilinear_value, BoundaryCondition, BoundaryMap, NonlinearForm, TaylorHoodSpace,
};
use crate::fom::{kelvin_helmholtz, kh_viscosity, run_fom, FomConfig, TimeScheme};
use crate::mesh::{labels, uniform_rect_mesh, Diagonal};
use crate::numerics::norm2;
use crate::pod::{build_pod_basis, Centering};
use crate::rom::assemble_rom_operators;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value against its bound.
    pub worst: f64,
    pub bound: f64,
}

impl Check {
    fn new(name: &'static str, worst: f64, bound: f64) -> Self {
        Self { name, passed: worst <= bound, worst, bound }
    }
}

/// No-slip unit square with `n x n` cells.
pub fn unit_square(n: usize) -> Result<TaylorHoodSpace> {
    let mesh = uniform_rect_mesh(n, n, 1.0, 1.0, Diagonal::Alternating)?;
    let bcs: BoundaryMap = [labels::BOTTOM, labels::RIGHT, labels::TOP, labels::LEFT]
        .into_iter()
        .map(|l| (l, BoundaryCondition::NoSlip))
        .collect();
    TaylorHoodSpace::new(mesh, bcs)
}

pub fn run_checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let s = unit_square(8)?;
    let ops = assemble_linear_operators(&s, 1.0);
    let h1 = |u: &[f64]| -> Result<f64> {
        let n = field_norms(&s, &ops, u)?;
        Ok((n.l2 * n.l2 + n.h1_semi * n.h1_semi).sqrt())
    };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (u, v) = (random_field(&s, &mut rng), random_field(&s, &mut rng));
        let (nu, nv) = (h1(&u)?, h1(&v)?);
        worst = worst
            .max(trilinear_value(NonlinearForm::Skew, &s, &u, &v, &v)?.abs() / (nu * nv * nv))
            .max(trilinear_value(NonlinearForm::Rotational, &s, &u, &v, &v)?.abs() / (nu * nv * nv))
            .max(trilinear_value(NonlinearForm::Emac, &s, &u, &u, &u)?.abs() / (nu * nu * nu));
    }
    out.push(Check::new("energy-neutral forms vanish", worst, 1e-11));

    let mut worst = 0.0f64;
    for form in NonlinearForm::ALL {
        let u = random_field(&s, &mut rng);
        let d = random_field(&s, &mut rng);
        let (_, jac) = nonlinear_residual_and_jacobian(form, &s, &u)?;
        let jd = jac.matvec(&d);
        let h = 1e-5;
        let shift = |sg: f64| -> Vec<f64> { u.iter().zip(&d).map(|(a, b)| a + sg * h * b).collect() };
        let (rp, rm) = (nonlinear_residual(form, &s, &shift(1.0)), nonlinear_residual(form, &s, &shift(-1.0)));
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let diff: Vec<f64> = fd.iter().zip(&jd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm2(&diff) / norm2(&jd));
    }
    out.push(Check::new("Jacobians match differences", worst, 1e-7));

    let kh = kelvin_helmholtz(6)?;
    let nu = kh_viscosity(100.0);
    let cfg = FomConfig::new(nu, 0.02, 0.2, NonlinearForm::Skew, TimeScheme::BackwardEuler);
    let run = run_fom(&cfg, &kh.space, kh.u0.clone(), None, None)?;
    let kops = assemble_linear_operators(&kh.space, 1.0);
    let basis = build_pod_basis(&run.snapshots, &kops, Centering::None)?;
    let r = basis.rank();
    let mut ortho = 0.0f64;
    let mut div = 0.0f64;
    for i in 0..r {
        for j in 0..r {
            let g = kops.mass.bilinear(&basis.modes[i], &basis.modes[j]);
            ortho = ortho.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
        div = div.max(norm2(&kops.divergence.matvec(&basis.modes[i])));
    }
    out.push(Check::new("POD modes are orthonormal", ortho, 1e-10));
    out.push(Check::new("POD modes are divergence-free", div, 1e-8));
    let energy: f64 =
        run.snapshots.columns().iter().map(|u| kops.mass.bilinear(u, u)).sum::<f64>() / run.snapshots.len() as f64;
    let trace: f64 = basis.eigenvalues.iter().sum();
    out.push(Check::new("POD eigenvalues sum to the snapshot energy", (trace - energy).abs() / energy, 1e-10));

    let r = r.min(6);
    let mut worst = 0.0f64;
    for form in NonlinearForm::ALL {
        let rom = assemble_rom_operators(&basis, r, &kh.space, &kops, form, nu, None)?;
        for _ in 0..10 {
            let (i, j, k) = (rng.gen_range(0..r), rng.gen_range(0..r), rng.gen_range(0..r));
            let m = &basis.modes;
            let b = trilinear_value(form, &kh.space, &m[j], &m[k], &m[i])?;
            worst = worst.max((rom.tensor(i, j, k) - b).abs() / rom.tensor_scale());
        }
    }
    out.push(Check::new("reduced tensor matches the trilinear forms", worst, 1e-10));
    Ok(out)
}
