use super::RomTrajectory;
use crate::diagnostics::drag_coefficient;
use crate::error::Result;
use crate::fem::{
    constraint_list, eliminate, nonlinear_residual, LinearOperators, NonlinearForm, SaddlePattern, TaylorHoodSpace,
};
use crate::fom::TimeScheme;
use crate::numerics::{SparseLu, SparseLuSymbolic};
use crate::pod::PodBasis;

/// Pressure consistent with a given velocity history: solves
/// `M z + B^T p = R(u)`, `B z = 0` where `R(u)` is the momentum residual
/// without the pressure term. For a converged full-order state `z = 0` and `p`
/// is the full-order pressure.
pub struct PressureRecovery<'a> {
    space: &'a TaylorHoodSpace,
    ops: &'a LinearOperators,
    lu: SparseLu,
    fixed: Vec<(usize, f64)>,
}

impl<'a> PressureRecovery<'a> {
    /// `ops` with unit viscosity.
    pub fn new(space: &'a TaylorHoodSpace, ops: &'a LinearOperators) -> Result<Self> {
        let nv = space.n_velocity();
        let pat = SaddlePattern::new(space);
        let mut m = pat.zeros();
        pat.add_block(&mut m, &ops.mass, 1.0, 0, 0);
        pat.add_block_transposed(&mut m, &ops.divergence, 1.0, 0, nv);
        pat.add_block(&mut m, &ops.divergence, 1.0, nv, 0);
        let fixed = constraint_list(space, space.n_total(), None)?;
        let mut rhs = vec![0.0; space.n_total()];
        eliminate(&mut m, &mut rhs, &fixed)?;
        let lu = SparseLuSymbolic::new(&m)?.factor(&m)?;
        Ok(Self { space, ops, lu, fixed })
    }

    /// `c0 u + hist` is the discrete time derivative.
    pub fn recover(&self, form: NonlinearForm, nu: f64, u: &[f64], c0: f64, hist: &[f64]) -> Result<Vec<f64>> {
        self.space.check_velocity(u)?;
        let nv = self.space.n_velocity();
        let dudt: Vec<f64> = u.iter().zip(hist).map(|(a, h)| c0 * a + h).collect();
        let mut rhs = self.ops.mass.matvec(&dudt);
        let ku = self.ops.stiffness.matvec(u);
        let nu_ = nonlinear_residual(form, self.space, u);
        for i in 0..nv {
            rhs[i] += nu * ku[i] + nu_[i];
        }
        rhs.resize(self.space.n_total(), 0.0);
        for &(i, _) in &self.fixed {
            rhs[i] = 0.0;
        }
        let x = self.lu.solve(&rhs)?;
        let mut p = x[nv..].to_vec();
        if self.space.pinned_pressure().is_some() {
            self.space.remove_pressure_mean(&mut p);
        }
        Ok(p)
    }
}

/// Drag of every reconstructed state after the first; the initial entry is NaN
/// because its time derivative is undefined.
#[allow(clippy::too_many_arguments)]
pub fn rom_drag_series(
    space: &TaylorHoodSpace,
    ops: &LinearOperators,
    basis: &PodBasis,
    traj: &RomTrajectory,
    form: NonlinearForm,
    nu: f64,
    dt: f64,
    scheme: TimeScheme,
    label: u32,
) -> Result<Vec<f64>> {
    let rec = PressureRecovery::new(space, ops)?;
    let fields: Vec<Vec<f64>> = traj.coefficients.iter().map(|a| basis.reconstruct(a)).collect::<Result<_>>()?;
    let mut out = vec![f64::NAN];
    for n in 1..fields.len() {
        let have_history = n >= 2;
        let [c0, c1, c2] = scheme.coefficients(dt, have_history);
        let hist: Vec<f64> = if have_history && c2 != 0.0 {
            fields[n - 1].iter().zip(&fields[n - 2]).map(|(a, b)| c1 * a + c2 * b).collect()
        } else {
            fields[n - 1].iter().map(|a| c1 * a).collect()
        };
        let p = rec.recover(form, nu, &fields[n], c0, &hist)?;
        out.push(drag_coefficient(space, &fields[n], &p, label, nu)?);
    }
    Ok(out)
}
