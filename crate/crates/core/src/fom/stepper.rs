use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_linear_operators, constraint_list, element_nonlinear, eliminate, LinearOperators, NonlinearForm, Profile,
    SaddlePattern, TaylorHoodSpace,
};
use crate::numerics::{norm2, SparseLuSymbolic, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    BackwardEuler,
    Bdf2,
}

impl TimeScheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::BackwardEuler => "backward-euler",
            Self::Bdf2 => "bdf2",
        }
    }

    /// Coefficients `(c0, c1, c2)` of `c0 u^{n+1} + c1 u^n + c2 u^{n-1}`;
    /// BDF2 without a second history level falls back to backward Euler.
    pub fn coefficients(self, dt: f64, have_history: bool) -> [f64; 3] {
        match (self, have_history) {
            (Self::Bdf2, true) => [1.5 / dt, -2.0 / dt, 0.5 / dt],
            _ => [1.0 / dt, -1.0 / dt, 0.0],
        }
    }
}

impl fmt::Display for TimeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TimeScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward-euler" | "be" => Ok(Self::BackwardEuler),
            "bdf2" => Ok(Self::Bdf2),
            _ => Err(Error::Config(format!("unknown time scheme '{s}' (expected backward-euler or bdf2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSettings {
    /// Absolute bound on the 2-norm of the free residual entries.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step length multiplier, 1 for full Newton steps.
    pub damping: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 20, damping: 1.0 }
    }
}

/// `(u^{n+1}, p^{n+1})` with one level of velocity history.
#[derive(Debug, Clone, PartialEq)]
pub struct FomState {
    pub u: Vec<f64>,
    pub u_prev: Option<Vec<f64>>,
    pub p: Vec<f64>,
    pub time: f64,
    pub step: usize,
}

impl FomState {
    pub fn initial(space: &TaylorHoodSpace, u0: Vec<f64>) -> Result<Self> {
        space.check_velocity(&u0)?;
        Ok(Self { u: u0, u_prev: None, p: vec![0.0; space.n_pressure()], time: 0.0, step: 0 })
    }
}

/// Newton statistics of an accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub residual: f64,
}

/// Implicit Navier-Stokes stepper. Assembles the linear operators and the
/// saddle-point pattern once; every Newton iteration refactorizes numerically.
pub struct FomStepper<'a> {
    space: &'a TaylorHoodSpace,
    nu: f64,
    dt: f64,
    form: NonlinearForm,
    scheme: TimeScheme,
    newton: NewtonSettings,
    forcing: Option<Profile>,
    ops: LinearOperators,
    pattern: SaddlePattern,
    symbolic: Option<SparseLuSymbolic>,
    base: Vec<(f64, SparseMatrix)>,
}

impl<'a> FomStepper<'a> {
    pub fn new(
        space: &'a TaylorHoodSpace,
        nu: f64,
        dt: f64,
        form: NonlinearForm,
        scheme: TimeScheme,
        newton: NewtonSettings,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::Config(format!("viscosity must be positive, got {nu}")));
        }
        Ok(Self {
            space,
            nu,
            dt,
            form,
            scheme,
            newton,
            forcing: None,
            ops: assemble_linear_operators(space, 1.0),
            pattern: SaddlePattern::new(space),
            symbolic: None,
            base: Vec::new(),
        })
    }

    pub fn with_forcing(mut self, f: Profile) -> Self {
        self.forcing = Some(f);
        self
    }

    /// Operators assembled with unit viscosity.
    pub fn operators(&self) -> &LinearOperators {
        &self.ops
    }

    pub fn space(&self) -> &TaylorHoodSpace {
        self.space
    }

    /// `(f(t), phi_i)`
    pub fn load_vector(&self, t: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.space.n_velocity()];
        if let Some(f) = &self.forcing {
            load_vector(self.space, f, t, &mut b);
        }
        b
    }

    fn base_matrix(&mut self, c0: f64) -> SparseMatrix {
        if let Some((_, m)) = self.base.iter().find(|(c, _)| *c == c0) {
            return m.clone();
        }
        let nv = self.space.n_velocity();
        let mut m = self.pattern.zeros();
        self.pattern.add_block(&mut m, &self.ops.mass, c0, 0, 0);
        self.pattern.add_block(&mut m, &self.ops.stiffness, self.nu, 0, 0);
        self.pattern.add_block_transposed(&mut m, &self.ops.divergence, -1.0, 0, nv);
        self.pattern.add_block(&mut m, &self.ops.divergence, -1.0, nv, 0);
        self.base.push((c0, m.clone()));
        m
    }

    /// Scheme residual at `(u, p)`, with `hist = c1 u^n + c2 u^{n-1}` and
    /// `load = (f, phi)`. Constrained and pinned entries are zeroed.
    fn residual(&self, u: &[f64], p: &[f64], c0: f64, hist: &[f64], load: &[f64], fixed: &[(usize, f64)]) -> Vec<f64> {
        let nv = self.space.n_velocity();
        let mut tu: Vec<f64> = u.iter().zip(hist).map(|(a, h)| c0 * a + h).collect();
        tu = self.ops.mass.matvec(&tu);
        let ku = self.ops.stiffness.matvec(u);
        let btp = self.ops.divergence.matvec_transpose(p);
        let mut r = vec![0.0; self.space.n_total()];
        for i in 0..nv {
            r[i] = tu[i] + self.nu * ku[i] - btp[i] - load[i];
        }
        for t in 0..self.space.mesh().num_triangles() {
            let re = element_nonlinear(self.form, self.space, t, u, None);
            let nodes = self.space.element_nodes(t);
            for l in 0..12 {
                r[2 * nodes[l / 2] + l % 2] += re[l];
            }
        }
        let bu = self.ops.divergence.matvec(u);
        for (q, v) in bu.iter().enumerate() {
            r[nv + q] = -v;
        }
        for &(i, _) in fixed {
            r[i] = 0.0;
        }
        r
    }

    /// Solves one implicit step from `state`.
    pub fn advance(&mut self, state: &FomState) -> Result<(FomState, StepReport)> {
        let space = self.space;
        space.check_velocity(&state.u)?;
        let nv = space.n_velocity();
        let step = state.step + 1;
        let t_new = step as f64 * self.dt;
        let [c0, c1, c2] = self.scheme.coefficients(self.dt, state.u_prev.is_some());
        let hist: Vec<f64> = match &state.u_prev {
            Some(prev) if c2 != 0.0 => state.u.iter().zip(prev).map(|(a, b)| c1 * a + c2 * b).collect(),
            _ => state.u.iter().map(|a| c1 * a).collect(),
        };
        let load = self.load_vector(t_new);
        let fixed = constraint_list(space, space.n_total(), None)?;

        let mut u = state.u.clone();
        space.apply_boundary_values(&mut u, t_new);
        let mut p = state.p.clone();
        if let Some(pin) = space.pinned_pressure() {
            let shift = p[pin];
            p.iter_mut().for_each(|v| *v -= shift);
        }
        let base = self.base_matrix(c0);
        let mut residual = f64::INFINITY;
        for it in 1..=self.newton.max_iterations {
            let r = self.residual(&u, &p, c0, &hist, &load, &fixed);
            residual = norm2(&r);
            if !residual.is_finite() {
                break;
            }
            if residual <= self.newton.tolerance {
                if space.pinned_pressure().is_some() {
                    space.remove_pressure_mean(&mut p);
                }
                let next = FomState { u, u_prev: Some(state.u.clone()), p, time: t_new, step };
                return Ok((next, StepReport { iterations: it, residual }));
            }
            if it == self.newton.max_iterations {
                break;
            }
            let mut jac = base.clone();
            for t in 0..space.mesh().num_triangles() {
                let mut je = [[0.0; 12]; 12];
                element_nonlinear(self.form, space, t, &u, Some(&mut je));
                self.pattern.add_element_velocity(jac.values_mut(), t, &je);
            }
            let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            eliminate(&mut jac, &mut rhs, &fixed)?;
            if self.symbolic.is_none() {
                self.symbolic = Some(SparseLuSymbolic::new(&jac)?);
            }
            let delta = self.symbolic.as_ref().unwrap().factor(&jac)?.solve(&rhs)?;
            let w = self.newton.damping;
            for i in 0..nv {
                u[i] += w * delta[i];
            }
            for (q, pq) in p.iter_mut().enumerate() {
                *pq += w * delta[nv + q];
            }
        }
        Err(Error::NewtonDiverged { step, time: t_new, iterations: self.newton.max_iterations, residual })
    }

    /// Scheme residual of an accepted state against its predecessor.
    pub fn scheme_residual(&self, prev: &FomState, next: &FomState) -> Vec<f64> {
        let [c0, c1, c2] = self.scheme.coefficients(self.dt, prev.u_prev.is_some());
        let hist: Vec<f64> = match &prev.u_prev {
            Some(pp) if c2 != 0.0 => prev.u.iter().zip(pp).map(|(a, b)| c1 * a + c2 * b).collect(),
            _ => prev.u.iter().map(|a| c1 * a).collect(),
        };
        let load = self.load_vector(next.time);
        let fixed = constraint_list(self.space, self.space.n_total(), None).unwrap_or_default();
        // the accepted pressure is mean-shifted; the gauge is invisible to the
        // momentum equation because B^T 1 = 0 on closed or fully constrained domains
        self.residual(&next.u, &next.p, c0, &hist, &load, &fixed)
    }
}

/// Adds `(f(t), phi_i)` into `b`.
pub fn load_vector(space: &TaylorHoodSpace, f: &Profile, t: f64, b: &mut [f64]) {
    let tab = space.tables();
    for e in 0..space.mesh().num_triangles() {
        let nodes = space.element_nodes(e);
        for q in 0..crate::fem::element::NQ {
            let [x, y] = tab.point(space.mesh(), e, q);
            let fv = f(x, y, t);
            let w = tab.weights[e][q];
            for a in 0..6 {
                b[2 * nodes[a]] += w * tab.phi[q][a] * fv[0];
                b[2 * nodes[a] + 1] += w * tab.phi[q][a] * fv[1];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble_linear_operators;
    use crate::fom::{taylor_green, taylor_green_velocity};
    use crate::numerics::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_state_converges_immediately() {
        let setup = taylor_green(4, 0.01).unwrap();
        let s = &setup.space;
        for form in NonlinearForm::ALL {
            let mut st = FomStepper::new(s, 0.01, 0.1, form, TimeScheme::Bdf2, NewtonSettings::default()).unwrap();
            let s0 = FomState::initial(s, vec![0.0; s.n_velocity()]).unwrap();
            let (s1, rep) = st.advance(&s0).unwrap();
            assert_eq!(rep.iterations, 1);
            assert!(s1.u.iter().chain(&s1.p).all(|v| *v == 0.0));
            assert_eq!(s1.step, 1);
        }
    }

    #[test]
    fn one_step_error_is_second_order_in_dt() {
        // every mode decays at lambda = 2 pi^2 nu, so one backward Euler step
        // misses the exact amplitude by |exp(-lambda dt) - 1 / (1 + lambda dt)|
        let nu = 0.05;
        let setup = taylor_green(32, nu).unwrap();
        let s = &setup.space;
        let ops = assemble_linear_operators(s, 1.0);
        let norm0 = ops.mass.bilinear(&setup.u0, &setup.u0).sqrt();
        let lambda = 2.0 * std::f64::consts::PI.powi(2) * nu;
        let err = |dt: f64| {
            let mut st =
                FomStepper::new(s, nu, dt, NonlinearForm::Skew, TimeScheme::BackwardEuler, NewtonSettings::default())
                    .unwrap();
            let (s1, _) = st.advance(&FomState::initial(s, setup.u0.clone()).unwrap()).unwrap();
            let exact = s.interpolate(|x, y| taylor_green_velocity(x, y, dt, nu));
            let e: Vec<f64> = s1.u.iter().zip(&exact).map(|(a, b)| a - b).collect();
            let ode = ((-lambda * dt).exp() - 1.0 / (1.0 + lambda * dt)).abs() * norm0;
            let got = ops.mass.bilinear(&e, &e).sqrt();
            assert!((got - ode).abs() < 0.1 * ode, "dt={dt} {got} {ode}");
            got
        };
        let ratio = err(0.1) / err(0.05);
        assert!((3.2..=4.4).contains(&ratio), "{ratio}");
    }

    #[test]
    fn skew_backward_euler_dissipates_energy() {
        let setup = taylor_green(6, 0.05).unwrap();
        let s = &setup.space;
        let ops = assemble_linear_operators(s, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u0: Vec<f64> = setup.u0.iter().map(|v| v + 0.3 * rng.gen_range(-1.0..1.0)).collect();
        let mut st =
            FomStepper::new(s, 0.05, 0.1, NonlinearForm::Skew, TimeScheme::BackwardEuler, NewtonSettings::default())
                .unwrap();
        let mut state = FomState::initial(s, u0).unwrap();
        for _ in 0..5 {
            let (next, _) = st.advance(&state).unwrap();
            assert!(ops.mass.bilinear(&next.u, &next.u) <= ops.mass.bilinear(&state.u, &state.u));
            state = next;
        }
    }

    #[test]
    fn accepted_states_satisfy_the_scheme() {
        let setup = crate::fom::kelvin_helmholtz(6).unwrap();
        let s = &setup.space;
        let nu = crate::fom::kh_viscosity(100.0);
        let newton = NewtonSettings::default();
        for scheme in [TimeScheme::BackwardEuler, TimeScheme::Bdf2] {
            let mut st = FomStepper::new(s, nu, 0.02, NonlinearForm::Emac, scheme, newton).unwrap();
            let mut state = FomState::initial(s, setup.u0.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(22);
            for _ in 0..3 {
                let (next, rep) = st.advance(&state).unwrap();
                assert!(rep.residual <= newton.tolerance);
                let r = st.scheme_residual(&state, &next);
                for _ in 0..20 {
                    let v: Vec<f64> = (0..r.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let nv = crate::numerics::norm2(&v);
                    assert!(dot(&r, &v).abs() / nv <= newton.tolerance);
                }
                state = next;
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let setup = taylor_green(2, 0.01).unwrap();
        let s = &setup.space;
        assert!(
            FomStepper::new(s, 0.01, 0.0, NonlinearForm::Skew, TimeScheme::Bdf2, NewtonSettings::default()).is_err()
        );
        assert!(
            FomStepper::new(s, -1.0, 0.1, NonlinearForm::Skew, TimeScheme::Bdf2, NewtonSettings::default()).is_err()
        );
        assert_eq!("be".parse::<TimeScheme>().unwrap(), TimeScheme::BackwardEuler);
        assert!("rk4".parse::<TimeScheme>().is_err());
    }

    #[test]
    fn newton_failure_reports_the_step() {
        let setup = taylor_green(4, 0.01).unwrap();
        let s = &setup.space;
        let newton = NewtonSettings { tolerance: 1e-30, max_iterations: 2, damping: 1.0 };
        let mut st = FomStepper::new(s, 0.01, 0.1, NonlinearForm::Convective, TimeScheme::Bdf2, newton).unwrap();
        let e = st.advance(&FomState::initial(s, setup.u0.clone()).unwrap()).unwrap_err();
        assert!(matches!(e, Error::NewtonDiverged { step: 1, .. }));
    }
}
