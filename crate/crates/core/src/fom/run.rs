use serde::{Deserialize, Serialize};

use super::stepper::{FomState, FomStepper, NewtonSettings, TimeScheme};
use crate::diagnostics::{drag_coefficient, energy_enstrophy};
use crate::error::{Error, Result};
use crate::fem::{div_curl_sq, NonlinearForm, Profile, TaylorHoodSpace};
use crate::pod::SnapshotSet;

/// Which states become snapshots: every `stride`-th step counted from the
/// first step with time in `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotWindow {
    pub start: f64,
    /// `None` means the final time.
    #[serde(default)]
    pub end: Option<f64>,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl Default for SnapshotWindow {
    fn default() -> Self {
        Self { start: 0.0, end: None, stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FomConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub form: NonlinearForm,
    pub scheme: TimeScheme,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default)]
    pub snapshots: SnapshotWindow,
    /// Keep every state in [`FomRun::states`] instead of only the last one.
    #[serde(default)]
    pub keep_states: bool,
}

impl FomConfig {
    pub fn new(nu: f64, dt: f64, t_end: f64, form: NonlinearForm, scheme: TimeScheme) -> Self {
        Self {
            nu,
            dt,
            t_end,
            form,
            scheme,
            newton: NewtonSettings::default(),
            snapshots: SnapshotWindow::default(),
            keep_states: false,
        }
    }

    /// Number of steps; `t_end` must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end || n < 1.0 {
            return Err(Error::Config(format!("t_end {} is not a multiple of dt {}", self.t_end, self.dt)));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.steps()?;
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        let w = &self.snapshots;
        let end = w.end.unwrap_or(self.t_end);
        let slack = 1e-9 * self.dt;
        if w.start < -slack || end > self.t_end + slack || end < w.start {
            return Err(Error::Config(format!(
                "snapshot window [{}, {end}] is not inside [0, {}]",
                w.start, self.t_end
            )));
        }
        if w.stride == 0 {
            return Err(Error::Config("snapshot stride must be at least 1".into()));
        }
        if self.newton.max_iterations == 0 || !(self.newton.tolerance > 0.0) {
            return Err(Error::Config("Newton needs a positive tolerance and iteration limit".into()));
        }
        debug_assert!(n >= 1);
        Ok(())
    }
}

/// Per-step scalar diagnostics, including the initial state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FomScalars {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub enstrophy: Vec<f64>,
    /// `||div u||_{L2}`
    pub div_error: Vec<f64>,
    /// NaN without a drag boundary.
    pub drag: Vec<f64>,
}

impl FomScalars {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    fn record(
        &mut self,
        space: &TaylorHoodSpace,
        stepper: &FomStepper,
        s: &FomState,
        drag: Option<(u32, f64)>,
    ) -> Result<()> {
        let (e, z) = energy_enstrophy(space, stepper.operators(), &s.u)?;
        let (div2, _) = div_curl_sq(space, &s.u);
        self.t.push(s.time);
        self.energy.push(e);
        self.enstrophy.push(z);
        self.div_error.push(div2.max(0.0).sqrt());
        self.drag.push(match drag {
            Some((label, nu)) => drag_coefficient(space, &s.u, &s.p, label, nu)?,
            None => f64::NAN,
        });
        Ok(())
    }
}

/// Output of [`run_fom`].
#[derive(Debug, Clone)]
pub struct FomRun {
    pub states: Vec<FomState>,
    pub snapshots: SnapshotSet,
    /// Pressures matching the snapshot columns.
    pub snapshot_pressures: Vec<Vec<f64>>,
    pub scalars: FomScalars,
    pub newton_iterations: Vec<usize>,
}

/// Integrates from `u0` at `t = 0` to `t_end`.
pub fn run_fom(
    config: &FomConfig,
    space: &TaylorHoodSpace,
    u0: Vec<f64>,
    forcing: Option<Profile>,
    drag_label: Option<u32>,
) -> Result<FomRun> {
    config.validate()?;
    let n_steps = config.steps()?;
    let mut stepper = FomStepper::new(space, config.nu, config.dt, config.form, config.scheme, config.newton)?;
    if let Some(f) = forcing {
        stepper = stepper.with_forcing(f);
    }
    let drag = drag_label.map(|l| (l, config.nu));
    let window = config.snapshots;
    let w_end = window.end.unwrap_or(config.t_end);
    let slack = 1e-9 * config.dt;
    let mut first_in_window: Option<usize> = None;

    let mut state = FomState::initial(space, u0)?;
    let mut run = FomRun {
        states: Vec::new(),
        snapshots: SnapshotSet::new(space.n_velocity()),
        snapshot_pressures: Vec::new(),
        scalars: FomScalars::default(),
        newton_iterations: Vec::with_capacity(n_steps),
    };
    let mut take = |run: &mut FomRun, s: &FomState| -> Result<()> {
        if s.time < window.start - slack || s.time > w_end + slack {
            return Ok(());
        }
        let n0 = *first_in_window.get_or_insert(s.step);
        if (s.step - n0) % window.stride == 0 {
            run.snapshots.push(s.time, s.u.clone())?;
            run.snapshot_pressures.push(s.p.clone());
        }
        Ok(())
    };

    run.scalars.record(space, &stepper, &state, drag)?;
    take(&mut run, &state)?;
    if config.keep_states {
        run.states.push(state.clone());
    }
    for _ in 0..n_steps {
        let (next, report) = stepper.advance(&state)?;
        log::debug!("step {} t={:.6} newton={} res={:.2e}", next.step, next.time, report.iterations, report.residual);
        if next.step % 100 == 0 {
            log::info!("step {}/{} t={:.4}", next.step, n_steps, next.time);
        }
        run.newton_iterations.push(report.iterations);
        run.scalars.record(space, &stepper, &next, drag)?;
        take(&mut run, &next)?;
        if config.keep_states {
            run.states.push(next.clone());
        }
        state = next;
    }
    if !config.keep_states {
        run.states.push(state);
    }
    Ok(run)
}
