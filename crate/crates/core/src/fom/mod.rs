//! Full-order implicit time stepping and the built-in experiments.

mod problems;
mod run;
mod stepper;

pub use problems::{
    build_initial_condition, channel_profile, cylinder_channel, kelvin_helmholtz, kh_initial_velocity, kh_viscosity,
    taylor_green, taylor_green_gradient, taylor_green_velocity, ProblemKind, ProblemSetup,
};
pub use run::{run_fom, FomConfig, FomRun, FomScalars, SnapshotWindow};
pub use stepper::{load_vector, FomState, FomStepper, NewtonSettings, StepReport, TimeScheme};
