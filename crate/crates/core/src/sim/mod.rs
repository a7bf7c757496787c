//! Time integration of the fleet, convergence detection and trajectory export.

mod config;
mod convergence;
mod export;
mod integrator;
mod run;
mod variant;

pub use config::{
    GainSchedule, InitialCondition, SimConfig, DEFAULT_BOX_SIDE, DEFAULT_DT, DEFAULT_STRIDE,
    RHO_MIN_FACTOR,
};
pub use convergence::{detect_convergence, ConvergenceReport, DEFAULT_TOL, DEFAULT_WINDOW};
pub use export::{csv_header, vehicle_path_columns, write_trajectory_csv, write_trajectory_json};
pub use integrator::{absolute_rhs, step_rk4};
pub use run::{simulate, Trajectory};
pub use variant::{n2_variant_simulate, VariantTrajectory};
