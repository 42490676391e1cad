//! Problems, error norms, parameter studies and run configuration.

pub mod config;
pub mod errors;
pub mod problems;
pub mod selftest;
pub mod studies;

pub use config::{parse_override, RunConfig, StrategyName};
pub use errors::{compute_errors, eoc, ErrorReport};
pub use problems::{manufactured_problem, CavityProblem, ManufacturedProblem};
pub use studies::{
    cavity_demo_2d, convergence_study, robustness_sweep, run_manufactured, saddle_point_residuals, CavityRun,
    CavitySample, ConvergenceRow, MarchRun, RobustnessRow, RunSetup, StepChecks,
};
