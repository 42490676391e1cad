//! The hp space-time V-cycle, the coarse direct solve, right-preconditioned
//! GMRES and the one-subinterval-per-system time-marching driver.

mod coarse;
mod gmres;
mod time_march;
mod vcycle;

pub use coarse::CoarseSolver;
pub use gmres::{gmres, GmresOutcome, IdentityPreconditioner, KrylovConfig, Preconditioner};
pub use time_march::{time_march, MarchSummary, StepRecord, StepView, StokesProblem};
pub use vcycle::{v_cycle, Multigrid, VCycleConfig};
