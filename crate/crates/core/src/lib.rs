//! Matrix-free hp space-time multigrid for the nonstationary Stokes equations
//! discretized with `Q_{r+1} / P_r^disc` elements in space and DG(k) in time.

pub mod dof_space;
pub mod error;
pub mod fe_basis;
pub mod harness;
pub mod hierarchy;
pub mod linalg;
pub mod mesh;
pub mod solver;
pub mod st_operator;
pub mod time_basis;
pub mod transfer;
pub mod vanka;

pub use error::{Error, Result};
