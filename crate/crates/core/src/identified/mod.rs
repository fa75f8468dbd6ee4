//! Identified sets for the coefficient and the average partial effect.

pub mod builder;
mod colgen;
pub mod layout;
pub mod scan;

pub use builder::{ape_objective, build_feasibility_lp, build_program, true_psi, with_ape_objective, PsiProgram, RowAudit};
pub use layout::{ExogeneityMode, PsiLayout};
pub use scan::{
    ape_bounds_at, check_point, compute_ape_bounds, compute_theta_set, ApeBounds, Backend, PointCheck, PointRecord,
    PointSource, ScanSpec, SetOptions, SetResult,
};
