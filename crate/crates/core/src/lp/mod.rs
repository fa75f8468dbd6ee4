//! Linear programs over nonnegative variables with equality rows.

pub mod program;
pub mod simplex;
pub mod text;

pub use program::{Constraint, LinearProgram, Objective, Sense};
pub use simplex::{solve, LpSolution, LpStatus, PivotRule, SolverOptions};
pub use text::export_lp_text;
