//! Impulsive and nonlocal Ψ-Hilfer problems solved by Picard iteration on the
//! equivalent Volterra integral equation, plus condition checks, residual
//! diagnostics and grid-refinement studies.

mod conditions;
mod convergence;
mod grid;
mod picard;
mod problem;
mod residual;

pub use conditions::{check_conditions, estimate_lipschitz, ConditionReport};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use grid::{Grid, GridSolution, SegmentView};
pub use picard::{
    picard_step, solve, solve_caputo, solve_impulsive, solve_nonlocal, PicardMap, SolverOptions,
};
pub use problem::{homogeneous_coefficient, ImpulseSchedule, NonlocalSpec, ProblemSpec};
pub use residual::{residual_report, ResidualReport};
