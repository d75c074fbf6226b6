//! Duhamel/Picard solver, the reference integrator and the multi-window driver.

pub mod duhamel;
pub mod etd;
pub mod march;
pub mod phi;
pub mod picard;
pub mod symbol;

pub use duhamel::{duhamel_map, forcing_history, free_evolution, time_derivative, DuhamelOutput, ForcingHistory};
pub use etd::etd_reference_solve;
pub use march::{global_march, two_grid_check, MarchOptions, MarchReport, RefinementReport, REFINEMENT_TOL};
pub use phi::{phi1, phi2};
pub use picard::{
    picard_solve, NormDiagnostics, PicardOptions, PicardTrace, SolveReport, Tolerance, Window, DEFAULT_INTERVALS,
    DEFAULT_MAX_ITER, DEFAULT_RELATIVE_TOL, RATIO_SLACK,
};
pub use symbol::{build_symbol, propagate, StepCoefficients, SymbolTable};
