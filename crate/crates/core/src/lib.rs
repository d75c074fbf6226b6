//! Spectral solver and contraction certificate for the sixth-order nonlocal
//! reaction-diffusion-advection equation
//!
//! ```text
//! u_t = u_xxxxxx + b u_x + a u + integral G(x - y) F(u(y, t), y) dy,   a >= 0,
//! ```
//!
//! posed on the real line and approximated on a periodic box. Solutions are
//! built as fixed points of the mild-solution (Duhamel) map by Picard
//! iteration on windows whose length is certified to make that map a
//! contraction in the anisotropic space-time norm `W^{1,(6,2)}`.

pub mod certificate;
pub mod dump;
pub mod error;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod nonlinearity;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use certificate::{contraction_constant, max_window, window_schedule, Certificate, WindowSchedule};
pub use error::{Error, Result};
pub use field::{l2_spacetime_norm, w162_norm, Field, Representation, SpacetimeField};
pub use grid::{make_grid, SpectralGrid};
pub use kernel::{compute_q, validate_kernel, KernelSpec};
pub use nonlinearity::{apply_nonlinearity, check_lipschitz_sampling, NonlinearitySpec};
pub use problem::{nontriviality_overlap, ProblemSpec};
