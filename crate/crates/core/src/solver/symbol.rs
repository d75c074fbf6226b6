//! The Fourier symbol `lambda(p) = -p^6 + i b p + a` of the linear part and
//! its exponential propagator.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::SpectralGrid;

use super::phi::{phi1, phi2};

/// Per-mode weights for one uniform substep `dt`.
#[derive(Debug, Clone)]
pub struct StepCoefficients {
    pub dt: f64,
    /// `e^{dt lambda}`
    pub exp: Vec<Complex64>,
    /// `phi1(dt lambda)`
    pub phi1: Vec<Complex64>,
    /// `phi2(dt lambda)`
    pub phi2: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: Arc<SpectralGrid>,
    a: f64,
    b: f64,
    lambda: Vec<Complex64>,
    step: Option<StepCoefficients>,
}

pub fn build_symbol(grid: &Arc<SpectralGrid>, a: f64, b: f64) -> SymbolTable {
    let lambda = grid
        .wavenumbers()
        .iter()
        .map(|&p| Complex64::new(a - p.powi(6), b * p))
        .collect();
    SymbolTable {
        grid: grid.clone(),
        a,
        b,
        lambda,
        step: None,
    }
}

impl SymbolTable {
    /// Cache the substep weights for `dt`.
    pub fn with_step(mut self, dt: f64) -> Self {
        let z: Vec<Complex64> = self.lambda.iter().map(|l| l * dt).collect();
        self.step = Some(StepCoefficients {
            dt,
            exp: z.iter().map(|z| z.exp()).collect(),
            phi1: z.iter().map(|&z| phi1(z)).collect(),
            phi2: z.iter().map(|&z| phi2(z)).collect(),
        });
        self
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> &[Complex64] {
        &self.lambda
    }

    /// Substep weights for `dt`, if they were cached for that step.
    pub fn step(&self, dt: f64) -> Option<&StepCoefficients> {
        self.step
            .as_ref()
            .filter(|s| (s.dt - dt).abs() <= 1e-12 * dt.abs())
    }
}

/// Multiply each mode by `e^{t lambda(p)}`.
pub fn propagate(f: &Field, sym: &SymbolTable, t: f64) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("propagation time must be nonnegative, got {t}")));
    }
    if f.representation() != Representation::Spectral {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Spectral,
            found: f.representation(),
        });
    }
    if **f.grid() != *sym.grid {
        return Err(Error::GridMismatch("field and symbol on different grids".into()));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let values = f
        .values()
        .iter()
        .zip(&sym.lambda)
        .map(|(v, l)| v * (l * t).exp())
        .collect();
    Field::new(f.grid().clone(), values, Representation::Spectral)
}
