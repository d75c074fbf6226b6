//! Model data and the grid-level nontriviality criterion.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::{make_grid, SpectralGrid};
use crate::kernel::KernelSpec;
use crate::nonlinearity::{apply_nonlinearity, NonlinearitySpec};

/// Default relative floor for spectral support detection.
pub const DEFAULT_SUPPORT_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    a: f64,
    b: f64,
    kernel: KernelSpec,
    nonlinearity: NonlinearitySpec,
    initial: Field,
    grid: Arc<SpectralGrid>,
    kernel_spectrum: Field,
    source: Field,
}

impl ProblemSpec {
    pub fn new(
        a: f64,
        b: f64,
        kernel: KernelSpec,
        nonlinearity: NonlinearitySpec,
        initial: Field,
    ) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::AssumptionViolated(format!("a >= 0 required, got a = {a}")));
        }
        if !b.is_finite() {
            return Err(Error::AssumptionViolated(format!("b must be real, got {b}")));
        }
        let grid = initial.grid().clone();
        let initial = initial.to_physical();
        let h6 = initial.h6_norm();
        if !h6.is_finite() {
            return Err(Error::AssumptionViolated(format!(
                "initial condition must have finite H6 norm, got {h6}"
            )));
        }
        let kernel_spectrum = kernel.spectrum_on(&grid);
        let source = nonlinearity.source().sample(&grid);
        Ok(Self {
            a,
            b,
            kernel,
            nonlinearity,
            initial,
            grid,
            kernel_spectrum,
            source,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn nonlinearity(&self) -> &NonlinearitySpec {
        &self.nonlinearity
    }

    /// Initial condition, physical representation.
    pub fn initial(&self) -> &Field {
        &self.initial
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// `G^` on the grid.
    pub fn kernel_spectrum(&self) -> &Field {
        &self.kernel_spectrum
    }

    /// `h` sampled on the grid.
    pub(crate) fn source_samples(&self) -> &Field {
        &self.source
    }

    /// Same model on a grid with `factor` times as many points over the same
    /// box; the initial condition is spectrally interpolated.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let fine = make_grid(self.grid.half_length(), self.grid.len() * factor)?;
        let initial = self.initial.refine_to(&fine)?;
        Self::new(self.a, self.b, self.kernel.clone(), self.nonlinearity.clone(), initial)
    }

    /// Same model, new initial condition (used when restarting windows).
    pub fn with_initial(&self, initial: Field) -> Result<Self> {
        if **initial.grid() != *self.grid {
            return Err(Error::GridMismatch("initial condition on a different grid".into()));
        }
        let mut next = self.clone();
        next.initial = initial.to_physical();
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport {
    /// `dp`-weighted count of wavenumbers in both supports.
    pub measure: f64,
    pub note: Option<String>,
}

/// Grid surrogate for "the supports of `F(0, .)^` and `G^` overlap on a set of
/// positive measure": counts wavenumbers where both moduli exceed
/// `eps_supp` times their maxima.
pub fn nontriviality_overlap(
    kernel: &KernelSpec,
    nonlinearity: &NonlinearitySpec,
    grid: &Arc<SpectralGrid>,
    eps_supp: f64,
) -> Result<OverlapReport> {
    if !(eps_supp > 0.0) {
        return Err(Error::InvalidArgument(format!("eps_supp must be positive, got {eps_supp}")));
    }
    let zero = Field::zeros(grid.clone(), Representation::Physical);
    let f0 = apply_nonlinearity(&zero, nonlinearity)?.to_spectral();
    let g = kernel.spectrum_on(grid);
    let f_max = f0.max_abs();
    if f_max == 0.0 {
        return Ok(OverlapReport {
            measure: 0.0,
            note: Some("F(0, x) vanishes identically; the nontriviality hypothesis cannot hold".into()),
        });
    }
    let g_max = g.max_abs();
    let count = f0
        .values()
        .iter()
        .zip(g.values())
        .filter(|(f, k)| f.norm() > eps_supp * f_max && k.norm() > eps_supp * g_max)
        .count();
    let note = (count == 0).then(|| "supports of F(0, .)^ and G^ are disjoint on the grid".to_string());
    Ok(OverlapReport {
        measure: count as f64 * grid.dp(),
        note,
    })
}
