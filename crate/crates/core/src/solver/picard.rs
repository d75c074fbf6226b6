//! Picard iteration of the Duhamel map on one certified window.

use crate::certificate::Certificate;
use crate::error::{Error, Result};
use crate::field::{w162_norm, w162_parts, SpacetimeField, DEFAULT_TAIL_FRACTION, DEFAULT_TAIL_TOL};
use crate::problem::{OverlapReport, ProblemSpec};

use super::duhamel::{duhamel_map, free_evolution, free_time_derivative, time_derivative};
use super::symbol::{build_symbol, SymbolTable};

pub const DEFAULT_INTERVALS: usize = 64;
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const RATIO_SLACK: f64 = 1.05;

/// Time grid of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: f64,
    pub length: f64,
    pub intervals: usize,
}

impl Window {
    pub fn new(start: f64, length: f64, intervals: usize) -> Result<Self> {
        if !(length > 0.0) || intervals == 0 {
            return Err(Error::InvalidArgument(format!(
                "window needs positive length and at least one interval (length {length}, intervals {intervals})"
            )));
        }
        Ok(Self { start, length, intervals })
    }

    pub fn times(&self) -> Vec<f64> {
        SpacetimeField::uniform_times(self.start, self.length, self.intervals)
    }

    pub fn dt(&self) -> f64 {
        self.length / self.intervals as f64
    }
}

/// Stopping rule for the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    /// Stop when `d_n < tol * max(1, ||u^(1)||_W)`.
    Relative(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tolerance: Tolerance,
    pub max_iter: usize,
    /// Iterate even when the certificate is invalid.
    pub override_certificate: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tolerance: Tolerance::Relative(DEFAULT_RELATIVE_TOL),
            max_iter: DEFAULT_MAX_ITER,
            override_certificate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardTrace {
    /// `d_n = ||u^(n+1) - u^(n)||_W`, `n = 0, 1, ...`
    pub distances: Vec<f64>,
    /// `(n, d_{n+1}/d_n)` wherever `d_n` is above the roundoff floor.
    pub ratios: Vec<(usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
    /// Absolute threshold the iteration stopped against.
    pub threshold: f64,
}

impl PicardTrace {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().map(|r| r.1).reduce(f64::max)
    }

    fn ratio_floor(&self) -> f64 {
        10.0 * f64::EPSILON * self.distances.first().copied().unwrap_or(0.0)
    }
}

/// Square roots of the three window integrals making up the W norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormDiagnostics {
    pub l2: f64,
    pub d6: f64,
    pub dudt: f64,
}

impl NormDiagnostics {
    pub fn w_norm(&self) -> f64 {
        (self.l2 * self.l2 + self.d6 * self.d6 + self.dudt * self.dudt).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: SpacetimeField,
    pub du_dt: SpacetimeField,
    pub trace: PicardTrace,
    pub certificate: Certificate,
    pub norms: NormDiagnostics,
    pub tail_warnings: Vec<String>,
    /// Relative L2 gap to the reference integrator at the window end.
    pub oracle_deviation: Option<f64>,
    pub overlap: Option<OverlapReport>,
    /// The certificate was invalid and the solve ran anyway.
    pub overridden: bool,
}

/// Largest relative outer-band mass over the frames, with a warning above
/// tolerance.
pub(crate) fn tail_check(u: &SpacetimeField) -> Option<String> {
    let worst = u
        .frames()
        .iter()
        .map(|f| f.tail_mass_fraction(DEFAULT_TAIL_FRACTION))
        .fold(0.0, f64::max);
    (worst > DEFAULT_TAIL_TOL).then(|| {
        format!(
            "tail mass {worst:.3e} in the outer {:.0}% of the box exceeds {DEFAULT_TAIL_TOL:e}",
            100.0 * DEFAULT_TAIL_FRACTION
        )
    })
}

pub(crate) fn picard_with_symbol(
    prob: &ProblemSpec,
    window: &Window,
    cert: &Certificate,
    opts: &PicardOptions,
    sym: &SymbolTable,
) -> Result<SolveReport> {
    if !cert.valid && !opts.override_certificate {
        return Err(Error::CertificateRefused { constant: cert.constant });
    }
    if window.length > cert.t * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "window length {} exceeds certified length {}",
            window.length, cert.t
        )));
    }
    let times = window.times();
    let mut current = free_evolution(prob, sym, &times)?;
    let mut current_dt = free_time_derivative(&current, sym)?;
    let mut distances = Vec::new();
    let mut threshold = match opts.tolerance {
        Tolerance::Absolute(t) => t,
        Tolerance::Relative(_) => f64::NAN,
    };
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let out = duhamel_map(&current, prob, sym)?;
        let next_dt = time_derivative(&out.field, sym, Some(&out.forcing))?;
        iterations += 1;
        let d = w162_norm(&out.field.sub(&current)?, &next_dt.sub(&current_dt)?)?;
        if let Tolerance::Relative(rel) = opts.tolerance {
            if iterations == 1 {
                threshold = rel * w162_norm(&out.field, &next_dt)?.max(1.0);
            }
        }
        distances.push(d);
        current = out.field;
        current_dt = next_dt;
        if d < threshold {
            converged = true;
            break;
        }
    }
    let mut trace = PicardTrace {
        distances,
        ratios: Vec::new(),
        iterations,
        converged,
        threshold,
    };
    let floor = trace.ratio_floor();
    trace.ratios = trace
        .distances
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > floor)
        .map(|(n, w)| (n, w[1] / w[0]))
        .collect();
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            last_distance: trace.distances.last().copied().unwrap_or(f64::NAN),
            distances: trace.distances,
        });
    }
    if cert.valid {
        let bound = cert.constant * RATIO_SLACK;
        if let Some(&(index, ratio)) = trace.ratios.iter().find(|r| r.1 > bound) {
            return Err(Error::RatioViolation {
                index,
                ratio,
                bound,
                slack: RATIO_SLACK,
            });
        }
    }
    let (l2, d6, dudt) = w162_parts(&current, &current_dt)?;
    let tail_warnings = tail_check(&current).into_iter().collect();
    Ok(SolveReport {
        field: current,
        du_dt: current_dt,
        trace,
        certificate: cert.clone(),
        norms: NormDiagnostics {
            l2: l2.sqrt(),
            d6: d6.sqrt(),
            dudt: dudt.sqrt(),
        },
        tail_warnings,
        oracle_deviation: None,
        overlap: None,
        overridden: !cert.valid,
    })
}

/// Iterate `u^(n+1) = duhamel_map(u^(n))` from the free evolution of the
/// initial condition until successive iterates are closer than the
/// tolerance in the W norm.
///
/// With a valid certificate every measured ratio `d_{n+1}/d_n` must stay below
/// `RATIO_SLACK * C`; a larger ratio means the discretization no longer
/// reflects the continuum map and is reported as an error.
pub fn picard_solve(
    prob: &ProblemSpec,
    window: &Window,
    cert: &Certificate,
    opts: &PicardOptions,
) -> Result<SolveReport> {
    let sym = build_symbol(prob.grid(), prob.a(), prob.b()).with_step(window.dt());
    picard_with_symbol(prob, window, cert, opts, &sym)
}
