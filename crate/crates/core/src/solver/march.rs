//! Restarting Picard windows to cover a long horizon.

use crate::certificate::{window_schedule, Certificate, WindowSchedule, DEFAULT_SAFETY};
use crate::error::{Error, Result};
use crate::field::{Field, SpacetimeField};
use crate::kernel::compute_q;
use crate::problem::{nontriviality_overlap, OverlapReport, ProblemSpec, DEFAULT_SUPPORT_EPS};

use super::etd::etd_reference_solve;
use super::picard::{picard_with_symbol, PicardOptions, SolveReport, Window, DEFAULT_INTERVALS};
use super::symbol::build_symbol;

/// Largest accepted relative L2 gap between an `N` and a `2N` run.
pub const REFINEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MarchOptions {
    /// Time intervals per window.
    pub intervals: usize,
    pub safety: f64,
    pub picard: PicardOptions,
    /// Run the reference integrator with this many substeps per window.
    pub oracle_substeps: Option<usize>,
    pub eps_supp: f64,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self {
            intervals: DEFAULT_INTERVALS,
            safety: DEFAULT_SAFETY,
            picard: PicardOptions::default(),
            oracle_substeps: None,
            eps_supp: DEFAULT_SUPPORT_EPS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MarchReport {
    /// `None` when no window is admissible and the run was overridden.
    pub schedule: Option<WindowSchedule>,
    pub windows: Vec<SolveReport>,
    pub overlap: OverlapReport,
    pub q: f64,
    pub l: f64,
}

impl MarchReport {
    /// Concatenated trajectory; the shared endpoint of adjacent windows is kept once.
    pub fn trajectory(&self) -> (Vec<f64>, Vec<Field>) {
        let mut times = Vec::new();
        let mut frames = Vec::new();
        for (i, w) in self.windows.iter().enumerate() {
            let skip = usize::from(i > 0);
            times.extend_from_slice(&w.field.times()[skip..]);
            frames.extend(w.field.frames()[skip..].iter().cloned());
        }
        (times, frames)
    }

    pub fn final_frame(&self) -> Option<&Field> {
        self.windows.last().map(|w| w.field.last())
    }

    pub fn converged(&self) -> bool {
        self.windows.iter().all(|w| w.trace.converged)
    }
}

fn relative_gap(a: &Field, b: &Field) -> Result<f64> {
    let diff = a.to_spectral().sub(&b.to_spectral())?.l2_norm();
    let scale = b.l2_norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Solve on `[0, total]` by splitting the horizon into equal windows no
/// longer than `safety * T_max` and restarting each from the previous final
/// frame.
///
/// Without an admissible window the run is refused unless the Picard options
/// allow an override, in which case the whole horizon is one window.
pub fn global_march(prob: &ProblemSpec, total: f64, opts: &MarchOptions) -> Result<MarchReport> {
    let q = compute_q(prob.kernel())?;
    let l = prob.nonlinearity().lipschitz();
    let overlap = nontriviality_overlap(prob.kernel(), prob.nonlinearity(), prob.grid(), opts.eps_supp)?;
    let (schedule, count, step) = match window_schedule(total, q, l, prob.a(), prob.b(), opts.safety) {
        Ok(s) => {
            let (count, step) = (s.count, s.step());
            (Some(s), count, step)
        }
        Err(Error::NoAdmissibleWindow { product }) => {
            if !opts.picard.override_certificate {
                return Err(Error::NoAdmissibleWindow { product });
            }
            (None, 1, total)
        }
        Err(e) => return Err(e),
    };
    let dt = step / opts.intervals as f64;
    let sym = build_symbol(prob.grid(), prob.a(), prob.b()).with_step(dt);
    let cert = Certificate::new(q, l, prob.a(), prob.b(), step)?;

    let mut current = prob.clone();
    let mut windows = Vec::with_capacity(count);
    for index in 0..count {
        let wrap = |e: Error| Error::Window {
            index,
            source: Box::new(e),
        };
        let window = Window::new(index as f64 * step, step, opts.intervals).map_err(wrap)?;
        let mut report = picard_with_symbol(&current, &window, &cert, &opts.picard, &sym).map_err(wrap)?;
        if let Some(substeps) = opts.oracle_substeps {
            let reference = etd_reference_solve(&current, &window, substeps).map_err(wrap)?;
            report.oracle_deviation = Some(relative_gap(report.field.last(), reference.last()).map_err(wrap)?);
        }
        if index == 0 {
            report.overlap = Some(overlap.clone());
        }
        current = current.with_initial(report.field.last().clone())?;
        windows.push(report);
    }
    Ok(MarchReport {
        schedule,
        windows,
        overlap,
        q,
        l,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    /// Relative L2 gap between the final frames of the `N` and `2N` runs.
    pub relative_gap: f64,
    pub passed: bool,
}

/// Repeat the march on a grid with twice the points and compare the final frames.
pub fn two_grid_check(prob: &ProblemSpec, coarse: &MarchReport, total: f64, opts: &MarchOptions) -> Result<RefinementReport> {
    let fine_prob = prob.refined(2)?;
    let fine = global_march(&fine_prob, total, opts)?;
    let (Some(c), Some(f)) = (coarse.final_frame(), fine.final_frame()) else {
        return Err(Error::InvalidArgument("march produced no windows".into()));
    };
    let relative_gap = relative_gap(&c.refine_to(fine_prob.grid())?, f)?;
    Ok(RefinementReport {
        relative_gap,
        passed: relative_gap <= REFINEMENT_TOL,
    })
}

/// All frames of a report as one `SpacetimeField` when the windows share a step.
pub fn stitched(report: &MarchReport) -> Result<SpacetimeField> {
    let (times, frames) = report.trajectory();
    let grid = frames
        .first()
        .map(|f| f.grid().clone())
        .ok_or_else(|| Error::InvalidArgument("march produced no windows".into()))?;
    SpacetimeField::new(grid, times, frames)
}
