//! Reference integrator: second-order exponential time differencing
//! (Cox-Matthews ETD2RK) on the integrating-factor form
//! `du^/dt = lambda u^ + N(u)`, `N(u) = sqrt(2 pi) G^ (F(u))^`.
//!
//! Its phi-function weights come from a contour average rather than the
//! series/expm1 route used by the Duhamel quadrature, so the two solvers share
//! no quadrature code.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, Representation, SpacetimeField};
use crate::problem::ProblemSpec;

use super::duhamel::forcing;
use super::picard::Window;

const CONTOUR_POINTS: usize = 64;
const CONTOUR_SWITCH: f64 = 0.5;
const BLOWUP: f64 = 1e8;

/// `(phi1(z), phi2(z))`. Near the origin both are averaged over the unit
/// circle around `z`; elsewhere the closed forms are cancellation-free.
fn phi_pair(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() >= CONTOUR_SWITCH {
        let e = z.exp();
        return ((e - 1.0) / z, (e - 1.0 - z) / (z * z));
    }
    let mut p1 = Complex64::new(0.0, 0.0);
    let mut p2 = Complex64::new(0.0, 0.0);
    for m in 0..CONTOUR_POINTS {
        let theta = PI * (2.0 * m as f64 + 1.0) / CONTOUR_POINTS as f64;
        let w = z + Complex64::from_polar(1.0, theta);
        let e = w.exp();
        p1 += (e - 1.0) / w;
        p2 += (e - 1.0 - w) / (w * w);
    }
    (p1 / CONTOUR_POINTS as f64, p2 / CONTOUR_POINTS as f64)
}

/// March the window with `substeps` ETD2RK steps and sample the result on the
/// window's own time grid.
pub fn etd_reference_solve(prob: &ProblemSpec, window: &Window, substeps: usize) -> Result<SpacetimeField> {
    if substeps < 4 * window.intervals || substeps % window.intervals != 0 {
        return Err(Error::InvalidArgument(format!(
            "substeps ({substeps}) must be a multiple of, and at least 4x, the {} window intervals",
            window.intervals
        )));
    }
    let grid = prob.grid().clone();
    let h = window.length / substeps as f64;
    let stride = substeps / window.intervals;
    let lambda: Vec<Complex64> = grid
        .wavenumbers()
        .iter()
        .map(|&p| Complex64::new(prob.a() - p.powi(6), prob.b() * p))
        .collect();
    let weights: Vec<(Complex64, Complex64, Complex64)> = lambda
        .iter()
        .map(|l| {
            let z = l * h;
            let (p1, p2) = phi_pair(z);
            (z.exp(), p1, p2)
        })
        .collect();

    let mut u = prob.initial().to_spectral();
    let limit = BLOWUP * u.l2_norm().max(1.0);
    let mut frames = vec![u.clone()];
    for step in 1..=substeps {
        let n0 = forcing(&u, prob)?;
        let predictor: Vec<Complex64> = u
            .values()
            .iter()
            .zip(&weights)
            .zip(&n0)
            .map(|((v, (e, p1, _)), n)| e * v + h * p1 * n)
            .collect();
        let a = Field::new(grid.clone(), predictor, Representation::Spectral)?;
        let n1 = forcing(&a, prob)?;
        let next: Vec<Complex64> = a
            .values()
            .iter()
            .zip(&weights)
            .zip(n0.iter().zip(&n1))
            .map(|((v, (_, _, p2)), (f0, f1))| v + h * p2 * (f1 - f0))
            .collect();
        u = Field::new(grid.clone(), next, Representation::Spectral)?;
        let norm = u.l2_norm();
        if !(norm <= limit) {
            return Err(Error::Unstable {
                time: window.start + step as f64 * h,
                norm,
                limit,
            });
        }
        if step % stride == 0 {
            frames.push(u.clone());
        }
    }
    SpacetimeField::new(grid, window.times(), frames)
}
