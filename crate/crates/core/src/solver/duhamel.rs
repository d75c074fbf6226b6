//! The Duhamel map `v -> u`,
//!
//! ```text
//! u^(p, t) = e^{t lambda} u0^(p) + integral_0^t e^{(t-s) lambda} sqrt(2 pi) G^(p) f_v^(p, s) ds,
//! ```
//!
//! with `f_v^` the transform of `F(v(., s), .)`. On each substep the forcing is
//! interpolated linearly in `s` and integrated exactly against the
//! exponential, which gives the recursion
//!
//! ```text
//! I_{j+1} = e^{dt lambda} I_j + dt [(phi1 - phi2) g_j + phi2 g_{j+1}],   g = sqrt(2 pi) G^ f^.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Representation, SpacetimeField};
use crate::nonlinearity::apply_with_source;
use crate::problem::ProblemSpec;

use super::symbol::{propagate, SymbolTable};

/// `sqrt(2 pi) G^(p) f_v^(p, t_j)` for every frame of the input trajectory.
#[derive(Debug, Clone)]
pub struct ForcingHistory {
    frames: Vec<Vec<Complex64>>,
}

impl ForcingHistory {
    pub fn frames(&self) -> &[Vec<Complex64>] {
        &self.frames
    }
}

/// Spectral forcing `sqrt(2 pi) G^ (F(u))^` of one spectral frame.
pub(crate) fn forcing(frame: &Field, prob: &ProblemSpec) -> Result<Vec<Complex64>> {
    let phys = frame.to_physical();
    let f = apply_with_source(&phys, prob.nonlinearity(), prob.source_samples())?.forward_transform()?;
    let root = (2.0 * PI).sqrt();
    Ok(f.values()
        .iter()
        .zip(prob.kernel_spectrum().values())
        .map(|(fv, g)| fv * g * root)
        .collect())
}

pub fn forcing_history(v: &SpacetimeField, prob: &ProblemSpec) -> Result<ForcingHistory> {
    if **v.grid() != **prob.grid() {
        return Err(Error::GridMismatch("trajectory and problem on different grids".into()));
    }
    let frames = v
        .frames()
        .par_iter()
        .map(|frame| forcing(frame, prob))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForcingHistory { frames })
}

#[derive(Debug, Clone)]
pub struct DuhamelOutput {
    pub field: SpacetimeField,
    /// Forcing built from the *input* trajectory; needed for the time derivative.
    pub forcing: ForcingHistory,
}

/// The free evolution `e^{(t_j - t_0) lambda} u0^` on the trajectory's time grid.
pub fn free_evolution(prob: &ProblemSpec, sym: &SymbolTable, times: &[f64]) -> Result<SpacetimeField> {
    let u0 = prob.initial().to_spectral();
    let t0 = times[0];
    let frames = times
        .par_iter()
        .map(|&t| propagate(&u0, sym, t - t0))
        .collect::<Result<Vec<_>>>()?;
    SpacetimeField::new(prob.grid().clone(), times.to_vec(), frames)
}

/// Apply the Duhamel map to `v`. `sym` must carry step weights for `v.dt()`.
pub fn duhamel_map(v: &SpacetimeField, prob: &ProblemSpec, sym: &SymbolTable) -> Result<DuhamelOutput> {
    let forcing = forcing_history(v, prob)?;
    let free = free_evolution(prob, sym, v.times())?;
    let field = accumulate(&free, &forcing, sym)?;
    Ok(DuhamelOutput { field, forcing })
}

/// Add the exponential-trapezoid Duhamel integral of `forcing` to `free`.
pub(crate) fn accumulate(free: &SpacetimeField, forcing: &ForcingHistory, sym: &SymbolTable) -> Result<SpacetimeField> {
    let dt = free.dt();
    let step = sym
        .step(dt)
        .ok_or_else(|| Error::InvalidArgument(format!("symbol table has no step weights for dt = {dt}")))?;
    let n = free.grid().len();
    let mut integral = vec![Complex64::new(0.0, 0.0); n];
    let mut frames = Vec::with_capacity(free.frames().len());
    frames.push(free.frame(0).clone());
    for j in 0..free.intervals() {
        let (g0, g1) = (&forcing.frames[j], &forcing.frames[j + 1]);
        for k in 0..n {
            let w2 = step.phi2[k];
            integral[k] = step.exp[k] * integral[k] + dt * ((step.phi1[k] - w2) * g0[k] + w2 * g1[k]);
        }
        let values = free
            .frame(j + 1)
            .values()
            .iter()
            .zip(&integral)
            .map(|(a, b)| a + b)
            .collect();
        frames.push(Field::new(free.grid().clone(), values, Representation::Spectral)?);
    }
    SpacetimeField::new(free.grid().clone(), free.times().to_vec(), frames)
}

/// `du^/dt = lambda u^ + sqrt(2 pi) G^ f_v^`, evaluated algebraically frame by
/// frame from the forcing history of the call that produced `u`.
pub fn time_derivative(
    u: &SpacetimeField,
    sym: &SymbolTable,
    history: Option<&ForcingHistory>,
) -> Result<SpacetimeField> {
    let history = history.ok_or(Error::MissingHistory)?;
    if history.frames.len() != u.frames().len() {
        return Err(Error::GridMismatch(format!(
            "forcing history has {} frames, trajectory {}",
            history.frames.len(),
            u.frames().len()
        )));
    }
    let frames = u
        .frames()
        .iter()
        .zip(&history.frames)
        .map(|(frame, g)| {
            let values = frame
                .values()
                .iter()
                .zip(sym.lambda())
                .zip(g)
                .map(|((v, l), g)| l * v + g)
                .collect();
            Field::new(u.grid().clone(), values, Representation::Spectral)
        })
        .collect::<Result<Vec<_>>>()?;
    SpacetimeField::new(u.grid().clone(), u.times().to_vec(), frames)
}

/// Time derivative of the free evolution (no forcing).
pub(crate) fn free_time_derivative(u: &SpacetimeField, sym: &SymbolTable) -> Result<SpacetimeField> {
    let zero = ForcingHistory {
        frames: vec![vec![Complex64::new(0.0, 0.0); u.grid().len()]; u.frames().len()],
    };
    time_derivative(u, sym, Some(&zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::kernel::KernelSpec;
    use crate::nonlinearity::{NonlinearityKind, NonlinearitySpec, SourceProfile};
    use crate::solver::phi::phi1;
    use crate::solver::symbol::build_symbol;

    fn source_only(u0: Field, a: f64, b: f64) -> ProblemSpec {
        let n = NonlinearitySpec::new(
            NonlinearityKind::LinearPlusSource { kappa: 0.0 },
            SourceProfile::Gaussian {
                amplitude: 0.5,
                width: 1.5,
                center: 0.0,
            },
            1e-3,
            1e-3,
        )
        .unwrap();
        ProblemSpec::new(a, b, KernelSpec::gaussian(1.0, 1.0).unwrap(), n, u0).unwrap()
    }

    fn zero_forcing() -> ProblemSpec {
        let g = make_grid(20.0, 64).unwrap();
        let n = NonlinearitySpec::new(NonlinearityKind::LinearPlusSource { kappa: 0.0 }, SourceProfile::Zero, 1e-3, 1e-3)
            .unwrap();
        let u0 = Field::from_fn(g, |x| (-x * x).exp());
        ProblemSpec::new(0.2, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), n, u0).unwrap()
    }

    #[test]
    fn zero_forcing_is_free_evolution() {
        let prob = zero_forcing();
        let times = SpacetimeField::uniform_times(0.0, 0.5, 16);
        let sym = build_symbol(prob.grid(), 0.2, 1.0).with_step(0.5 / 16.0);
        let v = SpacetimeField::zeros(prob.grid().clone(), times.clone()).unwrap();
        let out = duhamel_map(&v, &prob, &sym).unwrap();
        let u0 = prob.initial().to_spectral();
        for (frame, &t) in out.field.frames().iter().zip(&times) {
            let want = propagate(&u0, &sym, t).unwrap();
            assert_eq!(frame.values(), want.values());
        }
    }

    #[test]
    fn source_only_closed_form() {
        // constant-in-time forcing is integrated exactly
        let g = make_grid(20.0, 128).unwrap();
        let prob = source_only(Field::from_fn(g.clone(), |x| 0.3 * (-x * x / 2.0).exp()), 0.3, -0.5);
        let (t_end, m) = (0.4, 8);
        let times = SpacetimeField::uniform_times(0.0, t_end, m);
        let sym = build_symbol(&g, 0.3, -0.5).with_step(t_end / m as f64);
        let v = SpacetimeField::zeros(g.clone(), times.clone()).unwrap();
        let out = duhamel_map(&v, &prob, &sym).unwrap();
        let u0 = prob.initial().to_spectral();
        let h = prob.nonlinearity().source().sample(&g).to_spectral();
        let root = (2.0 * PI).sqrt();
        for (frame, &t) in out.field.frames().iter().zip(&times) {
            for k in 0..g.len() {
                let lam = sym.lambda()[k];
                let want = (lam * t).exp() * u0.values()[k]
                    + root * prob.kernel_spectrum().values()[k] * h.values()[k] * t * phi1(lam * t);
                assert!((frame.values()[k] - want).norm() <= 1e-14 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn zero_is_fixed() {
        let g = make_grid(10.0, 32).unwrap();
        let n = NonlinearitySpec::with_analytic_constants(NonlinearityKind::Saturating { l: 0.3 }, SourceProfile::Zero)
            .unwrap();
        let prob = ProblemSpec::new(
            0.0,
            0.0,
            KernelSpec::gaussian(1.0, 1.0).unwrap(),
            n,
            Field::zeros(g.clone(), Representation::Physical),
        )
        .unwrap();
        let times = SpacetimeField::uniform_times(0.0, 1.0, 4);
        let sym = build_symbol(&g, 0.0, 0.0).with_step(0.25);
        let v = SpacetimeField::zeros(g, times).unwrap();
        let out = duhamel_map(&v, &prob, &sym).unwrap();
        assert!(out.field.frames().iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn missing_step_weights() {
        let prob = zero_forcing();
        let sym = build_symbol(prob.grid(), 0.2, 1.0).with_step(0.1);
        let v = SpacetimeField::zeros(prob.grid().clone(), SpacetimeField::uniform_times(0.0, 1.0, 4)).unwrap();
        assert!(duhamel_map(&v, &prob, &sym).is_err());
    }

    #[test]
    fn derivative_needs_history() {
        let prob = zero_forcing();
        let sym = build_symbol(prob.grid(), 0.2, 1.0);
        let v = SpacetimeField::zeros(prob.grid().clone(), SpacetimeField::uniform_times(0.0, 1.0, 4)).unwrap();
        assert!(matches!(time_derivative(&v, &sym, None), Err(Error::MissingHistory)));
    }

    #[test]
    fn derivative_of_single_mode() {
        let g = make_grid(PI, 16).unwrap();
        let sym = build_symbol(&g, 0.5, 1.0).with_step(0.01);
        let slot = g.mode_slot(1).unwrap();
        let mut f = Field::zeros(g.clone(), Representation::Spectral);
        f.values_mut()[slot] = Complex64::new(1.0, 0.0);
        let times = SpacetimeField::uniform_times(0.0, 0.04, 4);
        let frames = times.iter().map(|&t| propagate(&f, &sym, t).unwrap()).collect();
        let u = SpacetimeField::new(g, times, frames).unwrap();
        let du = free_time_derivative(&u, &sym).unwrap();
        for (d, v) in du.frames().iter().zip(u.frames()) {
            assert!((d.values()[slot] - sym.lambda()[slot] * v.values()[slot]).norm() < 1e-15);
        }
    }
}
