//! Sampled fields, the continuum-normalized Fourier transform, spectral
//! differentiation and the L2 / H6 / W^{1,(6,2)} norms.
//!
//! Transform convention: `f^(p) = (2 pi)^{-1/2} * integral f(x) e^{-ipx} dx`,
//! discretized as `dx/sqrt(2 pi) * sum_j f(x_j) e^{-i p x_j}`. Because
//! `x_0 = -L` and `p_k L = k pi`, the shift to the box origin is the sign
//! `(-1)^k` on top of a plain DFT.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;

/// Largest supported derivative order.
pub const MAX_DERIVATIVE_ORDER: u32 = 8;

/// Default outer fraction of the box policed by the tail-mass check.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
/// Default tolerance on the relative L2 mass in the outer band.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
    repr: Representation,
}

impl Field {
    pub fn new(grid: Arc<SpectralGrid>, values: Vec<Complex64>, repr: Representation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, repr })
    }

    pub fn zeros(grid: Arc<SpectralGrid>, repr: Representation) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values, repr }
    }

    pub fn from_real(grid: Arc<SpectralGrid>, samples: &[f64]) -> Result<Self> {
        let values = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::new(grid, values, Representation::Physical)
    }

    /// Sample a real function at the grid points.
    pub fn from_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|j| Complex64::new(f(grid.x(j)), 0.0))
            .collect();
        Self {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    /// Sample a complex function at the grid points.
    pub fn from_complex_fn(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.x(j))).collect();
        Self {
            grid,
            values,
            repr: Representation::Physical,
        }
    }

    /// Build a spectral field from a function of the wavenumber.
    pub fn from_spectrum(grid: Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.wavenumbers().iter().map(|&p| f(p)).collect();
        Self {
            grid,
            values,
            repr: Representation::Spectral,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    fn expect(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(Error::RepresentationMismatch {
                expected: repr,
                found: self.repr,
            });
        }
        Ok(())
    }

    pub fn forward_transform(&self) -> Result<Field> {
        self.expect(Representation::Physical)?;
        let mut buf = self.values.clone();
        self.grid.forward_plan().process(&mut buf);
        let scale = self.grid.dx() / (2.0 * PI).sqrt();
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= if k % 2 == 0 { scale } else { -scale };
        }
        Ok(Field {
            grid: self.grid.clone(),
            values: buf,
            repr: Representation::Spectral,
        })
    }

    pub fn inverse_transform(&self) -> Result<Field> {
        self.expect(Representation::Spectral)?;
        let scale = self.grid.dp() / (2.0 * PI).sqrt();
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| if k % 2 == 0 { v * scale } else { -v * scale })
            .collect();
        self.grid.inverse_plan().process(&mut buf);
        Ok(Field {
            grid: self.grid.clone(),
            values: buf,
            repr: Representation::Physical,
        })
    }

    pub fn to_spectral(&self) -> Field {
        match self.repr {
            Representation::Spectral => self.clone(),
            Representation::Physical => self.forward_transform().expect("tag checked"),
        }
    }

    pub fn to_physical(&self) -> Field {
        match self.repr {
            Representation::Physical => self.clone(),
            Representation::Spectral => self.inverse_transform().expect("tag checked"),
        }
    }

    /// Multiply the spectrum by `(ip)^order`. The result keeps the input's
    /// representation.
    pub fn spectral_derivative(&self, order: u32) -> Result<Field> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder(order));
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let mut spec = self.to_spectral();
        for (v, &p) in spec.values.iter_mut().zip(self.grid.wavenumbers()) {
            *v *= Complex64::new(0.0, p).powu(order);
        }
        Ok(match self.repr {
            Representation::Spectral => spec,
            Representation::Physical => spec.inverse_transform()?,
        })
    }

    fn squared_l2(&self) -> f64 {
        let weight = match self.repr {
            Representation::Physical => self.grid.dx(),
            Representation::Spectral => self.grid.dp(),
        };
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * weight
    }

    /// Discrete L2 norm; physical and spectral evaluations agree by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.squared_l2().sqrt()
    }

    /// Squared H6 norm `sum (1 + p^12) |f^(p)|^2 dp`.
    pub(crate) fn squared_h6(&self) -> f64 {
        let spec = self.to_spectral();
        spec.values
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(v, &p)| (1.0 + p.powi(12)) * v.norm_sqr())
            .sum::<f64>()
            * self.grid.dp()
    }

    pub fn h6_norm(&self) -> f64 {
        self.squared_h6().sqrt()
    }

    /// Squared L2 norm of the sixth derivative.
    pub(crate) fn squared_d6(&self) -> f64 {
        let spec = self.to_spectral();
        spec.values
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(v, &p)| p.powi(12) * v.norm_sqr())
            .sum::<f64>()
            * self.grid.dp()
    }

    /// Rectangle-rule L1 norm of the physical samples.
    pub fn l1_norm(&self) -> f64 {
        let phys = self.to_physical();
        phys.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.dx()
    }

    /// Returns `(max_p |f^(p)|, ||f||_1 / sqrt(2 pi))`; the first never
    /// exceeds the second.
    pub fn linf_transform_bound_check(&self) -> (f64, f64) {
        let spec = self.to_spectral();
        let lhs = spec.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (lhs, self.l1_norm() / (2.0 * PI).sqrt())
    }

    /// Fraction of the L2 mass sitting in the outer `outer_fraction` of the box.
    pub fn tail_mass_fraction(&self, outer_fraction: f64) -> f64 {
        let phys = self.to_physical();
        let core = (1.0 - outer_fraction) * self.grid.half_length();
        let (mut tail, mut total) = (0.0, 0.0);
        for (j, v) in phys.values.iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if self.grid.x(j).abs() >= core {
                tail += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        if self.repr != other.repr {
            return Err(Error::RepresentationMismatch {
                expected: self.repr,
                found: other.repr,
            });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            values,
            repr: self.repr,
        })
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            repr: self.repr,
        }
    }

    /// Spectral interpolation onto a finer grid with the same box: modes are
    /// copied and the coarse Nyquist mode is split evenly between `+-N/2`.
    pub fn refine_to(&self, fine: &Arc<SpectralGrid>) -> Result<Field> {
        let n = self.grid.len();
        if fine.half_length() != self.grid.half_length() || fine.len() < n {
            return Err(Error::GridMismatch(
                "refinement needs the same box and at least as many points".into(),
            ));
        }
        let spec = self.to_spectral();
        let mut out = Field::zeros(fine.clone(), Representation::Spectral);
        let half = (n / 2) as i64;
        for (j, v) in spec.values.iter().enumerate() {
            let k = SpectralGrid::signed_index(j, n);
            if k == half && fine.len() > n {
                let slot_pos = fine.mode_slot(half).expect("resolved on finer grid");
                let slot_neg = fine.mode_slot(-half).expect("resolved on finer grid");
                out.values[slot_pos] += 0.5 * v;
                out.values[slot_neg] += 0.5 * v;
            } else {
                let slot = fine.mode_slot(k).expect("resolved on finer grid");
                out.values[slot] += v;
            }
        }
        Ok(match self.repr {
            Representation::Spectral => out,
            Representation::Physical => out.inverse_transform()?,
        })
    }

    /// Largest pointwise modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Composite trapezoid rule on a uniform grid with spacing `dt`.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

/// A trajectory `u(., t_j)` on a uniform time grid, stored spectrally.
#[derive(Debug, Clone)]
pub struct SpacetimeField {
    grid: Arc<SpectralGrid>,
    times: Vec<f64>,
    frames: Vec<Field>,
}

impl SpacetimeField {
    pub fn new(grid: Arc<SpectralGrid>, times: Vec<f64>, frames: Vec<Field>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidArgument("need at least two time levels".into()));
        }
        if times.len() != frames.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} frames",
                times.len(),
                frames.len()
            )));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("time grid must increase".into()));
        }
        for w in times.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt {
                return Err(Error::InvalidArgument("time grid must be uniform".into()));
            }
        }
        let mut frames = frames;
        for f in frames.iter_mut() {
            if **f.grid() != *grid {
                return Err(Error::GridMismatch("frame on a different grid".into()));
            }
            if f.representation() == Representation::Physical {
                *f = f.forward_transform()?;
            }
        }
        Ok(Self { grid, times, frames })
    }

    /// Uniform time grid `t_j = t0 + j * T/M`, `j = 0..=M`.
    pub fn uniform_times(t0: f64, duration: f64, intervals: usize) -> Vec<f64> {
        (0..=intervals)
            .map(|j| t0 + duration * j as f64 / intervals as f64)
            .collect()
    }

    pub fn zeros(grid: Arc<SpectralGrid>, times: Vec<f64>) -> Result<Self> {
        let frames = times
            .iter()
            .map(|_| Field::zeros(grid.clone(), Representation::Spectral))
            .collect();
        Self::new(grid, times, frames)
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn frame(&self, j: usize) -> &Field {
        &self.frames[j]
    }

    pub fn last(&self) -> &Field {
        self.frames.last().expect("at least two frames")
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Window length `t_M - t_0`.
    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub(crate) fn check_same_grids(&self, other: &SpacetimeField) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch("spatial grids differ".into()));
        }
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::GridMismatch("time grids differ".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &SpacetimeField) -> Result<SpacetimeField> {
        self.check_same_grids(other)?;
        let frames = self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpacetimeField {
            grid: self.grid.clone(),
            times: self.times.clone(),
            frames,
        })
    }
}

/// `||u||_{L2(R x [0,T])}` with trapezoid time integration.
pub fn l2_spacetime_norm(u: &SpacetimeField) -> f64 {
    let sq: Vec<f64> = u.frames.iter().map(Field::squared_l2).collect();
    trapezoid(&sq, u.dt()).sqrt()
}

/// The three squared contributions `(||u||^2, ||d6u||^2, ||du/dt||^2)` to the
/// anisotropic space-time norm, each integrated over the window.
pub fn w162_parts(u: &SpacetimeField, du_dt: &SpacetimeField) -> Result<(f64, f64, f64)> {
    u.check_same_grids(du_dt)?;
    let dt = u.dt();
    let l2: Vec<f64> = u.frames.iter().map(Field::squared_l2).collect();
    let d6: Vec<f64> = u.frames.iter().map(Field::squared_d6).collect();
    let dudt: Vec<f64> = du_dt.frames.iter().map(Field::squared_l2).collect();
    Ok((trapezoid(&l2, dt), trapezoid(&d6, dt), trapezoid(&dudt, dt)))
}

/// `||u||_{W^{1,(6,2)}}`: L2 norms of `u`, its sixth space derivative and its
/// time derivative over the window.
pub fn w162_norm(u: &SpacetimeField, du_dt: &SpacetimeField) -> Result<f64> {
    let (a, b, c) = w162_parts(u, du_dt)?;
    Ok((a + b + c).sqrt())
}
