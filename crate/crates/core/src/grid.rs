//! Truncated periodic discretization of the real line.
//!
//! The box is `[-L, L)` sampled at `x_j = -L + j*dx`, `dx = 2L/N`. The dual
//! grid holds the wavenumbers `k*pi/L` for `k = -N/2+1, ..., N/2` stored in
//! standard FFT ordering (non-negative indices first, then the negative ones).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct SpectralGrid {
    half_length: f64,
    n_points: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n_points", &self.n_points)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.n_points == other.n_points
    }
}

/// Build a grid on `[-L, L)` with `N` points.
pub fn make_grid(half_length: f64, n_points: usize) -> Result<Arc<SpectralGrid>> {
    SpectralGrid::new(half_length, n_points).map(Arc::new)
}

impl SpectralGrid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if n_points < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 points, got {n_points}"
            )));
        }
        if n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "point count must be even, got {n_points}"
            )));
        }
        let dp = PI / half_length;
        let wavenumbers = (0..n_points)
            .map(|j| Self::signed_index(j, n_points) as f64 * dp)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_length,
            n_points,
            dx: 2.0 * half_length / n_points as f64,
            wavenumbers,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    /// Signed mode index of FFT slot `j`, in `(-N/2, N/2]`.
    pub(crate) fn signed_index(j: usize, n: usize) -> i64 {
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Wavenumber spacing `pi/L`.
    pub fn dp(&self) -> f64 {
        PI / self.half_length
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// FFT slot holding the mode `k*pi/L`, if it is resolved.
    pub fn mode_slot(&self, k: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if k > half || k <= -half {
            return None;
        }
        Some(if k >= 0 {
            k as usize
        } else {
            (k + self.n_points as i64) as usize
        })
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inverse
    }
}
