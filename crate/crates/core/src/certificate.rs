//! The contraction certificate
//!
//! ```text
//! C(q, l, T, a, b) = q l sqrt(T^2 e^{2aT} (1 + 2 (a + |b| + 1)^2) + 2)
//! ```
//!
//! bounds the Lipschitz constant of the Duhamel map in `W^{1,(6,2)}` on a
//! window of length `T`. `C < 1` certifies a unique mild solution on that
//! window. The bound does not depend on the initial condition, so certified
//! windows can be chained to any horizon.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;
pub const DEFAULT_SAFETY: f64 = 0.9;

fn check_inputs(q: f64, l: f64, a: f64, b: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidArgument(format!("l must be positive, got {l}")));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("a must be nonnegative, got {a}")));
    }
    if !b.is_finite() {
        return Err(Error::InvalidArgument(format!("b must be finite, got {b}")));
    }
    Ok(())
}

fn constant_unchecked(q: f64, l: f64, t: f64, a: f64, b: f64) -> f64 {
    let growth = t * (a * t).exp();
    let drift = a + b.abs() + 1.0;
    q * l * (growth * growth * (1.0 + 2.0 * drift * drift) + 2.0).sqrt()
}

pub fn contraction_constant(q: f64, l: f64, t: f64, a: f64, b: f64) -> Result<f64> {
    check_inputs(q, l, a, b)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be positive, got {t}")));
    }
    Ok(constant_unchecked(q, l, t, a, b))
}

/// Largest window with `C < 1`, to absolute tolerance `tol` in both `T` and `C`.
///
/// `C` increases strictly in `T` and tends to `q l sqrt(2)` as `T -> 0`, so a
/// window exists iff that limit is below one and the crossing is unique. The
/// returned value is the lower bisection bracket, hence itself admissible.
pub fn max_window(q: f64, l: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    check_inputs(q, l, a, b)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let floor = q * l * 2f64.sqrt();
    if floor >= 1.0 {
        return Err(Error::NoAdmissibleWindow { product: floor });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while constant_unchecked(q, l, hi, a, b) < 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Bracket both the root and the value of C to within `tol`.
    while hi - lo > tol || constant_unchecked(q, l, hi, a, b) - constant_unchecked(q, l, lo, a, b) > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if constant_unchecked(q, l, mid, a, b) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub q: f64,
    pub l: f64,
    pub a: f64,
    pub b: f64,
    pub t: f64,
    pub constant: f64,
    pub valid: bool,
    /// `None` when no window is admissible at all.
    pub t_max: Option<f64>,
}

impl Certificate {
    pub fn new(q: f64, l: f64, a: f64, b: f64, t: f64) -> Result<Self> {
        let constant = contraction_constant(q, l, t, a, b)?;
        let t_max = match max_window(q, l, a, b, DEFAULT_BISECTION_TOL) {
            Ok(v) => Some(v),
            Err(Error::NoAdmissibleWindow { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            q,
            l,
            a,
            b,
            t,
            constant,
            valid: constant < 1.0,
            t_max,
        })
    }

    /// Flat `key = value` report; the five inputs suffice to recompute `C`.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "q = {:.17e}", self.q);
        let _ = writeln!(s, "l = {:.17e}", self.l);
        let _ = writeln!(s, "a = {:.17e}", self.a);
        let _ = writeln!(s, "b = {:.17e}", self.b);
        let _ = writeln!(s, "T = {:.17e}", self.t);
        let _ = writeln!(s, "C = {:.17e}", self.constant);
        let _ = writeln!(s, "valid = {}", self.valid);
        match self.t_max {
            Some(t) => {
                let _ = writeln!(s, "T_max = {t:.17e}");
            }
            None => {
                let _ = writeln!(s, "T_max = none");
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSchedule {
    pub total: f64,
    /// Certified window length `safety * T_max`.
    pub window: f64,
    pub count: usize,
    pub safety: f64,
    pub t_max: f64,
}

impl WindowSchedule {
    /// Length actually marched per window: the horizon split evenly into
    /// `count` pieces, never longer than `window`.
    pub fn step(&self) -> f64 {
        self.total / self.count as f64
    }
}

pub fn window_schedule(total: f64, q: f64, l: f64, a: f64, b: f64, safety: f64) -> Result<WindowSchedule> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!("safety must lie in (0, 1), got {safety}")));
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {total}")));
    }
    let t_max = max_window(q, l, a, b, DEFAULT_BISECTION_TOL)?;
    let window = safety * t_max;
    let count = (total / window).ceil().max(1.0) as usize;
    Ok(WindowSchedule {
        total,
        window,
        count,
        safety,
        t_max,
    })
}
