//! Birth-rate nonlinearities `F(u, x) = phi(u) + h(x)` with declared growth
//! constant `k` and Lipschitz constant `l`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Representation};
use crate::grid::SpectralGrid;
use crate::kernel::{bump, even_inverse_transform};

/// The `x`-dependent source `h(x) = F(0, x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceProfile {
    Zero,
    /// `A exp(-((x - c)/w)^2)`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// Even real spectrum `A (1 - s^2)^8`, `s = (|p| - mid)/half`, supported in
    /// `lo <= |p| <= hi`.
    Bandlimited { amplitude: f64, lo: f64, hi: f64 },
}

impl SourceProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SourceProfile::Zero => Ok(()),
            SourceProfile::Gaussian { amplitude, width, center } => {
                if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian source needs positive width, got {width}"
                    )));
                }
                Ok(())
            }
            SourceProfile::Bandlimited { amplitude, lo, hi } => {
                if !(lo >= 0.0 && hi > lo) || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "band-limited source needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
        }
    }

    fn band_spectrum(amplitude: f64, lo: f64, hi: f64, p: f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        amplitude * bump((p.abs() - mid) / half)
    }

    /// `h(x)` on the real line.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SourceProfile::Zero => 0.0,
            SourceProfile::Gaussian { amplitude, width, center } => {
                let y = (x - center) / width;
                amplitude * (-y * y).exp()
            }
            SourceProfile::Bandlimited { amplitude, lo, hi } => {
                even_inverse_transform(|p| Self::band_spectrum(amplitude, lo, hi, p), lo, hi, x)
            }
        }
    }

    /// `h` on the grid. Band-limited profiles are synthesized from their
    /// spectrum at the grid wavenumbers, so their discrete transform has the
    /// exact support of the continuum one.
    pub fn sample(&self, grid: &Arc<SpectralGrid>) -> Field {
        match *self {
            SourceProfile::Zero => Field::zeros(grid.clone(), Representation::Physical),
            SourceProfile::Gaussian { .. } => Field::from_fn(grid.clone(), |x| self.eval(x)),
            SourceProfile::Bandlimited { amplitude, lo, hi } => {
                let spec = Field::from_spectrum(grid.clone(), |p| {
                    Complex64::new(Self::band_spectrum(amplitude, lo, hi, p), 0.0)
                });
                let mut phys = spec.inverse_transform().expect("spectral tag");
                for v in phys.values_mut() {
                    v.im = 0.0;
                }
                phys
            }
        }
    }

    /// Closed-form `h^(p)`, when available.
    pub fn analytic_spectrum(&self, p: f64) -> Option<Complex64> {
        match *self {
            SourceProfile::Zero => Some(Complex64::new(0.0, 0.0)),
            SourceProfile::Gaussian { amplitude, width, center } => {
                let mag = amplitude * width / 2f64.sqrt() * (-(p * width).powi(2) / 4.0).exp();
                Some(Complex64::from_polar(mag, -p * center))
            }
            SourceProfile::Bandlimited { amplitude, lo, hi } => {
                Some(Complex64::new(Self::band_spectrum(amplitude, lo, hi, p), 0.0))
            }
        }
    }
}

/// The `u`-dependent part `phi(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonlinearityKind {
    /// `kappa * u`
    LinearPlusSource { kappa: f64 },
    /// `l * sin(u)`
    Saturating { l: f64 },
    /// `l * v (1 - v/u_max)` with `v = clamp(u, 0, u_max)`.
    LogisticClip { l: f64, u_max: f64 },
}

impl NonlinearityKind {
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            NonlinearityKind::LinearPlusSource { kappa } => kappa * u,
            NonlinearityKind::Saturating { l } => l * u.sin(),
            NonlinearityKind::LogisticClip { l, u_max } => {
                let v = u.clamp(0.0, u_max);
                l * v * (1.0 - v / u_max)
            }
        }
    }

    /// Sharp Lipschitz constant of `phi`; also a valid growth constant since
    /// `phi(0) = 0`.
    pub fn analytic_lipschitz(&self) -> f64 {
        match *self {
            NonlinearityKind::LinearPlusSource { kappa } => kappa.abs(),
            NonlinearityKind::Saturating { l } => l.abs(),
            NonlinearityKind::LogisticClip { l, .. } => l.abs(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NonlinearityKind::LinearPlusSource { kappa } => kappa.is_finite(),
            NonlinearityKind::Saturating { l } => l.is_finite(),
            NonlinearityKind::LogisticClip { l, u_max } => l.is_finite() && u_max > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad nonlinearity parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    source: SourceProfile,
    growth: f64,
    lipschitz: f64,
}

impl NonlinearitySpec {
    /// `F = phi + h` with declared constants `k` (growth) and `l` (Lipschitz).
    /// Declarations are not checked against `phi` here; see
    /// [`check_lipschitz_sampling`].
    pub fn new(kind: NonlinearityKind, source: SourceProfile, growth: f64, lipschitz: f64) -> Result<Self> {
        kind.validate()?;
        source.validate()?;
        if !(growth > 0.0) || !growth.is_finite() {
            return Err(Error::AssumptionViolated(format!("growth constant k must be positive, got {growth}")));
        }
        if !(lipschitz > 0.0) || !lipschitz.is_finite() {
            return Err(Error::AssumptionViolated(format!(
                "Lipschitz constant l must be positive, got {lipschitz}"
            )));
        }
        Ok(Self {
            kind,
            source,
            growth,
            lipschitz,
        })
    }

    /// Declare the catalog entry's own sharp constants.
    pub fn with_analytic_constants(kind: NonlinearityKind, source: SourceProfile) -> Result<Self> {
        let l = kind.analytic_lipschitz();
        Self::new(kind, source, l, l)
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn source(&self) -> &SourceProfile {
        &self.source
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, u: f64, x: f64) -> f64 {
        self.kind.eval(u) + self.source.eval(x)
    }

    /// `F(u1, x) - F(u2, x)`; the source cancels identically.
    pub fn difference(&self, u1: f64, u2: f64, _x: f64) -> f64 {
        self.kind.eval(u1) - self.kind.eval(u2)
    }
}

/// Pointwise `F(Re u(x_j), x_j)` given pre-sampled source values.
pub(crate) fn apply_with_source(u: &Field, n: &NonlinearitySpec, source: &Field) -> Result<Field> {
    if u.representation() != Representation::Physical {
        return Err(Error::RepresentationMismatch {
            expected: Representation::Physical,
            found: u.representation(),
        });
    }
    let grid = u.grid().clone();
    let mut out = Vec::with_capacity(grid.len());
    for (j, (v, h)) in u.values().iter().zip(source.values()).enumerate() {
        let f = n.kind.eval(v.re) + h.re;
        if !f.is_finite() {
            return Err(Error::NonFinite { x: grid.x(j), value: f });
        }
        out.push(Complex64::new(f, 0.0));
    }
    let out = Field::new(grid, out, Representation::Physical)?;
    debug_assert!(
        out.l2_norm() <= (n.growth * u.l2_norm() + source.l2_norm()) * (1.0 + 1e-12) + 1e-300,
        "growth bound violated"
    );
    Ok(out)
}

/// `F(u(x_j), x_j)` on the grid of `u`, which must be physical.
pub fn apply_nonlinearity(u: &Field, n: &NonlinearitySpec) -> Result<Field> {
    let source = n.source.sample(u.grid());
    apply_with_source(u, n, &source)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzSample {
    pub max_ratio: f64,
    /// `(u1, u2, x)` attaining `max_ratio`.
    pub witness: (f64, f64, f64),
    pub trials: usize,
}

/// Falsification test of the declared Lipschitz and growth constants on
/// random triples. Passing proves nothing; failing identifies a witness.
pub fn check_lipschitz_sampling(n: &NonlinearitySpec, trials: usize, seed: u64) -> Result<LipschitzSample> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = LipschitzSample {
        max_ratio: 0.0,
        witness: (0.0, 0.0, 0.0),
        trials,
    };
    for t in 0..trials {
        // Mix wide, near-origin and near-diagonal pairs.
        let scale = match t % 4 {
            0 | 1 => 10.0,
            2 => 1e-3,
            _ => 2.0 * PI,
        };
        let u1: f64 = rng.gen_range(-scale..scale);
        let mut u2: f64 = rng.gen_range(-scale..scale);
        if t % 4 == 3 {
            u2 = u1 + rng.gen_range(1e-3..1e-2) * u1.abs().max(1.0);
        }
        if (u1 - u2).abs() <= 1e-3 * u1.abs().max(u2.abs()).max(1e-3) {
            continue;
        }
        let x: f64 = rng.gen_range(-20.0..20.0);
        let ratio = n.difference(u1, u2, x).abs() / (u1 - u2).abs();
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.witness = (u1, u2, x);
        }
        if ratio > n.lipschitz * (1.0 + 1e-12) {
            return Err(Error::LipschitzFalsified {
                u1,
                u2,
                x,
                ratio,
                declared: n.lipschitz,
            });
        }
        let growth = n.kind.eval(u1).abs();
        if growth > n.growth * u1.abs() * (1.0 + 1e-12) {
            return Err(Error::AssumptionViolated(format!(
                "growth bound falsified at u = {u1}: |F(u,x) - h(x)| = {growth} > k|u| with k = {}",
                n.growth
            )));
        }
    }
    Ok(best)
}
