//! Convolution kernels `G`: the built-in catalog, kernel validation and the
//! kernel constant `q = sqrt(||G||_1^2 + ||G^(6)||_1^2)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, DEFAULT_TAIL_FRACTION, DEFAULT_TAIL_TOL};
use crate::grid::{make_grid, SpectralGrid};
use crate::quadrature::{integrate, integrate_abs};

/// Exponent of the polynomial bump `(1 - (p/p_c)^2)^8` used by band-limited
/// profiles.
pub(crate) const BUMP_POWER: i32 = 8;

pub(crate) fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(BUMP_POWER)
    } else {
        0.0
    }
}

/// Inverse transform of an even real spectrum supported in `[-cutoff, cutoff]`,
/// evaluated at `x`: `sqrt(2/pi) * integral_0^cutoff s(p) cos(px) dp`.
pub(crate) fn even_inverse_transform(spectrum: impl Fn(f64) -> f64, lo: f64, hi: f64, x: f64) -> f64 {
    let panels = (((hi - lo) * x.abs()) / PI).ceil().max(4.0) as usize;
    (2.0 / PI).sqrt() * integrate(|p| spectrum(p) * (p * x).cos(), lo, hi, panels)
}

/// Polynomial in `sech`, `tanh`: coefficient keyed by the exponent pair.
type SechPoly = BTreeMap<(i32, i32), f64>;

fn sech_derivative_poly(order: u32) -> SechPoly {
    let mut poly: SechPoly = BTreeMap::from([((1, 0), 1.0)]);
    for _ in 0..order {
        let mut next = SechPoly::new();
        for (&(i, j), &c) in &poly {
            // d(s^i t^j) = -i s^i t^{j+1} + j s^{i+2} t^{j-1}
            if i != 0 {
                *next.entry((i, j + 1)).or_default() -= c * i as f64;
            }
            if j != 0 {
                *next.entry((i + 2, j - 1)).or_default() += c * j as f64;
            }
        }
        next.retain(|_, c| *c != 0.0);
        poly = next;
    }
    poly
}

fn eval_sech_poly(poly: &SechPoly, y: f64) -> f64 {
    let s = 1.0 / y.cosh();
    let t = y.tanh();
    poly.iter()
        .map(|(&(i, j), &c)| c * s.powi(i) * t.powi(j))
        .sum()
}

fn hermite6(y: f64) -> f64 {
    let y2 = y * y;
    ((64.0 * y2 - 480.0) * y2 + 720.0) * y2 - 120.0
}

/// Kernel sampled on a uniform table; linear interpolation, zero outside.
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    sixth: Option<Vec<f64>>,
}

impl TabulatedKernel {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>, sixth: Option<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("tabulated kernel needs at least two samples".into()));
        }
        if !(dx > 0.0) {
            return Err(Error::InvalidArgument("tabulated kernel spacing must be positive".into()));
        }
        if let Some(s) = &sixth {
            if s.len() != values.len() {
                return Err(Error::InvalidArgument(
                    "sixth-derivative table length differs from kernel table".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated kernel has non-finite samples".into()));
        }
        Ok(Self { x0, dx, values, sixth })
    }

    /// Load a two-column `x,G(x)` CSV with strictly increasing, uniformly
    /// spaced abscissae. A non-numeric first line is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut gs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidArgument(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(x), Ok(g)) => {
                    xs.push(x);
                    gs.push(g);
                }
                _ if xs.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "{}:{}: unparsable row",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        if xs.len() < 2 {
            return Err(Error::InvalidArgument(format!("{}: fewer than two rows", path.display())));
        }
        let dx = xs[1] - xs[0];
        for w in xs.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{}: abscissae not strictly increasing",
                    path.display()
                )));
            }
            if (step - dx).abs() > 1e-9 * dx.abs() {
                return Err(Error::InvalidArgument(format!("{}: spacing not uniform", path.display())));
            }
        }
        Self::new(xs[0], dx, gs, None)
    }

    fn eval(&self, x: f64) -> f64 {
        let s = (x - self.x0) / self.dx;
        if s < 0.0 || s > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

#[derive(Debug, Clone)]
pub enum KernelShape {
    /// `A exp(-(x/w)^2)`
    Gaussian { amplitude: f64, width: f64 },
    /// `A sech(x/w)`
    Sech { amplitude: f64, width: f64 },
    /// Spectrum `A (1 - (p/p_c)^2)^8` on `|p| < p_c`, zero outside.
    Bandlimited { amplitude: f64, cutoff: f64 },
    Tabulated(TabulatedKernel),
}

/// How `||G^(6)||_1` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SixthDerivativeMethod {
    /// Quadrature of a closed-form sixth-derivative rule.
    Analytic,
    /// Rectangle rule over supplied sixth-derivative samples.
    Tabulated,
    /// Spectral differentiation of sampled `G`, then a discrete L1 norm.
    SpectralFallback,
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    shape: KernelShape,
    l1: f64,
    l1_sixth: f64,
    sixth_method: SixthDerivativeMethod,
    /// Relative `|p^6 G^|^2` mass in the outer wavenumber band, fallback only.
    sixth_spectral_tail: Option<f64>,
    sech_poly: Option<SechPoly>,
}

impl KernelSpec {
    pub fn new(shape: KernelShape) -> Result<Self> {
        match &shape {
            KernelShape::Gaussian { amplitude, width } | KernelShape::Sech { amplitude, width } => {
                if !(*width > 0.0) || !width.is_finite() || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "kernel width must be positive and amplitude finite (width {width}, amplitude {amplitude})"
                    )));
                }
            }
            KernelShape::Bandlimited { amplitude, cutoff } => {
                if !(*cutoff > 0.0) || !cutoff.is_finite() || !amplitude.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "band-limited kernel needs a positive cutoff, got {cutoff}"
                    )));
                }
            }
            KernelShape::Tabulated(_) => {}
        }
        let mut spec = Self {
            sech_poly: matches!(shape, KernelShape::Sech { .. }).then(|| sech_derivative_poly(6)),
            shape,
            l1: 0.0,
            l1_sixth: 0.0,
            sixth_method: SixthDerivativeMethod::Analytic,
            sixth_spectral_tail: None,
        };
        spec.compute_norms()?;
        Ok(spec)
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Result<Self> {
        Self::new(KernelShape::Gaussian { amplitude, width })
    }

    pub fn sech(amplitude: f64, width: f64) -> Result<Self> {
        Self::new(KernelShape::Sech { amplitude, width })
    }

    pub fn bandlimited(amplitude: f64, cutoff: f64) -> Result<Self> {
        Self::new(KernelShape::Bandlimited { amplitude, cutoff })
    }

    pub fn tabulated(table: TabulatedKernel) -> Result<Self> {
        Self::new(KernelShape::Tabulated(table))
    }

    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    /// Radius beyond which `|G|` and `|G^(6)|` are negligible, plus the
    /// quadrature panel width.
    fn quadrature_extent(&self) -> (f64, f64) {
        match &self.shape {
            KernelShape::Gaussian { width, .. } => (9.0 * width, width / 8.0),
            KernelShape::Sech { width, .. } => (45.0 * width, width / 8.0),
            KernelShape::Bandlimited { cutoff, .. } => (300.0 / cutoff, PI / (4.0 * cutoff)),
            KernelShape::Tabulated(_) => unreachable!("tabulated kernels use discrete norms"),
        }
    }

    fn compute_norms(&mut self) -> Result<()> {
        match &self.shape {
            KernelShape::Tabulated(t) => {
                self.l1 = t.values.iter().map(|v| v.abs()).sum::<f64>() * t.dx;
                if let Some(s) = &t.sixth {
                    self.l1_sixth = s.iter().map(|v| v.abs()).sum::<f64>() * t.dx;
                    self.sixth_method = SixthDerivativeMethod::Tabulated;
                } else {
                    // Zero-padded periodic box of the table's own spacing.
                    let n = (2 * t.values.len()).max(8).next_multiple_of(2);
                    let grid = make_grid(0.5 * n as f64 * t.dx, n)?;
                    let mut samples = vec![0.0; n];
                    let offset = (n - t.values.len()) / 2;
                    samples[offset..offset + t.values.len()].copy_from_slice(&t.values);
                    let field = Field::from_real(grid.clone(), &samples)?;
                    let d6 = field.spectral_derivative(6)?;
                    self.l1_sixth = d6.l1_norm();
                    self.sixth_method = SixthDerivativeMethod::SpectralFallback;
                    self.sixth_spectral_tail = Some(spectral_tail_fraction(&d6.to_spectral()));
                }
            }
            _ => {
                let (radius, panel) = self.quadrature_extent();
                self.l1 = integrate_abs(|x| self.eval(x), -radius, radius, panel);
                self.l1_sixth = integrate_abs(|x| self.sixth_derivative(x), -radius, radius, panel);
                self.sixth_method = SixthDerivativeMethod::Analytic;
            }
        }
        Ok(())
    }

    /// `G(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::Gaussian { amplitude, width } => {
                let y = x / width;
                amplitude * (-y * y).exp()
            }
            KernelShape::Sech { amplitude, width } => amplitude / (x / width).cosh(),
            KernelShape::Bandlimited { amplitude, cutoff } => {
                amplitude * even_inverse_transform(|p| bump(p / cutoff), 0.0, *cutoff, x)
            }
            KernelShape::Tabulated(t) => t.eval(x),
        }
    }

    /// `G^(6)(x)` from the closed-form rule; NaN for tabulated kernels.
    pub fn sixth_derivative(&self, x: f64) -> f64 {
        match &self.shape {
            KernelShape::Gaussian { amplitude, width } => {
                let y = x / width;
                amplitude * width.powi(-6) * hermite6(y) * (-y * y).exp()
            }
            KernelShape::Sech { amplitude, width } => {
                let poly = self.sech_poly.as_ref().expect("built for sech kernels");
                amplitude * width.powi(-6) * eval_sech_poly(poly, x / width)
            }
            KernelShape::Bandlimited { amplitude, cutoff } => {
                // (ip)^6 = -p^6
                -amplitude * even_inverse_transform(|p| p.powi(6) * bump(p / cutoff), 0.0, *cutoff, x)
            }
            KernelShape::Tabulated(_) => f64::NAN,
        }
    }

    /// Closed-form transform `G^(p)`, when the catalog entry has one.
    pub fn analytic_spectrum(&self, p: f64) -> Option<f64> {
        match &self.shape {
            KernelShape::Gaussian { amplitude, width } => {
                Some(amplitude * width / 2f64.sqrt() * (-(p * width).powi(2) / 4.0).exp())
            }
            KernelShape::Sech { amplitude, width } => {
                Some(amplitude * width * (PI / 2.0).sqrt() / (PI * p * width / 2.0).cosh())
            }
            KernelShape::Bandlimited { amplitude, cutoff } => Some(amplitude * bump(p / cutoff)),
            KernelShape::Tabulated(_) => None,
        }
    }

    /// `G` sampled on the grid.
    pub fn sample(&self, grid: &Arc<SpectralGrid>) -> Field {
        Field::from_fn(grid.clone(), |x| self.eval(x))
    }

    /// `G^` on the grid: the closed form when available, otherwise the
    /// transform of the samples.
    pub fn spectrum_on(&self, grid: &Arc<SpectralGrid>) -> Field {
        if self.analytic_spectrum(0.0).is_some() {
            Field::from_spectrum(grid.clone(), |p| {
                Complex64::new(self.analytic_spectrum(p).expect("analytic"), 0.0)
            })
        } else {
            self.sample(grid).to_spectral()
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn l1_norm_sixth(&self) -> f64 {
        self.l1_sixth
    }

    pub fn sixth_method(&self) -> SixthDerivativeMethod {
        self.sixth_method
    }

    /// Cutoff of a compactly supported spectrum, if the entry guarantees one.
    pub fn compact_spectral_support(&self) -> Option<f64> {
        match self.shape {
            KernelShape::Bandlimited { cutoff, .. } => Some(cutoff),
            _ => None,
        }
    }
}

/// Relative L2 mass of a spectral field in the outer `DEFAULT_TAIL_FRACTION`
/// of the wavenumber band.
fn spectral_tail_fraction(spec: &Field) -> f64 {
    let pmax = spec.grid().wavenumbers().iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let core = (1.0 - DEFAULT_TAIL_FRACTION) * pmax;
    let (mut tail, mut total) = (0.0, 0.0);
    for (v, p) in spec.values().iter().zip(spec.grid().wavenumbers()) {
        total += v.norm_sqr();
        if p.abs() >= core {
            tail += v.norm_sqr();
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

#[derive(Debug, Clone)]
pub struct KernelReport {
    pub nonvanishing: bool,
    pub l1_norm: f64,
    pub l1_norm_sixth: f64,
    pub sixth_method: SixthDerivativeMethod,
    /// Relative L2 mass of sampled `G` in the outer band of the solve box.
    pub tail_mass: f64,
    pub tail_ok: bool,
    pub compact_spectral_support: Option<f64>,
    pub notes: Vec<String>,
}

/// Check the kernel assumptions at grid level and report its L1 norms.
pub fn validate_kernel(kernel: &KernelSpec, grid: &Arc<SpectralGrid>) -> Result<KernelReport> {
    let samples = kernel.sample(grid);
    let nonvanishing = samples.max_abs() > 0.0 || kernel.l1 > 0.0;
    if !nonvanishing {
        return Err(Error::AssumptionViolated(
            "kernel G vanishes identically; a nonzero kernel is required".into(),
        ));
    }
    if !kernel.l1.is_finite() || !kernel.l1_sixth.is_finite() {
        return Err(Error::AssumptionViolated(format!(
            "kernel L1 norms not finite: ||G||_1 = {}, ||G^(6)||_1 = {}",
            kernel.l1, kernel.l1_sixth
        )));
    }
    let tail_mass = samples.tail_mass_fraction(DEFAULT_TAIL_FRACTION);
    let tail_ok = tail_mass <= DEFAULT_TAIL_TOL;
    let mut notes = Vec::new();
    if !tail_ok {
        notes.push(format!(
            "kernel tail mass {tail_mass:.3e} exceeds {DEFAULT_TAIL_TOL:e} of total; box too small"
        ));
    }
    if kernel.sixth_method == SixthDerivativeMethod::SpectralFallback {
        notes.push("||G^(6)||_1 from spectral differentiation of samples".into());
        if let Some(t) = kernel.sixth_spectral_tail {
            if t > DEFAULT_TAIL_TOL {
                notes.push(format!(
                    "spectral tail of p^6 G^ is {t:.3e}; sixth-derivative norm unreliable"
                ));
            }
        }
    }
    let compact = kernel.compact_spectral_support();
    if let Some(c) = compact {
        notes.push(format!("compact spectral support |p| <= {c}"));
    }
    Ok(KernelReport {
        nonvanishing,
        l1_norm: kernel.l1,
        l1_norm_sixth: kernel.l1_sixth,
        sixth_method: kernel.sixth_method,
        tail_mass,
        tail_ok,
        compact_spectral_support: compact,
        notes,
    })
}

/// `q = sqrt(||G||_1^2 + ||G^(6)||_1^2)`.
pub fn compute_q(kernel: &KernelSpec) -> Result<f64> {
    if !(kernel.l1 > 0.0) || !kernel.l1.is_finite() || !kernel.l1_sixth.is_finite() {
        return Err(Error::AssumptionViolated(format!(
            "kernel constant undefined: ||G||_1 = {}, ||G^(6)||_1 = {}",
            kernel.l1, kernel.l1_sixth
        )));
    }
    Ok(kernel.l1.hypot(kernel.l1_sixth))
}
