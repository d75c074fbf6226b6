//! The run pipeline: validate, certify, march, report.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nlrd6_core::certificate::{window_schedule, Certificate, WindowSchedule};
use nlrd6_core::kernel::{compute_q, validate_kernel, KernelShape, KernelSpec, TabulatedKernel};
use nlrd6_core::nonlinearity::{check_lipschitz_sampling, NonlinearityKind, NonlinearitySpec, SourceProfile};
use nlrd6_core::solver::march::{global_march, two_grid_check, MarchOptions, MarchReport, RefinementReport};
use nlrd6_core::solver::{PicardOptions, Tolerance};
use nlrd6_core::{make_grid, Error, Field, ProblemSpec};

use crate::artifacts::{write_all, RunArtifacts};
use crate::config::{ConfigError, InitialConfig, KernelConfig, ReactionConfig, RunConfig, SourceConfig, TolPolicy};

/// Process exit status; each failure class has its own code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    /// Unreadable or malformed input, or unwritable output.
    Usage,
    CertificateRefused,
    SolverFailure,
    AssumptionViolation,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Usage => 1,
            ExitStatus::CertificateRefused => 2,
            ExitStatus::SolverFailure => 3,
            ExitStatus::AssumptionViolation => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ExitStatus::Success => "success",
            ExitStatus::Usage => "usage error",
            ExitStatus::CertificateRefused => "certificate refused",
            ExitStatus::SolverFailure => "solver failure",
            ExitStatus::AssumptionViolation => "assumption violation",
        }
    }
}

pub fn classify(e: &Error) -> ExitStatus {
    match e {
        Error::NoAdmissibleWindow { .. } | Error::CertificateRefused { .. } => ExitStatus::CertificateRefused,
        Error::Window { source, .. } => match classify(source) {
            ExitStatus::CertificateRefused => ExitStatus::CertificateRefused,
            _ => ExitStatus::SolverFailure,
        },
        Error::NotConverged { .. }
        | Error::RatioViolation { .. }
        | Error::Unstable { .. }
        | Error::MissingHistory
        | Error::NonFinite { .. } => ExitStatus::SolverFailure,
        Error::Io(_) | Error::Format(_) => ExitStatus::Usage,
        _ => ExitStatus::AssumptionViolation,
    }
}

impl From<&ConfigError> for ExitStatus {
    fn from(e: &ConfigError) -> Self {
        match e {
            ConfigError::Io(..) | ConfigError::Parse(_) => ExitStatus::Usage,
            ConfigError::Constraint { .. } => ExitStatus::AssumptionViolation,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub error: Option<String>,
    pub out_dir: PathBuf,
    pub artifacts: Option<RunArtifacts>,
}

/// State shared by the pipeline stages and the final writers.
#[derive(Debug, Default)]
struct Context {
    certificate: Option<String>,
    warnings: Vec<String>,
    watermark: Option<String>,
    echo: Option<String>,
}

fn build_kernel(cfg: &KernelConfig) -> nlrd6_core::Result<KernelSpec> {
    match cfg {
        KernelConfig::Gaussian { amplitude, width } => KernelSpec::gaussian(*amplitude, *width),
        KernelConfig::Sech { amplitude, width } => KernelSpec::sech(*amplitude, *width),
        KernelConfig::Bandlimited { amplitude, cutoff } => KernelSpec::bandlimited(*amplitude, *cutoff),
        KernelConfig::Tabulated { path } => KernelSpec::new(KernelShape::Tabulated(TabulatedKernel::from_csv(path)?)),
    }
}

fn build_nonlinearity(cfg: &RunConfig) -> nlrd6_core::Result<NonlinearitySpec> {
    let kind = match cfg.nonlinearity.reaction {
        ReactionConfig::LinearPlusSource { kappa } => NonlinearityKind::LinearPlusSource { kappa },
        ReactionConfig::Saturating { l } => NonlinearityKind::Saturating { l },
        ReactionConfig::LogisticClip { l, u_max } => NonlinearityKind::LogisticClip { l, u_max },
    };
    let source = match cfg.nonlinearity.source {
        SourceConfig::Zero => SourceProfile::Zero,
        SourceConfig::Gaussian { amplitude, width, center } => SourceProfile::Gaussian { amplitude, width, center },
        SourceConfig::Bandlimited { amplitude, lo, hi } => SourceProfile::Bandlimited { amplitude, lo, hi },
    };
    let analytic = kind.analytic_lipschitz();
    let growth = cfg.nonlinearity.growth.unwrap_or(analytic);
    let lipschitz = cfg.nonlinearity.lipschitz.unwrap_or(analytic);
    NonlinearitySpec::new(kind, source, growth, lipschitz)
}

fn read_initial_csv(path: &Path, grid: &std::sync::Arc<nlrd6_core::SpectralGrid>) -> nlrd6_core::Result<Field> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let parsed: Option<Vec<f64>> = record.iter().map(|s| s.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => samples.push((v[0], v[1])),
            None if i == 0 => continue,
            _ => {
                return Err(Error::Format(format!(
                    "{}: row {} must hold two numbers x,u",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    if samples.len() != grid.len() {
        return Err(Error::Format(format!(
            "{}: {} rows, grid has {} points",
            path.display(),
            samples.len(),
            grid.len()
        )));
    }
    let tol = 1e-9 * grid.half_length().max(1.0);
    for (j, &(x, _)) in samples.iter().enumerate() {
        if (x - grid.x(j)).abs() > tol {
            return Err(Error::Format(format!(
                "{}: row {} has x = {x}, grid point is {}",
                path.display(),
                j + 1,
                grid.x(j)
            )));
        }
    }
    let values: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Field::from_real(grid.clone(), &values)
}

fn build_initial(
    cfg: &InitialConfig,
    grid: &std::sync::Arc<nlrd6_core::SpectralGrid>,
    warnings: &mut Vec<String>,
) -> nlrd6_core::Result<Field> {
    Ok(match cfg {
        InitialConfig::Gaussian { amplitude, width, center } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidArgument(format!("initial width must be positive, got {width}")));
            }
            Field::from_fn(grid.clone(), |x| amplitude * (-((x - center) / width).powi(2)).exp())
        }
        InitialConfig::Mode { amplitude, p } => {
            let k = p * grid.half_length() / PI;
            if (k - k.round()).abs() > 1e-9 {
                warnings.push(format!("mode p = {p} is not a grid wavenumber; the periodic extension is not smooth"));
            }
            Field::from_fn(grid.clone(), |x| amplitude * (p * x).cos())
        }
        InitialConfig::Zero => Field::zeros(grid.clone(), nlrd6_core::Representation::Physical),
        InitialConfig::Csv { path } => read_initial_csv(path, grid)?,
    })
}

fn schedule_lines(s: &WindowSchedule) -> String {
    format!(
        "horizon = {:.17e}\nsafety = {:.17e}\nwindow_max = {:.17e}\nwindow_count = {}\nwindow_step = {:.17e}\n",
        s.total,
        s.safety,
        s.window,
        s.count,
        s.step()
    )
}

struct Pipeline {
    march: MarchReport,
    refinement: Option<RefinementReport>,
    prob: ProblemSpec,
}

fn pipeline(cfg: &RunConfig, ctx: &mut Context) -> nlrd6_core::Result<Pipeline> {
    let grid = make_grid(cfg.grid.half_length, cfg.grid.points)?;
    let kernel = build_kernel(&cfg.kernel)?;
    let kernel_report = validate_kernel(&kernel, &grid)?;
    ctx.warnings.extend(kernel_report.notes.iter().cloned());
    let q = compute_q(&kernel)?;
    let nonlinearity = build_nonlinearity(cfg)?;
    ctx.echo = Some(cfg.echo(Some(nonlinearity.growth()), Some(nonlinearity.lipschitz())));
    check_lipschitz_sampling(&nonlinearity, cfg.solver.lipschitz_trials, cfg.solver.seed)?;
    let initial = build_initial(&cfg.initial, &grid, &mut ctx.warnings)?;
    let prob = ProblemSpec::new(cfg.model.a, cfg.model.b, kernel, nonlinearity, initial)?;

    let (a, b, l, horizon) = (cfg.model.a, cfg.model.b, prob.nonlinearity().lipschitz(), cfg.time.horizon);
    let override_cert = cfg.flags.override_certificate;
    match window_schedule(horizon, q, l, a, b, cfg.solver.safety) {
        Ok(s) => {
            let cert = Certificate::new(q, l, a, b, s.step())?;
            ctx.certificate = Some(cert.report() + &schedule_lines(&s));
        }
        Err(Error::NoAdmissibleWindow { product }) => {
            let cert = Certificate::new(q, l, a, b, horizon)?;
            ctx.certificate = Some(cert.report() + "window_count = none\n");
            if !override_cert {
                return Err(Error::NoAdmissibleWindow { product });
            }
            ctx.watermark = Some(format!(
                "UNCERTIFIED: certificate overridden (q l sqrt(2) = {product:.6e} >= 1, C = {:.6e})",
                cert.constant
            ));
        }
        Err(e) => return Err(e),
    }

    let tolerance = match cfg.solver.tol_policy {
        TolPolicy::Relative => Tolerance::Relative(cfg.solver.tol_fix),
        TolPolicy::Absolute => Tolerance::Absolute(cfg.solver.tol_fix),
    };
    let opts = MarchOptions {
        intervals: cfg.solver.frames,
        safety: cfg.solver.safety,
        picard: PicardOptions {
            tolerance,
            max_iter: cfg.solver.max_iter,
            override_certificate: override_cert,
        },
        oracle_substeps: cfg.flags.run_oracle.then(|| cfg.oracle_substeps()),
        eps_supp: cfg.solver.eps_supp,
    };
    let march = global_march(&prob, horizon, &opts)?;
    for w in &march.windows {
        ctx.warnings.extend(w.tail_warnings.iter().cloned());
    }
    if let Some(note) = &march.overlap.note {
        ctx.warnings.push(note.clone());
    }
    let refinement = if cfg.solver.refine {
        Some(two_grid_check(&prob, &march, horizon, &opts)?)
    } else {
        None
    };
    Ok(Pipeline { march, refinement, prob })
}

/// Run a parsed configuration, writing every artifact under `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> RunOutcome {
    let mut outcome = RunOutcome {
        status: ExitStatus::Success,
        error: None,
        out_dir: out_dir.to_path_buf(),
        artifacts: None,
    };
    if let Err(e) = fs::create_dir_all(out_dir) {
        outcome.status = ExitStatus::Usage;
        outcome.error = Some(format!("cannot create {}: {e}", out_dir.display()));
        return outcome;
    }
    let mut ctx = Context::default();
    match pipeline(cfg, &mut ctx) {
        Ok(p) => {
            let gate_failed = p.refinement.as_ref().is_some_and(|r| !r.passed);
            if gate_failed {
                outcome.status = ExitStatus::SolverFailure;
                outcome.error = Some(format!(
                    "two-grid check failed: relative gap {:.3e} exceeds {:e}",
                    p.refinement.as_ref().map_or(f64::NAN, |r| r.relative_gap),
                    nlrd6_core::solver::REFINEMENT_TOL
                ));
            }
            outcome.artifacts = Some(RunArtifacts {
                out_dir: out_dir.to_path_buf(),
                march: p.march,
                refinement: p.refinement,
                grid: p.prob.grid().clone(),
                snapshot_frames: cfg.output.snapshot_frames.clone(),
                watermark: ctx.watermark.clone(),
            });
        }
        Err(e) => {
            outcome.status = classify(&e);
            outcome.error = Some(e.to_string());
        }
    }
    if let Err(e) = finish(cfg, &ctx, &mut outcome) {
        outcome.status = ExitStatus::Usage;
        outcome.error = Some(format!("writing artifacts: {e}"));
    }
    outcome
}

fn with_watermark(ctx: &Context, body: &str) -> String {
    match &ctx.watermark {
        Some(w) => format!("# {w}\n{body}"),
        None => body.to_string(),
    }
}

fn finish(cfg: &RunConfig, ctx: &Context, outcome: &mut RunOutcome) -> std::io::Result<()> {
    let dir = &outcome.out_dir;
    let certificate = ctx.certificate.clone().unwrap_or_else(|| {
        format!(
            "status = unavailable\nreason = {}\n",
            outcome.error.as_deref().unwrap_or("not computed")
        )
    });
    fs::write(dir.join("certificate.txt"), with_watermark(ctx, &certificate))?;
    let echo = ctx.echo.clone().unwrap_or_else(|| cfg.echo(None, None));
    fs::write(dir.join("config.toml"), with_watermark(ctx, &echo))?;
    if let Some(art) = &outcome.artifacts {
        write_all(art)?;
    }
    fs::write(dir.join("summary.txt"), summary(ctx, outcome))?;
    Ok(())
}

fn summary(ctx: &Context, outcome: &RunOutcome) -> String {
    let mut s = String::new();
    if let Some(w) = &ctx.watermark {
        let _ = writeln!(s, "# {w}");
    }
    let _ = writeln!(s, "exit_code = {}", outcome.status.code());
    let _ = writeln!(s, "status = {}", outcome.status.label());
    if let Some(e) = &outcome.error {
        let _ = writeln!(s, "error = {e}");
    }
    for w in &ctx.warnings {
        let _ = writeln!(s, "warning = {w}");
    }
    if let Some(art) = &outcome.artifacts {
        let m = &art.march;
        let _ = writeln!(s, "certified = {}", art.watermark.is_none());
        let _ = writeln!(s, "q = {:.17e}", m.q);
        let _ = writeln!(s, "l = {:.17e}", m.l);
        let _ = writeln!(s, "overlap_measure = {:.17e}", m.overlap.measure);
        let _ = writeln!(s, "windows = {}", m.windows.len());
        for (i, w) in m.windows.iter().enumerate() {
            let _ = writeln!(
                s,
                "window {i}: C = {:.6e}, iterations = {}, max_ratio = {}, w_norm = {:.6e}{}",
                w.certificate.constant,
                w.trace.iterations,
                w.trace.max_ratio().map_or("none".into(), |r| format!("{r:.6e}")),
                w.norms.w_norm(),
                w.oracle_deviation.map_or(String::new(), |d| format!(", oracle_deviation = {d:.6e}")),
            );
        }
        if let Some(f) = m.final_frame() {
            let _ = writeln!(s, "final_l2 = {:.17e}", f.l2_norm());
            let _ = writeln!(s, "final_h6 = {:.17e}", f.h6_norm());
        }
        if let Some(r) = &art.refinement {
            let _ = writeln!(s, "refinement_gap = {:.6e}", r.relative_gap);
        }
    }
    s
}
