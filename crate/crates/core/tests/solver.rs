use std::f64::consts::PI;

use num_complex::Complex64;

use nlrd6_core::nonlinearity::{NonlinearityKind, SourceProfile};
use nlrd6_core::solver::march::{global_march, two_grid_check, MarchOptions};
use nlrd6_core::solver::{
    etd_reference_solve, forcing_history, picard_solve, time_derivative, PicardOptions, Tolerance, Window,
};
use nlrd6_core::{
    compute_q, make_grid, Certificate, Error, Field, KernelSpec, NonlinearitySpec, ProblemSpec, Representation,
};

fn free(source: SourceProfile) -> NonlinearitySpec {
    NonlinearitySpec::new(NonlinearityKind::LinearPlusSource { kappa: 0.0 }, source, 1e-3, 1e-3).unwrap()
}

fn saturating(l: f64, source: SourceProfile) -> NonlinearitySpec {
    NonlinearitySpec::with_analytic_constants(NonlinearityKind::Saturating { l }, source).unwrap()
}

fn centroid(f: &Field) -> f64 {
    let phys = f.to_physical();
    let g = phys.grid();
    let (mut m0, mut m1) = (0.0, 0.0);
    for (j, v) in phys.values().iter().enumerate() {
        m0 += v.norm_sqr();
        m1 += g.x(j) * v.norm_sqr();
    }
    m1 / m0
}

#[test]
fn positive_drift_moves_left() {
    // the symbol i b p gives u(x, t) = u0(x + b t)
    let grid = make_grid(60.0, 256).unwrap();
    let b = 1.0;
    let u0 = Field::from_fn(grid.clone(), |x| (-(x / 8.0).powi(2)).exp());
    let prob = ProblemSpec::new(0.0, b, KernelSpec::gaussian(1.0, 1.0).unwrap(), free(SourceProfile::Zero), u0).unwrap();
    let t = 2.0;
    let r = global_march(&prob, t, &MarchOptions::default()).unwrap();
    let end = r.final_frame().unwrap();
    assert!((centroid(end) + b * t).abs() < 1e-8, "{}", centroid(end));
    // dissipation at |p| ~ 1/8 is negligible over this horizon
    let shifted = Field::from_fn(grid, |x| (-((x + b * t) / 8.0).powi(2)).exp());
    let gap = end.sub(&shifted.to_spectral()).unwrap().l2_norm() / shifted.l2_norm();
    assert!(gap < 1e-3, "{gap}");
}

#[test]
fn derivative_identity_residual() {
    let grid = make_grid(20.0, 128).unwrap();
    let src = SourceProfile::Gaussian {
        amplitude: 0.3,
        width: 1.0,
        center: 0.5,
    };
    let u0 = Field::from_fn(grid, |x| (-x * x).exp());
    let prob = ProblemSpec::new(0.2, -1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(1e-3, src), u0).unwrap();
    let r = global_march(&prob, 0.3, &MarchOptions::default()).unwrap();
    let w = &r.windows[0];
    let sym = nlrd6_core::solver::build_symbol(prob.grid(), 0.2, -1.0);
    let history = forcing_history(&w.field, &prob).unwrap();
    let expected = time_derivative(&w.field, &sym, Some(&history)).unwrap();
    for (got, want) in w.du_dt.frames().iter().zip(expected.frames()) {
        let res = got.sub(want).unwrap().l2_norm() / want.l2_norm();
        assert!(res <= 1e-10, "{res}");
    }
}

#[test]
fn time_derivative_matches_differences() {
    // smooth, low-mode solution: centered differences converge at second order
    let grid = make_grid(PI, 16).unwrap();
    let u0 = Field::from_fn(grid, |x| 0.5 * x.cos());
    let prob = ProblemSpec::new(0.5, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(1e-3, SourceProfile::Zero), u0)
        .unwrap();
    let q = compute_q(prob.kernel()).unwrap();
    let t = 0.1;
    let cert = Certificate::new(q, 1e-3, 0.5, 1.0, t).unwrap();
    let mut errors = Vec::new();
    for m in [32, 64] {
        let r = picard_solve(&prob, &Window::new(0.0, t, m).unwrap(), &cert, &PicardOptions::default()).unwrap();
        let dt = t / m as f64;
        let mut worst = 0.0f64;
        for j in 1..m {
            let fd: Vec<Complex64> = r
                .field
                .frame(j + 1)
                .values()
                .iter()
                .zip(r.field.frame(j - 1).values())
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect();
            let fd = Field::new(prob.grid().clone(), fd, Representation::Spectral).unwrap();
            let d = r.du_dt.frame(j);
            worst = worst.max(fd.sub(d).unwrap().l2_norm() / d.l2_norm());
        }
        errors.push(worst);
    }
    assert!(errors[0] < 1e-3, "{errors:?}");
    let ratio = errors[0] / errors[1];
    assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
}

#[test]
fn zero_preserved() {
    let grid = make_grid(20.0, 64).unwrap();
    let prob = ProblemSpec::new(
        0.3,
        1.0,
        KernelSpec::sech(1.0, 1.0).unwrap(),
        saturating(1e-3, SourceProfile::Zero),
        Field::zeros(grid, Representation::Physical),
    )
    .unwrap();
    let r = global_march(&prob, 1.0, &MarchOptions::default()).unwrap();
    assert!(r.windows.iter().flat_map(|w| w.field.frames()).all(|f| f.max_abs() == 0.0));
}

#[test]
fn disjoint_supports_stay_zero() {
    let grid = make_grid(20.0, 128).unwrap();
    let src = SourceProfile::Bandlimited {
        amplitude: 1.0,
        lo: 1.5,
        hi: 2.5,
    };
    let prob = ProblemSpec::new(
        0.0,
        0.5,
        KernelSpec::bandlimited(1.0, 1.0).unwrap(),
        free(src),
        Field::zeros(grid, Representation::Physical),
    )
    .unwrap();
    let opts = MarchOptions {
        intervals: 16,
        ..Default::default()
    };
    let r = global_march(&prob, 2.0, &opts).unwrap();
    assert!(!r.windows.is_empty());
    assert_eq!(r.overlap.measure, 0.0);
    let worst = r.windows.iter().flat_map(|w| w.field.frames()).map(|f| f.max_abs()).fold(0.0, f64::max);
    assert!(worst < 1e-15, "{worst}");
}

#[test]
fn single_window_march_is_picard_solve() {
    let grid = make_grid(20.0, 64).unwrap();
    let u0 = Field::from_fn(grid, |x| (-x * x).exp());
    let prob = ProblemSpec::new(0.0, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(1e-3, SourceProfile::Zero), u0)
        .unwrap();
    let opts = MarchOptions {
        intervals: 16,
        ..Default::default()
    };
    let m = global_march(&prob, 0.1, &opts).unwrap();
    assert_eq!(m.windows.len(), 1);
    let q = compute_q(prob.kernel()).unwrap();
    let cert = Certificate::new(q, 1e-3, 0.0, 1.0, 0.1).unwrap();
    let direct = picard_solve(&prob, &Window::new(0.0, 0.1, 16).unwrap(), &cert, &PicardOptions::default()).unwrap();
    assert_eq!(m.windows[0].trace.distances, direct.trace.distances);
    for (a, b) in m.windows[0].field.frames().iter().zip(direct.field.frames()) {
        assert_eq!(a.values(), b.values());
    }
}

#[test]
fn linear_reaction_matches_reference() {
    let grid = make_grid(20.0, 128).unwrap();
    let n = NonlinearitySpec::with_analytic_constants(
        NonlinearityKind::LinearPlusSource { kappa: 1e-3 },
        SourceProfile::Gaussian {
            amplitude: 0.2,
            width: 2.0,
            center: 0.0,
        },
    )
    .unwrap();
    let u0 = Field::from_fn(grid, |x| (-x * x / 2.0).exp());
    let prob = ProblemSpec::new(0.1, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), n, u0).unwrap();
    let opts = MarchOptions {
        intervals: 32,
        oracle_substeps: Some(128),
        ..Default::default()
    };
    let r = global_march(&prob, 0.4, &opts).unwrap();
    for w in &r.windows {
        assert!(w.trace.max_ratio().unwrap_or(0.0) <= 1.05 * w.certificate.constant);
        assert!(w.oracle_deviation.unwrap() <= 1e-4);
    }
}

#[test]
fn two_grid_gate_passes_for_resolved_problem() {
    let grid = make_grid(20.0, 128).unwrap();
    let u0 = Field::from_fn(grid, |x| (-x * x).exp());
    let prob = ProblemSpec::new(0.0, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(1e-3, SourceProfile::Zero), u0)
        .unwrap();
    let opts = MarchOptions {
        intervals: 16,
        ..Default::default()
    };
    let coarse = global_march(&prob, 0.2, &opts).unwrap();
    let gate = two_grid_check(&prob, &coarse, 0.2, &opts).unwrap();
    assert!(gate.passed, "{}", gate.relative_gap);
}

#[test]
fn two_grid_gate_flags_underresolution() {
    let grid = make_grid(20.0, 16).unwrap();
    let u0 = Field::from_fn(grid, |x| (-(4.0 * x).powi(2)).exp());
    let prob = ProblemSpec::new(0.0, 1.0, KernelSpec::gaussian(1.0, 0.3).unwrap(), saturating(1e-7, SourceProfile::Zero), u0)
        .unwrap();
    let opts = MarchOptions {
        intervals: 8,
        ..Default::default()
    };
    let coarse = global_march(&prob, 1e-3, &opts).unwrap();
    let gate = two_grid_check(&prob, &coarse, 1e-3, &opts).unwrap();
    assert!(!gate.passed, "{}", gate.relative_gap);
}

#[test]
fn invalid_certificate_is_refused_unless_overridden() {
    let grid = make_grid(20.0, 64).unwrap();
    let u0 = Field::from_fn(grid, |x| (-x * x).exp());
    let prob = ProblemSpec::new(0.0, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(0.01, SourceProfile::Zero), u0)
        .unwrap();
    let q = compute_q(prob.kernel()).unwrap();
    let cert = Certificate::new(q, 0.01, 0.0, 1.0, 0.05).unwrap();
    assert!(!cert.valid);
    let window = Window::new(0.0, 0.05, 16).unwrap();
    let err = picard_solve(&prob, &window, &cert, &PicardOptions::default()).unwrap_err();
    assert!(matches!(err, Error::CertificateRefused { .. }));
    let opts = PicardOptions {
        override_certificate: true,
        ..Default::default()
    };
    let r = picard_solve(&prob, &window, &cert, &opts).unwrap();
    assert!(r.overridden);
    assert!(r.trace.converged);
}

#[test]
fn iteration_cap_reports_history() {
    let grid = make_grid(20.0, 64).unwrap();
    let u0 = Field::from_fn(grid, |x| (-x * x).exp());
    let prob = ProblemSpec::new(0.0, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(1e-3, SourceProfile::Zero), u0)
        .unwrap();
    let q = compute_q(prob.kernel()).unwrap();
    let cert = Certificate::new(q, 1e-3, 0.0, 1.0, 0.1).unwrap();
    let opts = PicardOptions {
        tolerance: Tolerance::Absolute(0.0),
        max_iter: 3,
        override_certificate: false,
    };
    match picard_solve(&prob, &Window::new(0.0, 0.1, 16).unwrap(), &cert, &opts) {
        Err(Error::NotConverged { iterations, distances, .. }) => {
            assert_eq!(iterations, 3);
            assert_eq!(distances.len(), 3);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn reference_integrator_is_second_order() {
    let grid = make_grid(PI, 16).unwrap();
    let u0 = Field::from_fn(grid, |x| 0.5 * x.cos() + 0.2 * (2.0 * x).sin());
    let prob = ProblemSpec::new(0.2, 1.0, KernelSpec::gaussian(1.0, 1.0).unwrap(), saturating(0.05, SourceProfile::Zero), u0)
        .unwrap();
    let window = Window::new(0.0, 0.5, 4).unwrap();
    let fine = etd_reference_solve(&prob, &window, 4096).unwrap();
    let err = |m: usize| {
        let r = etd_reference_solve(&prob, &window, m).unwrap();
        r.last().sub(fine.last()).unwrap().l2_norm()
    };
    let ratio = err(32) / err(64);
    assert!((ratio - 4.0).abs() < 0.5, "{ratio}");
}
