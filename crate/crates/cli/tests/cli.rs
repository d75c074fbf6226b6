use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

const CERTIFIED: &str = r#"
[grid]
L = 20.0
N = 64

[model]
a = 0.0
b = 1.0

[kernel]
type = "gaussian"
amplitude = 1.0
width = 1.0

[nonlinearity.reaction]
type = "saturating"
l = 0.001

[nonlinearity.source]
type = "gaussian"
amplitude = 0.2
width = 1.0

[initial]
type = "gaussian"
amplitude = 0.5
width = 1.0

[time]
horizon = 2.0

[solver]
frames = 16
"#;

fn run(dir: &Path, name: &str, text: &str, extra: &[&str]) -> (i32, PathBuf) {
    let cfg = dir.join(format!("{name}.toml"));
    fs::write(&cfg, text).unwrap();
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_nlrd6"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap();
    (status.code().unwrap(), out)
}

fn kv(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

#[test]
fn certified_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "ok", CERTIFIED, &[]);
    assert_eq!(code, 0);
    let cert = fs::read_to_string(out.join("certificate.txt")).unwrap();
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(kv(&summary, "exit_code").unwrap(), "0");
    let windows: usize = kv(&summary, "windows").unwrap().parse().unwrap();
    assert!(windows >= 2);
    let trace = fs::read_to_string(out.join("trace_w000.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "n,d_n,r_n,C");
    let c: f64 = kv(&cert, "C").unwrap().parse().unwrap();
    for line in trace.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 4);
        if !cols[2].is_empty() {
            assert!(cols[2].parse::<f64>().unwrap() <= 1.05 * c);
        }
    }
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert_eq!(norms.lines().next().unwrap(), "t,l2,h6_part,dudt_part");
    assert_eq!(norms.lines().count(), 1 + windows * 16 + 1);
    assert!(out.join("u_w000.bin").exists());
    let echo = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(echo.contains("safety = 0.9"));
}

#[test]
fn certificate_report_recomputes_c() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run(dir.path(), "cert", CERTIFIED, &[]);
    let cert = fs::read_to_string(out.join("certificate.txt")).unwrap();
    let get = |k: &str| kv(&cert, k).unwrap().parse::<f64>().unwrap();
    let (q, l, a, b, t) = (get("q"), get("l"), get("a"), get("b"), get("T"));
    let by_hand = q * l * (t * t * (2.0 * a * t).exp() * (1.0 + 2.0 * (a + b.abs() + 1.0).powi(2)) + 2.0).sqrt();
    assert!((by_hand - get("C")).abs() <= 1e-15);
    assert_eq!(kv(&cert, "valid").unwrap(), "true");
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = run(dir.path(), "a", CERTIFIED, &["--oracle"]);
    let (_, b) = run(dir.path(), "b", CERTIFIED, &["--oracle"]);
    for name in ["trace_w000.csv", "norms.csv", "decay.csv", "snapshot.csv", "u_w000.bin", "certificate.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let summary = fs::read_to_string(a.join("summary.txt")).unwrap();
    assert!(summary.contains("oracle_deviation"));
}

#[test]
fn snapshot_at_zero_is_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = run(dir.path(), "snap", CERTIFIED, &[]);
    let snap = fs::read_to_string(out.join("snapshot.csv")).unwrap();
    let mut rows = 0;
    for line in snap.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        if cols[0] != 0.0 {
            continue;
        }
        rows += 1;
        let want = 0.5 * (-cols[2] * cols[2]).exp();
        assert!((cols[3] - want).abs() < 1e-14, "{line}");
    }
    assert_eq!(rows, 64);
}

#[test]
fn decay_slope_of_single_mode() {
    let text = r#"
[grid]
L = 3.141592653589793
N = 32

[model]
a = 0.5
b = 1.0

[kernel]
type = "gaussian"
amplitude = 1.0
width = 1.0

[nonlinearity]
growth = 0.001
lipschitz = 0.001

[nonlinearity.reaction]
type = "linear_plus_source"
kappa = 0.0

[initial]
type = "mode"
amplitude = 1.0
p = 1.0

[time]
horizon = 1.0
"#;
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "decay", text, &[]);
    assert_eq!(code, 0);
    let decay = fs::read_to_string(out.join("decay.csv")).unwrap();
    let pts: Vec<(f64, f64)> = decay
        .lines()
        .skip(1)
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (t.parse().unwrap(), v.parse::<f64>().unwrap().ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (mt, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    assert!((slope - (0.5 - 1.0)).abs() < 1e-4, "{slope}");
}

#[test]
fn refusal_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let text = CERTIFIED.replace("l = 0.001", "l = 0.01");
    let (code, out) = run(dir.path(), "refused", &text, &[]);
    assert_eq!(code, 2);
    let cert = fs::read_to_string(out.join("certificate.txt")).unwrap();
    assert_eq!(kv(&cert, "valid").unwrap(), "false");
    assert_eq!(kv(&cert, "T_max").unwrap(), "none");
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("NoAdmissibleWindow") || summary.contains("no admissible window"), "{summary}");
}

#[test]
fn override_watermarks_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let text = CERTIFIED.replace("l = 0.001", "l = 0.01").replace("horizon = 2.0", "horizon = 0.05");
    let (code, out) = run(dir.path(), "forced", &text, &["--override-certificate"]);
    assert_eq!(code, 0);
    for name in ["certificate.txt", "summary.txt", "trace_w000.csv", "norms.csv", "decay.csv", "snapshot.csv", "config.toml"] {
        let body = fs::read_to_string(out.join(name)).unwrap();
        assert!(body.starts_with("# UNCERTIFIED"), "{name}");
    }
    assert!(out.join("u_w000.uncertified.bin").exists());
}

#[test]
fn assumption_violations_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = run(dir.path(), "neg_a", &CERTIFIED.replace("a = 0.0", "a = -1.0"), &[]);
    assert_eq!(code, 4);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("a >= 0"));
    assert!(out.join("certificate.txt").exists());

    let (code, out) = run(dir.path(), "zero_g", &CERTIFIED.replace("amplitude = 1.0\nwidth = 1.0\n\n[nonl", "amplitude = 0.0\nwidth = 1.0\n\n[nonl"), &[]);
    assert_eq!(code, 4);
    let cert = fs::read_to_string(out.join("certificate.txt")).unwrap();
    assert!(cert.contains("status = unavailable"));
    assert!(cert.contains("kernel"));
}

#[test]
fn unknown_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(dir.path(), "alpha", &CERTIFIED.replace("[time]\n", "[time]\nalpha = 2.0\n"), &[]);
    assert_eq!(code, 1);
}

#[test]
fn solver_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CERTIFIED}max_iter = 1\ntol_policy = \"absolute\"\ntol_fix = 1e-300\n");
    let (code, out) = run(dir.path(), "capped", &text, &[]);
    assert_eq!(code, 3);
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("solver failure"));
}
