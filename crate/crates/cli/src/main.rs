use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use nlrd6_cli::{run, ExitStatus, RunConfig};

/// Certified solver for the sixth-order nonlocal reaction-diffusion-advection equation.
#[derive(Parser, Debug)]
#[command(name = "nlrd6", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the reference integrator on every window.
    #[arg(long)]
    oracle: bool,
    /// Iterate even when the contraction certificate fails; outputs are watermarked.
    #[arg(long)]
    override_certificate: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            let status = ExitStatus::from(&e);
            eprintln!("nlrd6: {e}");
            if let Some(out) = &args.out {
                let body = format!("status = unavailable\nreason = {e}\n");
                let summary = format!("exit_code = {}\nstatus = {}\nerror = {e}\n", status.code(), status.label());
                if fs::create_dir_all(out).is_ok() {
                    let _ = fs::write(out.join("certificate.txt"), body);
                    let _ = fs::write(out.join("summary.txt"), summary);
                }
            }
            return ExitCode::from(status.code() as u8);
        }
    };
    cfg.flags.run_oracle |= args.oracle;
    cfg.flags.override_certificate |= args.override_certificate;
    let out = args.out.unwrap_or_else(|| cfg.output.dir.clone());
    let outcome = run(&cfg, &out);
    if let Some(e) = &outcome.error {
        eprintln!("nlrd6: {} ({})", e, outcome.status.label());
    }
    ExitCode::from(outcome.status.code() as u8)
}
