//! CSV and binary outputs of a completed run.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use nlrd6_core::dump::write_dump;
use nlrd6_core::solver::march::{MarchReport, RefinementReport};
use nlrd6_core::SpectralGrid;

pub const TRACE_HEADER: &str = "n,d_n,r_n,C";
pub const NORMS_HEADER: &str = "t,l2,h6_part,dudt_part";
pub const DECAY_HEADER: &str = "t,l2";
pub const SNAPSHOT_HEADER: &str = "frame,t,x,re_u";

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub march: MarchReport,
    pub refinement: Option<RefinementReport>,
    pub grid: Arc<SpectralGrid>,
    pub snapshot_frames: Vec<i64>,
    /// Set when the certificate was overridden; prefixed to every text output.
    pub watermark: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotData {
    Decay,
    Trace,
    Snapshot,
}

impl FromStr for PlotData {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decay" => Ok(PlotData::Decay),
            "trace" => Ok(PlotData::Trace),
            "snapshot" => Ok(PlotData::Snapshot),
            other => Err(format!("unknown plot selector '{other}' (expected decay, trace or snapshot)")),
        }
    }
}

impl RunArtifacts {
    fn text(&self, body: String) -> String {
        match &self.watermark {
            Some(w) => format!("# {w}\n{body}"),
            None => body,
        }
    }

    /// Stitched `(t, frame, du/dt frame)` triples, shared window endpoints once.
    fn frames(&self) -> Vec<(f64, &nlrd6_core::Field, &nlrd6_core::Field)> {
        let mut out = Vec::new();
        for (i, w) in self.march.windows.iter().enumerate() {
            let skip = usize::from(i > 0);
            for j in skip..w.field.times().len() {
                out.push((w.field.times()[j], w.field.frame(j), w.du_dt.frame(j)));
            }
        }
        out
    }

    fn resolve_frame(&self, index: i64, count: usize) -> Option<usize> {
        let idx = if index < 0 { count as i64 + index } else { index };
        (0..count as i64).contains(&idx).then_some(idx as usize)
    }
}

fn trace_csv(art: &RunArtifacts, window: usize) -> String {
    let w = &art.march.windows[window];
    let mut s = format!("{TRACE_HEADER}\n");
    for (n, d) in w.trace.distances.iter().enumerate() {
        let r = w
            .trace
            .ratios
            .iter()
            .find(|r| r.0 == n)
            .map_or(String::new(), |r| format!("{:e}", r.1));
        let _ = writeln!(s, "{n},{d:e},{r},{:e}", w.certificate.constant);
    }
    s
}

/// Write one plot-data family; returns the files written.
pub fn emit_plot_data(art: &RunArtifacts, which: PlotData) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match which {
        PlotData::Trace => {
            for i in 0..art.march.windows.len() {
                let path = art.out_dir.join(format!("trace_w{i:03}.csv"));
                fs::write(&path, art.text(trace_csv(art, i)))?;
                written.push(path);
            }
        }
        PlotData::Decay => {
            let mut s = format!("{DECAY_HEADER}\n");
            for (t, u, _) in art.frames() {
                let _ = writeln!(s, "{t:e},{:e}", u.l2_norm());
            }
            let path = art.out_dir.join("decay.csv");
            fs::write(&path, art.text(s))?;
            written.push(path);
        }
        PlotData::Snapshot => {
            let frames = art.frames();
            let mut s = format!("{SNAPSHOT_HEADER}\n");
            for &k in &art.snapshot_frames {
                let Some(j) = art.resolve_frame(k, frames.len()) else {
                    return Err(io::Error::new(
                        io::ErrorKind::InvalidInput,
                        format!("snapshot frame {k} out of range (0..{})", frames.len()),
                    ));
                };
                let (t, u, _) = frames[j];
                let phys = u.to_physical();
                for (i, v) in phys.values().iter().enumerate() {
                    let _ = writeln!(s, "{j},{t:e},{:e},{:e}", art.grid.x(i), v.re);
                }
            }
            let path = art.out_dir.join("snapshot.csv");
            fs::write(&path, art.text(s))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn norms_csv(art: &RunArtifacts) -> String {
    let mut s = format!("{NORMS_HEADER}\n");
    for (t, u, du) in art.frames() {
        let d6 = u.spectral_derivative(6).expect("order 6 is supported").l2_norm();
        let _ = writeln!(s, "{t:e},{:e},{d6:e},{:e}", u.l2_norm(), du.l2_norm());
    }
    s
}

/// Every output of a finished march.
pub fn write_all(art: &RunArtifacts) -> io::Result<()> {
    for which in [PlotData::Trace, PlotData::Decay, PlotData::Snapshot] {
        emit_plot_data(art, which)?;
    }
    fs::write(art.out_dir.join("norms.csv"), art.text(norms_csv(art)))?;
    let suffix = if art.watermark.is_some() { ".uncertified" } else { "" };
    for (i, w) in art.march.windows.iter().enumerate() {
        let path = art.out_dir.join(format!("u_w{i:03}{suffix}.bin"));
        let mut out = BufWriter::new(File::create(path)?);
        write_dump(&mut out, &w.field).map_err(|e| io::Error::other(e.to_string()))?;
    }
    Ok(())
}
