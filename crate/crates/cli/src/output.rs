use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ternary_consensus::MetricsRow;

pub const METRICS_HEADER: &str = "t,M,m,W,V2,err_max,active_edges,nonzero_msgs";
pub const TRACE_HEADER: &str = "t,node,x";
pub const SWEEP_HEADER: &str = "n,rounds_to_err,final_err";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn metrics_line(w: &mut impl Write, r: &MetricsRow) -> io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        r.t,
        float(r.max),
        float(r.min),
        float(r.spread),
        float(r.v2),
        float(r.err_max),
        r.active_edges,
        r.nonzero_msgs
    )
}

pub fn trace_lines(w: &mut impl Write, t: u64, x: &[f64]) -> io::Result<()> {
    for (i, v) in x.iter().enumerate() {
        writeln!(w, "{t},{i},{}", float(*v))?;
    }
    Ok(())
}

/// Files created during one command; removed on drop unless committed.
pub struct Partial {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Partial {
    pub fn new() -> Self {
        Partial {
            paths: Vec::new(),
            committed: false,
        }
    }

    pub fn create(&mut self, path: &Path, header: &str) -> io::Result<BufWriter<File>> {
        let mut w = BufWriter::new(File::create(path)?);
        self.paths.push(path.to_path_buf());
        writeln!(w, "{header}")?;
        Ok(w)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Partial {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.paths {
                let _ = fs::remove_file(p);
            }
        }
    }
}
