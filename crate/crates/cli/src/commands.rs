use std::fmt;
use std::fs;
use std::io::Write;
use std::ops::ControlFlow;
use std::thread;

use ternary_consensus::{
    check_core_connected, compute_metrics, run_metropolis, run_with, theorem_bound, BoundInputs, BoundTerms, CoreCheck,
    RecordLevel,
};

use crate::config::ExperimentConfig;
use crate::output::{float, metrics_line, trace_lines, Partial, METRICS_HEADER, SWEEP_HEADER, TRACE_HEADER};
use crate::CliError;

/// What `run` prints as its summary line.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub rounds: u64,
    pub final_err: f64,
    pub final_v2: f64,
    pub stop_err: Option<f64>,
    pub first_hit: Option<u64>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rounds={} final_err_max={:.6e} final_V2={:.6e} ",
            self.rounds, self.final_err, self.final_v2
        )?;
        match (self.stop_err, self.first_hit) {
            (None, _) => write!(f, "first_hit=n/a (no stop_err)"),
            (Some(e), Some(t)) => write!(f, "first_hit(err_max<={e})={t}"),
            (Some(e), None) => write!(f, "first_hit(err_max<={e})=not reached"),
        }
    }
}

/// Runs one experiment and writes `metrics.csv` (and `trace.csv` for a
/// full trace) into the output directory. With `baseline` the real-valued
/// Metropolis iteration runs instead of the protocol.
pub fn cmd_run(cfg: &ExperimentConfig, baseline: bool) -> Result<RunReport, CliError> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let stride = cfg.output.stride.unwrap_or(1);
    let mut partial = Partial::new();
    let mut metrics = partial.create(&dir.join("metrics.csv"), METRICS_HEADER)?;

    let report = if baseline {
        let mut rows = run_metropolis(&cfg.baseline()?)?;
        let x0 = cfg.init_spec()?.values(cfg.graph.n)?;
        let avg0 = x0.iter().sum::<f64>() / x0.len() as f64;
        let initial = compute_metrics(&x0, avg0)?;
        let hit = |err: f64| cfg.run.stop_err.is_some_and(|e| err <= e);
        let first_hit = if hit(initial.err_max) {
            rows.clear();
            Some(0)
        } else {
            let k = rows.iter().position(|r| hit(r.err_max));
            if let Some(k) = k {
                rows.truncate(k + 1);
            }
            k.map(|k| rows[k].t)
        };
        for (k, r) in rows.iter().enumerate() {
            if r.t % stride == 0 || k + 1 == rows.len() {
                metrics_line(&mut metrics, r)?;
            }
        }
        let (final_err, final_v2) = rows.last().map_or((initial.err_max, initial.v2), |r| (r.err_max, r.v2));
        RunReport {
            rounds: rows.len() as u64,
            final_err,
            final_v2,
            stop_err: cfg.run.stop_err,
            first_hit,
        }
    } else {
        let sim = cfg.simulation()?;
        let mut trace = match sim.record_level {
            RecordLevel::FullTrace => Some(partial.create(&dir.join("trace.csv"), TRACE_HEADER)?),
            RecordLevel::MetricsOnly => None,
        };
        let mut io_error = None;
        let summary = run_with(&sim, |view| {
            if view.metrics.t % stride != 0 {
                return ControlFlow::Continue(());
            }
            let mut write = || -> std::io::Result<()> {
                metrics_line(&mut metrics, view.metrics)?;
                if let Some(w) = trace.as_mut() {
                    trace_lines(w, view.metrics.t, &view.world.values())?;
                }
                Ok(())
            };
            match write() {
                Ok(()) => ControlFlow::Continue(()),
                Err(e) => {
                    io_error = Some(e);
                    ControlFlow::Break(())
                }
            }
        })?;
        if let Some(e) = io_error {
            return Err(e.into());
        }
        if summary.rounds > 0 && summary.rounds % stride != 0 {
            metrics_line(&mut metrics, &summary.last)?;
            if let Some(w) = trace.as_mut() {
                trace_lines(w, summary.rounds, &summary.final_x)?;
            }
        }
        if let Some(w) = trace.as_mut() {
            w.flush()?;
        }
        RunReport {
            rounds: summary.rounds,
            final_err: summary.last.err_max,
            final_v2: summary.last.v2,
            stop_err: cfg.run.stop_err,
            first_hit: summary.first_hit,
        }
    };
    metrics.flush()?;
    drop(metrics);
    partial.commit();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundArgs {
    pub n: usize,
    pub block: usize,
    pub d_sup: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub w0: f64,
    pub v20: f64,
    pub xinf: f64,
}

pub fn cmd_bound(args: &BoundArgs) -> Result<BoundTerms, CliError> {
    let inputs = BoundInputs {
        n: args.n,
        block: args.block,
        d_sup: args.d_sup,
        alpha: args.alpha,
        beta: args.beta,
        epsilon: args.eps,
        w0: args.w0,
        v20: args.v20,
        x_inf0: args.xinf,
    };
    theorem_bound(&inputs).map_err(|e| CliError::Config(e.to_string()))
}

/// Generates `window` rounds of the configured sequence and checks them for
/// core-connectivity with the configured block length.
pub fn cmd_check_core(cfg: &ExperimentConfig, window: usize) -> Result<CoreCheck, CliError> {
    if window < cfg.graph.block {
        return Err(CliError::Config(format!(
            "--window {window} is shorter than graph.B = {}",
            cfg.graph.block
        )));
    }
    let snapshots = cfg.sequence()?.window(window)?;
    Ok(check_core_connected(&snapshots, cfg.graph.block)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    /// First round with `err_max ≤ stop_err`; `None` if `t_max` ran out.
    pub rounds_to_err: Option<u64>,
    pub final_err: f64,
}

fn sweep_one(cfg: &ExperimentConfig, n: usize, stop_err: f64) -> Result<SweepRow, CliError> {
    let mut cfg = cfg.with_n(n)?;
    cfg.run.stop_err = Some(stop_err);
    let mut sim = cfg.simulation()?;
    sim.record_level = RecordLevel::MetricsOnly;
    let summary = run_with(&sim, |_| ControlFlow::Continue(()))?;
    Ok(SweepRow {
        n,
        rounds_to_err: summary.first_hit,
        final_err: summary.last.err_max,
    })
}

/// Runs the experiment once per node count (concurrently) and writes
/// `sweep.csv` in ascending `n`.
pub fn cmd_sweep(cfg: &ExperimentConfig, n_list: &[usize], stop_err: f64) -> Result<Vec<SweepRow>, CliError> {
    if n_list.is_empty() {
        return Err(CliError::Config("--n-list is empty".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!(
            "--n-list: node counts must be at least 2, got {n}"
        )));
    }
    if !(stop_err.is_finite() && stop_err >= 0.0) {
        return Err(CliError::Config(format!(
            "--stop-err must be a finite nonnegative number, got {stop_err}"
        )));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();

    let results: Vec<Result<SweepRow, CliError>> = thread::scope(|s| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| s.spawn(move || sweep_one(cfg, n, stop_err)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let mut partial = Partial::new();
    let mut w = partial.create(&dir.join("sweep.csv"), SWEEP_HEADER)?;
    for r in &rows {
        let rounds = r.rounds_to_err.map_or_else(|| "NA".to_string(), |t| t.to_string());
        writeln!(w, "{},{rounds},{}", r.n, float(r.final_err))?;
    }
    w.flush()?;
    drop(w);
    partial.commit();
    Ok(rows)
}
