//! CSV/JSON rendering and atomic file output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::Timeline;
use crate::error::{Error, Result};
use crate::fluid::{ProfilePoint, SweepResult};
use crate::measure::AtomicMeasure;
use crate::verify::CaseOutcome;

/// Float formatting with 17 significant digits, so values round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub const TIMELINE_HEADER: &str = "epoch,policy,event_kind,job_index,W,I,S,F,C_p,L_p,queue_length";

/// One row per event with the processes' values right after the epoch, and a
/// closing `horizon` row.
pub fn timeline_csv(tl: &Timeline) -> String {
    let mut out = String::from(TIMELINE_HEADER);
    out.push('\n');
    let epochs = tl.epochs();
    let row = |out: &mut String, t: f64, kind: &str, job: String| {
        let k = epochs.partition_point(|&e| e < t);
        let s = &tl.snapshots()[k];
        let _ = writeln!(
            out,
            "{},{},{kind},{job},{},{},{},{},{},{},{}",
            fmt_f64(t),
            tl.policy(),
            fmt_f64(s.workload),
            fmt_f64(s.idle),
            fmt_f64(s.service),
            fmt_f64(s.frontier),
            fmt_f64(s.current_residual),
            fmt_f64(s.left_edge),
            s.queue_length
        );
    };
    for ev in tl.events() {
        row(&mut out, ev.time, ev.kind.name(), tl.jobs()[ev.position].index.to_string());
    }
    row(&mut out, tl.horizon(), "horizon", String::new());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub policy: String,
    pub r: f64,
    pub replicate: u64,
    pub seed: u64,
    pub horizon: f64,
    pub traffic_intensity: Option<f64>,
    pub initial_jobs: usize,
    pub arrivals: usize,
    pub jobs_total: usize,
    pub completions: usize,
    /// Time average of the queue length over `[0, horizon]`.
    pub mean_queue_length: f64,
    pub final_queue_length: usize,
    pub final_workload: f64,
    pub final_idle: f64,
    pub frontier_jobs: usize,
}

impl SimulationSummary {
    pub fn new(tl: &Timeline, replicate: u64, traffic_intensity: Option<f64>) -> Self {
        let trace = tl.trace();
        let snaps = tl.snapshots();
        let mut area = 0.0;
        for w in snaps.windows(2) {
            area += w[0].queue_length as f64 * (w[1].time - w[0].time);
        }
        let last = snaps.last().expect("timeline has at least one epoch");
        let arrivals = trace.arrivals_by(tl.horizon());
        SimulationSummary {
            policy: tl.policy().name().into(),
            r: trace.r,
            replicate,
            seed: trace.seed,
            horizon: tl.horizon(),
            traffic_intensity,
            initial_jobs: trace.initial_count(),
            arrivals,
            jobs_total: trace.initial_count() + arrivals,
            completions: tl.jobs().iter().filter(|j| j.completion.is_finite()).count(),
            mean_queue_length: if tl.horizon() > 0.0 { area / tl.horizon() } else { last.queue_length as f64 },
            final_queue_length: last.queue_length,
            final_workload: last.workload,
            final_idle: last.idle,
            frontier_jobs: tl.frontier_records().len(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

pub const VERIFY_HEADER: &str = "seed,rho,distribution,check,pass,worst_violation,witness_time";

pub fn verify_csv(outcomes: &[CaseOutcome]) -> String {
    let mut out = String::from(VERIFY_HEADER);
    out.push('\n');
    for o in outcomes {
        for r in &o.reports {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                o.seed,
                o.rho,
                o.variant.name(),
                r.name,
                r.pass,
                fmt_f64(r.worst_violation),
                r.witness_time.map(fmt_f64).unwrap_or_default()
            );
        }
    }
    out
}

pub const SWEEP_HEADER: &str = "r,replicate,seed,h,delta,sup_prohorov,sup_below_frontier,low_mass,load_dev,wall_ms";

/// Sweep table; with `timings` off the wall-clock column is written as 0.
pub fn sweep_csv(results: &[SweepResult], timings: bool) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for x in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            x.r,
            x.replicate,
            x.seed,
            fmt_f64(x.h),
            fmt_f64(x.delta),
            fmt_f64(x.sup_prohorov),
            fmt_f64(x.sup_below_frontier),
            fmt_f64(x.low_mass),
            fmt_f64(x.load_dev),
            if timings { format!("{:.3}", x.wall_ms) } else { "0".into() }
        );
    }
    out
}

pub fn profile_csv(points: &[ProfilePoint]) -> String {
    let mut out = String::from("t,prohorov,below_frontier,low_mass,load\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.prohorov),
            fmt_f64(p.below_frontier),
            fmt_f64(p.low_mass),
            fmt_f64(p.load)
        );
    }
    out
}

pub fn measure_csv(m: &AtomicMeasure) -> String {
    let mut out = String::from("location,mass\n");
    for &(x, w) in m.atoms() {
        let _ = writeln!(out, "{},{}", fmt_f64(x), fmt_f64(w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::simulate_sjf;
    use crate::primitives::PrimitiveTrace;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, 123456.789, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        write_atomic(&path, b"a").unwrap();
        write_atomic(&path, b"b").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn timeline_rows() {
        let trace = PrimitiveTrace::new(vec![3.0, 1.0, 2.0], vec![], vec![]).unwrap();
        let tl = simulate_sjf(&trace, 8.0).unwrap();
        let csv = timeline_csv(&tl);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TIMELINE_HEADER);
        // 3 initial + 3 starts + 3 completions + horizon
        assert_eq!(lines.len(), 1 + 10);
        assert!(lines.last().unwrap().contains(",horizon,,"));
        let s = SimulationSummary::new(&tl, 0, None);
        assert_eq!(s.completions, 3);
        assert_eq!(s.mean_queue_length, (3.0 * 1.0 + 2.0 * 2.0 + 1.0 * 3.0) / 8.0);
    }
}
