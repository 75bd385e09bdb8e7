//! Checkers for the pathwise identities that tie SJF, SRPT and the
//! policy-free workload together.
//!
//! Every checker evaluates its identity at the timeline's event epochs (and,
//! where stated, at extra points), records the largest violation and the
//! first time it exceeded [`TOLERANCE`], and never panics on a failing path.

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_with, workload_processes, Mutation, Policy, Timeline, WorkloadProcess};
use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, Integrand, IntegrandSpec, Window};
use crate::par::{self, Execution};
use crate::primitives::{sample_trace, DistributionSpec, ModelConfig, PrimitiveTrace};

/// Absolute tolerance on time and work quantities.
pub const TOLERANCE: f64 = 1e-9;

/// Interior sample points per inter-epoch interval in the workload check.
pub const INTERIOR_POINTS: usize = 10;

/// Default number of grid cells on `[0, horizon]` for the dynamic inequality.
pub const DEFAULT_GRID_CELLS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub worst_violation: f64,
    /// First time the violation exceeded the tolerance.
    pub witness_time: Option<f64>,
    pub epochs_checked: usize,
}

struct Tracker {
    name: String,
    worst: f64,
    witness: Option<f64>,
    checked: usize,
}

impl Tracker {
    fn new(name: impl Into<String>) -> Self {
        Tracker { name: name.into(), worst: 0.0, witness: None, checked: 0 }
    }

    fn observe(&mut self, t: f64, violation: f64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        self.checked += 1;
        if v > self.worst {
            self.worst = v;
        }
        if v > TOLERANCE && self.witness.is_none() {
            self.witness = Some(t);
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            pass: self.worst <= TOLERANCE,
            name: self.name,
            worst_violation: self.worst,
            witness_time: self.witness,
            epochs_checked: self.checked,
        }
    }
}

fn require(tl: &Timeline, expected: Policy) -> Result<()> {
    if tl.policy() == expected {
        Ok(())
    } else {
        Err(Error::WrongPolicy { expected: expected.name(), got: tl.policy().name() })
    }
}

fn chi_at_least(z: &AtomicMeasure, level: f64) -> f64 {
    z.integrate(&IntegrandSpec::new(Integrand::Chi, Window::at_least(level)))
}

fn chi_below(z: &AtomicMeasure, level: f64) -> f64 {
    z.integrate(&IntegrandSpec::new(Integrand::Chi, Window::closed_open(0.0, level)))
}

/// Merged, sorted, distinct epochs of several timelines.
fn merged_epochs(timelines: &[&Timeline]) -> Vec<f64> {
    let mut all: Vec<f64> = timelines.iter().flat_map(|tl| tl.epochs().iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

/// Cumulative service equals elapsed time minus idle time, and the residuals
/// sum to the workload, both against the reflection computed from the trace.
/// Any policy is accepted; all are work conserving.
pub fn check_workload_identity(tl: &Timeline) -> CheckReport {
    let oracle = workload_processes(tl.trace(), tl.horizon());
    let mut tr = Tracker::new(format!("workload_identity_{}", tl.policy()));
    let epochs = tl.epochs();
    for (i, &e) in epochs.iter().enumerate() {
        let snap = &tl.snapshots()[i];
        let (_, w, idle) = oracle.at(e);
        tr.observe(e, (snap.workload - w).abs().max((snap.idle - idle).abs()));
        let next = epochs.get(i + 1).copied();
        let mut points = vec![e];
        if let Some(n) = next {
            points.extend((1..=INTERIOR_POINTS).map(|k| e + (n - e) * k as f64 / (INTERIOR_POINTS + 1) as f64));
        }
        for t in points {
            tr.observe(t, workload_violation(tl, &oracle, t));
        }
    }
    tr.finish()
}

fn workload_violation(tl: &Timeline, oracle: &WorkloadProcess, t: f64) -> f64 {
    let (_, w, idle) = oracle.at(t);
    let (Ok(s), Ok(res)) = (tl.cumulative_service(t), tl.residuals_at(t)) else {
        return f64::INFINITY;
    };
    let w_sum: f64 = res.iter().sum();
    (s - (t - idle)).abs().max((w_sum - w).abs())
}

/// Work at or above the frontier at frontier start times, and its evolution
/// between them, for either SJF (`F`) or SRPT (`F_p`).
fn frontier_mass(tl: &Timeline, tr: &mut Tracker) {
    let oracle = workload_processes(tl.trace(), tl.horizon());
    let trace = tl.trace();
    let records = tl.frontier_records();
    let epochs = tl.epochs();
    for (k, rec) in records.iter().enumerate() {
        let tau = rec.time;
        let level = tl.frontier_at(tau).unwrap_or(f64::NAN);
        let w_tau = oracle.workload(tau);
        let z = tl.state_descriptor(tau).unwrap_or_default();
        tr.observe(tau, (chi_at_least(&z, level) - w_tau).abs());

        // (tau_k, tau_{k+1}], or (tau_last, horizon] for the final record:
        // the identity holds up to the next frontier start whether or not
        // one happens after the horizon.
        let end = records.get(k + 1).map_or(tl.horizon(), |r| r.time);
        let mut arrived = trace.arrivals_by(tau);
        let mut inflow = 0.0;
        let first = epochs.partition_point(|&e| e <= tau);
        for &t in epochs[first..].iter().take_while(|&&e| e <= end) {
            let upto = trace.arrivals_by(t);
            while arrived < upto {
                let w = trace.service_sizes[arrived];
                if w >= level {
                    inflow += w;
                }
                arrived += 1;
            }
            let z = tl.state_descriptor(t).unwrap_or_default();
            tr.observe(t, (chi_at_least(&z, level) - (w_tau - level + inflow)).abs());
        }
    }
}

/// Work at or above the SJF frontier.
pub fn check_mass_at_frontier_sjf(tl: &Timeline) -> Result<CheckReport> {
    require(tl, Policy::Sjf)?;
    let mut tr = Tracker::new("mass_at_frontier_sjf");
    frontier_mass(tl, &mut tr);
    Ok(tr.finish())
}

/// Work at or above the SRPT frontier, plus: the current residual equals the
/// frontier at every frontier start, and conversely an epoch where they are
/// equal and positive is a frontier start. The converse is checked at epochs
/// only: between epochs the current residual strictly decreases while the
/// frontier is flat, so no new equality can appear there.
pub fn check_mass_at_frontier_srpt(tl: &Timeline) -> Result<CheckReport> {
    require(tl, Policy::Srpt)?;
    let mut tr = Tracker::new("mass_at_frontier_srpt");
    frontier_mass(tl, &mut tr);
    let records = tl.frontier_records();
    for rec in records {
        let snap = tl.snapshot_at(rec.time)?;
        tr.observe(rec.time, (snap.current_residual - snap.frontier).abs());
    }
    for snap in tl.snapshots() {
        if snap.current_residual > 0.0 && snap.current_residual == snap.frontier {
            let listed = records.iter().any(|r| r.time == snap.time);
            tr.observe(snap.time, if listed { 0.0 } else { snap.current_residual });
        }
    }
    Ok(tr.finish())
}

/// The SRPT server always works on a job with the smallest residual: at every
/// epoch before the horizon with jobs present, the served residual equals the
/// left edge, and no mass sits strictly below it.
pub fn check_srpt_left_edge(tl: &Timeline) -> Result<CheckReport> {
    require(tl, Policy::Srpt)?;
    let mut tr = Tracker::new("srpt_left_edge");
    for snap in tl.snapshots() {
        if snap.time >= tl.horizon() || snap.queue_length == 0 {
            continue;
        }
        let served = match snap.in_service_residual {
            Some(r) => (r - snap.current_residual).abs(),
            None => f64::INFINITY,
        };
        let z = tl.state_descriptor(snap.time)?;
        let below = z.integrate(&IntegrandSpec::new(Integrand::One, Window::closed_open(0.0, snap.current_residual)));
        tr.observe(snap.time, served.max(below));
    }
    Ok(tr.finish())
}

/// Frontier start times, frontier values and frontier jobs coincide under SJF
/// and SRPT; the frontiers agree at all merged epochs; and the two
/// descriptors restricted to `[F(t), inf)` have equal moments of order 0, 1
/// and 2.
pub fn check_coupling(sjf: &Timeline, srpt: &Timeline) -> Result<CheckReport> {
    require(sjf, Policy::Sjf)?;
    require(srpt, Policy::Srpt)?;
    if sjf.trace() != srpt.trace() || sjf.horizon() != srpt.horizon() {
        return Err(Error::TraceMismatch);
    }
    let mut tr = Tracker::new("coupling");
    let (a, b) = (sjf.frontier_records(), srpt.frontier_records());
    for i in 0..a.len().max(b.len()) {
        match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => {
                let mut v = (x.time - y.time).abs().max((x.value - y.value).abs());
                if x.index != y.index {
                    v = f64::INFINITY;
                }
                tr.observe(x.time.min(y.time), v);
            }
            (Some(x), None) | (None, Some(x)) => tr.observe(x.time, f64::INFINITY),
            (None, None) => unreachable!(),
        }
    }
    for t in merged_epochs(&[sjf, srpt]) {
        let f = sjf.frontier_at(t)?;
        let fp = srpt.frontier_at(t)?;
        let z = sjf.state_descriptor(t)?;
        let zp = srpt.state_descriptor(t)?;
        let mut v = (f - fp).abs();
        for g in [Integrand::One, Integrand::Chi, Integrand::ChiSquared] {
            let spec = IntegrandSpec::new(g, Window::at_least(f));
            v = v.max((z.integrate(&spec) - zp.integrate(&spec)).abs());
        }
        tr.observe(t, v);
    }
    Ok(tr.finish())
}

/// Work below the frontier decreases at most at unit rate:
/// `G(s) <= G(t) + t - s` for `s < t`, i.e. `G(u) + u` is nondecreasing over
/// epochs and the grid `{0, h, 2h, ...}`.
pub fn check_dynamic_inequality(srpt: &Timeline, h: f64) -> Result<CheckReport> {
    require(srpt, Policy::Srpt)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidConfig(format!("grid step must be > 0, got {h}")));
    }
    let horizon = srpt.horizon();
    let mut points: Vec<f64> = srpt.epochs().to_vec();
    let cells = (horizon / h).floor() as usize;
    points.extend((0..=cells).map(|k| k as f64 * h).filter(|&t| t <= horizon));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut tr = Tracker::new("dynamic_inequality");
    let mut running = f64::NEG_INFINITY;
    for t in points {
        let z = srpt.state_descriptor(t)?;
        let value = chi_below(&z, srpt.frontier_at(t)?) + t;
        running = running.max(value);
        tr.observe(t, running - value);
    }
    Ok(tr.finish())
}

/// Queue length under SRPT never exceeds SJF or FIFO.
pub fn check_srpt_optimality(srpt: &Timeline, sjf: &Timeline, fifo: &Timeline) -> Result<CheckReport> {
    require(srpt, Policy::Srpt)?;
    require(sjf, Policy::Sjf)?;
    require(fifo, Policy::Fifo)?;
    if srpt.trace() != sjf.trace() || srpt.trace() != fifo.trace() {
        return Err(Error::TraceMismatch);
    }
    let mut tr = Tracker::new("srpt_optimality");
    for t in merged_epochs(&[srpt, sjf, fifo]) {
        let q = srpt.queue_length_at(t)? as i64;
        let worst = (q - sjf.queue_length_at(t)? as i64).max(q - fifo.queue_length_at(t)? as i64);
        tr.observe(t, worst.max(0) as f64);
    }
    Ok(tr.finish())
}

/// Simulate all three policies on `trace` and run every checker.
#[doc(hidden)]
pub fn run_suite_with(trace: &PrimitiveTrace, horizon: f64, grid_step: f64, mutation: Mutation) -> Result<Vec<CheckReport>> {
    let sjf = simulate_with(trace, horizon, Policy::Sjf, mutation)?;
    let srpt = simulate_with(trace, horizon, Policy::Srpt, mutation)?;
    let fifo = simulate_with(trace, horizon, Policy::Fifo, Mutation::None)?;
    Ok(vec![
        check_workload_identity(&sjf),
        check_workload_identity(&srpt),
        check_workload_identity(&fifo),
        check_mass_at_frontier_sjf(&sjf)?,
        check_mass_at_frontier_srpt(&srpt)?,
        check_srpt_left_edge(&srpt)?,
        check_coupling(&sjf, &srpt)?,
        check_dynamic_inequality(&srpt, grid_step)?,
        check_srpt_optimality(&srpt, &sjf, &fifo)?,
    ])
}

/// Run every checker on `trace` with the default grid (`horizon / 200`).
pub fn run_suite(trace: &PrimitiveTrace, horizon: f64) -> Result<Vec<CheckReport>> {
    let h = if horizon > 0.0 { horizon / DEFAULT_GRID_CELLS as f64 } else { 1.0 };
    run_suite_with(trace, horizon, h, Mutation::None)
}

/// Service-time families of the verification matrix, each with mean 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Exponential,
    Deterministic,
    Uniform,
    Pareto,
    DiscreteAtoms,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Exponential,
        Variant::Deterministic,
        Variant::Uniform,
        Variant::Pareto,
        Variant::DiscreteAtoms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Exponential => "exponential",
            Variant::Deterministic => "deterministic",
            Variant::Uniform => "uniform",
            Variant::Pareto => "pareto",
            Variant::DiscreteAtoms => "discrete_atoms",
        }
    }

    pub fn service_law(self) -> DistributionSpec {
        match self {
            Variant::Exponential => DistributionSpec::Exponential { rate: 1.0 },
            Variant::Deterministic => DistributionSpec::Deterministic { value: 1.0 },
            Variant::Uniform => DistributionSpec::Uniform { lo: 0.5, hi: 1.5 },
            Variant::Pareto => DistributionSpec::Pareto { shape: 2.5, scale: 0.6 },
            Variant::DiscreteAtoms => DistributionSpec::DiscreteAtoms { atoms: vec![(0.5, 0.5), (1.5, 0.5)] },
        }
    }

    /// Model with traffic intensity `rho`: Poisson arrivals at rate `rho`
    /// (evenly spaced for the deterministic family), initial sizes from the
    /// service law, and a horizon holding `mean_arrivals` arrivals on average.
    pub fn model(self, rho: f64, seed: u64, initial_density: f64, mean_arrivals: f64) -> ModelConfig {
        let service = self.service_law();
        let interarrival = match self {
            Variant::Deterministic => DistributionSpec::Deterministic { value: 1.0 / rho },
            _ => DistributionSpec::Exponential { rate: rho },
        };
        ModelConfig {
            interarrival,
            initial_size: service.clone(),
            service,
            initial_density,
            horizon: mean_arrivals / rho,
            base_seed: seed,
            first_gap: None,
        }
    }
}

/// The seed x traffic-intensity x family matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatrixParams {
    pub rho: Vec<f64>,
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
    /// Expected arrivals per trace; sets the horizon.
    pub mean_arrivals: f64,
    /// Initial-job densities, cycled over seeds.
    pub initial_density: Vec<f64>,
    /// Grid cells for the dynamic inequality.
    pub grid_cells: usize,
}

impl Default for MatrixParams {
    fn default() -> Self {
        MatrixParams {
            rho: vec![0.5, 0.9, 1.0, 1.5],
            seeds: (0..50).collect(),
            variants: Variant::ALL.to_vec(),
            mean_arrivals: 60.0,
            initial_density: vec![0.0, 8.0],
            grid_cells: DEFAULT_GRID_CELLS,
        }
    }
}

impl MatrixParams {
    /// Traces used to show a mutation is caught: two-point service sizes so
    /// that size ties occur, some initial backlog, moderate load.
    pub fn mutant_suite(traces: u64) -> Self {
        MatrixParams {
            rho: vec![0.9],
            seeds: (0..traces).collect(),
            variants: vec![Variant::DiscreteAtoms],
            mean_arrivals: 60.0,
            initial_density: vec![4.0],
            grid_cells: DEFAULT_GRID_CELLS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidConfig(format!("rho must be > 0, got {r}")));
        }
        if !(self.mean_arrivals.is_finite() && self.mean_arrivals > 0.0) {
            return Err(Error::InvalidConfig("mean_arrivals must be > 0".into()));
        }
        if self.initial_density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidConfig("initial_density entries must be >= 0".into()));
        }
        if self.grid_cells == 0 {
            return Err(Error::InvalidConfig("grid_cells must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub seed: u64,
    pub rho: f64,
    pub variant: Variant,
    /// Events in the SRPT timeline.
    pub events: usize,
    pub reports: Vec<CheckReport>,
}

impl CaseOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Run the full checker suite over the matrix, one trace per cell.
pub fn run_matrix(params: &MatrixParams, mutation: Mutation, exec: Execution) -> Result<Vec<CaseOutcome>> {
    params.validate()?;
    let mut cases = Vec::new();
    for &variant in &params.variants {
        for &rho in &params.rho {
            for (i, &seed) in params.seeds.iter().enumerate() {
                let density = if params.initial_density.is_empty() {
                    0.0
                } else {
                    params.initial_density[i % params.initial_density.len()]
                };
                cases.push((variant, rho, seed, density));
            }
        }
    }
    par::map(&cases, exec, |&(variant, rho, seed, density)| {
        let model = variant.model(rho, seed, density, params.mean_arrivals);
        let trace = sample_trace(&model, 1.0, 0)?;
        let h = model.horizon / params.grid_cells as f64;
        let reports = run_suite_with(&trace, model.horizon, h, mutation)?;
        let events = crate::dynamics::simulate(&trace, model.horizon, Policy::Srpt)?.events().len();
        Ok(CaseOutcome { seed, rho, variant, events, reports })
    })
    .into_iter()
    .collect()
}

/// Number of traces on which at least one checker fails.
pub fn mutant_detections(outcomes: &[CaseOutcome]) -> usize {
    outcomes.iter().filter(|o| !o.pass()).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate_fifo, simulate_sjf, simulate_srpt};

    fn trace(initial: &[f64], arrivals: &[(f64, f64)]) -> PrimitiveTrace {
        PrimitiveTrace::new(
            initial.to_vec(),
            arrivals.iter().map(|a| a.0).collect(),
            arrivals.iter().map(|a| a.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_trace_passes() {
        let reports = run_suite(&trace(&[], &[]), 5.0).unwrap();
        assert!(reports.iter().all(|r| r.pass && r.worst_violation == 0.0));
    }

    #[test]
    fn hand_examples_pass() {
        for t in [trace(&[3.0, 1.0, 2.0], &[]), trace(&[5.0], &[(1.0, 1.0)]), trace(&[2.0], &[])] {
            for r in run_suite(&t, 10.0).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn frontier_mass_hand_value() {
        // At the second frontier start (t = 1) jobs of size >= 2 hold 2 + 3.
        let tl = simulate_sjf(&trace(&[3.0, 1.0, 2.0], &[]), 10.0).unwrap();
        let z = tl.state_descriptor(1.0).unwrap();
        assert_eq!(chi_at_least(&z, tl.frontier_at(1.0).unwrap()), 5.0);
        assert_eq!(workload_processes(tl.trace(), 10.0).workload(1.0), 5.0);
    }

    #[test]
    fn wrong_policy_and_mismatch() {
        let t = trace(&[1.0], &[]);
        let sjf = simulate_sjf(&t, 3.0).unwrap();
        let srpt = simulate_srpt(&t, 3.0).unwrap();
        assert!(matches!(check_mass_at_frontier_srpt(&sjf), Err(Error::WrongPolicy { .. })));
        let other = simulate_srpt(&trace(&[2.0], &[]), 3.0).unwrap();
        assert!(matches!(check_coupling(&sjf, &other), Err(Error::TraceMismatch)));
        assert!(check_coupling(&sjf, &srpt).unwrap().pass);
        let fifo = simulate_fifo(&t, 3.0).unwrap();
        assert!(check_srpt_optimality(&srpt, &sjf, &fifo).unwrap().pass);
    }

    #[test]
    fn mutants_are_flagged() {
        let ties = trace(&[1.0, 1.0], &[]);
        let bad = run_suite_with(&ties, 5.0, 0.5, Mutation::SjfMaxIndexTieBreak).unwrap();
        assert!(bad.iter().any(|r| r.name == "coupling" && !r.pass));

        let preempt = trace(&[5.0], &[(1.0, 1.0)]);
        let bad = run_suite_with(&preempt, 10.0, 0.5, Mutation::SrptNonPreemptive).unwrap();
        let failed: Vec<&str> = bad.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        assert!(failed.contains(&"srpt_left_edge"), "{failed:?}");
    }

    #[test]
    fn small_matrix_passes() {
        let params = MatrixParams { seeds: (0..3).collect(), ..MatrixParams::default() };
        let out = run_matrix(&params, Mutation::None, Execution::Sequential).unwrap();
        assert_eq!(out.len(), 5 * 4 * 3);
        for o in &out {
            assert!(o.pass(), "{:?} rho {} seed {}: {:?}", o.variant, o.rho, o.seed, o.reports);
        }
    }
}
