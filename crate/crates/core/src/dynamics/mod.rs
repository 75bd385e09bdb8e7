//! Event-driven simulation of a single server under SJF, SRPT or FIFO.
//!
//! A simulation produces the service schedule (who is served on which
//! interval) and a per-epoch record of every process built on it. Between
//! consecutive epochs at most one residual decreases, at unit rate, so all
//! processes are recovered exactly at arbitrary times by linear interpolation.

mod workload;

pub use workload::{workload_processes, WorkloadProcess};

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;
use crate::primitives::PrimitiveTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Sjf,
    Srpt,
    Fifo,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Sjf, Policy::Srpt, Policy::Fifo];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Sjf => "sjf",
            Policy::Srpt => "srpt",
            Policy::Fifo => "fifo",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sjf" => Ok(Policy::Sjf),
            "srpt" => Ok(Policy::Srpt),
            "fifo" => Ok(Policy::Fifo),
            other => Err(Error::Parse(format!("unknown policy `{other}` (expected sjf, srpt or fifo)"))),
        }
    }
}

/// Deliberate scheduling bugs, used to show the checkers are not vacuous.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// SJF breaks size ties toward the largest index.
    SjfMaxIndexTieBreak,
    /// SRPT never preempts.
    SrptNonPreemptive,
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Mutation::None),
            "sjf-max-index" => Ok(Mutation::SjfMaxIndexTieBreak),
            "srpt-nonpreemptive" => Ok(Mutation::SrptNonPreemptive),
            other => Err(Error::Parse(format!("unknown mutation `{other}`"))),
        }
    }
}

/// Per-job outcome of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct JobRecord {
    /// Job index: `-Z0..=-1` for initial jobs, `1, 2, ...` for arrivals.
    pub index: i64,
    pub size: f64,
    /// Arrival epoch; 0 for initial jobs.
    pub arrival: f64,
    /// First instant of service, `+inf` if never served by the horizon.
    pub start: f64,
    /// `+inf` if not completed by the horizon.
    pub completion: f64,
    /// Rank in the order of first service.
    pub serve_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Initial,
    Arrival,
    Start,
    Resume,
    Preempt,
    Completion,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Initial => "initial",
            EventKind::Arrival => "arrival",
            EventKind::Start => "start",
            EventKind::Resume => "resume",
            EventKind::Preempt => "preempt",
            EventKind::Completion => "completion",
        }
    }

    /// Order of simultaneous events: departures, then arrivals, then the
    /// server's reaction.
    fn rank(self) -> u8 {
        match self {
            EventKind::Completion => 0,
            EventKind::Initial | EventKind::Arrival => 1,
            EventKind::Preempt => 2,
            EventKind::Start => 3,
            EventKind::Resume => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// Job position in the trace (initial jobs first).
    pub position: usize,
}

/// The job at `position` receives service on `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub position: usize,
}

/// Right-continuous values of every process at one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// Position of the job served on `[time, next epoch)`.
    pub in_service: Option<usize>,
    pub in_service_residual: Option<f64>,
    pub queue_length: usize,
    /// `W(t)`: sum of residuals.
    pub workload: f64,
    /// `S(t)`: cumulative service.
    pub service: f64,
    /// `I(t)`: cumulative idle time.
    pub idle: f64,
    /// `V(t)`: total size of arrivals in `(0, t]`.
    pub load: f64,
    /// `F(t)` (largest started size) or, under SRPT, `F_p(t)` (running sup
    /// of the current residual).
    pub frontier: f64,
    /// Smallest positive residual, `+inf` when empty.
    pub left_edge: f64,
    /// Left edge when nonempty, 0 otherwise.
    pub current_residual: f64,
}

/// A frontier job: its size equals the frontier at its start time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierRecord {
    pub time: f64,
    pub value: f64,
    pub index: i64,
}

/// Complete evolution of one policy on one trace up to the horizon.
#[derive(Debug, Clone)]
pub struct Timeline {
    policy: Policy,
    mutation: Mutation,
    trace: Arc<PrimitiveTrace>,
    horizon: f64,
    jobs: Vec<JobRecord>,
    events: Vec<Event>,
    segments: Vec<Segment>,
    served_before: Vec<f64>,
    job_segments: Vec<Vec<usize>>,
    completions: Vec<f64>,
    epochs: Vec<f64>,
    snapshots: Vec<Snapshot>,
    frontier: Vec<FrontierRecord>,
}

pub fn simulate_sjf(trace: &PrimitiveTrace, horizon: f64) -> Result<Timeline> {
    simulate_with(trace, horizon, Policy::Sjf, Mutation::None)
}

pub fn simulate_srpt(trace: &PrimitiveTrace, horizon: f64) -> Result<Timeline> {
    simulate_with(trace, horizon, Policy::Srpt, Mutation::None)
}

pub fn simulate_fifo(trace: &PrimitiveTrace, horizon: f64) -> Result<Timeline> {
    simulate_with(trace, horizon, Policy::Fifo, Mutation::None)
}

pub fn simulate(trace: &PrimitiveTrace, horizon: f64, policy: Policy) -> Result<Timeline> {
    simulate_with(trace, horizon, policy, Mutation::None)
}

/// Simulate with an optional injected bug. A mutation that does not apply to
/// `policy` is ignored.
#[doc(hidden)]
pub fn simulate_with(trace: &PrimitiveTrace, horizon: f64, policy: Policy, mutation: Mutation) -> Result<Timeline> {
    trace.validate()?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidConfig(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    let sizes = job_sizes(trace);
    let z0 = trace.initial_count() as i64;
    let index = |p: usize| if (p as i64) < z0 { p as i64 - z0 } else { p as i64 - z0 + 1 };
    let rec = match (policy, mutation) {
        (Policy::Sjf, Mutation::SjfMaxIndexTieBreak) => {
            run_nonpreemptive(trace, horizon, |p| Key::new(sizes[p], -index(p), p))
        }
        (Policy::Sjf, _) => run_nonpreemptive(trace, horizon, |p| Key::new(sizes[p], index(p), p)),
        (Policy::Fifo, _) => run_nonpreemptive(trace, horizon, |p| Key::new(0.0, index(p), p)),
        (Policy::Srpt, m) => run_srpt(trace, horizon, m == Mutation::SrptNonPreemptive),
    };
    Ok(Timeline::build(policy, mutation, trace, horizon, rec))
}

fn job_sizes(trace: &PrimitiveTrace) -> Vec<f64> {
    trace.initial_sizes.iter().chain(&trace.service_sizes).copied().collect()
}

#[derive(Debug, Clone, Copy)]
struct Key {
    primary: f64,
    secondary: i64,
    position: usize,
}

impl Key {
    fn new(primary: f64, secondary: i64, position: usize) -> Self {
        Key { primary, secondary, position }
    }
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .total_cmp(&other.primary)
            .then(self.secondary.cmp(&other.secondary))
            .then(self.position.cmp(&other.position))
    }
}

struct Recorder {
    jobs: Vec<JobRecord>,
    events: Vec<Event>,
    segments: Vec<Segment>,
    next_order: usize,
}

impl Recorder {
    fn new(trace: &PrimitiveTrace, horizon: f64) -> Self {
        let z0 = trace.initial_count();
        let mut jobs = Vec::with_capacity(trace.job_count());
        let mut events = Vec::new();
        for (p, &w) in trace.initial_sizes.iter().enumerate() {
            jobs.push(JobRecord {
                index: trace.index_of(p),
                size: w,
                arrival: 0.0,
                start: f64::INFINITY,
                completion: f64::INFINITY,
                serve_order: None,
            });
            events.push(Event { time: 0.0, kind: EventKind::Initial, position: p });
        }
        for (k, (&a, &w)) in trace.arrival_epochs.iter().zip(&trace.service_sizes).enumerate() {
            let p = z0 + k;
            jobs.push(JobRecord {
                index: trace.index_of(p),
                size: w,
                arrival: a,
                start: f64::INFINITY,
                completion: f64::INFINITY,
                serve_order: None,
            });
            if a <= horizon {
                events.push(Event { time: a, kind: EventKind::Arrival, position: p });
            }
        }
        Recorder { jobs, events, segments: Vec::new(), next_order: 0 }
    }

    fn begin(&mut self, p: usize, t: f64) {
        let job = &mut self.jobs[p];
        let kind = if job.start.is_infinite() {
            job.start = t;
            job.serve_order = Some(self.next_order);
            self.next_order += 1;
            EventKind::Start
        } else {
            EventKind::Resume
        };
        self.events.push(Event { time: t, kind, position: p });
    }

    fn serve(&mut self, p: usize, start: f64, end: f64) {
        if end > start {
            self.segments.push(Segment { start, end, position: p });
        }
    }

    fn preempt(&mut self, p: usize, t: f64) {
        self.events.push(Event { time: t, kind: EventKind::Preempt, position: p });
    }

    fn complete(&mut self, p: usize, t: f64) {
        self.jobs[p].completion = t;
        self.events.push(Event { time: t, kind: EventKind::Completion, position: p });
    }
}

/// Non-preemptive list scheduling: whenever the server is free, start the
/// waiting job with the smallest key.
fn run_nonpreemptive(trace: &PrimitiveTrace, horizon: f64, key: impl Fn(usize) -> Key) -> Recorder {
    let mut rec = Recorder::new(trace, horizon);
    let z0 = trace.initial_count();
    let epochs = &trace.arrival_epochs;
    let n_arr = trace.arrivals_by(horizon);
    let mut waiting: BinaryHeap<Reverse<Key>> = (0..z0).map(|p| Reverse(key(p))).collect();
    let mut next = 0;
    let mut t = 0.0;
    loop {
        while next < n_arr && epochs[next] <= t {
            waiting.push(Reverse(key(z0 + next)));
            next += 1;
        }
        let Some(Reverse(k)) = waiting.pop() else {
            if next < n_arr {
                t = epochs[next];
                continue;
            }
            break;
        };
        let p = k.position;
        rec.begin(p, t);
        let end = t + rec.jobs[p].size;
        if end <= horizon {
            rec.serve(p, t, end);
            rec.complete(p, end);
            t = end;
        } else {
            rec.serve(p, t, horizon);
            break;
        }
    }
    rec
}

/// Preemptive shortest-remaining-processing-time, minimum index among ties.
fn run_srpt(trace: &PrimitiveTrace, horizon: f64, never_preempt: bool) -> Recorder {
    let mut rec = Recorder::new(trace, horizon);
    let z0 = trace.initial_count();
    let epochs = &trace.arrival_epochs;
    let n_arr = trace.arrivals_by(horizon);
    let mut residual: Vec<f64> = rec.jobs.iter().map(|j| j.size).collect();
    let index: Vec<i64> = rec.jobs.iter().map(|j| j.index).collect();
    let key = |p: usize, residual: &[f64]| Key::new(residual[p], index[p], p);

    let mut waiting: BinaryHeap<Reverse<Key>> = (0..z0).map(|p| Reverse(key(p, &residual))).collect();
    let mut current: Option<usize> = None;
    let mut next = 0;
    let mut t = 0.0;
    loop {
        while next < n_arr && epochs[next] <= t {
            waiting.push(Reverse(key(z0 + next, &residual)));
            next += 1;
        }
        if let (Some(c), false) = (current, never_preempt) {
            if let Some(Reverse(top)) = waiting.peek() {
                if *top < key(c, &residual) {
                    waiting.push(Reverse(key(c, &residual)));
                    rec.preempt(c, t);
                    current = None;
                }
            }
        }
        if current.is_none() {
            if let Some(Reverse(k)) = waiting.pop() {
                current = Some(k.position);
                rec.begin(k.position, t);
            }
        }
        let Some(c) = current else {
            if next < n_arr {
                t = epochs[next];
                continue;
            }
            break;
        };
        if t >= horizon {
            break;
        }
        let next_arrival = if next < n_arr { epochs[next] } else { f64::INFINITY };
        let stop = next_arrival.min(horizon);
        let finish = t + residual[c];
        if finish <= stop {
            rec.serve(c, t, finish);
            residual[c] = 0.0;
            rec.complete(c, finish);
            current = None;
            t = finish;
        } else {
            rec.serve(c, t, stop);
            residual[c] -= stop - t;
            t = stop;
        }
    }
    rec
}

impl Timeline {
    fn build(policy: Policy, mutation: Mutation, trace: &PrimitiveTrace, horizon: f64, rec: Recorder) -> Self {
        let Recorder { jobs, mut events, segments, .. } = rec;
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.kind.rank().cmp(&b.kind.rank())));

        let mut epochs: Vec<f64> = Vec::with_capacity(events.len() + 2);
        epochs.push(0.0);
        epochs.extend(events.iter().map(|e| e.time));
        epochs.push(horizon);
        epochs.sort_by(f64::total_cmp);
        epochs.dedup();

        let mut served_before = Vec::with_capacity(segments.len());
        let mut job_segments = vec![Vec::new(); jobs.len()];
        let mut acc = 0.0;
        for (i, s) in segments.iter().enumerate() {
            served_before.push(acc);
            acc += s.end - s.start;
            job_segments[s.position].push(i);
        }
        let mut completions: Vec<f64> = jobs.iter().map(|j| j.completion).filter(|c| c.is_finite()).collect();
        completions.sort_by(f64::total_cmp);

        let mut tl = Timeline {
            policy,
            mutation,
            trace: Arc::new(trace.clone()),
            horizon,
            jobs,
            events,
            segments,
            served_before,
            job_segments,
            completions,
            epochs,
            snapshots: Vec::new(),
            frontier: Vec::new(),
        };
        tl.replay();
        tl.frontier = tl.collect_frontier();
        tl
    }

    /// Walk the epochs once, maintaining every process incrementally.
    fn replay(&mut self) {
        let sizes: Vec<f64> = self.jobs.iter().map(|j| j.size).collect();
        let mut residual = sizes.clone();
        let mut served = vec![0.0; sizes.len()];
        let mut live: BTreeSet<(u64, usize)> = BTreeSet::new();
        let (mut workload, mut service, mut idle, mut load, mut frontier) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
        let mut k = 0;
        let mut e = 0;
        let mut prev = 0.0;
        let mut snapshots = Vec::with_capacity(self.epochs.len());
        for (i, &t) in self.epochs.iter().enumerate() {
            if i > 0 {
                let dt = t - prev;
                while k < self.segments.len() && self.segments[k].end <= prev {
                    k += 1;
                }
                match self.segments.get(k) {
                    Some(s) if s.start <= prev => {
                        let p = s.position;
                        live.remove(&(residual[p].to_bits(), p));
                        served[p] += dt;
                        residual[p] = sizes[p] - served[p];
                        if residual[p] > 0.0 {
                            live.insert((residual[p].to_bits(), p));
                        }
                        workload -= dt;
                        service += dt;
                    }
                    _ => idle += dt,
                }
            }
            while e < self.events.len() && self.events[e].time == t {
                let ev = self.events[e];
                let p = ev.position;
                match ev.kind {
                    EventKind::Initial | EventKind::Arrival => {
                        live.insert((sizes[p].to_bits(), p));
                        workload += sizes[p];
                        if ev.kind == EventKind::Arrival {
                            load += sizes[p];
                        }
                    }
                    EventKind::Completion => {
                        live.remove(&(residual[p].to_bits(), p));
                        residual[p] = 0.0;
                    }
                    EventKind::Start if self.policy != Policy::Srpt => frontier = frontier.max(sizes[p]),
                    _ => {}
                }
                e += 1;
            }
            let left_edge = live.first().map_or(f64::INFINITY, |&(bits, _)| f64::from_bits(bits));
            let current_residual = if live.is_empty() { 0.0 } else { left_edge };
            if self.policy == Policy::Srpt {
                frontier = frontier.max(current_residual);
            }
            while k < self.segments.len() && self.segments[k].end <= t {
                k += 1;
            }
            let in_service = match self.segments.get(k) {
                Some(s) if s.start <= t => Some(s.position),
                _ => None,
            };
            snapshots.push(Snapshot {
                time: t,
                in_service,
                in_service_residual: in_service.map(|p| residual[p]),
                queue_length: live.len(),
                workload,
                service,
                idle,
                load,
                frontier,
                left_edge,
                current_residual,
            });
            prev = t;
        }
        self.snapshots = snapshots;
    }

    fn collect_frontier(&self) -> Vec<FrontierRecord> {
        let mut started: Vec<&JobRecord> = self.jobs.iter().filter(|j| j.start <= self.horizon).collect();
        started.sort_by(|a, b| a.start.total_cmp(&b.start));
        started
            .into_iter()
            .filter(|j| j.size == self.frontier_at_unchecked(j.start))
            .map(|j| FrontierRecord { time: j.start, value: j.size, index: j.index })
            .collect()
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    #[doc(hidden)]
    pub fn mutation(&self) -> Mutation {
        self.mutation
    }

    pub fn trace(&self) -> &PrimitiveTrace {
        &self.trace
    }

    /// Unscaled horizon `r * T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Per-job records by trace position.
    pub fn jobs(&self) -> &[JobRecord] {
        &self.jobs
    }

    /// Events sorted by time; simultaneous events ordered completion,
    /// arrival, preemption, start, resume.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Service intervals in time order.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Distinct epochs: 0, every event time, and the horizon.
    pub fn epochs(&self) -> &[f64] {
        &self.epochs
    }

    /// One snapshot per epoch.
    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Frontier jobs ordered by (strictly increasing) start time.
    pub fn frontier_records(&self) -> &[FrontierRecord] {
        &self.frontier
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.horizon {
            Ok(())
        } else {
            Err(Error::OutOfRange { t, horizon: self.horizon })
        }
    }

    fn epoch_index(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t).saturating_sub(1)
    }

    fn frontier_at_unchecked(&self, t: f64) -> f64 {
        self.snapshots[self.epoch_index(t)].frontier
    }

    /// `F(t)` (or `F_p(t)` under SRPT).
    pub fn frontier_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.frontier_at_unchecked(t))
    }

    /// Left limit `F(t-)`; 0 at `t = 0`.
    pub fn frontier_before(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let k = self.epochs.partition_point(|&e| e < t);
        Ok(if k == 0 { 0.0 } else { self.snapshots[k - 1].frontier })
    }

    /// Residual of every job at `t`, by trace position. Jobs not yet arrived
    /// and completed jobs read 0.
    pub fn residuals_at(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        Ok((0..self.jobs.len()).map(|p| self.residual_unchecked(p, t)).collect())
    }

    fn residual_unchecked(&self, p: usize, t: f64) -> f64 {
        let job = &self.jobs[p];
        if job.arrival > t || job.completion <= t {
            return 0.0;
        }
        let served: f64 = self.job_segments[p]
            .iter()
            .map(|&i| &self.segments[i])
            .filter(|s| s.start < t)
            .map(|s| s.end.min(t) - s.start)
            .sum();
        job.size - served
    }

    /// The state descriptor: unit mass at every positive residual.
    pub fn state_descriptor(&self, t: f64) -> Result<AtomicMeasure> {
        Ok(AtomicMeasure::from_residuals(self.residuals_at(t)?, 1.0))
    }

    /// `S(t)` from the service intervals.
    pub fn cumulative_service(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let k = self.segments.partition_point(|s| s.start < t);
        if k == 0 {
            return Ok(0.0);
        }
        let s = &self.segments[k - 1];
        Ok(self.served_before[k - 1] + s.end.min(t) - s.start)
    }

    /// Jobs in system at `t`: arrived minus completed.
    pub fn queue_length_at(&self, t: f64) -> Result<usize> {
        self.check_time(t)?;
        let arrived = self.trace.initial_count() + self.trace.arrivals_by(t);
        let done = self.completions.partition_point(|&c| c <= t);
        Ok(arrived - done)
    }

    /// Snapshot at an arbitrary time in `[0, horizon]`.
    pub fn snapshot_at(&self, t: f64) -> Result<Snapshot> {
        let residuals = self.residuals_at(t)?;
        let base = &self.snapshots[self.epoch_index(t)];
        let positive = residuals.iter().copied().filter(|&x| x > 0.0);
        let left_edge = positive.clone().fold(f64::INFINITY, f64::min);
        let queue_length = positive.clone().count();
        let in_service = base.in_service;
        let dt = t - base.time;
        Ok(Snapshot {
            time: t,
            in_service,
            in_service_residual: in_service.map(|p| residuals[p]),
            queue_length,
            workload: positive.sum(),
            service: self.cumulative_service(t)?,
            idle: if base.in_service.is_none() { base.idle + dt } else { base.idle },
            load: base.load,
            frontier: base.frontier,
            left_edge,
            current_residual: if queue_length == 0 { 0.0 } else { left_edge },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(initial: &[f64], arrivals: &[(f64, f64)]) -> PrimitiveTrace {
        PrimitiveTrace::new(
            initial.to_vec(),
            arrivals.iter().map(|a| a.0).collect(),
            arrivals.iter().map(|a| a.1).collect(),
        )
        .unwrap()
    }

    fn completion_of(tl: &Timeline, index: i64) -> f64 {
        tl.jobs().iter().find(|j| j.index == index).unwrap().completion
    }

    #[test]
    fn sjf_three_initial_jobs() {
        let tl = simulate_sjf(&trace(&[3.0, 1.0, 2.0], &[]), 10.0).unwrap();
        assert_eq!(completion_of(&tl, -2), 1.0);
        assert_eq!(completion_of(&tl, -1), 3.0);
        assert_eq!(completion_of(&tl, -3), 6.0);
        let f: Vec<(f64, f64)> = tl.frontier_records().iter().map(|r| (r.time, r.value)).collect();
        assert_eq!(f, vec![(0.0, 1.0), (1.0, 2.0), (3.0, 3.0)]);
        let z = tl.state_descriptor(0.5).unwrap();
        assert_eq!(z.atoms(), &[(0.5, 1.0), (2.0, 1.0), (3.0, 1.0)]);
    }

    #[test]
    fn sjf_large_initial_then_small_arrival() {
        let tl = simulate_sjf(&trace(&[5.0], &[(1.0, 1.0)]), 10.0).unwrap();
        assert_eq!(completion_of(&tl, -1), 5.0);
        assert_eq!(tl.jobs()[1].start, 5.0);
        assert_eq!(completion_of(&tl, 1), 6.0);
        let f = tl.frontier_records();
        assert_eq!(f.len(), 1);
        assert_eq!((f[0].time, f[0].index), (0.0, -1));
    }

    #[test]
    fn srpt_preemption_example() {
        let tl = simulate_srpt(&trace(&[5.0], &[(1.0, 1.0)]), 10.0).unwrap();
        assert_eq!(tl.residuals_at(1.0).unwrap(), vec![4.0, 1.0]);
        assert_eq!(completion_of(&tl, 1), 2.0);
        assert_eq!(completion_of(&tl, -1), 6.0);
        let c: Vec<f64> = tl.snapshots().iter().map(|s| s.current_residual).collect();
        // epochs 0, 1, 2, 6, 10
        assert_eq!(c, vec![5.0, 1.0, 4.0, 0.0, 0.0]);
        assert!(tl.snapshots().iter().all(|s| s.frontier == 5.0));
        assert_eq!(tl.frontier_records().len(), 1);
        let kinds: Vec<EventKind> = tl.events().iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![
                EventKind::Initial,
                EventKind::Start,
                EventKind::Arrival,
                EventKind::Preempt,
                EventKind::Start,
                EventKind::Completion,
                EventKind::Resume,
                EventKind::Completion
            ]
        );
    }

    #[test]
    fn srpt_equals_sjf_without_arrivals() {
        let t = trace(&[3.0, 1.0, 2.0], &[]);
        let a = simulate_sjf(&t, 10.0).unwrap();
        let b = simulate_srpt(&t, 10.0).unwrap();
        assert_eq!(a.jobs(), b.jobs());
    }

    #[test]
    fn fifo_order() {
        let tl = simulate_fifo(&trace(&[3.0, 1.0, 2.0], &[]), 10.0).unwrap();
        let c: Vec<f64> = tl.jobs().iter().map(|j| j.completion).collect();
        assert_eq!(c, vec![3.0, 4.0, 6.0]);
    }

    #[test]
    fn empty_trace() {
        let t = trace(&[], &[]);
        for p in Policy::ALL {
            let tl = simulate(&t, 4.0, p).unwrap();
            let s = tl.snapshot_at(2.5).unwrap();
            assert_eq!((s.idle, s.workload, s.current_residual, s.frontier), (2.5, 0.0, 0.0, 0.0));
            assert!(tl.state_descriptor(3.0).unwrap().is_empty());
            assert!(tl.frontier_records().is_empty());
        }
    }

    #[test]
    fn horizon_truncation() {
        let tl = simulate_sjf(&trace(&[5.0], &[(1.0, 1.0)]), 3.0).unwrap();
        assert!(tl.jobs()[0].completion.is_infinite());
        assert!(tl.jobs()[1].start.is_infinite());
        assert_eq!(tl.residuals_at(3.0).unwrap(), vec![2.0, 1.0]);
        assert!(tl.residuals_at(3.5).is_err());
    }

    #[test]
    fn snapshot_at_interpolates() {
        let tl = simulate_srpt(&trace(&[5.0], &[(1.0, 1.0)]), 10.0).unwrap();
        let s = tl.snapshot_at(1.5).unwrap();
        assert_eq!(s.workload, 4.5);
        assert_eq!(s.service, 1.5);
        assert_eq!(s.current_residual, 0.5);
        assert_eq!(s.in_service, Some(1));
        assert_eq!(tl.queue_length_at(1.5).unwrap(), 2);
    }

    #[test]
    fn mutants_change_schedules() {
        let t = trace(&[1.0, 1.0], &[]);
        let ok = simulate_sjf(&t, 5.0).unwrap();
        let bad = simulate_with(&t, 5.0, Policy::Sjf, Mutation::SjfMaxIndexTieBreak).unwrap();
        assert_eq!(ok.frontier_records()[0].index, -2);
        assert_eq!(bad.frontier_records()[0].index, -1);

        let t = trace(&[5.0], &[(1.0, 1.0)]);
        let bad = simulate_with(&t, 10.0, Policy::Srpt, Mutation::SrptNonPreemptive).unwrap();
        assert_eq!(bad.jobs()[0].completion, 5.0);
    }
}
