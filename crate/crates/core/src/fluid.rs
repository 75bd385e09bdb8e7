//! Fluid scaling: time dilated and mass shrunk by the scale `r`, and the
//! sup-over-time statistics that should vanish (or converge) as `r` grows.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate_sjf, simulate_srpt, Timeline};
use crate::error::{Error, Result};
use crate::measure::{prohorov, AtomicMeasure, Integrand, IntegrandSpec, Window};
use crate::par::{self, Execution};
use crate::primitives::{sample_trace, ModelConfig};
use crate::verify::TOLERANCE;

/// Default number of grid cells on `[0, T]`.
pub const DEFAULT_GRID_CELLS: usize = 500;

/// Default cap on event epochs inserted into the evaluation grid.
pub const DEFAULT_EPOCH_CAP: usize = 10_000;

/// `Z^r(t) = Z(rt) / r` and friends, for one timeline of the `r`-th model.
#[derive(Debug, Clone, Copy)]
pub struct ScaledView<'a> {
    timeline: &'a Timeline,
    r: f64,
}

impl<'a> ScaledView<'a> {
    pub fn new(timeline: &'a Timeline, r: f64) -> Self {
        ScaledView { timeline, r }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Fluid horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.timeline.horizon() / self.r
    }

    fn unscaled(&self, t: f64) -> f64 {
        (self.r * t).min(self.timeline.horizon())
    }

    /// Residuals at unscaled time `rt`, each with mass `1/r`.
    pub fn descriptor(&self, t: f64) -> Result<AtomicMeasure> {
        descriptor_at(self.timeline, self.r, self.unscaled(t))
    }

    /// `F(rt)`; frontiers are sizes, so they are not rescaled.
    pub fn frontier(&self, t: f64) -> Result<f64> {
        self.timeline.frontier_at(self.unscaled(t))
    }

    pub fn workload(&self, t: f64) -> Result<f64> {
        Ok(self.timeline.snapshot_at(self.unscaled(t))?.workload / self.r)
    }

    pub fn load(&self, t: f64) -> Result<f64> {
        Ok(self.timeline.snapshot_at(self.unscaled(t))?.load / self.r)
    }

    pub fn queue_mass(&self, t: f64) -> Result<f64> {
        Ok(self.timeline.queue_length_at(self.unscaled(t))? as f64 / self.r)
    }
}

fn descriptor_at(tl: &Timeline, r: f64, s: f64) -> Result<AtomicMeasure> {
    Ok(AtomicMeasure::from_residuals(tl.residuals_at(s)?, 1.0 / r))
}

/// A `(r, replicate)` cell selected for per-time output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotCell {
    pub r: f64,
    pub replicate: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub r_list: Vec<f64>,
    pub replicates: u64,
    /// Grid spacing on fluid scale; `T / 500` when absent.
    pub h: Option<f64>,
    /// Low-mass threshold; the 5% quantile of the service law when absent.
    pub delta: Option<f64>,
    /// Event epochs are added to the grid only when there are at most this
    /// many of them.
    pub epoch_cap: usize,
    pub plot_cells: Vec<PlotCell>,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            r_list: vec![10.0, 50.0, 250.0],
            replicates: 20,
            h: None,
            delta: None,
            epoch_cap: DEFAULT_EPOCH_CAP,
            plot_cells: Vec::new(),
        }
    }
}

impl SweepParams {
    pub fn grid_step(&self, horizon: f64) -> f64 {
        self.h.unwrap_or(horizon / DEFAULT_GRID_CELLS as f64)
    }

    pub fn low_mass_threshold(&self, config: &ModelConfig) -> Result<f64> {
        match self.delta {
            Some(d) => Ok(d),
            None => config.service.quantile(0.05),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_list.iter().any(|r| !(r.is_finite() && *r >= 1.0)) {
            return Err(Error::InvalidConfig("every r must be >= 1".into()));
        }
        if self.r_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("r_list must be strictly increasing".into()));
        }
        if let Some(h) = self.h {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidConfig(format!("h must be > 0, got {h}")));
            }
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidConfig(format!("delta must be >= 0, got {d}")));
            }
        }
        Ok(())
    }
}

/// Fluid-scale statistics of one `(r, replicate)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub r: f64,
    pub replicate: u64,
    pub seed: u64,
    pub h: f64,
    pub delta: f64,
    /// `sup_t d[Z^r(t), Z^r_p(t)]`.
    pub sup_prohorov: f64,
    /// `sup_t <chi 1_[0, F^r(t)), Z^r_p(t)>`.
    pub sup_below_frontier: f64,
    /// `sup_t` of the mass in `[0, delta]`, larger of the two policies.
    pub low_mass: f64,
    /// `sup_t |V^r(t) - rho t|`, exact over arrival epochs.
    pub load_dev: f64,
    /// Largest difference between the below-frontier work computed from the
    /// SJF and from the SRPT descriptor.
    pub below_frontier_gap: f64,
    pub points: usize,
    pub epochs_included: bool,
    pub wall_ms: f64,
}

/// Per-time values for plotting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub t: f64,
    pub prohorov: f64,
    pub below_frontier: f64,
    pub low_mass: f64,
    pub load: f64,
}

fn traffic_check(config: &ModelConfig) -> Result<f64> {
    let rho = config.traffic_intensity()?;
    if rho > 1.0 + 1e-12 {
        return Err(Error::Supercritical { rho });
    }
    Ok(rho)
}

/// Evaluation points as `(fluid t, unscaled s)`: the grid `{0, h, 2h, ...}`
/// and `T`, plus every event epoch of either timeline when there are at most
/// `cap` of them.
fn evaluation_points(sjf: &Timeline, srpt: &Timeline, r: f64, h: f64, cap: usize) -> (Vec<(f64, f64)>, bool) {
    let horizon = sjf.horizon();
    let t_end = horizon / r;
    let cells = (t_end / h).floor() as usize;
    let mut pts: Vec<(f64, f64)> = (0..=cells)
        .map(|k| k as f64 * h)
        .filter(|&t| t <= t_end)
        .map(|t| (t, (r * t).min(horizon)))
        .collect();
    pts.push((t_end, horizon));
    let mut epochs: Vec<f64> = sjf.epochs().iter().chain(srpt.epochs()).copied().collect();
    epochs.sort_by(f64::total_cmp);
    epochs.dedup();
    let include = epochs.len() <= cap;
    if include {
        pts.extend(epochs.iter().map(|&s| (s / r, s)));
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    pts.dedup_by(|a, b| a.1 == b.1);
    (pts, include)
}

/// Simulate both policies on the `(r, replicate)` trace and compute every
/// statistic; optionally keep the per-point values.
pub fn evaluate_cell(
    config: &ModelConfig,
    params: &SweepParams,
    r: f64,
    replicate: u64,
    keep_profile: bool,
) -> Result<(SweepResult, Vec<ProfilePoint>)> {
    let clock = Instant::now();
    let rho = traffic_check(config)?;
    let h = params.grid_step(config.horizon);
    let delta = params.low_mass_threshold(config)?;
    let trace = sample_trace(config, r, replicate)?;
    let horizon = r * config.horizon;
    let sjf = simulate_sjf(&trace, horizon)?;
    let srpt = simulate_srpt(&trace, horizon)?;
    let (points, epochs_included) = evaluation_points(&sjf, &srpt, r, h, params.epoch_cap);

    let low = IntegrandSpec::new(Integrand::One, Window::closed(0.0, delta));
    let below = |z: &AtomicMeasure, f: f64| z.integrate(&IntegrandSpec::new(Integrand::Chi, Window::closed_open(0.0, f)));
    let (mut sup_d, mut sup_below, mut sup_low, mut gap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut profile = Vec::new();
    for &(t, s) in &points {
        let z = descriptor_at(&sjf, r, s)?;
        let zp = descriptor_at(&srpt, r, s)?;
        let d = prohorov(&z, &zp);
        let g = below(&zp, sjf.frontier_at(s)?);
        let g_sjf = below(&z, sjf.frontier_at(s)?);
        let g_srpt = below(&zp, srpt.frontier_at(s)?);
        let m = z.integrate(&low).max(zp.integrate(&low));
        sup_d = sup_d.max(d);
        sup_below = sup_below.max(g);
        sup_low = sup_low.max(m);
        gap = gap.max((g_sjf - g_srpt).abs());
        if keep_profile {
            profile.push(ProfilePoint {
                t,
                prohorov: d,
                below_frontier: g,
                low_mass: m,
                load: sjf.snapshot_at(s)?.load / r,
            });
        }
    }
    let result = SweepResult {
        r,
        replicate,
        seed: trace.seed,
        h,
        delta,
        sup_prohorov: sup_d,
        sup_below_frontier: sup_below,
        low_mass: sup_low,
        load_dev: load_deviation(&trace.arrival_epochs, &trace.service_sizes, r, rho, config.horizon),
        below_frontier_gap: gap,
        points: points.len(),
        epochs_included,
        wall_ms: clock.elapsed().as_secs_f64() * 1e3,
    };
    Ok((result, profile))
}

/// `sup_{t <= T} |V(rt)/r - rho t|`. The load is a step function and `rho t`
/// is linear, so the supremum is attained at an arrival epoch (either side of
/// the jump) or at `T`.
pub fn load_deviation(epochs: &[f64], sizes: &[f64], r: f64, rho: f64, horizon: f64) -> f64 {
    let mut v = 0.0;
    let mut dev = 0.0f64;
    for (&a, &w) in epochs.iter().zip(sizes) {
        if a > r * horizon {
            break;
        }
        let t = a / r;
        dev = dev.max((v / r - rho * t).abs());
        v += w;
        dev = dev.max((v / r - rho * t).abs());
    }
    dev.max((v / r - rho * horizon).abs())
}

/// Every `(r, replicate)` cell, sorted by `r` then replicate.
pub fn sweep(config: &ModelConfig, params: &SweepParams, exec: Execution) -> Result<Vec<SweepResult>> {
    config.validate()?;
    params.validate()?;
    traffic_check(config)?;
    let cells: Vec<(f64, u64)> = params
        .r_list
        .iter()
        .flat_map(|&r| (0..params.replicates).map(move |k| (r, k)))
        .collect();
    let mut out: Vec<SweepResult> = par::map(&cells, exec, |&(r, k)| evaluate_cell(config, params, r, k, false).map(|x| x.0))
        .into_iter()
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| a.r.total_cmp(&b.r).then(a.replicate.cmp(&b.replicate)));
    Ok(out)
}

/// Median of finite values (mean of the middle two for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Replicate medians for one `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub r: f64,
    pub replicates: usize,
    pub sup_prohorov: f64,
    pub sup_below_frontier: f64,
    pub low_mass: f64,
    pub load_dev: f64,
    pub max_below_frontier_gap: f64,
}

pub fn summarize(results: &[SweepResult]) -> Vec<SweepSummary> {
    let mut rs: Vec<f64> = results.iter().map(|x| x.r).collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    rs.into_iter()
        .map(|r| {
            let cell: Vec<&SweepResult> = results.iter().filter(|x| x.r == r).collect();
            let med = |f: fn(&SweepResult) -> f64| median(&cell.iter().map(|x| f(x)).collect::<Vec<_>>()).unwrap_or(0.0);
            SweepSummary {
                r,
                replicates: cell.len(),
                sup_prohorov: med(|x| x.sup_prohorov),
                sup_below_frontier: med(|x| x.sup_below_frontier),
                low_mass: med(|x| x.low_mass),
                load_dev: med(|x| x.load_dev),
                max_below_frontier_gap: cell.iter().map(|x| x.below_frontier_gap).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// True when SJF and SRPT below-frontier work agree at every point.
pub fn below_frontier_consistent(results: &[SweepResult]) -> bool {
    results.iter().all(|x| x.below_frontier_gap <= TOLERANCE)
}

/// Response time of one job under both policies.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRow {
    pub index: i64,
    pub arrival: f64,
    pub size: f64,
    /// Frontier just before the job's arrival.
    pub frontier_at_arrival: f64,
    pub response_sjf: Option<f64>,
    pub response_srpt: Option<f64>,
}

impl ResponseRow {
    pub fn below_frontier(&self) -> bool {
        self.size < self.frontier_at_arrival
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseReport {
    pub r: f64,
    pub rows: Vec<ResponseRow>,
    pub max_scaled_below_sjf: Option<f64>,
    pub max_scaled_below_srpt: Option<f64>,
    pub max_scaled_above_sjf: Option<f64>,
    pub max_scaled_above_srpt: Option<f64>,
    /// Jobs still in the system at the horizon under SRPT.
    pub censored_below: usize,
    pub censored_above: usize,
}

/// Per-job response times of coupled timelines, grouped by whether the job
/// was smaller than the frontier when it arrived.
pub fn response_time_report(sjf: &Timeline, srpt: &Timeline, r: f64) -> Result<ResponseReport> {
    if sjf.trace() != srpt.trace() || sjf.horizon() != srpt.horizon() {
        return Err(Error::TraceMismatch);
    }
    let mut rows = Vec::new();
    for (a, b) in sjf.jobs().iter().zip(srpt.jobs()) {
        if a.arrival > sjf.horizon() {
            continue;
        }
        let response = |c: f64| c.is_finite().then_some(c - a.arrival);
        rows.push(ResponseRow {
            index: a.index,
            arrival: a.arrival,
            size: a.size,
            frontier_at_arrival: sjf.frontier_before(a.arrival)?,
            response_sjf: response(a.completion),
            response_srpt: response(b.completion),
        });
    }
    let max_of = |below: bool, pick: fn(&ResponseRow) -> Option<f64>| {
        rows.iter()
            .filter(|x| x.below_frontier() == below)
            .filter_map(pick)
            .map(|v| v / r)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    let censored = |below: bool| rows.iter().filter(|x| x.below_frontier() == below && x.response_srpt.is_none()).count();
    Ok(ResponseReport {
        r,
        max_scaled_below_sjf: max_of(true, |x| x.response_sjf),
        max_scaled_below_srpt: max_of(true, |x| x.response_srpt),
        max_scaled_above_sjf: max_of(false, |x| x.response_sjf),
        max_scaled_above_srpt: max_of(false, |x| x.response_srpt),
        censored_below: censored(true),
        censored_above: censored(false),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{DistributionSpec, PrimitiveTrace};

    fn model() -> ModelConfig {
        ModelConfig {
            interarrival: DistributionSpec::Exponential { rate: 1.0 },
            service: DistributionSpec::Exponential { rate: 2.0 },
            initial_density: 1.0,
            initial_size: DistributionSpec::Uniform { lo: 0.5, hi: 1.5 },
            horizon: 2.0,
            base_seed: 9,
            first_gap: None,
        }
    }

    #[test]
    fn unit_scale_view_is_identity() {
        let trace = PrimitiveTrace::new(vec![3.0, 1.0, 2.0], vec![0.5], vec![0.25]).unwrap();
        let tl = simulate_srpt(&trace, 6.0).unwrap();
        let view = ScaledView::new(&tl, 1.0);
        for t in [0.0, 0.7, 2.0, 5.5] {
            assert_eq!(view.descriptor(t).unwrap(), tl.state_descriptor(t).unwrap());
        }
    }

    #[test]
    fn scaled_mass_and_workload() {
        let trace = PrimitiveTrace::new(vec![1.0; 30], vec![], vec![]).unwrap();
        let tl = simulate_sjf(&trace, 100.0).unwrap();
        let view = ScaledView::new(&tl, 10.0);
        assert!((view.descriptor(0.0).unwrap().total_mass() - 3.0).abs() < 1e-12);
        let z = view.descriptor(0.25).unwrap();
        let w = z.integrate(&IntegrandSpec::new(Integrand::Chi, Window::ALL));
        assert!((w - view.workload(0.25).unwrap()).abs() < 1e-12);
        assert!((w - 27.5 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn supercritical_rejected() {
        let mut m = model();
        m.interarrival = DistributionSpec::Exponential { rate: 3.0 };
        let err = sweep(&m, &SweepParams::default(), Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::Supercritical { .. }));
    }

    #[test]
    fn empty_model_statistics_vanish() {
        let m = ModelConfig {
            interarrival: DistributionSpec::Deterministic { value: 100.0 },
            initial_density: 0.0,
            ..model()
        };
        let params = SweepParams { r_list: vec![1.0, 5.0], replicates: 2, ..SweepParams::default() };
        for res in sweep(&m, &params, Execution::Sequential).unwrap() {
            assert_eq!(res.sup_prohorov, 0.0);
            assert_eq!(res.sup_below_frontier, 0.0);
            assert_eq!(res.low_mass, 0.0);
            assert!((res.load_dev - 0.005 * 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let params = SweepParams { r_list: vec![2.0, 4.0], replicates: 3, ..SweepParams::default() };
        let strip = |v: Vec<SweepResult>| v.into_iter().map(|x| SweepResult { wall_ms: 0.0, ..x }).collect::<Vec<_>>();
        let a = strip(sweep(&model(), &params, Execution::Sequential).unwrap());
        let b = strip(sweep(&model(), &params, Execution::Parallel).unwrap());
        assert_eq!(a, b);
        assert!(below_frontier_consistent(&a));
    }

    #[test]
    fn load_deviation_hand_value() {
        // arrivals of size 1 at 1 and 2, r = 1, rho = 0.5, T = 3:
        // before the first jump |0 - 0.5| = 0.5, after |1 - 0.5| = 0.5,
        // before the second |1 - 1| = 0, after |2 - 1| = 1, end |2 - 1.5|.
        assert_eq!(load_deviation(&[1.0, 2.0], &[1.0, 1.0], 1.0, 0.5, 3.0), 1.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn response_times_without_arrivals() {
        let trace = PrimitiveTrace::new(vec![3.0, 1.0, 2.0], vec![], vec![]).unwrap();
        let sjf = simulate_sjf(&trace, 10.0).unwrap();
        let srpt = simulate_srpt(&trace, 10.0).unwrap();
        let rep = response_time_report(&sjf, &srpt, 1.0).unwrap();
        for (row, job) in rep.rows.iter().zip(sjf.jobs()) {
            assert_eq!(row.response_sjf, Some(job.completion));
            assert_eq!(row.response_sjf, row.response_srpt);
        }
    }
}
