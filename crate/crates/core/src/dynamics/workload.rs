use crate::primitives::PrimitiveTrace;

/// Load, workload and idle processes computed from the primitives alone by
/// reflecting `W(0) + V(t) - t` at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadProcess {
    /// `(t_k, V(t_k), W(t_k), I(t_k))` at 0 and at every distinct arrival
    /// epoch up to the horizon.
    breakpoints: Vec<(f64, f64, f64, f64)>,
    horizon: f64,
}

pub fn workload_processes(trace: &PrimitiveTrace, horizon: f64) -> WorkloadProcess {
    let n = trace.arrivals_by(horizon);
    let epochs = &trace.arrival_epochs[..n];
    let sizes = &trace.service_sizes[..n];
    let mut breakpoints = Vec::with_capacity(n + 1);
    let (mut t, mut v, mut w, mut idle) = (0.0, 0.0, trace.initial_workload(), 0.0);
    let mut i = 0;
    // arrivals at time 0 belong to V(0)
    while i < n && epochs[i] <= 0.0 {
        v += sizes[i];
        w += sizes[i];
        i += 1;
    }
    breakpoints.push((t, v, w, idle));
    while i < n {
        let a = epochs[i];
        let dt = a - t;
        idle += (dt - w).max(0.0);
        w = (w - dt).max(0.0);
        while i < n && epochs[i] == a {
            v += sizes[i];
            w += sizes[i];
            i += 1;
        }
        t = a;
        breakpoints.push((t, v, w, idle));
    }
    WorkloadProcess { breakpoints, horizon }
}

impl WorkloadProcess {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn base(&self, t: f64) -> (f64, f64, f64, f64) {
        let k = self.breakpoints.partition_point(|b| b.0 <= t).saturating_sub(1);
        self.breakpoints[k]
    }

    /// `(V(t), W(t), I(t))` for `t >= 0`.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let (tk, v, w, idle) = self.base(t);
        let dt = t - tk;
        (v, (w - dt).max(0.0), idle + (dt - w).max(0.0))
    }

    pub fn load(&self, t: f64) -> f64 {
        self.at(t).0
    }

    pub fn workload(&self, t: f64) -> f64 {
        self.at(t).1
    }

    pub fn idle(&self, t: f64) -> f64 {
        self.at(t).2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drain_without_arrivals() {
        let trace = PrimitiveTrace::new(vec![3.0], vec![], vec![]).unwrap();
        let p = workload_processes(&trace, 10.0);
        for t in [0.0, 1.0, 2.5, 3.0, 4.0, 7.5] {
            assert_eq!(p.workload(t), (3.0f64 - t).max(0.0));
            assert_eq!(p.idle(t), (t - 3.0f64).max(0.0));
        }
    }

    #[test]
    fn sawtooth() {
        let trace = PrimitiveTrace::new(vec![], vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let p = workload_processes(&trace, 10.0);
        assert_eq!(p.workload(0.5), 0.0);
        assert_eq!(p.workload(1.0), 1.0);
        assert_eq!(p.workload(2.0), 1.0);
        assert_eq!(p.workload(3.0), 0.0);
        assert_eq!(p.idle(1.0), 1.0);
        assert_eq!(p.idle(3.0), 1.0);
        assert_eq!(p.idle(0.5), 0.5);
        assert_eq!(p.load(1.5), 1.0);
        assert_eq!(p.load(2.0), 2.0);
    }

    #[test]
    fn idle_matches_supremum_formula() {
        let trace = PrimitiveTrace::new(
            vec![0.7],
            vec![0.5, 2.0, 2.25, 4.0, 6.5],
            vec![0.25, 1.5, 0.125, 0.5, 2.0],
        )
        .unwrap();
        let p = workload_processes(&trace, 10.0);
        let x = |s: f64| 0.7 + trace.service_sizes[..trace.arrivals_by(s)].iter().sum::<f64>() - s;
        let x_left = |s: f64| {
            let k = trace.arrival_epochs.partition_point(|&a| a < s);
            0.7 + trace.service_sizes[..k].iter().sum::<f64>() - s
        };
        for i in 0..=400 {
            let t = i as f64 * 0.025;
            // sup over s <= t of the negative part is attained at t or just
            // before an upward jump
            let mut sup = (-x(t)).max(0.0);
            for &a in trace.arrival_epochs.iter().filter(|&&a| a <= t) {
                sup = sup.max(-x_left(a));
            }
            assert!((p.idle(t) - sup).abs() < 1e-12, "t = {t}");
            assert!((p.workload(t) - (x(t) + sup)).abs() < 1e-12, "t = {t}");
        }
    }
}
