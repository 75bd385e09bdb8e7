//! Prohorov distance between atomic measures.
//!
//! For a candidate `eps`, the worst closed set in the condition
//! `xi(B) <= zeta(B^eps) + eps` can be taken to be a set of atoms of `xi`:
//! `xi(B)` only sees the atoms `B` contains, and shrinking `B` to those atoms
//! only shrinks `B^eps`. The worst violation `max_S xi(S) - zeta(N_eps(S))`
//! over atom subsets `S` equals, by max-flow/min-cut, the mass of `xi` left
//! unrouted by a maximum flow in the bipartite graph joining `x` to `y` when
//! `|x - y| < eps`. Both directions share the same maximum flow.
//!
//! The unrouted mass `D(eps)` is a nonincreasing step function, constant on
//! every interval `(b, b']` between consecutive pairwise distances. The
//! distance is the infimum of `{eps > 0 : D(eps) <= eps}`: it is located by
//! bisection and then snapped exactly to either the breakpoint below the
//! feasible end or the unrouted mass there.

use super::{AtomicMeasure, MaxFlow};
use crate::error::{Error, Result};

/// Atom limit of [`prohorov_bruteforce`].
pub const BRUTEFORCE_ATOM_LIMIT: usize = 12;

const BISECTION_TOLERANCE: f64 = 1e-13;

/// Max-flow backend used for the unrouted mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowSolver {
    /// Greedy leftmost-first routing. Exact on the line because every atom's
    /// neighbourhood is a contiguous run of the other measure's atoms and
    /// both run ends are nondecreasing in location.
    #[default]
    Interval,
    /// General push-relabel on the explicit bipartite network.
    PushRelabel,
}

/// Unrouted masses `(xi - flow, zeta - flow)` of a maximum flow joining atoms
/// closer than `eps`.
pub fn unrouted_mass(xi: &AtomicMeasure, zeta: &AtomicMeasure, eps: f64, solver: FlowSolver) -> (f64, f64) {
    match solver {
        FlowSolver::Interval => interval_unrouted(xi.atoms(), zeta.atoms(), eps),
        FlowSolver::PushRelabel => push_relabel_unrouted(xi.atoms(), zeta.atoms(), eps),
    }
}

fn interval_unrouted(xi: &[(f64, f64)], zeta: &[(f64, f64)], eps: f64) -> (f64, f64) {
    let mut cap: Vec<f64> = zeta.iter().map(|a| a.1).collect();
    let mut j = 0;
    let mut left_xi = 0.0;
    for &(x, m) in xi {
        while j < zeta.len() && (zeta[j].0 <= x - eps || cap[j] == 0.0) {
            j += 1;
        }
        let mut need = m;
        let mut k = j;
        while need > 0.0 && k < zeta.len() && zeta[k].0 < x + eps {
            if cap[k] > 0.0 {
                if need < cap[k] {
                    cap[k] -= need;
                    need = 0.0;
                } else {
                    need -= cap[k];
                    cap[k] = 0.0;
                }
            }
            k += 1;
        }
        left_xi += need;
    }
    (left_xi, cap.iter().sum())
}

fn push_relabel_unrouted(xi: &[(f64, f64)], zeta: &[(f64, f64)], eps: f64) -> (f64, f64) {
    let (n, m) = (xi.len(), zeta.len());
    let s = n + m;
    let t = s + 1;
    let mut g = MaxFlow::new(n + m + 2);
    for (i, &(_, mass)) in xi.iter().enumerate() {
        g.add_edge(s, i, mass);
    }
    for (j, &(_, mass)) in zeta.iter().enumerate() {
        g.add_edge(n + j, t, mass);
    }
    for (i, &(x, _)) in xi.iter().enumerate() {
        for (j, &(y, _)) in zeta.iter().enumerate() {
            if (x - y).abs() < eps {
                g.add_edge(i, n + j, f64::INFINITY);
            }
        }
    }
    let flow = g.max_flow(s, t);
    debug_assert!(g.conservation_error(s, t) <= 1e-12 * (1.0 + flow));
    let total_xi: f64 = xi.iter().map(|a| a.1).sum();
    let total_zeta: f64 = zeta.iter().map(|a| a.1).sum();
    ((total_xi - flow).max(0.0), (total_zeta - flow).max(0.0))
}

/// Largest pairwise distance `|x - y|` strictly below `eps`, or 0.
fn distance_below(xi: &[(f64, f64)], zeta: &[(f64, f64)], eps: f64) -> f64 {
    let mut best = 0.0f64;
    for &(x, _) in xi {
        // first y with y > x - eps, last y with y < x + eps
        let lo = zeta.partition_point(|a| a.0 <= x - eps);
        let hi = zeta.partition_point(|a| a.0 < x + eps);
        if lo < hi {
            best = best.max(x - zeta[lo].0).max(zeta[hi - 1].0 - x);
        }
    }
    best
}

/// Infimum of `{eps : deficit(eps) <= eps}` for a nonincreasing step function
/// `deficit` constant between the breakpoints reported by `breakpoint_below`.
fn step_infimum(
    deficit: impl Fn(f64) -> f64,
    breakpoint_below: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
) -> f64 {
    let (mut lo, mut hi) = (lower, upper);
    if lo > 0.0 && deficit(lo) <= lo {
        hi = lo;
    } else {
        while hi - lo > BISECTION_TOLERANCE * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if deficit(mid) <= mid {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    breakpoint_below(hi).max(deficit(hi)).min(hi)
}

/// Prohorov distance with the default flow backend.
pub fn prohorov(xi: &AtomicMeasure, zeta: &AtomicMeasure) -> f64 {
    prohorov_with(xi, zeta, FlowSolver::default())
}

pub fn prohorov_with(xi: &AtomicMeasure, zeta: &AtomicMeasure, solver: FlowSolver) -> f64 {
    if xi == zeta {
        return 0.0;
    }
    let (mx, mz) = (xi.total_mass(), zeta.total_mass());
    let upper = mx.max(mz);
    let deficit = |eps: f64| {
        let (a, b) = unrouted_mass(xi, zeta, eps, solver);
        a.max(b)
    };
    let below = |eps: f64| distance_below(xi.atoms(), zeta.atoms(), eps);
    step_infimum(deficit, below, (mx - mz).abs(), upper)
}

/// Prohorov distance by direct enumeration of atom subsets on every interval
/// between pairwise distances. Independent of the flow formulation; meant as
/// a test oracle for small measures.
pub fn prohorov_bruteforce(xi: &AtomicMeasure, zeta: &AtomicMeasure) -> Result<f64> {
    let got = xi.len().max(zeta.len());
    if got > BRUTEFORCE_ATOM_LIMIT {
        return Err(Error::TooManyAtoms {
            limit: BRUTEFORCE_ATOM_LIMIT,
            got,
        });
    }
    let (xa, za) = (xi.atoms(), zeta.atoms());
    let mut breaks = vec![0.0];
    for &(x, _) in xa {
        for &(y, _) in za {
            breaks.push((x - y).abs());
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut best = f64::INFINITY;
    for (i, &b) in breaks.iter().enumerate() {
        let next = breaks.get(i + 1).copied().unwrap_or(f64::INFINITY);
        // On (b, next] exactly the pairs at distance <= b are joined.
        let deficit = worst_subset_violation(xa, za, b).max(worst_subset_violation(za, xa, b));
        let candidate = b.max(deficit);
        if candidate <= next {
            best = best.min(candidate);
        }
    }
    Ok(best)
}

/// `max_S left(S) - right(N(S))` over subsets `S` of `left`'s atoms, where
/// `N(S)` holds the atoms of `right` within distance `reach` of `S`.
fn worst_subset_violation(left: &[(f64, f64)], right: &[(f64, f64)], reach: f64) -> f64 {
    let n = left.len();
    let adj: Vec<u32> = left
        .iter()
        .map(|&(x, _)| {
            right
                .iter()
                .enumerate()
                .filter(|(_, &(y, _))| (x - y).abs() <= reach)
                .fold(0u32, |acc, (j, _)| acc | (1 << j))
        })
        .collect();
    let right_mass = |mask: u32| -> f64 {
        right
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, a)| a.1)
            .sum()
    };
    let mut worst = 0.0f64;
    let mut nb = vec![0u32; 1 << n];
    let mut mass = vec![0.0f64; 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        nb[mask] = nb[rest] | adj[low];
        mass[mask] = mass[rest] + left[low].1;
        worst = worst.max(mass[mask] - right_mass(nb[mask]));
    }
    worst
}

/// Lower bound on the Prohorov distance from test sets `[0, x]` only.
pub fn levy_lower_bound(xi: &AtomicMeasure, zeta: &AtomicMeasure) -> f64 {
    if xi == zeta {
        return 0.0;
    }
    let (mx, mz) = (xi.total_mass(), zeta.total_mass());
    let deficit = |eps: f64| {
        one_sided_interval_deficit(xi.atoms(), zeta.atoms(), eps)
            .max(one_sided_interval_deficit(zeta.atoms(), xi.atoms(), eps))
    };
    let below = |eps: f64| {
        interval_break_below(xi.atoms(), zeta.atoms(), eps)
            .max(interval_break_below(zeta.atoms(), xi.atoms(), eps))
    };
    step_infimum(deficit, below, (mx - mz).abs(), mx.max(mz))
}

/// `max_x left([0, x]) - right([0, x + eps))`, floored at 0.
fn one_sided_interval_deficit(left: &[(f64, f64)], right: &[(f64, f64)], eps: f64) -> f64 {
    let mut prefix = Vec::with_capacity(right.len() + 1);
    prefix.push(0.0);
    for a in right {
        prefix.push(prefix[prefix.len() - 1] + a.1);
    }
    let mut cum = 0.0;
    let mut worst = 0.0f64;
    for &(x, m) in left {
        cum += m;
        let k = right.partition_point(|a| a.0 < x + eps);
        worst = worst.max(cum - prefix[k]);
    }
    worst
}

/// Largest `y - x >= 0` strictly below `eps` with `x` in `left`, `y` in `right`.
fn interval_break_below(left: &[(f64, f64)], right: &[(f64, f64)], eps: f64) -> f64 {
    let mut best = 0.0f64;
    for &(x, _) in left {
        let k = right.partition_point(|a| a.0 < x + eps);
        if k > 0 {
            let gap = right[k - 1].0 - x;
            if gap >= 0.0 {
                best = best.max(gap);
            }
        }
    }
    best
}
