//! Finite atomic measures on `[0, inf)`.

mod flow;
mod prohorov;

pub use flow::MaxFlow;
pub use prohorov::{
    levy_lower_bound, prohorov, prohorov_bruteforce, prohorov_with, unrouted_mass, FlowSolver,
    BRUTEFORCE_ATOM_LIMIT,
};

use crate::error::{Error, Result};

/// A finite nonnegative measure given by atoms sorted by location, with
/// distinct locations and strictly positive masses. The empty measure is the
/// zero measure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Build from arbitrary `(location, mass)` pairs. Atoms at bit-identical
    /// locations are merged and zero masses dropped.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(x, m) in &atoms {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidMeasure(format!("location {x} is not in [0, inf)")));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidMeasure(format!("mass {m} is not finite and >= 0")));
            }
        }
        atoms.retain(|&(_, m)| m > 0.0);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::coalesce_sorted(atoms))
    }

    /// Unit-free `m * delta_x`, dropped when `x == 0`.
    pub fn point_plus(x: f64, m: f64) -> Result<Self> {
        if x == 0.0 {
            return Ok(Self::zero());
        }
        Self::from_atoms([(x, m)])
    }

    /// Sum of unit masses at positive locations (zeros dropped).
    pub fn from_residuals(residuals: impl IntoIterator<Item = f64>, mass: f64) -> Self {
        let mut locs: Vec<f64> = residuals.into_iter().filter(|&x| x > 0.0).collect();
        locs.sort_by(f64::total_cmp);
        Self::coalesce_sorted(locs.into_iter().map(|x| (x, mass)).collect())
    }

    fn coalesce_sorted(atoms: Vec<(f64, f64)>) -> Self {
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => out.push((x, m)),
            }
        }
        Self { atoms: out }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Multiply every mass by `factor > 0`.
    pub fn scale_mass(&self, factor: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|&(x, m)| (x, m * factor)).collect(),
        }
    }

    /// Move every atom right by `h >= 0`.
    pub fn shift(&self, h: f64) -> Self {
        debug_assert!(h >= 0.0);
        Self::coalesce_sorted(self.atoms.iter().map(|&(x, m)| (x + h, m)).collect())
    }

    /// Measure sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::coalesce_sorted(atoms)
    }

    /// `<g 1_window, self>`.
    pub fn integrate(&self, f: &IntegrandSpec) -> f64 {
        self.atoms
            .iter()
            .filter(|(x, _)| f.window.contains(*x))
            .map(|&(x, m)| f.g.eval(x) * m)
            .sum()
    }
}

/// The test functions used throughout: `1`, `x` and `x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    One,
    Chi,
    ChiSquared,
}

impl Integrand {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Integrand::One => 1.0,
            Integrand::Chi => x,
            Integrand::ChiSquared => x * x,
        }
    }
}

/// An interval of `[0, inf)` with independently open or closed ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub lo_closed: bool,
    /// `f64::INFINITY` for an unbounded right end.
    pub hi: f64,
    pub hi_closed: bool,
}

impl Window {
    pub const ALL: Window = Window {
        lo: 0.0,
        lo_closed: true,
        hi: f64::INFINITY,
        hi_closed: false,
    };

    /// `[lo, hi]`
    pub fn closed(lo: f64, hi: f64) -> Self {
        Window { lo, lo_closed: true, hi, hi_closed: true }
    }

    /// `[lo, hi)`
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Window { lo, lo_closed: true, hi, hi_closed: false }
    }

    /// `[lo, inf)`
    pub fn at_least(lo: f64) -> Self {
        Window { lo, lo_closed: true, hi: f64::INFINITY, hi_closed: false }
    }

    /// `(lo, inf)`
    pub fn above(lo: f64) -> Self {
        Window { lo, lo_closed: false, hi: f64::INFINITY, hi_closed: false }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        let lo_ok = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let hi_ok = if self.hi_closed { x <= self.hi } else { x < self.hi };
        lo_ok && hi_ok
    }
}

/// A test function restricted to a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandSpec {
    pub g: Integrand,
    pub window: Window,
}

impl IntegrandSpec {
    pub fn new(g: Integrand, window: Window) -> Self {
        Self { g, window }
    }
}
