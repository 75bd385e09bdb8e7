//! Stochastic primitives: interarrival, service and initial-size laws, and
//! the sampled trace every policy is run on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SplitMix64};

/// Resolution of the time grid every sampled value is rounded to.
///
/// Sums and differences of multiples of `2^-32` below `2^21` are exact in
/// `f64`, so event epochs computed along different schedules agree bit for
/// bit whenever they agree mathematically.
pub const TIME_QUANTUM: f64 = 1.0 / 4_294_967_296.0;

const PROB_SUM_TOLERANCE: f64 = 1e-12;

/// Round a sampled value onto the `TIME_QUANTUM` grid.
#[inline]
pub fn quantize(x: f64) -> f64 {
    (x / TIME_QUANTUM).round() * TIME_QUANTUM
}

/// A sampleable law on the positive half-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Pareto { shape: f64, scale: f64 },
    /// `(value, probability)` pairs.
    DiscreteAtoms { atoms: Vec<(f64, f64)> },
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "{name} must be finite and > 0, got {x}"
        )))
    }
}

impl DistributionSpec {
    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Deterministic { .. } => "deterministic",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Pareto { .. } => "pareto",
            DistributionSpec::DiscreteAtoms { .. } => "discrete_atoms",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Exponential { rate } => positive("rate", *rate),
            DistributionSpec::Deterministic { value } => positive("value", *value),
            DistributionSpec::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return Err(Error::InvalidDistribution(format!(
                        "uniform needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
            DistributionSpec::Pareto { shape, scale } => {
                positive("shape", *shape)?;
                positive("scale", *scale)
            }
            DistributionSpec::DiscreteAtoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidDistribution(
                        "discrete law needs at least one atom".into(),
                    ));
                }
                let mut total = 0.0;
                for &(value, prob) in atoms {
                    positive("atom value", value)?;
                    positive("atom probability", prob)?;
                    total += prob;
                }
                if (total - 1.0).abs() > PROB_SUM_TOLERANCE {
                    return Err(Error::InvalidDistribution(format!(
                        "atom probabilities sum to {total}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Analytic mean.
    pub fn mean(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            DistributionSpec::Exponential { rate } => 1.0 / rate,
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::Pareto { shape, scale } => {
                if *shape <= 1.0 {
                    return Err(Error::InfiniteMean { shape: *shape });
                }
                shape * scale / (shape - 1.0)
            }
            DistributionSpec::DiscreteAtoms { atoms } => atoms.iter().map(|(v, p)| v * p).sum(),
        })
    }

    /// Left-continuous quantile `inf { x : F(x) >= p }` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        Ok(match self {
            DistributionSpec::Exponential { rate } => -(-p).ln_1p() / rate,
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Uniform { lo, hi } => lo + (hi - lo) * p,
            DistributionSpec::Pareto { shape, scale } => scale * (1.0 - p).powf(-1.0 / shape),
            DistributionSpec::DiscreteAtoms { atoms } => {
                let mut sorted = atoms.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut cum = 0.0;
                let mut out = sorted[sorted.len() - 1].0;
                for (v, q) in sorted {
                    cum += q;
                    if cum >= p - PROB_SUM_TOLERANCE {
                        out = v;
                        break;
                    }
                }
                out
            }
        })
    }

    /// Inverse-CDF transform of a uniform `u` in `[0, 1)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            DistributionSpec::Exponential { rate } => -(-u).ln_1p() / rate,
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Uniform { lo, hi } => lo + (hi - lo) * u,
            DistributionSpec::Pareto { shape, scale } => scale * (1.0 - u).powf(-1.0 / shape),
            DistributionSpec::DiscreteAtoms { atoms } => {
                let mut cum = 0.0;
                for &(v, p) in atoms {
                    cum += p;
                    if u < cum {
                        return v;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }

    /// Draw one variate. Always consumes exactly one uniform, including for
    /// the deterministic law, so streams stay aligned across laws.
    pub fn sample(&self, rng: &mut SplitMix64) -> f64 {
        self.inverse_cdf(rng.next_uniform())
    }

    /// The same law with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DistributionSpec {
        match self {
            DistributionSpec::Exponential { rate } => DistributionSpec::Exponential {
                rate: rate / factor,
            },
            DistributionSpec::Deterministic { value } => DistributionSpec::Deterministic {
                value: value * factor,
            },
            DistributionSpec::Uniform { lo, hi } => DistributionSpec::Uniform {
                lo: lo * factor,
                hi: hi * factor,
            },
            DistributionSpec::Pareto { shape, scale } => DistributionSpec::Pareto {
                shape: *shape,
                scale: scale * factor,
            },
            DistributionSpec::DiscreteAtoms { atoms } => DistributionSpec::DiscreteAtoms {
                atoms: atoms.iter().map(|&(v, p)| (v * factor, p)).collect(),
            },
        }
    }
}

/// Model parameters shared by every `r` in a scaled family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub interarrival: DistributionSpec,
    pub service: DistributionSpec,
    /// Initial jobs per unit of `r`.
    pub initial_density: f64,
    pub initial_size: DistributionSpec,
    /// Horizon `T` on fluid scale; the `r`-th model runs to `r * T`.
    pub horizon: f64,
    pub base_seed: u64,
    /// Law of the first gap for a delayed renewal stream. Ordinary renewal
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_gap: Option<DistributionSpec>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.interarrival.validate()?;
        self.service.validate()?;
        self.initial_size.validate()?;
        if let Some(first) = &self.first_gap {
            first.validate()?;
        }
        if !(self.initial_density.is_finite() && self.initial_density >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "initial_density must be >= 0, got {}",
                self.initial_density
            )));
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "horizon must be >= 0, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Arrival rate `1 / E[interarrival]`.
    pub fn arrival_rate(&self) -> Result<f64> {
        Ok(1.0 / self.interarrival.mean()?)
    }

    /// `rho = alpha * E[service]`.
    pub fn traffic_intensity(&self) -> Result<f64> {
        traffic_intensity(self)
    }

    /// Copy of this model with the interarrival law rescaled so that the
    /// traffic intensity equals `rho`.
    pub fn with_traffic_intensity(&self, rho: f64) -> Result<ModelConfig> {
        positive("rho", rho).map_err(|_| Error::InvalidConfig(format!("rho must be > 0, got {rho}")))?;
        let current = self.traffic_intensity()?;
        let mut out = self.clone();
        out.interarrival = self.interarrival.scaled(current / rho);
        Ok(out)
    }
}

/// `rho = alpha * E[service]` with `alpha = 1 / E[interarrival]`.
pub fn traffic_intensity(config: &ModelConfig) -> Result<f64> {
    Ok(config.service.mean()? / config.interarrival.mean()?)
}

/// One realized sample path of the primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveTrace {
    /// Sizes `w_{-Z0}, ..., w_{-1}` in index order.
    pub initial_sizes: Vec<f64>,
    /// Arrival epochs, nondecreasing.
    pub arrival_epochs: Vec<f64>,
    /// `w_1, w_2, ...`, aligned with `arrival_epochs`.
    pub service_sizes: Vec<f64>,
    /// Scale index this trace was drawn for.
    pub r: f64,
    /// Seed of the `(r, replicate)` cell.
    pub seed: u64,
}

impl PrimitiveTrace {
    /// Build a trace from explicit values, checking the invariants.
    pub fn new(initial_sizes: Vec<f64>, arrival_epochs: Vec<f64>, service_sizes: Vec<f64>) -> Result<Self> {
        let trace = PrimitiveTrace {
            initial_sizes,
            arrival_epochs,
            service_sizes,
            r: 1.0,
            seed: 0,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrival_epochs.len() != self.service_sizes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} arrival epochs but {} service sizes",
                self.arrival_epochs.len(),
                self.service_sizes.len()
            )));
        }
        if let Some(w) = self
            .initial_sizes
            .iter()
            .chain(&self.service_sizes)
            .find(|w| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidConfig(format!("job size {w} is not > 0")));
        }
        let mut prev = 0.0;
        for &a in &self.arrival_epochs {
            if !(a.is_finite() && a >= prev) {
                return Err(Error::InvalidConfig(format!(
                    "arrival epochs must be finite, >= 0 and nondecreasing (saw {a} after {prev})"
                )));
            }
            prev = a;
        }
        Ok(())
    }

    /// Number of initial jobs `Z0`.
    pub fn initial_count(&self) -> usize {
        self.initial_sizes.len()
    }

    /// `E(t)`: arrivals in `(0, t]`.
    pub fn arrivals_by(&self, t: f64) -> usize {
        self.arrival_epochs.partition_point(|&a| a <= t)
    }

    /// Initial workload `W(0)`.
    pub fn initial_workload(&self) -> f64 {
        self.initial_sizes.iter().sum()
    }

    /// Paper-style job index of a job position (initial jobs first).
    pub fn index_of(&self, position: usize) -> i64 {
        let z0 = self.initial_sizes.len() as i64;
        let p = position as i64;
        if p < z0 {
            p - z0
        } else {
            p - z0 + 1
        }
    }

    /// Total number of jobs in the trace.
    pub fn job_count(&self) -> usize {
        self.initial_sizes.len() + self.service_sizes.len()
    }
}

fn draw_size(dist: &DistributionSpec, rng: &mut SplitMix64) -> f64 {
    loop {
        let w = quantize(dist.sample(rng));
        if w > 0.0 {
            return w;
        }
    }
}

/// Sample the primitives of the `r`-th model, replicate `replicate`.
///
/// Initial jobs number `round(r * initial_density)`; arrivals are generated
/// up to and including unscaled time `r * horizon`. All values are rounded to
/// [`TIME_QUANTUM`]; a size that rounds to zero is redrawn.
pub fn sample_trace(config: &ModelConfig, r: f64, replicate: u64) -> Result<PrimitiveTrace> {
    config.validate()?;
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::InvalidConfig(format!("scale r must be >= 1, got {r}")));
    }
    let child = rng::child_seed(config.base_seed, r, replicate);
    let mut initial_rng = SplitMix64::new(rng::stream_seed(child, rng::STREAM_INITIAL));
    let mut gap_rng = SplitMix64::new(rng::stream_seed(child, rng::STREAM_INTERARRIVAL));
    let mut service_rng = SplitMix64::new(rng::stream_seed(child, rng::STREAM_SERVICE));

    let z0 = (r * config.initial_density).round() as usize;
    let initial_sizes = (0..z0)
        .map(|_| draw_size(&config.initial_size, &mut initial_rng))
        .collect();

    let end = r * config.horizon;
    let mut arrival_epochs = Vec::new();
    let mut t = 0.0;
    let mut first = true;
    loop {
        let law = match (&config.first_gap, first) {
            (Some(first_law), true) => first_law,
            _ => &config.interarrival,
        };
        first = false;
        t += quantize(law.sample(&mut gap_rng));
        if t > end {
            break;
        }
        arrival_epochs.push(t);
    }
    let service_sizes = (0..arrival_epochs.len())
        .map(|_| draw_size(&config.service, &mut service_rng))
        .collect();

    Ok(PrimitiveTrace {
        initial_sizes,
        arrival_epochs,
        service_sizes,
        r,
        seed: child,
    })
}
