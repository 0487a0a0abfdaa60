//! Synaptic resource arithmetic shared by both engines.
//!
//! Plasticity rules never touch weights directly. They move an unbounded
//! per-synapse *resource* W, which a rational squashing map turns into a
//! bounded weight in `[w_min, w_max)`. Every targeted update is balanced by a
//! uniform opposite change on all non-targeted synapses (plus `n_s` silent
//! reservoir synapses) so a neuron's total resource stays constant.

use crate::error::{Error, Result};

/// Hyperparameter bundle shared by the SNN simulator and the digital
/// classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PlasticityParams {
    /// Minimum synaptic weight. Must be negative.
    pub w_min: f64,
    /// Maximum synaptic weight. Must be positive.
    pub w_max: f64,
    /// Anti-Hebbian decrement applied on non-forced firing.
    pub d_h: f64,
    /// Dopamine increment applied on reward.
    pub d_d: f64,
    /// Learning rate of the digital algorithm (plays the role of both d_h
    /// and d_d there).
    pub d: f64,
    /// Number of silent reservoir synapses.
    pub n_s: u32,
    /// Threshold proportionality coefficient, in [0, 1).
    pub alpha: f64,
    /// Pre-firing plasticity window, in ticks.
    pub t_h: u32,
    /// Post-firing dopamine eligibility window, in ticks.
    pub t_p: u32,
    /// Membrane leak time constant, in ticks.
    pub tau_v: f64,
}

impl Default for PlasticityParams {
    fn default() -> Self {
        Self {
            w_min: -1.0,
            w_max: 1.0,
            d_h: 0.1,
            d_d: 0.1,
            d: 0.1,
            n_s: 0,
            alpha: 0.1,
            t_h: 10,
            t_p: 10,
            tau_v: 10.0,
        }
    }
}

impl PlasticityParams {
    /// Uniform learning rate constructor: sets `d_h = d_d = d`.
    pub fn with_rate(d: f64) -> Self {
        Self {
            d,
            d_h: d,
            d_d: d,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_min < 0.0 && 0.0 < self.w_max) {
            return Err(Error::config(format!(
                "require w_min < 0 < w_max, got w_min={}, w_max={}",
                self.w_min, self.w_max
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if self.d_h <= 0.0 || self.d_d <= 0.0 || self.d <= 0.0 {
            return Err(Error::config("learning rates d, d_h, d_d must be positive".to_string()));
        }
        if self.t_h == 0 || self.t_p == 0 {
            return Err(Error::config("plasticity windows t_h, t_p must be positive".to_string()));
        }
        if self.tau_v <= 0.0 {
            return Err(Error::config(format!("tau_v must be positive, got {}", self.tau_v)));
        }
        Ok(())
    }
}

/// Per-neuron synaptic resource state: one entry per connected synapse plus a
/// single scalar for the silent reservoir.
///
/// The `n_s` reservoir synapses always carry identical resource (they never
/// receive targeted deltas, only uniform compensation), so a single scalar
/// represents all of them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceVector {
    /// Resource of each connected synapse.
    pub connected: Vec<f64>,
    /// Resource of each of the `n_s` silent reservoir synapses.
    pub reservoir: f64,
}

impl ResourceVector {
    /// All connected synapses and the reservoir start at the same resource.
    pub fn uniform(len: usize, value: f64) -> Self {
        Self {
            connected: vec![value; len],
            reservoir: value,
        }
    }

    pub fn len(&self) -> usize {
        self.connected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connected.is_empty()
    }

    /// Total resource including the `n_s` reservoir synapses.
    pub fn total(&self, n_s: u32) -> f64 {
        self.connected.iter().sum::<f64>() + f64::from(n_s) * self.reservoir
    }
}

/// Maps a synaptic resource to a weight in `[w_min, w_max)`.
///
/// The map is w_min at W <= 0, strictly increasing for W > 0, and approaches
/// w_max as W grows without bound.
pub fn resource_to_weight(resource: f64, params: &PlasticityParams) -> Result<f64> {
    if params.w_min >= params.w_max {
        return Err(Error::config(format!(
            "require w_min < w_max, got w_min={}, w_max={}",
            params.w_min, params.w_max
        )));
    }
    let span = params.w_max - params.w_min;
    let r = resource.max(0.0);
    Ok(params.w_min + span * r / (span + r))
}

/// The resource at which the weight map crosses zero.
pub fn zero_weight_resource(params: &PlasticityParams) -> Result<f64> {
    if params.w_max == 0.0 {
        return Err(Error::config("w_max must be nonzero".to_string()));
    }
    if !(params.w_min < 0.0 && 0.0 < params.w_max) {
        return Err(Error::config(format!(
            "require w_min < 0 < w_max, got w_min={}, w_max={}",
            params.w_min, params.w_max
        )));
    }
    Ok(-params.w_min * (params.w_max - params.w_min) / params.w_max)
}

/// Threshold potential: base value 1 plus `alpha` times the sum of positive
/// weights.
pub fn threshold_potential(weights: &[f64], alpha: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&alpha));
    1.0 + alpha * weights.iter().filter(|w| **w > 0.0).sum::<f64>()
}

/// Applies targeted resource deltas while keeping the neuron's total resource
/// (connected plus reservoir) constant.
///
/// Every non-targeted connected synapse and every reservoir synapse receives
/// the same compensating amount `-sum(deltas) / (non_targeted + n_s)`.
/// Targeting every connected synapse with `n_s = 0` leaves nowhere to put the
/// compensation and is rejected.
pub fn conserved_update(
    state: &ResourceVector,
    deltas: &[(usize, f64)],
    params: &PlasticityParams,
) -> Result<ResourceVector> {
    if deltas.is_empty() {
        return Ok(state.clone());
    }
    let mut targeted = vec![false; state.len()];
    let mut delta_sum = 0.0;
    for &(idx, delta) in deltas {
        if idx >= state.len() {
            return Err(Error::input(format!(
                "delta index {idx} out of range for {} synapses",
                state.len()
            )));
        }
        debug_assert!(!targeted[idx], "duplicate delta index {idx}");
        targeted[idx] = true;
        delta_sum += delta;
    }
    let non_targeted = state.len() - deltas.len();
    let slots = non_targeted as f64 + f64::from(params.n_s);
    if slots == 0.0 {
        return Err(Error::config(
            "conservation impossible: every synapse targeted and n_s = 0".to_string(),
        ));
    }
    let compensation = -delta_sum / slots;

    let mut next = state.clone();
    for &(idx, delta) in deltas {
        next.connected[idx] += delta;
    }
    for (idx, resource) in next.connected.iter_mut().enumerate() {
        if !targeted[idx] {
            *resource += compensation;
        }
    }
    next.reservoir += compensation;
    Ok(next)
}
