//! LIF neuron state with the gated active/inactive regime.

use crate::error::{Error, Result};

/// Activity time. Positive values count down to zero (temporarily active),
/// negative values count up toward -1 and then flip to permanently active.
/// Inactive neurons ignore presynaptic spikes and cannot fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivityTime {
    Finite(i64),
    PermanentlyActive,
}

impl ActivityTime {
    pub fn is_active(self) -> bool {
        match self {
            ActivityTime::PermanentlyActive => true,
            ActivityTime::Finite(v) => v > 0,
        }
    }
}

/// One tick of activity-time evolution.
pub fn activity_tick(a: ActivityTime) -> ActivityTime {
    match a {
        ActivityTime::PermanentlyActive => ActivityTime::PermanentlyActive,
        ActivityTime::Finite(v) if v < -1 => ActivityTime::Finite(v + 1),
        ActivityTime::Finite(-1) => ActivityTime::PermanentlyActive,
        ActivityTime::Finite(0) => ActivityTime::Finite(0),
        ActivityTime::Finite(v) => ActivityTime::Finite(v - 1),
    }
}

/// Effect of a spike arriving at a gating synapse of weight `omega`:
/// negative weights deactivate (min), positive weights activate (max).
pub fn gating_spike(a: ActivityTime, omega: i64) -> Result<ActivityTime> {
    match omega.cmp(&0) {
        std::cmp::Ordering::Equal => Err(Error::config(
            "gating synapse weight must be nonzero".to_string(),
        )),
        std::cmp::Ordering::Less => Ok(match a {
            ActivityTime::PermanentlyActive => ActivityTime::Finite(omega),
            ActivityTime::Finite(v) => ActivityTime::Finite(v.min(omega)),
        }),
        std::cmp::Ordering::Greater => Ok(match a {
            ActivityTime::PermanentlyActive => ActivityTime::PermanentlyActive,
            ActivityTime::Finite(v) => ActivityTime::Finite(v.max(omega)),
        }),
    }
}

/// Membrane state of one neuron.
#[derive(Debug, Clone)]
pub struct NeuronState {
    /// Membrane potential.
    pub u: f64,
    /// Activity time deciding the active/inactive regime.
    pub a: ActivityTime,
    /// Threshold potential. 1 for every neuron except the learning ones,
    /// where it tracks the positive-weight sum.
    pub h: f64,
    pub last_fire_tick: Option<u32>,
    pub last_fire_forced: bool,
}

impl NeuronState {
    pub fn new(a: ActivityTime) -> Self {
        Self {
            u: 0.0,
            a,
            h: 1.0,
            last_fire_tick: None,
            last_fire_forced: false,
        }
    }

    /// Decay-then-integrate step. Inactive neurons keep decaying but ignore
    /// the incoming drive.
    pub fn integrate(&mut self, input: f64, decay: f64) {
        self.u *= decay;
        if self.a.is_active() {
            self.u += input;
        }
    }

    /// Fires when the potential strictly exceeds the threshold; the
    /// potential then drops by the threshold.
    pub fn fire_if_above(&mut self) -> bool {
        if self.a.is_active() && self.u > self.h {
            self.u -= self.h;
            true
        } else {
            false
        }
    }

    /// Full LIF tick: decay, integrate, threshold check.
    pub fn lif_step(&mut self, input: f64, decay: f64) -> bool {
        self.integrate(input, decay);
        self.fire_if_above()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activity_counts_down_and_saturates_at_zero() {
        assert_eq!(activity_tick(ActivityTime::Finite(5)), ActivityTime::Finite(4));
        assert_eq!(activity_tick(ActivityTime::Finite(1)), ActivityTime::Finite(0));
        assert_eq!(activity_tick(ActivityTime::Finite(0)), ActivityTime::Finite(0));
    }

    #[test]
    fn negative_activity_counts_up_then_turns_permanent() {
        assert_eq!(activity_tick(ActivityTime::Finite(-3)), ActivityTime::Finite(-2));
        assert_eq!(activity_tick(ActivityTime::Finite(-2)), ActivityTime::Finite(-1));
        assert_eq!(
            activity_tick(ActivityTime::Finite(-1)),
            ActivityTime::PermanentlyActive
        );
        assert_eq!(
            activity_tick(ActivityTime::PermanentlyActive),
            ActivityTime::PermanentlyActive
        );
    }

    #[test]
    fn gating_activates_and_deactivates() {
        assert_eq!(
            gating_spike(ActivityTime::Finite(0), 20).unwrap(),
            ActivityTime::Finite(20)
        );
        assert_eq!(
            gating_spike(ActivityTime::Finite(50), -5).unwrap(),
            ActivityTime::Finite(-5)
        );
        // max with permanently active stays permanently active
        assert_eq!(
            gating_spike(ActivityTime::PermanentlyActive, 3).unwrap(),
            ActivityTime::PermanentlyActive
        );
        // negative gating pulls even a permanently active neuron down
        assert_eq!(
            gating_spike(ActivityTime::PermanentlyActive, -4).unwrap(),
            ActivityTime::Finite(-4)
        );
        assert!(gating_spike(ActivityTime::Finite(0), 0).is_err());
    }

    #[test]
    fn lif_decay_matches_closed_form() {
        let mut n = NeuronState::new(ActivityTime::PermanentlyActive);
        n.u = 1.0;
        let decay = (-1.0f64 / 10.0).exp();
        assert!(!n.lif_step(0.0, decay));
        assert!((n.u - (-0.1f64).exp()).abs() < 1e-15);

        let mut z = NeuronState::new(ActivityTime::PermanentlyActive);
        assert!(!z.lif_step(0.0, decay));
        assert_eq!(z.u, 0.0);
    }

    #[test]
    fn lif_fires_and_decrements_by_threshold() {
        let mut n = NeuronState::new(ActivityTime::PermanentlyActive);
        n.u = 0.5;
        let decay = (-1.0f64 / 10.0).exp();
        // 0.5*exp(-0.1) + 0.8 = 1.25242 > 1 -> fire, residual 0.25242
        assert!(n.lif_step(0.8, decay));
        let expected = 0.5 * (-0.1f64).exp() + 0.8 - 1.0;
        assert!((n.u - expected).abs() < 1e-12);
    }

    #[test]
    fn inactive_neuron_ignores_drive_and_never_fires() {
        let mut n = NeuronState::new(ActivityTime::Finite(0));
        n.u = 0.9;
        let decay = (-1.0f64 / 10.0).exp();
        assert!(!n.lif_step(100.0, decay));
        assert!((n.u - 0.9 * decay).abs() < 1e-15);
    }
}
