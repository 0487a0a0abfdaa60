//! Time-stepped simulator of the columnar spiking architecture.
//!
//! One network carries one column (one binary task): microcolumns of
//! L/WTA/REWGATE triplets plus a shared BIASGATE and OUT neuron. Input nodes
//! drive plastic synapses on the L neurons. The class-label node, when
//! active, drives every REWGATE directly and the BIASGATE through a slow
//! 10-tick connection, so bias forcing only starts after the presentation
//! window has ended.
//!
//! Each tick runs the stages in wiring order — activity evolution, BIASGATE,
//! L layer, WTA arbitration, REWGATE, OUT — so a spike propagates through the
//! whole chain within its tick. Plasticity (anti-Hebbian on non-forced L
//! firings, dopamine on REWGATE reward spikes) is applied inline through the
//! conserved resource update.

pub mod neuron;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::EncodedExample;
use crate::error::{Error, Result};
use crate::plasticity::{
    conserved_update, resource_to_weight, threshold_potential, zero_weight_resource,
    PlasticityParams, ResourceVector,
};
use neuron::{activity_tick, gating_spike, ActivityTime, NeuronState};

/// Presentation/silence timing of one example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSchedule {
    pub presentation_ticks: u32,
    pub silence_ticks: u32,
}

impl Default for SimSchedule {
    fn default() -> Self {
        Self {
            presentation_ticks: 10,
            silence_ticks: 10,
        }
    }
}

impl SimSchedule {
    pub fn total_ticks(&self) -> u32 {
        self.presentation_ticks + self.silence_ticks
    }

    pub fn validate(&self) -> Result<()> {
        if self.presentation_ticks == 0 || self.silence_ticks == 0 {
            return Err(Error::config(
                "presentation and silence windows must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Fixed (non-plastic) wiring strengths. Strong links only need to clear the
/// unit threshold; the bias weight is derived so constant BIASGATE drive
/// lifts an idle L neuron across threshold on the last silence tick.
#[derive(Debug, Clone, Copy)]
pub struct FixedWiring {
    /// L -> WTA, WTA -> OUT, label -> REWGATE, label -> BIASGATE.
    pub strong_weight: f64,
    /// WTA -> REWGATE gating weight (activation ticks).
    pub rewgate_activation: i64,
    /// Slow label -> BIASGATE connection, in ticks.
    pub label_to_biasgate_delay: u32,
    /// BIASGATE -> L forcing weight.
    pub bias_weight: f64,
}

impl FixedWiring {
    fn derive(schedule: &SimSchedule, tau_v: f64) -> Self {
        let decay = (-1.0 / tau_v).exp();
        let drive_ticks = schedule.silence_ticks;
        let geometric: f64 = (0..drive_ticks).map(|k| decay.powi(k as i32)).sum();
        // The tiny excess makes the strict u > h comparison succeed on the
        // intended tick despite rounding.
        let bias_weight = (1.0 + 1e-9) / geometric;
        Self {
            strong_weight: 10.0,
            rewgate_activation: 2,
            label_to_biasgate_delay: schedule.presentation_ticks,
            bias_weight,
        }
    }
}

/// Identifies a neuron in trace output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronId {
    L(u16),
    Wta(u16),
    RewGate(u16),
    BiasGate,
    Out,
}

impl std::fmt::Display for NeuronId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NeuronId::L(k) => write!(f, "L{k}"),
            NeuronId::Wta(k) => write!(f, "WTA{k}"),
            NeuronId::RewGate(k) => write!(f, "REWGATE{k}"),
            NeuronId::BiasGate => write!(f, "BIASGATE"),
            NeuronId::Out => write!(f, "OUT"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEventKind {
    Fired { forced: bool },
    AntiHebbian,
    Dopamine,
}

/// One line of the per-tick event trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: u32,
    pub neuron: NeuronId,
    pub kind: TraceEventKind,
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            TraceEventKind::Fired { forced } => {
                if matches!(self.neuron, NeuronId::L(_)) {
                    write!(
                        f,
                        "tick={} neuron={} event=fired forced={}",
                        self.tick, self.neuron, forced
                    )
                } else {
                    write!(f, "tick={} neuron={} event=fired", self.tick, self.neuron)
                }
            }
            TraceEventKind::AntiHebbian => write!(
                f,
                "tick={} neuron={} event=anti_hebbian",
                self.tick, self.neuron
            ),
            TraceEventKind::Dopamine => write!(
                f,
                "tick={} neuron={} event=dopamine",
                self.tick, self.neuron
            ),
        }
    }
}

#[derive(Debug, Clone)]
struct Microcolumn {
    l: NeuronState,
    wta: NeuronState,
    rewgate: NeuronState,
    resources: ResourceVector,
    weights: Vec<f64>,
    /// The most recent L firing has already received its dopamine reward.
    reward_consumed: bool,
}

impl Microcolumn {
    fn fresh(num_inputs: usize, w0: f64) -> Self {
        Self {
            l: NeuronState::new(ActivityTime::PermanentlyActive),
            wta: NeuronState::new(ActivityTime::PermanentlyActive),
            rewgate: NeuronState::new(ActivityTime::Finite(0)),
            resources: ResourceVector::uniform(num_inputs, w0),
            weights: vec![0.0; num_inputs],
            reward_consumed: false,
        }
    }

    fn refresh_weights(&mut self, params: &PlasticityParams) -> Result<()> {
        for (w, r) in self.weights.iter_mut().zip(&self.resources.connected) {
            *w = resource_to_weight(*r, params)?;
        }
        self.l.h = threshold_potential(&self.weights, params.alpha);
        Ok(())
    }
}

/// A reward spike applies to the most recent L firing when that firing is
/// still unrewarded and happened no more than `t_p` ticks ago. Forced and
/// non-forced firings are equally eligible.
fn dopamine_eligible(last_fire: Option<u32>, rewarded: bool, now: u32, t_p: u32) -> bool {
    match last_fire {
        Some(fire_tick) => !rewarded && now - fire_tick <= t_p,
        None => false,
    }
}

/// Synapse indices carrying at least one spike inside the window
/// `(anchor - window, anchor]`, each paired with `delta`.
fn windowed_deltas(
    spike_ticks: &[Vec<u32>],
    anchor: u32,
    window: u32,
    delta: f64,
) -> Vec<(usize, f64)> {
    let lo = i64::from(anchor) - i64::from(window);
    spike_ticks
        .iter()
        .enumerate()
        .filter(|(_, ticks)| {
            ticks
                .iter()
                .any(|t| i64::from(*t) > lo && *t <= anchor)
        })
        .map(|(i, _)| (i, delta))
        .collect()
}

/// One column of the spiking network, wired for a single binary task.
#[derive(Debug, Clone)]
pub struct Network {
    num_inputs: usize,
    params: PlasticityParams,
    schedule: SimSchedule,
    wiring: FixedWiring,
    microcolumns: Vec<Microcolumn>,
    biasgate: NeuronState,
    out: NeuronState,
    /// Spike history of the current example, shared by every L neuron
    /// (all plastic synapses listen to the same input nodes with zero delay).
    input_spike_ticks: Vec<Vec<u32>>,
    decay: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl Network {
    /// Builds a fresh column: all plastic resources at the zero-weight point,
    /// REWGATE neurons inactive, everything else permanently active.
    pub fn new(
        num_inputs: usize,
        num_microcolumns: usize,
        params: PlasticityParams,
        schedule: SimSchedule,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        schedule.validate()?;
        if num_inputs == 0 || num_microcolumns == 0 {
            return Err(Error::config(format!(
                "need at least 1 input and 1 microcolumn, got {num_inputs}/{num_microcolumns}"
            )));
        }
        let w0 = zero_weight_resource(&params)?;
        let wiring = FixedWiring::derive(&schedule, params.tau_v);
        let microcolumns = (0..num_microcolumns)
            .map(|_| Microcolumn::fresh(num_inputs, w0))
            .collect();
        Ok(Self {
            num_inputs,
            decay: (-1.0 / params.tau_v).exp(),
            params,
            schedule,
            wiring,
            microcolumns,
            biasgate: NeuronState::new(ActivityTime::PermanentlyActive),
            out: NeuronState::new(ActivityTime::PermanentlyActive),
            input_spike_ticks: vec![Vec::new(); num_inputs],
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Restores a network from checkpointed resources and RNG position.
    pub fn from_parts(
        num_inputs: usize,
        params: PlasticityParams,
        schedule: SimSchedule,
        seed: u64,
        resources: Vec<ResourceVector>,
        rng_word_pos: u128,
    ) -> Result<Self> {
        let mut net = Self::new(num_inputs, resources.len(), params, schedule, seed)?;
        let params = net.params.clone();
        for (mc, rv) in net.microcolumns.iter_mut().zip(resources) {
            if rv.len() != num_inputs {
                return Err(Error::input(format!(
                    "checkpoint row has {} synapses, expected {num_inputs}",
                    rv.len()
                )));
            }
            mc.resources = rv;
            mc.refresh_weights(&params)?;
        }
        net.rng.set_word_pos(rng_word_pos);
        Ok(net)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_microcolumns(&self) -> usize {
        self.microcolumns.len()
    }

    pub fn params(&self) -> &PlasticityParams {
        &self.params
    }

    pub fn schedule(&self) -> &SimSchedule {
        &self.schedule
    }

    pub fn wiring(&self) -> &FixedWiring {
        &self.wiring
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng_word_pos(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn resources(&self, microcolumn: usize) -> &ResourceVector {
        &self.microcolumns[microcolumn].resources
    }

    pub fn weights(&self, microcolumn: usize) -> &[f64] {
        &self.microcolumns[microcolumn].weights
    }

    pub fn threshold(&self, microcolumn: usize) -> f64 {
        self.microcolumns[microcolumn].l.h
    }

    /// Clears all transient per-example state: membrane potentials, activity
    /// times, firing bookkeeping, and the input spike history. Plastic
    /// resources persist.
    fn reset_transient(&mut self) {
        for mc in &mut self.microcolumns {
            mc.l.u = 0.0;
            mc.l.a = ActivityTime::PermanentlyActive;
            mc.l.last_fire_tick = None;
            mc.l.last_fire_forced = false;
            mc.wta.u = 0.0;
            mc.wta.a = ActivityTime::PermanentlyActive;
            mc.wta.last_fire_tick = None;
            mc.rewgate.u = 0.0;
            mc.rewgate.a = ActivityTime::Finite(0);
            mc.rewgate.last_fire_tick = None;
            mc.reward_consumed = false;
        }
        self.biasgate.u = 0.0;
        self.biasgate.a = ActivityTime::PermanentlyActive;
        self.biasgate.last_fire_tick = None;
        self.out.u = 0.0;
        self.out.a = ActivityTime::PermanentlyActive;
        self.out.last_fire_tick = None;
        for ticks in &mut self.input_spike_ticks {
            ticks.clear();
        }
    }

    /// Runs one example through the presentation and silence windows.
    /// Returns whether OUT fired during the presentation window.
    pub fn simulate_example(
        &mut self,
        ex: &EncodedExample,
        label_active: bool,
        learning: bool,
    ) -> Result<bool> {
        self.simulate_example_traced(ex, label_active, learning, None)
    }

    /// Same as [`simulate_example`](Self::simulate_example), optionally
    /// recording a per-tick event trace.
    pub fn simulate_example_traced(
        &mut self,
        ex: &EncodedExample,
        label_active: bool,
        learning: bool,
        mut trace: Option<&mut Vec<TraceEvent>>,
    ) -> Result<bool> {
        if ex.counts.len() != self.num_inputs {
            return Err(Error::input(format!(
                "example has {} inputs, network expects {}",
                ex.counts.len(),
                self.num_inputs
            )));
        }
        if ex.schedule.len() != self.schedule.presentation_ticks as usize {
            return Err(Error::input(format!(
                "spike schedule spans {} ticks, presentation window is {}",
                ex.schedule.len(),
                self.schedule.presentation_ticks
            )));
        }

        self.reset_transient();
        let total = self.schedule.total_ticks();
        let presentation = self.schedule.presentation_ticks;
        let mut out_fired_in_presentation = false;

        for tick in 1..=total {
            // Activity times evolve first; gating spikes later in the tick
            // override the result.
            for mc in &mut self.microcolumns {
                mc.l.a = activity_tick(mc.l.a);
                mc.wta.a = activity_tick(mc.wta.a);
                mc.rewgate.a = activity_tick(mc.rewgate.a);
            }
            self.biasgate.a = activity_tick(self.biasgate.a);
            self.out.a = activity_tick(self.out.a);

            let input_spikes: &[u32] = if tick <= presentation {
                &ex.schedule[(tick - 1) as usize]
            } else {
                &[]
            };
            for &i in input_spikes {
                self.input_spike_ticks[i as usize].push(tick);
            }

            // BIASGATE: driven by the label node through the slow connection.
            // Spikes emitted after the example would arrive in the next one
            // and are dropped with the rest of the transient state.
            let bias_in = if label_active && tick > self.wiring.label_to_biasgate_delay {
                self.wiring.strong_weight
            } else {
                0.0
            };
            let biasgate_fired = self.biasgate.lif_step(bias_in, self.decay);
            if biasgate_fired {
                self.biasgate.last_fire_tick = Some(tick);
                push_trace(&mut trace, tick, NeuronId::BiasGate, TraceEventKind::Fired {
                    forced: false,
                });
            }

            // L layer: plastic input drive plus bias forcing.
            let mut fired_l: Vec<usize> = Vec::new();
            for (k, mc) in self.microcolumns.iter_mut().enumerate() {
                let mut drive = 0.0;
                for &i in input_spikes {
                    drive += mc.weights[i as usize];
                }
                let forced = biasgate_fired;
                if forced {
                    drive += self.wiring.bias_weight;
                }
                if mc.l.lif_step(drive, self.decay) {
                    mc.l.last_fire_tick = Some(tick);
                    mc.l.last_fire_forced = forced;
                    mc.reward_consumed = false;
                    fired_l.push(k);
                    push_trace(
                        &mut trace,
                        tick,
                        NeuronId::L(k as u16),
                        TraceEventKind::Fired { forced },
                    );
                    if learning && !forced {
                        let deltas = windowed_deltas(
                            &self.input_spike_ticks,
                            tick,
                            self.params.t_h,
                            -self.params.d_h,
                        );
                        if !deltas.is_empty() {
                            mc.resources =
                                conserved_update(&mc.resources, &deltas, &self.params)?;
                            mc.refresh_weights(&self.params)?;
                            push_trace(
                                &mut trace,
                                tick,
                                NeuronId::L(k as u16),
                                TraceEventKind::AntiHebbian,
                            );
                        }
                    }
                }
            }

            // WTA arbitration: among the ready neurons one seeded-random
            // winner fires; every arbitrated potential is cleared so a spike
            // routes through the layer exactly once.
            for (k, mc) in self.microcolumns.iter_mut().enumerate() {
                let drive = if fired_l.contains(&k) {
                    self.wiring.strong_weight
                } else {
                    0.0
                };
                mc.wta.integrate(drive, self.decay);
            }
            let eligible: Vec<usize> = self
                .microcolumns
                .iter()
                .enumerate()
                .filter(|(_, mc)| mc.wta.a.is_active() && mc.wta.u > mc.wta.h)
                .map(|(k, _)| k)
                .collect();
            let winner = match eligible.len() {
                0 => None,
                1 => Some(eligible[0]),
                n => Some(eligible[self.rng.random_range(0..n)]),
            };
            if let Some(w) = winner {
                for &k in &eligible {
                    self.microcolumns[k].wta.u = 0.0;
                }
                self.microcolumns[w].wta.last_fire_tick = Some(tick);
                push_trace(
                    &mut trace,
                    tick,
                    NeuronId::Wta(w as u16),
                    TraceEventKind::Fired { forced: false },
                );
            }

            // REWGATE: the winning WTA activates its gate; the label node
            // supplies the drive. A reward spike applies dopamine to the L
            // neuron of the same microcolumn, at most once per L firing.
            if let Some(w) = winner {
                let mc = &mut self.microcolumns[w];
                mc.rewgate.a = gating_spike(mc.rewgate.a, self.wiring.rewgate_activation)?;
            }
            for (k, mc) in self.microcolumns.iter_mut().enumerate() {
                let drive = if label_active {
                    self.wiring.strong_weight
                } else {
                    0.0
                };
                if mc.rewgate.lif_step(drive, self.decay) {
                    mc.rewgate.last_fire_tick = Some(tick);
                    push_trace(
                        &mut trace,
                        tick,
                        NeuronId::RewGate(k as u16),
                        TraceEventKind::Fired { forced: false },
                    );
                    if learning
                        && dopamine_eligible(
                            mc.l.last_fire_tick,
                            mc.reward_consumed,
                            tick,
                            self.params.t_p,
                        )
                    {
                        let fire_tick = mc.l.last_fire_tick.unwrap();
                        let deltas = windowed_deltas(
                            &self.input_spike_ticks,
                            fire_tick,
                            self.params.t_h,
                            self.params.d_d,
                        );
                        if !deltas.is_empty() {
                            mc.resources =
                                conserved_update(&mc.resources, &deltas, &self.params)?;
                            mc.refresh_weights(&self.params)?;
                        }
                        mc.reward_consumed = true;
                        push_trace(
                            &mut trace,
                            tick,
                            NeuronId::L(k as u16),
                            TraceEventKind::Dopamine,
                        );
                    }
                }
            }

            // OUT: fires on any WTA spike; blocks the BIASGATE for the rest
            // of the example and (during presentation) is the decision.
            let out_drive = if winner.is_some() {
                self.wiring.strong_weight
            } else {
                0.0
            };
            self.out.integrate(out_drive, self.decay);
            if self.out.a.is_active() && self.out.u > self.out.h {
                self.out.u = 0.0;
                self.out.last_fire_tick = Some(tick);
                if tick <= presentation {
                    out_fired_in_presentation = true;
                }
                let remaining = i64::from(total - tick) + 1;
                self.biasgate.a = gating_spike(self.biasgate.a, -remaining)?;
                push_trace(&mut trace, tick, NeuronId::Out, TraceEventKind::Fired {
                    forced: false,
                });
            }
        }
        Ok(out_fired_in_presentation)
    }

    /// Single online pass over labelled examples: the class-label node is
    /// active exactly on target examples.
    pub fn train<'a>(
        &mut self,
        data: impl IntoIterator<Item = (&'a EncodedExample, bool)>,
    ) -> Result<()> {
        for (idx, (ex, is_target)) in data.into_iter().enumerate() {
            self.simulate_example(ex, is_target, true)
                .map_err(|e| Error::input(format!("example {idx}: {e}")))?;
        }
        Ok(())
    }

    /// Inference run: label node silent, plasticity off.
    pub fn classify(&mut self, ex: &EncodedExample) -> Result<bool> {
        self.simulate_example(ex, false, false)
    }
}

fn push_trace(
    trace: &mut Option<&mut Vec<TraceEvent>>,
    tick: u32,
    neuron: NeuronId,
    kind: TraceEventKind,
) {
    if let Some(events) = trace.as_deref_mut() {
        events.push(TraceEvent { tick, neuron, kind });
    }
}
