//! The continuous (non-spiking) classifier that mirrors the column network's
//! learning process.
//!
//! State is a growing set of microcolumn rows. Each row holds per-input
//! synaptic resources, the derived weights, and an adaptive threshold. A
//! training step computes normalized potentials `p_a = sum_i(w_ai * n_i) / h_a`
//! and applies exactly one of four update branches; afterwards weights and
//! thresholds are recomputed from the resources.

use crate::error::{Error, Result};
use crate::plasticity::{
    conserved_update, resource_to_weight, threshold_potential, zero_weight_resource,
    PlasticityParams, ResourceVector,
};

/// Spike-count vector describing one example.
///
/// Valid inputs have at least one zero and at least one nonzero entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputVector {
    counts: Vec<u16>,
}

impl InputVector {
    pub fn new(counts: Vec<u16>) -> Result<Self> {
        let zeros = counts.iter().filter(|c| **c == 0).count();
        if zeros == 0 || zeros == counts.len() {
            return Err(Error::input(format!(
                "count vector must contain both zero and nonzero entries \
                 ({zeros} zeros out of {})",
                counts.len()
            )));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// One labelled training example.
#[derive(Debug, Clone)]
pub struct TrainExample {
    pub input: InputVector,
    pub is_target: bool,
}

/// Which comparison gates membership in the depress/potentiate branches.
///
/// The published update rule tests `n_i > 1` inside those branches while the
/// new-row branch and all cardinality terms use `n_i > 0`. `Literal` keeps
/// the rule exactly as printed; `UniformGt0` uses `n_i > 0` everywhere, which
/// also makes every branch conserve row totals exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountThreshold {
    #[default]
    Literal,
    UniformGt0,
}

impl CountThreshold {
    fn member(self, count: u16) -> bool {
        match self {
            CountThreshold::Literal => count > 1,
            CountThreshold::UniformGt0 => count > 0,
        }
    }
}

impl std::str::FromStr for CountThreshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(CountThreshold::Literal),
            "uniform_gt0" => Ok(CountThreshold::UniformGt0),
            other => Err(Error::config(format!(
                "unknown count_threshold mode {other:?} (expected literal or uniform_gt0)"
            ))),
        }
    }
}

impl std::fmt::Display for CountThreshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CountThreshold::Literal => write!(f, "literal"),
            CountThreshold::UniformGt0 => write!(f, "uniform_gt0"),
        }
    }
}

/// Which update branch a training step took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// A new microcolumn row was appended.
    NewRow,
    /// Non-target example: rows above threshold were depressed.
    Depress { rows: Vec<usize> },
    /// Target example, best row below threshold: it was potentiated.
    Potentiate { row: usize },
    /// Target example, best row already above threshold: it stays untouched,
    /// all other rows above threshold are depressed.
    AlreadyLearnt { depressed: Vec<usize> },
    /// Nothing fired and the example was not a target.
    NoOp,
}

#[derive(Debug, Clone)]
struct Row {
    resources: ResourceVector,
    weights: Vec<f64>,
    threshold: f64,
}

impl Row {
    fn refresh(&mut self, params: &PlasticityParams) -> Result<()> {
        for (w, r) in self.weights.iter_mut().zip(&self.resources.connected) {
            *w = resource_to_weight(*r, params)?;
        }
        self.threshold = threshold_potential(&self.weights, params.alpha);
        Ok(())
    }
}

/// Growing-row online classifier.
#[derive(Debug, Clone)]
pub struct DigitalClassifier {
    num_inputs: usize,
    params: PlasticityParams,
    mode: CountThreshold,
    rows: Vec<Row>,
}

impl DigitalClassifier {
    pub fn new(
        num_inputs: usize,
        params: PlasticityParams,
        mode: CountThreshold,
    ) -> Result<Self> {
        params.validate()?;
        if num_inputs < 2 {
            return Err(Error::config(format!(
                "need at least 2 inputs, got {num_inputs}"
            )));
        }
        Ok(Self {
            num_inputs,
            params,
            mode,
            rows: Vec::new(),
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    /// Current microcolumn count N.
    pub fn num_microcolumns(&self) -> usize {
        self.rows.len()
    }

    pub fn params(&self) -> &PlasticityParams {
        &self.params
    }

    pub fn mode(&self) -> CountThreshold {
        self.mode
    }

    pub fn weights(&self, row: usize) -> &[f64] {
        &self.rows[row].weights
    }

    pub fn threshold(&self, row: usize) -> f64 {
        self.rows[row].threshold
    }

    pub fn resources(&self, row: usize) -> &ResourceVector {
        &self.rows[row].resources
    }

    /// Rebuilds a classifier from raw row resources, recomputing weights and
    /// thresholds. Used by model deserialization.
    pub fn from_resources(
        num_inputs: usize,
        params: PlasticityParams,
        mode: CountThreshold,
        resources: Vec<ResourceVector>,
    ) -> Result<Self> {
        let mut c = Self::new(num_inputs, params, mode)?;
        for rv in resources {
            if rv.len() != num_inputs {
                return Err(Error::input(format!(
                    "row has {} synapses, expected {num_inputs}",
                    rv.len()
                )));
            }
            let mut row = Row {
                weights: vec![0.0; num_inputs],
                resources: rv,
                threshold: 1.0,
            };
            row.refresh(&c.params)?;
            c.rows.push(row);
        }
        Ok(c)
    }

    fn check_input(&self, x: &InputVector) -> Result<()> {
        if x.len() != self.num_inputs {
            return Err(Error::input(format!(
                "input has {} entries, classifier expects {}",
                x.len(),
                self.num_inputs
            )));
        }
        Ok(())
    }

    /// Normalized potentials `p_a = sum_i(w_ai * n_i) / h_a`; empty when
    /// there are no rows yet.
    pub fn potentials(&self, x: &InputVector) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                for (w, n) in row.weights.iter().zip(x.counts()) {
                    acc += w * f64::from(*n);
                }
                acc / row.threshold
            })
            .collect())
    }

    /// True when some row's normalized potential exceeds 1.
    pub fn predict(&self, x: &InputVector) -> Result<bool> {
        let p = self.potentials(x)?;
        Ok(p.iter().any(|v| *v > 1.0))
    }

    /// Applies one online update and reports which branch fired.
    pub fn train_step(&mut self, ex: &TrainExample) -> Result<StepOutcome> {
        let potentials = self.potentials(&ex.input)?;
        let counts = ex.input.counts();
        let nothing_fires =
            potentials.is_empty() || potentials.iter().all(|p| *p <= 0.0);

        let outcome = if nothing_fires {
            if ex.is_target {
                self.grow_row(counts)?;
                StepOutcome::NewRow
            } else {
                StepOutcome::NoOp
            }
        } else if !ex.is_target {
            let rows: Vec<usize> = (0..self.rows.len())
                .filter(|a| potentials[*a] > 1.0)
                .collect();
            for &a in &rows {
                self.apply_update(a, counts, Direction::Depress)?;
            }
            StepOutcome::Depress { rows }
        } else {
            // Target example with at least one positive potential.
            let best = argmax(&potentials);
            if potentials[best] <= 1.0 {
                self.apply_update(best, counts, Direction::Potentiate)?;
                StepOutcome::Potentiate { row: best }
            } else {
                let depressed: Vec<usize> = (0..self.rows.len())
                    .filter(|a| *a != best && potentials[*a] > 1.0)
                    .collect();
                for &a in &depressed {
                    self.apply_update(a, counts, Direction::Depress)?;
                }
                StepOutcome::AlreadyLearnt { depressed }
            }
        };
        Ok(outcome)
    }

    /// Runs `train_step` over the whole dataset, `epochs` times.
    pub fn fit(&mut self, data: &[TrainExample], epochs: u32) -> Result<()> {
        for _ in 0..epochs {
            for (idx, ex) in data.iter().enumerate() {
                self.train_step(ex).map_err(|e| {
                    Error::input(format!("example {idx}: {e}"))
                })?;
            }
        }
        Ok(())
    }

    /// New-row branch: active inputs start at `W0 + d`, the rest (and the
    /// reservoir) absorb the compensation.
    fn grow_row(&mut self, counts: &[u16]) -> Result<()> {
        let w0 = zero_weight_resource(&self.params)?;
        let base = ResourceVector::uniform(self.num_inputs, w0);
        let deltas: Vec<(usize, f64)> = counts
            .iter()
            .enumerate()
            .filter(|(_, n)| **n > 0)
            .map(|(i, _)| (i, self.params.d))
            .collect();
        let resources = conserved_update(&base, &deltas, &self.params)?;
        let mut row = Row {
            weights: vec![0.0; self.num_inputs],
            resources,
            threshold: 1.0,
        };
        row.refresh(&self.params)?;
        self.rows.push(row);
        Ok(())
    }

    /// Depress/potentiate branch body, exactly as the update rule prints it:
    /// member synapses move by ±d, every other synapse and the reservoir move
    /// the opposite way by `d * |{n_j > 0}| / (|{n_j = 0}| + n_s)`.
    fn apply_update(
        &mut self,
        row_idx: usize,
        counts: &[u16],
        direction: Direction,
    ) -> Result<()> {
        let active = counts.iter().filter(|n| **n > 0).count() as f64;
        let zero = counts.iter().filter(|n| **n == 0).count() as f64;
        let comp = self.params.d * active / (zero + f64::from(self.params.n_s));
        let (member_delta, other_delta) = match direction {
            Direction::Potentiate => (self.params.d, -comp),
            Direction::Depress => (-self.params.d, comp),
        };
        let row = &mut self.rows[row_idx];
        for (i, resource) in row.resources.connected.iter_mut().enumerate() {
            if self.mode.member(counts[i]) {
                *resource += member_delta;
            } else {
                *resource += other_delta;
            }
        }
        row.resources.reservoir += other_delta;
        row.refresh(&self.params)
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Potentiate,
    Depress,
}

/// First index attaining the maximum (deterministic tie-break).
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
