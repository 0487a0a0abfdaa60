//! Deliberately naive transcription of the 32-line digital update procedure,
//! used as an independent oracle for the library implementation.
//!
//! Everything here is written from scratch against the published formulas —
//! nothing is shared with the `colanet_core` implementation path. State is
//! the bare published one: the resource and weight matrices and the threshold
//! vector (no reservoir tracking).

/// Hyperparameters of the oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub w_min: f64,
    pub w_max: f64,
    pub d: f64,
    pub n_s: u32,
    pub alpha: f64,
    /// true: membership tests read `n_i > 1` as printed; false: `n_i > 0`.
    pub literal_gt1: bool,
}

#[derive(Debug, Clone)]
pub struct OracleState {
    pub num_inputs: usize,
    /// Resource matrix W_ai, one row per microcolumn.
    pub resources: Vec<Vec<f64>>,
    /// Weight matrix w_ai.
    pub weights: Vec<Vec<f64>>,
    /// Threshold vector h_a.
    pub thresholds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleBranch {
    NewRow,
    Depress(Vec<usize>),
    Potentiate(usize),
    AlreadyLearnt(Vec<usize>),
    NoOp,
}

fn zero_weight_resource(p: &OracleParams) -> f64 {
    -p.w_min * (p.w_max - p.w_min) / p.w_max
}

fn weight_of(resource: f64, p: &OracleParams) -> f64 {
    let clipped = if resource > 0.0 { resource } else { 0.0 };
    p.w_min + (p.w_max - p.w_min) * clipped / (p.w_max - p.w_min + clipped)
}

fn threshold_of(weights: &[f64], p: &OracleParams) -> f64 {
    let mut sum = 0.0;
    for w in weights {
        sum += if *w > 0.0 { *w } else { 0.0 };
    }
    1.0 + p.alpha * sum
}

impl OracleState {
    pub fn empty(num_inputs: usize) -> Self {
        Self {
            num_inputs,
            resources: Vec::new(),
            weights: Vec::new(),
            thresholds: Vec::new(),
        }
    }

    fn recalc(&mut self, p: &OracleParams) {
        self.weights = self
            .resources
            .iter()
            .map(|row| row.iter().map(|r| weight_of(*r, p)).collect())
            .collect();
        self.thresholds = self
            .weights
            .iter()
            .map(|row| threshold_of(row, p))
            .collect();
    }

    /// One update step, following the printed procedure line by line.
    pub fn step(&mut self, counts: &[u16], is_target: bool, p: &OracleParams) -> OracleBranch {
        assert_eq!(counts.len(), self.num_inputs);

        // line 1: p_a <- sum_i w_ai n_i / h_a (empty when N = 0)
        let potentials: Vec<f64> = (0..self.resources.len())
            .map(|a| {
                let mut acc = 0.0;
                for i in 0..self.num_inputs {
                    acc += self.weights[a][i] * counts[i] as f64;
                }
                acc / self.thresholds[a]
            })
            .collect();

        let member = |n: u16| if p.literal_gt1 { n > 1 } else { n > 0 };
        let active = counts.iter().filter(|n| **n > 0).count() as f64;
        let zeros = counts.iter().filter(|n| **n == 0).count() as f64;
        let compensation = p.d * active / (zeros + p.n_s as f64);

        let max_p = potentials.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        // line 2
        let branch = if potentials.is_empty() || max_p <= 0.0 {
            if is_target {
                // lines 4-10
                let w0 = zero_weight_resource(p);
                let mut row = Vec::with_capacity(self.num_inputs);
                for i in 0..self.num_inputs {
                    if counts[i] > 0 {
                        row.push(w0 + p.d);
                    } else {
                        row.push(w0 - compensation);
                    }
                }
                self.resources.push(row);
                OracleBranch::NewRow
            } else {
                OracleBranch::NoOp
            }
        } else if !is_target {
            // lines 11-17
            let hit: Vec<usize> = (0..self.resources.len())
                .filter(|a| potentials[*a] > 1.0)
                .collect();
            for &a in &hit {
                for i in 0..self.num_inputs {
                    if member(counts[i]) {
                        self.resources[a][i] -= p.d;
                    } else {
                        self.resources[a][i] += compensation;
                    }
                }
            }
            OracleBranch::Depress(hit)
        } else {
            // line 19: argmax with lowest index on ties
            let mut b = 0;
            for a in 1..potentials.len() {
                if potentials[a] > potentials[b] {
                    b = a;
                }
            }
            if potentials[b] <= 1.0 {
                // lines 20-25
                for i in 0..self.num_inputs {
                    if member(counts[i]) {
                        self.resources[b][i] += p.d;
                    } else {
                        self.resources[b][i] -= compensation;
                    }
                }
                OracleBranch::Potentiate(b)
            } else {
                // lines 26-32
                let hit: Vec<usize> = (0..self.resources.len())
                    .filter(|a| *a != b && potentials[*a] > 1.0)
                    .collect();
                for &a in &hit {
                    for i in 0..self.num_inputs {
                        if member(counts[i]) {
                            self.resources[a][i] -= p.d;
                        } else {
                            self.resources[a][i] += compensation;
                        }
                    }
                }
                OracleBranch::AlreadyLearnt(hit)
            }
        };

        // weights then thresholds are recomputed after every step
        self.recalc(p);
        branch
    }
}
