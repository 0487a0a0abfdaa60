pub mod oracle;

use colanet_core::digital::{
    CountThreshold, DigitalClassifier, InputVector, StepOutcome, TrainExample,
};
use colanet_core::plasticity::PlasticityParams;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oracle::{OracleBranch, OracleParams, OracleState};

/// Tally of update branches hit while fuzzing.
#[derive(Debug, Default)]
pub struct BranchHistogram {
    pub new_row: usize,
    pub depress: usize,
    pub potentiate: usize,
    pub already_learnt: usize,
    pub noop: usize,
}

/// Runs randomized tiny scenarios through both the implementation and the
/// oracle transcription, requiring identical branch choices and resources
/// within 1e-12. Returns the number of steps compared and the branch tally.
pub fn compare_with_oracle(
    scenarios: usize,
    steps_per_scenario: usize,
    seed: u64,
    mode: CountThreshold,
) -> (usize, BranchHistogram) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = BranchHistogram::default();
    let mut compared = 0;

    for scenario in 0..scenarios {
        let num_inputs = rng.random_range(2..=6usize);
        let params = PlasticityParams {
            w_min: -rng.random_range(0.1..=2.0),
            w_max: rng.random_range(0.1..=2.0),
            n_s: rng.random_range(0..=4u32),
            alpha: rng.random_range(0.0..0.5),
            ..PlasticityParams::with_rate(rng.random_range(0.01..=1.0))
        };
        let oracle_params = OracleParams {
            w_min: params.w_min,
            w_max: params.w_max,
            d: params.d,
            n_s: params.n_s,
            alpha: params.alpha,
            literal_gt1: mode == CountThreshold::Literal,
        };
        let mut model = DigitalClassifier::new(num_inputs, params, mode).unwrap();
        let mut reference = OracleState::empty(num_inputs);

        for step in 0..steps_per_scenario {
            let counts = random_counts(&mut rng, num_inputs);
            let is_target = rng.random_bool(0.5);
            let outcome = model
                .train_step(&TrainExample {
                    input: InputVector::new(counts.clone()).unwrap(),
                    is_target,
                })
                .unwrap();
            let expected = reference.step(&counts, is_target, &oracle_params);
            assert!(
                branches_match(&outcome, &expected),
                "scenario {scenario} step {step}: implementation took {outcome:?}, \
                 oracle took {expected:?} (counts {counts:?}, target {is_target})"
            );
            tally(&mut histogram, &expected);

            assert_eq!(model.num_microcolumns(), reference.resources.len());
            for a in 0..reference.resources.len() {
                for i in 0..num_inputs {
                    let got = model.resources(a).connected[i];
                    let want = reference.resources[a][i];
                    assert!(
                        (got - want).abs() < 1e-12,
                        "scenario {scenario} step {step}: resource[{a}][{i}] \
                         {got} != {want}"
                    );
                    let got_w = model.weights(a)[i];
                    let want_w = reference.weights[a][i];
                    assert!(
                        (got_w - want_w).abs() < 1e-12,
                        "weight[{a}][{i}] {got_w} != {want_w}"
                    );
                }
                assert!(
                    (model.threshold(a) - reference.thresholds[a]).abs() < 1e-12,
                    "threshold[{a}] mismatch"
                );
            }
            compared += 1;
        }
    }
    (compared, histogram)
}

/// Counts in 0..=3 with at least one zero and one nonzero entry.
pub fn random_counts(rng: &mut ChaCha8Rng, num_inputs: usize) -> Vec<u16> {
    loop {
        let counts: Vec<u16> = (0..num_inputs).map(|_| rng.random_range(0..=3)).collect();
        let zeros = counts.iter().filter(|c| **c == 0).count();
        if zeros > 0 && zeros < num_inputs {
            return counts;
        }
    }
}

fn branches_match(got: &StepOutcome, want: &OracleBranch) -> bool {
    match (got, want) {
        (StepOutcome::NewRow, OracleBranch::NewRow) => true,
        (StepOutcome::NoOp, OracleBranch::NoOp) => true,
        (StepOutcome::Depress { rows }, OracleBranch::Depress(expected)) => rows == expected,
        (StepOutcome::Potentiate { row }, OracleBranch::Potentiate(expected)) => {
            row == expected
        }
        (StepOutcome::AlreadyLearnt { depressed }, OracleBranch::AlreadyLearnt(expected)) => {
            depressed == expected
        }
        _ => false,
    }
}

fn tally(histogram: &mut BranchHistogram, branch: &OracleBranch) {
    match branch {
        OracleBranch::NewRow => histogram.new_row += 1,
        OracleBranch::Depress(_) => histogram.depress += 1,
        OracleBranch::Potentiate(_) => histogram.potentiate += 1,
        OracleBranch::AlreadyLearnt(_) => histogram.already_learnt += 1,
        OracleBranch::NoOp => histogram.noop += 1,
    }
}
