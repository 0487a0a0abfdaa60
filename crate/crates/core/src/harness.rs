//! Experiment runner: trains the selected engine(s) on the ten one-vs-rest
//! tasks, evaluates accuracies, compares the engines with a paired t-test,
//! and writes CSV/text reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::{load_idx, make_binary_tasks, BinaryTask, RawImage};
use crate::digital::{CountThreshold, DigitalClassifier, TrainExample};
use crate::error::{Error, Result};
use crate::model_io;
use crate::plasticity::PlasticityParams;
use crate::snn::{Network, SimSchedule};
use crate::stats::{paired_t_test, TTestResult};

/// Which engine(s) an experiment trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Digital,
    Snn,
    Both,
}

impl Engine {
    pub fn runs_digital(self) -> bool {
        matches!(self, Engine::Digital | Engine::Both)
    }

    pub fn runs_snn(self) -> bool {
        matches!(self, Engine::Snn | Engine::Both)
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "digital" => Ok(Engine::Digital),
            "snn" => Ok(Engine::Snn),
            "both" => Ok(Engine::Both),
            other => Err(Error::config(format!(
                "unknown engine {other:?} (expected digital, snn, or both)"
            ))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Digital => write!(f, "digital"),
            Engine::Snn => write!(f, "snn"),
            Engine::Both => write!(f, "both"),
        }
    }
}

/// Full description of one experiment. The file format is line-oriented
/// `key = value` text; see [`ExperimentConfig::from_file`].
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub params: PlasticityParams,
    pub s_max: u16,
    pub microcolumns: usize,
    pub seeds: Vec<u64>,
    pub subsample: Option<(usize, usize)>,
    pub count_threshold: CountThreshold,
    pub schedule: SimSchedule,
    pub epochs: u32,
    pub save_models: bool,
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Digital,
            params: PlasticityParams::default(),
            s_max: 10,
            microcolumns: 16,
            seeds: vec![1, 2, 3, 4],
            subsample: None,
            count_threshold: CountThreshold::Literal,
            schedule: SimSchedule::default(),
            epochs: 1,
            save_models: false,
            data_dir: PathBuf::from("data/mnist"),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Parses a `key = value` config file. Blank lines and `#` comments are
    /// skipped; unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!(
                    "{}:{}: expected `key = value`, found {line:?}",
                    path.display(),
                    idx + 1
                ))
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::config(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        }
        Ok(config)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| Error::config(format!("bad value {value:?} for {key}: {e}")))
        }
        match key {
            "engine" => self.engine = value.parse()?,
            "w_min" => self.params.w_min = parse(key, value)?,
            "w_max" => self.params.w_max = parse(key, value)?,
            "d" => {
                let d: f64 = parse(key, value)?;
                self.params.d = d;
                self.params.d_h = d;
                self.params.d_d = d;
            }
            "d_h" => self.params.d_h = parse(key, value)?,
            "d_d" => self.params.d_d = parse(key, value)?,
            "n_s" => self.params.n_s = parse(key, value)?,
            "alpha" => self.params.alpha = parse(key, value)?,
            "t_h" => self.params.t_h = parse(key, value)?,
            "t_p" => self.params.t_p = parse(key, value)?,
            "tau_v" => self.params.tau_v = parse(key, value)?,
            "s_max" => self.s_max = parse(key, value)?,
            "microcolumns" => self.microcolumns = parse(key, value)?,
            "seeds" => self.seeds = parse_list(value)?,
            "subsample" => self.subsample = Some(parse_subsample(value)?),
            "count_threshold" => self.count_threshold = value.parse()?,
            "presentation_ticks" => self.schedule.presentation_ticks = parse(key, value)?,
            "silence_ticks" => self.schedule.silence_ticks = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "save_models" => self.save_models = parse(key, value)?,
            "data_dir" => self.data_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(Error::config(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.schedule.validate()?;
        if self.engine.runs_snn() && self.seeds.is_empty() {
            return Err(Error::config(
                "SNN runs need at least one seed".to_string(),
            ));
        }
        if self.s_max == 0 || u32::from(self.s_max) > self.schedule.presentation_ticks {
            return Err(Error::config(format!(
                "s_max must lie in [1, presentation_ticks], got {}",
                self.s_max
            )));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be positive".to_string()));
        }
        Ok(())
    }
}

pub fn parse_list(value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| Error::config(format!("bad seed {s:?}: {e}")))
        })
        .collect()
}

pub fn parse_subsample(value: &str) -> Result<(usize, usize)> {
    let (train, test) = value
        .split_once(',')
        .ok_or_else(|| Error::config(format!("subsample must be `N,M`, got {value:?}")))?;
    Ok((
        train
            .trim()
            .parse()
            .map_err(|e| Error::config(format!("bad subsample train count: {e}")))?,
        test.trim()
            .parse()
            .map_err(|e| Error::config(format!("bad subsample test count: {e}")))?,
    ))
}

/// Outcome of training/evaluating one engine on one task.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub task: u8,
    pub engine: Engine,
    /// 0 for the deterministic digital engine.
    pub seed: u64,
    /// Percent correct on the test split.
    pub accuracy: f64,
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

/// Per-task engine comparison plus the paired t-test over the differences.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub t_test: TTestResult,
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub task: u8,
    pub digital_accuracy: f64,
    pub snn_mean_accuracy: f64,
    /// digital minus SNN, in accuracy points.
    pub diff: f64,
}

/// Locates the four standard MNIST files under `data_dir`, preferring the
/// uncompressed name and falling back to `<name>.gz`.
pub fn mnist_paths(data_dir: &Path) -> Result<[PathBuf; 4]> {
    const NAMES: [&str; 4] = [
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    ];
    let mut out = Vec::with_capacity(4);
    for name in NAMES {
        let plain = data_dir.join(name);
        let gz = data_dir.join(format!("{name}.gz"));
        if plain.exists() {
            out.push(plain);
        } else if gz.exists() {
            out.push(gz);
        } else {
            return Err(Error::config(format!(
                "missing dataset file {name}[.gz] under {}",
                data_dir.display()
            )));
        }
    }
    Ok(out.try_into().unwrap())
}

/// Loads MNIST, derives the ten binary tasks (after optional subsampling),
/// trains the configured engine(s), and evaluates each on the test split.
///
/// Deterministic for a fixed config and dataset: all randomness flows from
/// the configured seeds, and results are sorted by task, engine, and seed.
pub fn run_experiment(
    config: &ExperimentConfig,
) -> Result<(Vec<RunResult>, Option<ComparisonReport>)> {
    config.validate()?;
    let [train_images, train_labels, test_images, test_labels] =
        mnist_paths(&config.data_dir)?;
    let mut train = load_idx(&train_images, &train_labels)?;
    let mut test = load_idx(&test_images, &test_labels)?;
    if let Some((train_n, test_n)) = config.subsample {
        train.truncate(train_n);
        test.truncate(test_n);
    }
    run_experiment_on(config, &train, &test)
}

/// [`run_experiment`] over already-loaded images. Used by tests with
/// synthetic datasets.
pub fn run_experiment_on(
    config: &ExperimentConfig,
    train: &[RawImage],
    test: &[RawImage],
) -> Result<(Vec<RunResult>, Option<ComparisonReport>)> {
    config.validate()?;
    let tasks = make_binary_tasks(train, test, config.s_max, config.schedule.presentation_ticks)?;

    #[derive(Clone, Copy)]
    struct Job {
        task: usize,
        engine: Engine,
        seed: u64,
    }
    let mut jobs = Vec::new();
    for task in 0..tasks.len() {
        if config.engine.runs_digital() {
            jobs.push(Job {
                task,
                engine: Engine::Digital,
                seed: 0,
            });
        }
        if config.engine.runs_snn() {
            for &seed in &config.seeds {
                jobs.push(Job {
                    task,
                    engine: Engine::Snn,
                    seed,
                });
            }
        }
    }

    let outcomes: Vec<Result<RunResult>> = jobs
        .par_iter()
        .map(|job| run_job(config, &tasks[job.task], job.engine, job.seed))
        .collect();

    let mut results = Vec::new();
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => first_error = first_error.or(Some(e)),
        }
    }
    results.sort_by_key(|r| (r.task, r.engine.runs_snn(), r.seed));

    if let Some(e) = first_error {
        // Flush whatever finished before reporting the failure.
        if !results.is_empty() {
            let _ = emit_report(&results, None, &config.out_dir);
        }
        return Err(e);
    }

    let report = if config.engine == Engine::Both {
        Some(build_comparison(&results)?)
    } else {
        None
    };
    Ok((results, report))
}

fn run_job(
    config: &ExperimentConfig,
    task: &BinaryTask,
    engine: Engine,
    seed: u64,
) -> Result<RunResult> {
    let (predictions, labels): (Vec<bool>, Vec<bool>) = match engine {
        Engine::Digital => {
            let mut model = DigitalClassifier::new(
                crate::data::NUM_PIXELS,
                config.params.clone(),
                config.count_threshold,
            )?;
            let examples: Vec<TrainExample> = task
                .train_iter()
                .map(|(ex, is_target)| TrainExample {
                    input: ex.counts.clone(),
                    is_target,
                })
                .collect();
            model.fit(&examples, config.epochs)?;
            if config.save_models {
                std::fs::create_dir_all(&config.out_dir)?;
                let path = config
                    .out_dir
                    .join(format!("model-task{}-digital.txt", task.target_digit));
                model_io::save_digital(&model, &path)?;
            }
            let mut predictions = Vec::with_capacity(task.test_len());
            let mut labels = Vec::with_capacity(task.test_len());
            for (ex, is_target) in task.test_iter() {
                predictions.push(model.predict(&ex.counts)?);
                labels.push(is_target);
            }
            (predictions, labels)
        }
        Engine::Snn => {
            let mut net = Network::new(
                crate::data::NUM_PIXELS,
                config.microcolumns,
                config.params.clone(),
                config.schedule,
                seed,
            )?;
            for _ in 0..config.epochs {
                net.train(task.train_iter())?;
            }
            if config.save_models {
                std::fs::create_dir_all(&config.out_dir)?;
                let path = config.out_dir.join(format!(
                    "model-task{}-snn-seed{seed}.txt",
                    task.target_digit
                ));
                model_io::save_network(&net, &path)?;
            }
            let mut predictions = Vec::with_capacity(task.test_len());
            let mut labels = Vec::with_capacity(task.test_len());
            for (ex, is_target) in task.test_iter() {
                predictions.push(net.classify(ex)?);
                labels.push(is_target);
            }
            (predictions, labels)
        }
        Engine::Both => unreachable!("jobs are per concrete engine"),
    };

    let mut counts = [0u64; 4]; // tp, fp, tn, fn
    for (predicted, actual) in predictions.iter().zip(&labels) {
        let slot = match (predicted, actual) {
            (true, true) => 0,
            (true, false) => 1,
            (false, false) => 2,
            (false, true) => 3,
        };
        counts[slot] += 1;
    }
    let total = predictions.len() as f64;
    Ok(RunResult {
        task: task.target_digit,
        engine,
        seed,
        accuracy: (counts[0] + counts[2]) as f64 / total * 100.0,
        true_pos: counts[0],
        false_pos: counts[1],
        true_neg: counts[2],
        false_neg: counts[3],
    })
}

/// Builds the per-task digital/SNN comparison and its paired t-test.
pub fn build_comparison(results: &[RunResult]) -> Result<ComparisonReport> {
    let mut rows = Vec::new();
    let mut tasks: Vec<u8> = results.iter().map(|r| r.task).collect();
    tasks.sort_unstable();
    tasks.dedup();
    for task in tasks {
        let digital: Vec<f64> = results
            .iter()
            .filter(|r| r.task == task && r.engine == Engine::Digital)
            .map(|r| r.accuracy)
            .collect();
        let snn: Vec<f64> = results
            .iter()
            .filter(|r| r.task == task && r.engine == Engine::Snn)
            .map(|r| r.accuracy)
            .collect();
        if digital.is_empty() || snn.is_empty() {
            return Err(Error::Stats(format!(
                "task {task} lacks results for one engine; cannot compare"
            )));
        }
        let digital_accuracy = digital[0];
        let snn_mean_accuracy = snn.iter().sum::<f64>() / snn.len() as f64;
        rows.push(ComparisonRow {
            task,
            digital_accuracy,
            snn_mean_accuracy,
            diff: digital_accuracy - snn_mean_accuracy,
        });
    }
    let diffs: Vec<f64> = rows.iter().map(|r| r.diff).collect();
    let t_test = paired_t_test(&diffs)?;
    Ok(ComparisonReport { rows, t_test })
}

/// Writes `runs.csv`, `comparison.csv` (when a comparison exists), and
/// `summary.txt` under `out_dir`.
pub fn emit_report(
    results: &[RunResult],
    report: Option<&ComparisonReport>,
    out_dir: &Path,
) -> Result<()> {
    if results.is_empty() {
        return Err(Error::input("refusing to report zero results".to_string()));
    }
    std::fs::create_dir_all(out_dir)?;

    let mut runs = String::from("task,engine,seed,accuracy,tp,fp,tn,fn\n");
    for r in results {
        runs.push_str(&format!(
            "{},{},{},{:.2},{},{},{},{}\n",
            r.task,
            r.engine,
            r.seed,
            r.accuracy,
            r.true_pos,
            r.false_pos,
            r.true_neg,
            r.false_neg
        ));
    }
    std::fs::write(out_dir.join("runs.csv"), runs)?;

    let mut summary = String::new();
    if let Some(report) = report {
        let mut cmp = String::from("task,digital_accuracy,snn_mean_accuracy,diff\n");
        for row in &report.rows {
            cmp.push_str(&format!(
                "{},{:.2},{:.2},{:.2}\n",
                row.task, row.digital_accuracy, row.snn_mean_accuracy, row.diff
            ));
        }
        std::fs::write(out_dir.join("comparison.csv"), cmp)?;

        summary.push_str("task  digital  snn_mean  diff\n");
        for row in &report.rows {
            summary.push_str(&format!(
                "{:>4}  {:>7.2}  {:>8.2}  {:>+5.2}\n",
                row.task, row.digital_accuracy, row.snn_mean_accuracy, row.diff
            ));
        }
        let t = &report.t_test;
        summary.push_str(&format!(
            "paired t-test: mean={:.4} sd={:.4} t={:.4} df={} p={:.4}\n",
            t.mean, t.sd, t.t_statistic, t.degrees_of_freedom, t.p_value
        ));
    } else {
        summary.push_str("task  engine  seed  accuracy\n");
        for r in results {
            summary.push_str(&format!(
                "{:>4}  {:>7}  {:>4}  {:>8.2}\n",
                r.task, r.engine, r.seed, r.accuracy
            ));
        }
    }
    std::fs::write(out_dir.join("summary.txt"), summary)?;
    Ok(())
}
