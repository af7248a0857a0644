use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, LearningRate};
use super::evaluate::{evaluate, ConfusionMatrix};
use crate::bisection::train_uniform;
use crate::data::{
    build_subset, generate_synthetic, read_ucr, remove_outliers, write_atomic, SubsetSpec,
};
use crate::error::Result;
use crate::model::{mse_loss, uniform_loss, Dataset, LeakyRelu};
use crate::mse::{safe_learning_rate_for, train_mse_with_history, GdConfig};

pub const UNIFORM_METHOD: &str = "Uniform approximation";
pub const MSE_METHOD: &str = "MSE gradient descent";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub train_source: String,
    pub test_source: String,
    /// Size of the set training subsets are drawn from.
    pub source_train_size: usize,
    pub test_size: usize,
    /// Labels of the source training set, ascending; predictions snap to these.
    pub class_labels: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<ArmReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<ArmReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmReport {
    pub method: String,
    /// Mean of `accuracies`.
    pub accuracy: f64,
    /// Test accuracy of each repetition, in seed order.
    pub accuracies: Vec<f64>,
    pub runs: Vec<RunReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub repetition: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_seed: Option<u64>,
    pub train_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outliers: Option<OutlierSummary>,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix<f64>,
    /// The arm's own objective on its training set: the uniform loss or the
    /// sum of squared errors.
    pub train_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisection: Option<BisectionSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_descent: Option<GdSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierSummary {
    pub before: usize,
    pub removed: usize,
    /// Positions within the training subset.
    pub removed_indices: Vec<usize>,
    pub max_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionSummary {
    pub initial_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub total_pivots: usize,
    pub max_witness_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdSummary {
    pub learning_rate: f64,
    pub epochs: usize,
    pub initial_loss: f64,
}

/// Wall-clock seconds per repetition, kept out of the report so the report
/// stays byte-reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub outlier_seconds: Vec<f64>,
    pub uniform_seconds: Vec<f64>,
    pub mse_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub timings: Timings,
}

struct LoadedData {
    train: Dataset<f64>,
    test: Dataset<f64>,
    train_source: String,
    test_source: String,
}

fn load_data(cfg: &ExperimentConfig, data_dir: &Path) -> Result<LoadedData> {
    if let Some(s) = &cfg.data.synthetic {
        let pool_counts: Vec<(f64, usize)> = s
            .train_counts
            .iter()
            .map(|c| {
                let extra: usize = s
                    .test_counts
                    .iter()
                    .filter(|t| t.label == c.label)
                    .map(|t| t.count)
                    .sum();
                (c.label, c.count + extra)
            })
            .chain(
                s.test_counts
                    .iter()
                    .filter(|t| !s.train_counts.iter().any(|c| c.label == t.label))
                    .map(|t| (t.label, t.count)),
            )
            .collect();
        let pool = generate_synthetic(s.n, &pool_counts, s.separation, s.noise, s.seed)?;
        // the first `count` records of each class train, the rest test
        let mut need: Vec<(f64, usize)> =
            s.train_counts.iter().map(|c| (c.label, c.count)).collect();
        let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
        for (i, sample) in pool.samples().iter().enumerate() {
            match need
                .iter_mut()
                .find(|(l, k)| *l == sample.target() && *k > 0)
            {
                Some(slot) => {
                    slot.1 -= 1;
                    train_idx.push(i);
                }
                None => test_idx.push(i),
            }
        }
        let (train, test) = (pool.select(&train_idx)?, pool.select(&test_idx)?);
        let src = format!("synthetic(seed {})", s.seed);
        return Ok(LoadedData {
            train,
            test,
            train_source: src.clone(),
            test_source: src,
        });
    }

    let (mut train_rel, mut test_rel) = (
        cfg.data.train.clone().expect("validated config has files"),
        cfg.data.test.clone().expect("validated config has files"),
    );
    if cfg.swapped() {
        std::mem::swap(&mut train_rel, &mut test_rel);
    }
    let resolve = |p: &PathBuf| {
        if p.is_absolute() {
            p.clone()
        } else {
            data_dir.join(p)
        }
    };
    Ok(LoadedData {
        train: read_ucr(resolve(&train_rel))?,
        test: read_ucr(resolve(&test_rel))?,
        train_source: train_rel.display().to_string(),
        test_source: test_rel.display().to_string(),
    })
}

struct RepetitionResult {
    uniform: Option<RunReport>,
    mse: Option<RunReport>,
    outlier_seconds: f64,
    uniform_seconds: f64,
    mse_seconds: f64,
}

fn run_repetition(
    cfg: &ExperimentConfig,
    data: &LoadedData,
    labels: &[f64],
    r: usize,
) -> Result<RepetitionResult> {
    let spec = cfg.subset_spec(r);
    let subset_seed = match spec {
        SubsetSpec::RandomK { seed, .. } => Some(seed),
        _ => None,
    };
    let mut train = build_subset(&data.train, &spec)?;

    let clock = Instant::now();
    let outliers = match cfg.outlier_spec()? {
        Some(o) => {
            let removal = remove_outliers(&train, &cfg.bisection_config(), &o)?;
            let summary = OutlierSummary {
                before: train.len(),
                removed: removal.removed.len(),
                removed_indices: removal.report.removed_indices.clone(),
                max_deviation: removal.report.max_deviation,
                threshold: removal.report.threshold,
            };
            info!(
                "{}: repetition {r}: removed {} of {} training samples",
                cfg.name, summary.removed, summary.before
            );
            train = removal.kept;
            Some(summary)
        }
        None => None,
    };
    let outlier_seconds = clock.elapsed().as_secs_f64();

    let base = |accuracy, confusion, train_loss| RunReport {
        repetition: r,
        subset_seed,
        train_size: train.len(),
        outliers: outliers.clone(),
        accuracy,
        confusion,
        train_loss,
        bisection: None,
        gradient_descent: None,
    };

    let clock = Instant::now();
    let uniform = if cfg.uniform.enabled {
        let bcfg = cfg.bisection_config();
        let a = bcfg.activation()?;
        let rep = train_uniform(&train, &bcfg)?.into_converged()?;
        let cm = evaluate(&rep.weights, &a, &data.test, labels)?;
        let loss = uniform_loss(&rep.weights, &a, &train)?;
        Some(RunReport {
            bisection: Some(BisectionSummary {
                initial_upper: rep.initial_upper,
                lower: rep.lower,
                upper: rep.upper,
                iterations: rep.iterations,
                total_pivots: rep.total_pivots(),
                max_witness_violation: rep.max_violation(),
            }),
            ..base(cm.accuracy(), cm, loss)
        })
    } else {
        None
    };
    let uniform_seconds = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mse = if cfg.mse.enabled {
        let a = LeakyRelu::new(cfg.mse.alpha)?;
        let learning_rate = match cfg.mse.learning_rate {
            LearningRate::Fixed(lr) => lr,
            LearningRate::Keyword(_) => safe_learning_rate_for(&train, cfg.mse.standardize)?,
        };
        let gd = GdConfig {
            learning_rate,
            ..cfg.gd_template()
        };
        let (w, history) = train_mse_with_history(&train, &gd, &a)?;
        let cm = evaluate(&w, &a, &data.test, labels)?;
        let loss = mse_loss(&w, &a, &train)?;
        Some(RunReport {
            gradient_descent: Some(GdSummary {
                learning_rate,
                epochs: gd.epochs,
                initial_loss: history[0],
            }),
            ..base(cm.accuracy(), cm, loss)
        })
    } else {
        None
    };
    let mse_seconds = clock.elapsed().as_secs_f64();

    Ok(RepetitionResult {
        uniform,
        mse,
        outlier_seconds,
        uniform_seconds,
        mse_seconds,
    })
}

fn arm(method: &str, runs: Vec<RunReport>) -> ArmReport {
    let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
    let accuracy = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    ArmReport {
        method: method.to_string(),
        accuracy,
        accuracies,
        runs,
    }
}

/// Runs every repetition of `cfg`. Relative data paths are resolved against
/// `data_dir`. Repetitions run in parallel but are reported in seed order.
pub fn run_experiment(cfg: &ExperimentConfig, data_dir: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let clock = Instant::now();
    let data = load_data(cfg, data_dir)?;
    let labels = data.train.sorted_labels();
    info!(
        "{}: training source {} ({} samples), test {} ({} samples), {} repetition(s)",
        cfg.name,
        data.train_source,
        data.train.len(),
        data.test_source,
        data.test.len(),
        cfg.subset.repetitions
    );

    let results: Vec<RepetitionResult> = (0..cfg.subset.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(cfg, &data, &labels, r))
        .collect::<Result<_>>()?;

    let mut timings = Timings::default();
    let (mut uniform_runs, mut mse_runs) = (Vec::new(), Vec::new());
    for res in results {
        timings.outlier_seconds.push(res.outlier_seconds);
        if let Some(u) = res.uniform {
            timings.uniform_seconds.push(res.uniform_seconds);
            uniform_runs.push(u);
        }
        if let Some(m) = res.mse {
            timings.mse_seconds.push(res.mse_seconds);
            mse_runs.push(m);
        }
    }
    timings.total_seconds = clock.elapsed().as_secs_f64();

    let report = ExperimentReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        train_source: data.train_source,
        test_source: data.test_source,
        source_train_size: data.train.len(),
        test_size: data.test.len(),
        class_labels: labels,
        uniform: cfg
            .uniform
            .enabled
            .then(|| arm(UNIFORM_METHOD, uniform_runs)),
        mse: cfg.mse.enabled.then(|| arm(MSE_METHOD, mse_runs)),
    };
    Ok(ExperimentOutcome { report, timings })
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    fn arms(&self) -> impl Iterator<Item = &ArmReport> {
        self.uniform.iter().chain(self.mse.iter())
    }

    /// Plain-text table: accuracy per method (as a percentage with two
    /// decimals), the confusion matrix of single runs, and the per-seed
    /// accuracies of repeated runs.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let first = self.arms().next().and_then(|a| a.runs.first());
        let train_size = first.map_or(self.source_train_size, |r| r.train_size);
        writeln!(out, "Experiment: {}", self.name).unwrap();
        writeln!(
            out,
            "Training set: {} ({} samples)",
            self.train_source, self.source_train_size
        )
        .unwrap();
        writeln!(
            out,
            "Test set: {} ({} samples)",
            self.test_source, self.test_size
        )
        .unwrap();
        if let Some(o) = first.and_then(|r| r.outliers.as_ref()) {
            writeln!(out, "Outliers removed: {} of {}", o.removed, o.before).unwrap();
        }
        let reps = self.config.subset.repetitions;
        if reps == 1 {
            writeln!(out, "Points used for training: {train_size}").unwrap();
        } else {
            writeln!(
                out,
                "Points used for training: {train_size} per repetition, {reps} repetitions"
            )
            .unwrap();
        }
        writeln!(out).unwrap();

        writeln!(out, "{:<24}{:>10}", "Method", "Accuracy").unwrap();
        for a in self.arms() {
            writeln!(out, "{:<24}{:>9.2}%", a.method, a.accuracy * 100.0).unwrap();
        }

        if reps == 1 {
            for a in self.arms() {
                let cm = &a.runs[0].confusion;
                writeln!(
                    out,
                    "\n{} confusion matrix (rows: actual, columns: predicted)",
                    a.method
                )
                .unwrap();
                write!(out, "{:>8}", "").unwrap();
                for l in &cm.labels {
                    write!(out, "{l:>8}").unwrap();
                }
                writeln!(out).unwrap();
                for (l, row) in cm.labels.iter().zip(&cm.counts) {
                    write!(out, "{l:>8}").unwrap();
                    for c in row {
                        write!(out, "{c:>8}").unwrap();
                    }
                    writeln!(out).unwrap();
                }
            }
        } else {
            writeln!(out).unwrap();
            write!(out, "{:<12}{:>8}", "Repetition", "Seed").unwrap();
            for a in self.arms() {
                write!(out, "{:>24}", a.method).unwrap();
            }
            writeln!(out).unwrap();
            for r in 0..reps {
                let seed = self.arms().next().and_then(|a| a.runs[r].subset_seed);
                write!(
                    out,
                    "{:<12}{:>8}",
                    r + 1,
                    seed.map_or("-".into(), |s| s.to_string())
                )
                .unwrap();
                for a in self.arms() {
                    write!(out, "{:>23.2}%", a.accuracies[r] * 100.0).unwrap();
                }
                writeln!(out).unwrap();
            }
            write!(out, "{:<20}", "Mean").unwrap();
            for a in self.arms() {
                write!(out, "{:>23.2}%", a.accuracy * 100.0).unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }
}

impl ExperimentOutcome {
    /// Writes `<prefix>.json`, `<prefix>.txt` and `<prefix>.timing.json`,
    /// each atomically, and returns their paths.
    pub fn write(&self, prefix: &Path) -> Result<[PathBuf; 3]> {
        let with_ext = |ext: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(ext);
            PathBuf::from(s)
        };
        let paths = [
            with_ext(".json"),
            with_ext(".txt"),
            with_ext(".timing.json"),
        ];
        write_atomic(&paths[0], self.report.to_json()?.as_bytes())?;
        write_atomic(&paths[1], self.report.render_text().as_bytes())?;
        write_atomic(
            &paths[2],
            (serde_json::to_string_pretty(&self.timings)? + "\n").as_bytes(),
        )?;
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH: &str = r#"
name = "synthetic"
[data.synthetic]
n = 3
train_counts = [{ label = 1, count = 12 }, { label = 2, count = 12 }]
test_counts = [{ label = 1, count = 8 }, { label = 2, count = 8 }]
separation = 8.0
noise = 0.2
seed = 5
"#;

    fn run(text: &str) -> ExperimentOutcome {
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        run_experiment(&cfg, Path::new(".")).unwrap()
    }

    #[test]
    fn synthetic_split_sizes() {
        let out = run(SYNTH);
        assert_eq!(out.report.source_train_size, 24);
        assert_eq!(out.report.test_size, 16);
        assert_eq!(out.report.class_labels, vec![1.0, 2.0]);
        let u = out.report.uniform.as_ref().unwrap();
        assert_eq!(u.runs.len(), 1);
        assert_eq!(u.runs[0].confusion.total(), 16);
        assert_eq!(u.accuracy, 1.0);
    }

    #[test]
    fn repeated_random_subsets() {
        let text = format!(
            "{SYNTH}[subset]\nmode = \"random_k\"\ntotal = 6\nseed = 40\nrepetitions = 3\n"
        );
        let out = run(&text);
        for a in [
            out.report.uniform.as_ref().unwrap(),
            out.report.mse.as_ref().unwrap(),
        ] {
            assert_eq!(a.accuracies.len(), 3);
            let seeds: Vec<_> = a.runs.iter().map(|r| r.subset_seed).collect();
            assert_eq!(seeds, vec![Some(40), Some(41), Some(42)]);
            assert!(a.runs.iter().all(|r| r.train_size == 6));
        }
        let text = out.report.render_text();
        assert!(text.contains("Mean"));
        assert_eq!(out.timings.uniform_seconds.len(), 3);
    }

    #[test]
    fn text_table_shape() {
        let text = run(SYNTH).report.render_text();
        assert!(
            text.contains("Uniform approximation      100.00%"),
            "{text}"
        );
        assert!(text.contains("rows: actual, columns: predicted"));
    }
}
