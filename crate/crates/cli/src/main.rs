use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use maxnorm::bisection::train_uniform;
use maxnorm::data::{
    build_subset, generate_synthetic, read_ucr, remove_outliers, write_atomic, write_ucr,
    OutlierSpec, SubsetSpec,
};
use maxnorm::experiment::{evaluate, run_experiment, ConfusionMatrix, ExperimentConfig};
use maxnorm::model::{mse_loss, uniform_loss, LeakyRelu};
use maxnorm::mse::{safe_learning_rate_for, train_mse_with_history, GdConfig};
use maxnorm::{BisectionConfig, Dataset, Error, WeightVector};

const EXIT_OTHER: u8 = 1;
const EXIT_DATA: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;
const EXIT_DEGENERATE_REMOVAL: u8 = 5;

#[derive(Parser)]
#[command(
    name = "maxnorm",
    version,
    about = "Uniform-loss training of single-node classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on a UCR file and save its weights as JSON.
    Train(TrainArgs),
    /// Score saved weights on a UCR file.
    Evaluate(EvaluateArgs),
    /// Run an experiment described by a TOML config.
    Experiment(ExperimentArgs),
    /// Fit the uniform loss and split a UCR file into kept and removed samples.
    RemoveOutliers(OutlierArgs),
    /// Write a synthetic Gaussian-cluster dataset in UCR format.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Uniform,
    Mse,
}

#[derive(Args)]
struct BisectionArgs {
    /// Bisection stops once the bracket is narrower than this.
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    /// Leaky ReLU slope.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

impl BisectionArgs {
    fn config(&self) -> BisectionConfig {
        BisectionConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            alpha: self.alpha,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// UCR-format training file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Uniform)]
    method: Method,
    #[command(flatten)]
    bisection: BisectionArgs,
    /// Gradient-descent step size, or "auto".
    #[arg(long, default_value = "auto")]
    learning_rate: String,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    #[arg(long)]
    standardize: bool,
    /// Train on the first COUNT samples of class LABEL (repeatable), e.g. `1:10`.
    #[arg(long = "first-k", value_name = "LABEL:COUNT", value_parser = parse_label_count)]
    first_k: Vec<(f64, usize)>,
    /// Train on this many samples drawn at random without replacement.
    #[arg(long, conflicts_with = "first_k")]
    random_k: Option<usize>,
    #[arg(long, default_value_t = 0, requires = "random_k")]
    seed: u64,
    /// Where to write the weights.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    weights: PathBuf,
    /// UCR-format test file.
    #[arg(long)]
    data: PathBuf,
    /// Also write the confusion matrix as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment description.
    config: PathBuf,
    /// Directory that relative data paths are resolved against (default: the
    /// config file's directory).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output prefix; `.json`, `.txt` and `.timing.json` are appended
    /// (default: the config path without its extension).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "no_mse")]
    no_uniform: bool,
    #[arg(long)]
    no_mse: bool,
}

#[derive(Args)]
struct OutlierArgs {
    #[arg(long)]
    data: PathBuf,
    /// Remove every sample within this distance of the largest deviation.
    #[arg(long, required_unless_present = "top_k", conflicts_with = "top_k")]
    tolerance: Option<f64>,
    /// Remove the K samples with the largest deviations.
    #[arg(long)]
    top_k: Option<usize>,
    /// Allow the tolerance rule to remove every sample.
    #[arg(long)]
    allow_remove_all: bool,
    #[command(flatten)]
    bisection: BisectionArgs,
    #[arg(long)]
    kept: PathBuf,
    #[arg(long)]
    removed: Option<PathBuf>,
    /// JSON with the deviations and removed indices.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Feature dimension.
    #[arg(long)]
    n: usize,
    /// Class LABEL with COUNT samples (repeatable), e.g. `1:50`.
    #[arg(long = "class", value_name = "LABEL:COUNT", value_parser = parse_label_count, required = true)]
    classes: Vec<(f64, usize)>,
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    #[arg(long, default_value_t = 0.5)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

fn parse_label_count(s: &str) -> Result<(f64, usize), String> {
    let (l, c) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LABEL:COUNT, got '{s}'"))?;
    let label = l
        .trim()
        .parse::<f64>()
        .map_err(|e| format!("label '{l}': {e}"))?;
    let count = c
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("count '{c}': {e}"))?;
    Ok((label, count))
}

/// Weights file contents: everything needed to classify new samples.
#[derive(Serialize, Deserialize)]
struct SavedModel {
    method: String,
    alpha: f64,
    class_labels: Vec<f64>,
    bias: f64,
    weights: Vec<f64>,
    train_loss: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn train(args: TrainArgs) -> anyhow::Result<()> {
    let source: Dataset = read_ucr(&args.data)?;
    let spec = match (args.first_k.is_empty(), args.random_k) {
        (false, _) => SubsetSpec::FirstKPerClass {
            counts: args.first_k.clone(),
        },
        (true, Some(total)) => SubsetSpec::RandomK {
            total,
            seed: args.seed,
        },
        (true, None) => SubsetSpec::Full,
    };
    let z = build_subset(&source, &spec)?;
    let alpha = args.bisection.alpha;
    let a = LeakyRelu::new(alpha)?;

    let (method, w, loss) = match args.method {
        Method::Uniform => {
            let rep = train_uniform(&z, &args.bisection.config())?.into_converged()?;
            info!(
                "bracket [{:e}, {:e}] after {} iterations, {} pivots",
                rep.lower,
                rep.upper,
                rep.iterations,
                rep.total_pivots()
            );
            let loss = uniform_loss(&rep.weights, &a, &z)?;
            ("uniform", rep.weights, loss)
        }
        Method::Mse => {
            let learning_rate = match args.learning_rate.as_str() {
                "auto" => safe_learning_rate_for(&z, args.standardize)?,
                v => v
                    .parse()
                    .with_context(|| format!("--learning-rate '{v}'"))?,
            };
            let cfg = GdConfig {
                learning_rate,
                epochs: args.epochs,
                init_seed: args.init_seed,
                standardize: args.standardize,
                ..GdConfig::default()
            };
            let (w, _) = train_mse_with_history(&z, &cfg, &a)?;
            let loss = mse_loss(&w, &a, &z)?;
            ("mse", w, loss)
        }
    };
    println!(
        "trained on {} samples, {method} training loss {loss:e}",
        z.len()
    );
    let model = SavedModel {
        method: method.into(),
        alpha,
        class_labels: source.sorted_labels(),
        bias: w.bias,
        weights: w.weights,
        train_loss: loss,
    };
    write_json(&args.out, &model)?;
    println!("weights written to {}", args.out.display());
    Ok(())
}

fn print_confusion(cm: &ConfusionMatrix<f64>) {
    println!(
        "accuracy {:.2}% ({} of {})",
        cm.accuracy() * 100.0,
        cm.correct(),
        cm.total()
    );
    println!("rows: actual, columns: predicted");
    print!("{:>8}", "");
    for l in &cm.labels {
        print!("{l:>8}");
    }
    println!();
    for (l, row) in cm.labels.iter().zip(&cm.counts) {
        print!("{l:>8}");
        for c in row {
            print!("{c:>8}");
        }
        println!();
    }
}

fn evaluate_cmd(args: EvaluateArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.weights)
        .with_context(|| args.weights.display().to_string())?;
    let model: SavedModel = serde_json::from_str(&text)
        .with_context(|| format!("{}: not a weights file", args.weights.display()))?;
    let w = WeightVector::new(model.bias, model.weights)?;
    let a = LeakyRelu::new(model.alpha)?;
    let test: Dataset = read_ucr(&args.data)?;
    let cm = evaluate(&w, &a, &test, &model.class_labels)?;
    print_confusion(&cm);
    if let Some(out) = &args.out {
        #[derive(Serialize)]
        struct Scored<'a> {
            accuracy: f64,
            confusion: &'a ConfusionMatrix<f64>,
        }
        write_json(
            out,
            &Scored {
                accuracy: cm.accuracy(),
                confusion: &cm,
            },
        )?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.no_uniform {
        cfg.uniform.enabled = false;
    }
    if args.no_mse {
        cfg.mse.enabled = false;
    }
    let config_dir = args.config.parent().unwrap_or(Path::new("."));
    let data_dir = args
        .data_dir
        .clone()
        .unwrap_or_else(|| config_dir.to_path_buf());
    let prefix = args
        .out
        .clone()
        .unwrap_or_else(|| args.config.with_extension(""));

    let outcome = run_experiment(&cfg, &data_dir)?;
    print!("{}", outcome.report.render_text());
    let paths = outcome.write(&prefix)?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn remove_outliers_cmd(args: OutlierArgs) -> anyhow::Result<()> {
    let z: Dataset = read_ucr(&args.data)?;
    let mut spec = match (args.tolerance, args.top_k) {
        (Some(t), None) => OutlierSpec::tolerance(t),
        (None, Some(k)) => OutlierSpec::top_k(k),
        _ => bail!("give exactly one of --tolerance and --top-k"),
    };
    spec.allow_remove_all = args.allow_remove_all;
    let r = remove_outliers(&z, &args.bisection.config(), &spec)?;
    println!(
        "removed {} of {} samples (max deviation {:e})",
        r.removed.len(),
        z.len(),
        r.report.max_deviation
    );
    write_ucr(&args.kept, &r.kept)?;
    if let Some(p) = &args.removed {
        write_ucr(p, &r.removed)?;
    }
    if let Some(p) = &args.report {
        write_json(p, &r.report)?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> anyhow::Result<()> {
    let z: Dataset = generate_synthetic(
        args.n,
        &args.classes,
        args.separation,
        args.noise,
        args.seed,
    )?;
    write_ucr(&args.out, &z)?;
    println!(
        "wrote {} samples with {} features to {}",
        z.len(),
        z.n(),
        args.out.display()
    );
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NotConverged { .. }) => EXIT_NOT_CONVERGED,
        Some(Error::DegenerateRemoval(_)) => EXIT_DEGENERATE_REMOVAL,
        Some(
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::EmptyDataset
            | Error::DimensionMismatch { .. }
            | Error::InsufficientSamples { .. }
            | Error::UnknownLabel(_),
        ) => EXIT_DATA,
        _ => EXIT_OTHER,
    }
}

/// The error chain joined by `: `, skipping causes whose text the message
/// already contains.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.is_empty() {
            out = text;
        } else if !out.contains(&text) {
            out = format!("{out}: {text}");
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Experiment(a) => experiment(a),
        Command::RemoveOutliers(a) => remove_outliers_cmd(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", render_chain(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
