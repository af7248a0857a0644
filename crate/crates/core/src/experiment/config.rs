use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::bisection::BisectionConfig;
use crate::data::{OutlierRule, OutlierSpec, SubsetSpec};
use crate::error::{Error, Result};
use crate::model::LeakyRelu;
use crate::mse::GdConfig;

/// One experiment, as read from a TOML file.
///
/// ```toml
/// name = "swap"
///
/// [data]
/// train = "HandOutlines/HandOutlines_TRAIN.tsv"
/// test = "HandOutlines/HandOutlines_TEST.tsv"
/// swap = true
///
/// [subset]
/// mode = "random_k"
/// total = 100
/// seed = 0
/// repetitions = 10
///
/// [uniform]
/// epsilon = 1e-5
///
/// [mse]
/// learning_rate = "auto"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub data: DataConfig,
    #[serde(default)]
    pub subset: SubsetConfig,
    #[serde(default)]
    pub outliers: Option<OutlierConfig>,
    #[serde(default)]
    pub uniform: UniformArmConfig,
    #[serde(default)]
    pub mse: MseArmConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// UCR files, relative to the data directory given at run time.
    #[serde(default)]
    pub train: Option<PathBuf>,
    #[serde(default)]
    pub test: Option<PathBuf>,
    /// Train on the test file and test on the training file.
    #[serde(default)]
    pub swap: bool,
    /// Generated data instead of files.
    #[serde(default)]
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub train_counts: Vec<LabelCount>,
    pub test_counts: Vec<LabelCount>,
    pub separation: f64,
    pub noise: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelCount {
    #[serde(deserialize_with = "number")]
    pub label: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMode {
    #[default]
    Full,
    Swap,
    FirstK,
    RandomK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetConfig {
    #[serde(default)]
    pub mode: SubsetMode,
    /// Per-class counts for `first_k`.
    #[serde(default)]
    pub counts: Vec<LabelCount>,
    /// Subset size for `random_k`.
    #[serde(default)]
    pub total: usize,
    /// Base seed; repetition `r` draws with `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        Self {
            mode: SubsetMode::Full,
            counts: Vec::new(),
            total: 0,
            seed: 0,
            repetitions: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierMode {
    Tolerance,
    TopK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutlierConfig {
    pub mode: OutlierMode,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub allow_remove_all: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UniformArmConfig {
    pub enabled: bool,
    pub epsilon: f64,
    pub alpha: f64,
    pub max_iterations: usize,
}

impl Default for UniformArmConfig {
    fn default() -> Self {
        let b = BisectionConfig::<f64>::default();
        Self {
            enabled: true,
            epsilon: b.epsilon,
            alpha: b.alpha,
            max_iterations: b.max_iterations,
        }
    }
}

/// A fixed step size, or `"auto"` for [`crate::mse::safe_learning_rate`]
/// of the training set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LearningRate {
    Fixed(f64),
    Keyword(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

impl LearningRate {
    pub const AUTO: Self = LearningRate::Keyword(Auto::Auto);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MseArmConfig {
    pub enabled: bool,
    /// Leaky ReLU slope of the baseline network.
    pub alpha: f64,
    pub learning_rate: LearningRate,
    pub epochs: usize,
    pub init_seed: u64,
    pub init_scale: f64,
    pub standardize: bool,
}

impl Default for MseArmConfig {
    fn default() -> Self {
        let g = GdConfig::<f64>::default();
        Self {
            enabled: true,
            alpha: BisectionConfig::<f64>::default().alpha,
            learning_rate: LearningRate::AUTO,
            epochs: g.epochs,
            init_seed: g.init_seed,
            init_scale: g.init_scale,
            standardize: g.standardize,
        }
    }
}

fn one() -> usize {
    1
}

fn number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        Int(i64),
        Float(f64),
    }
    Ok(match Num::deserialize(d)? {
        Num::Int(i) => i as f64,
        Num::Float(f) => f,
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: &str| Err(Error::Config(msg.to_string()));
        match (&self.data.synthetic, &self.data.train, &self.data.test) {
            (Some(_), None, None) => {}
            (None, Some(_), Some(_)) => {}
            (Some(_), _, _) => {
                return cfg_err(
                    "data: give either synthetic parameters or train/test files, not both",
                )
            }
            _ => return cfg_err("data: both train and test files are required"),
        }
        if self.subset.repetitions == 0 {
            return cfg_err("subset.repetitions must be at least 1");
        }
        if self.subset.repetitions > 1 && self.subset.mode != SubsetMode::RandomK {
            return cfg_err("subset.repetitions > 1 only makes sense with mode = \"random_k\"");
        }
        match self.subset.mode {
            SubsetMode::FirstK if self.subset.counts.is_empty() => {
                return cfg_err("subset.counts is required for mode = \"first_k\"")
            }
            SubsetMode::RandomK if self.subset.total == 0 => {
                return cfg_err("subset.total must be positive for mode = \"random_k\"")
            }
            _ => {}
        }
        if let Some(o) = &self.outliers {
            self.outlier_spec_of(o)?;
        }
        if !self.uniform.enabled && !self.mse.enabled {
            return cfg_err("at least one of uniform.enabled / mse.enabled must be true");
        }
        self.bisection_config().validate()?;
        self.bisection_config().activation()?;
        LeakyRelu::new(self.mse.alpha)?;
        if let LearningRate::Fixed(lr) = self.mse.learning_rate {
            GdConfig {
                learning_rate: lr,
                ..self.gd_template()
            }
            .validate()?;
        }
        Ok(())
    }

    /// Whether training and test files trade places.
    pub fn swapped(&self) -> bool {
        self.data.swap || self.subset.mode == SubsetMode::Swap
    }

    /// Subset spec for repetition `r`.
    pub fn subset_spec(&self, r: usize) -> SubsetSpec<f64> {
        match self.subset.mode {
            SubsetMode::Full => SubsetSpec::Full,
            SubsetMode::Swap => SubsetSpec::Swap,
            SubsetMode::FirstK => SubsetSpec::FirstKPerClass {
                counts: self
                    .subset
                    .counts
                    .iter()
                    .map(|c| (c.label, c.count))
                    .collect(),
            },
            SubsetMode::RandomK => SubsetSpec::RandomK {
                total: self.subset.total,
                seed: self.subset.seed.wrapping_add(r as u64),
            },
        }
    }

    pub fn outlier_spec(&self) -> Result<Option<OutlierSpec<f64>>> {
        self.outliers
            .as_ref()
            .map(|o| self.outlier_spec_of(o))
            .transpose()
    }

    fn outlier_spec_of(&self, o: &OutlierConfig) -> Result<OutlierSpec<f64>> {
        let rule = match (o.mode, o.tolerance, o.k) {
            (OutlierMode::Tolerance, Some(t), None) if t >= 0.0 && t.is_finite() => {
                OutlierRule::Tolerance(t)
            }
            (OutlierMode::TopK, None, Some(k)) => OutlierRule::TopK(k),
            (OutlierMode::Tolerance, ..) => {
                return Err(Error::Config(
                    "outliers: tolerance mode needs a nonnegative `tolerance` and no `k`".into(),
                ))
            }
            (OutlierMode::TopK, ..) => {
                return Err(Error::Config(
                    "outliers: top_k mode needs `k` and no `tolerance`".into(),
                ))
            }
        };
        Ok(OutlierSpec {
            rule,
            allow_remove_all: o.allow_remove_all,
        })
    }

    pub fn bisection_config(&self) -> BisectionConfig<f64> {
        BisectionConfig {
            epsilon: self.uniform.epsilon,
            max_iterations: self.uniform.max_iterations,
            alpha: self.uniform.alpha,
        }
    }

    /// MSE settings with the learning rate still unresolved.
    pub(crate) fn gd_template(&self) -> GdConfig<f64> {
        GdConfig {
            learning_rate: GdConfig::<f64>::default().learning_rate,
            epochs: self.mse.epochs,
            init_seed: self.mse.init_seed,
            init_scale: self.mse.init_scale,
            standardize: self.mse.standardize,
        }
    }
}
