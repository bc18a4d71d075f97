//! Run configuration: command-line flags layered over an optional config
//! file, a named profile and built-in defaults, in that order.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use tero::data::DatasetFormat;
use tero::model::Norm;
use tero::training::TrainConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DualMode {
    /// On for interval datasets, off for point datasets.
    Auto,
    On,
    Off,
}

impl FromStr for DualMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <DualMode as ValueEnum>::from_str(s, true)
    }
}

impl fmt::Display for DualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DualMode::Auto => "auto",
            DualMode::On => "on",
            DualMode::Off => "off",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Icews14,
    #[value(name = "icews05-15")]
    Icews0515,
    Yago11k,
    Wikidata12k,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Profile as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by every subcommand. Each is optional so that an unset
/// flag falls through to the config file, then the profile, then the
/// built-in default shown in brackets.
#[derive(Debug, Clone, Default, Args)]
pub struct Settings {
    /// Training split [default: none]
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Validation split [default: none]
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Test split [default: none]
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Dataset format: point-tsv or interval-tsv [default: point-tsv]
    #[arg(long, value_parser = parse_format)]
    pub format: Option<DatasetFormat>,
    /// Embedding dimension k [default: 500]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Loss margin γ [default: 10]
    #[arg(long)]
    pub margin: Option<f64>,
    /// Adagrad learning rate [default: 0.1]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Negatives per positive η [default: 10]
    #[arg(long)]
    pub neg_ratio: Option<usize>,
    /// Minibatch size [default: 512]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Days per time step for point datasets [default: 1]
    #[arg(long)]
    pub time_unit: Option<u32>,
    /// Minimum mentions per year bin for interval datasets [default: 300]
    #[arg(long)]
    pub time_threshold: Option<u64>,
    /// Score norm, 1 or 2 [default: 1]
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<Norm>,
    /// Dual begin/end relation embeddings [default: auto]
    #[arg(long, value_enum)]
    pub dual: Option<DualMode>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum training epochs [default: 5000]
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Epochs between validations [default: 100]
    #[arg(long)]
    pub valid_every: Option<usize>,
    /// Non-improving validations before stopping [default: 5]
    #[arg(long)]
    pub patience: Option<usize>,
    /// Checkpoint path [default: <out-dir>/model.tero]
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Directory for vocabularies, binning manifest, logs and reports [default: tero-out]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads, 0 for one per core [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Preset hyperparameters for a benchmark dataset [default: none]
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Config file of `key = value` lines [default: none]
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<DatasetFormat, String> {
    s.parse().map_err(|e: tero::TeroError| e.to_string())
}

fn parse_norm(s: &str) -> Result<Norm, String> {
    s.parse().map_err(|e: tero::TeroError| e.to_string())
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub valid: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub format: DatasetFormat,
    pub time_unit: u32,
    pub time_threshold: u64,
    pub dual: DualMode,
    pub checkpoint: PathBuf,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub train_config: TrainConfig,
}

impl RunConfig {
    pub fn dual(&self) -> bool {
        match self.dual {
            DualMode::On => true,
            DualMode::Off => false,
            DualMode::Auto => self.format == DatasetFormat::IntervalTsv,
        }
    }
}

macro_rules! layer {
    ($hi:expr, $lo:expr; $($field:ident),* $(,)?) => {
        Settings { $($field: $hi.$field.or($lo.$field)),* }
    };
}

impl Settings {
    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        layer!(self, lower; train, valid, test, format, dim, margin, lr, neg_ratio,
            batch_size, time_unit, time_threshold, norm, dual, seed, max_epochs,
            valid_every, patience, checkpoint, out_dir, threads, profile, config)
    }

    /// Applies the config file and profile beneath the flags, then fills
    /// the remaining gaps with built-in defaults.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => Settings::default(),
        };
        let merged = self.over(file);
        let merged = match merged.profile {
            Some(p) => merged.over(profile(p)),
            None => merged,
        };
        let d = TrainConfig::default();
        let out_dir = merged.out_dir.unwrap_or_else(|| PathBuf::from("tero-out"));
        let mut run = RunConfig {
            train: merged.train,
            valid: merged.valid,
            test: merged.test,
            format: merged.format.unwrap_or(DatasetFormat::PointTsv),
            time_unit: merged.time_unit.unwrap_or(1),
            time_threshold: merged.time_threshold.unwrap_or(300),
            dual: merged.dual.unwrap_or(DualMode::Auto),
            checkpoint: merged
                .checkpoint
                .unwrap_or_else(|| out_dir.join("model.tero")),
            out_dir,
            threads: merged.threads.unwrap_or(0),
            train_config: TrainConfig {
                dim: merged.dim.unwrap_or(d.dim),
                batch_size: merged.batch_size.unwrap_or(d.batch_size),
                neg_ratio: merged.neg_ratio.unwrap_or(d.neg_ratio),
                margin: merged.margin.unwrap_or(d.margin),
                lr: merged.lr.unwrap_or(d.lr),
                max_epochs: merged.max_epochs.unwrap_or(d.max_epochs),
                valid_every: merged.valid_every.unwrap_or(d.valid_every),
                patience: merged.patience.unwrap_or(d.patience),
                norm: merged.norm.unwrap_or(d.norm),
                seed: merged.seed.unwrap_or(d.seed),
                dual: false,
            },
        };
        run.train_config.dual = run.dual();
        run.train_config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if run.time_unit == 0 || run.time_threshold == 0 {
            return Err(CliError::Usage(
                "time unit and threshold must be at least 1".to_string(),
            ));
        }
        Ok(run)
    }
}

/// Non-default hyperparameters of the benchmark presets. Everything else
/// (k = 500, η = 10, b = 512) is the built-in default.
pub fn profile(p: Profile) -> Settings {
    let base = Settings {
        lr: Some(0.1),
        ..Settings::default()
    };
    match p {
        Profile::Icews14 => Settings {
            margin: Some(110.0),
            time_unit: Some(1),
            format: Some(DatasetFormat::PointTsv),
            ..base
        },
        Profile::Icews0515 => Settings {
            margin: Some(120.0),
            time_unit: Some(2),
            format: Some(DatasetFormat::PointTsv),
            ..base
        },
        Profile::Yago11k => Settings {
            margin: Some(50.0),
            time_threshold: Some(100),
            format: Some(DatasetFormat::IntervalTsv),
            ..base
        },
        Profile::Wikidata12k => Settings {
            lr: Some(0.3),
            margin: Some(20.0),
            time_threshold: Some(300),
            format: Some(DatasetFormat::IntervalTsv),
            ..base
        },
    }
}

fn parse_config_file(path: &Path) -> Result<Settings, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text)
        .map_err(|(line, msg)| CliError::Usage(format!("{}:{line}: {msg}", path.display())))
}

/// Parses `key = value` lines. `#` starts a comment; keys may use `-` or
/// `_`. Returns the 1-based line number of the first bad line on error.
pub fn parse_config(text: &str) -> Result<Settings, (usize, String)> {
    let mut s = Settings::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fail = |msg: String| (i + 1, msg);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        fn val<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, String>
        where
            T::Err: fmt::Display,
        {
            v.parse()
                .map(Some)
                .map_err(|e| format!("bad value `{v}` for `{key}`: {e}"))
        }
        let r: Result<(), String> = (|| {
            match key.as_str() {
                "train" => s.train = Some(PathBuf::from(value)),
                "valid" => s.valid = Some(PathBuf::from(value)),
                "test" => s.test = Some(PathBuf::from(value)),
                "format" => s.format = val(&key, value)?,
                "dim" => s.dim = val(&key, value)?,
                "margin" => s.margin = val(&key, value)?,
                "lr" => s.lr = val(&key, value)?,
                "neg-ratio" => s.neg_ratio = val(&key, value)?,
                "batch-size" => s.batch_size = val(&key, value)?,
                "time-unit" => s.time_unit = val(&key, value)?,
                "time-threshold" => s.time_threshold = val(&key, value)?,
                "norm" => s.norm = val(&key, value)?,
                "dual" => s.dual = val(&key, value)?,
                "seed" => s.seed = val(&key, value)?,
                "max-epochs" => s.max_epochs = val(&key, value)?,
                "valid-every" => s.valid_every = val(&key, value)?,
                "patience" => s.patience = val(&key, value)?,
                "checkpoint" => s.checkpoint = Some(PathBuf::from(value)),
                "out-dir" => s.out_dir = Some(PathBuf::from(value)),
                "threads" => s.threads = val(&key, value)?,
                "profile" => s.profile = val(&key, value)?,
                other => return Err(format!("unknown key `{other}`")),
            }
            Ok(())
        })();
        r.map_err(fail)?;
    }
    Ok(s)
}
