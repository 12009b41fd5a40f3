//! JSON experiment configs. Command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rehearsal_core::protocol::EvalScope;
use rehearsal_core::{Error, Method, MlpConfig, OrderingKind, Result, Strategy};

/// A named preset or an inline learner config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MlpRef {
    Preset(String),
    Inline(MlpConfig),
}

impl Default for MlpRef {
    fn default() -> Self {
        MlpRef::Preset("synth".into())
    }
}

impl MlpRef {
    pub fn resolve(&self) -> Result<MlpConfig> {
        let config = match self {
            MlpRef::Preset(name) => MlpConfig::preset(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown mlp preset `{name}` (expected one of {})",
                    MlpConfig::PRESETS.join(", ")
                ))
            })?,
            MlpRef::Inline(c) => c.clone(),
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    pub features: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
}

/// Everything `baseline` and `run` read from a config file. One file can
/// drive both commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetPaths,
    pub mlp: MlpRef,
    /// L2-normalize every feature vector after loading.
    pub normalize: bool,
    /// Offline training epochs for `baseline`.
    pub epochs: usize,
    pub methods: Vec<Method>,
    /// `None` picks the default grid for the dataset's class count.
    pub buffer_sizes: Option<Vec<usize>>,
    pub orderings: Vec<OrderingKind>,
    pub seeds: Vec<u64>,
    pub eval_every: usize,
    pub eval_scope: EvalScope,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetPaths::default(),
            mlp: MlpRef::default(),
            normalize: true,
            epochs: 50,
            methods: all_methods(),
            buffer_sizes: None,
            orderings: OrderingKind::ALL.to_vec(),
            seeds: vec![0],
            eval_every: 1,
            eval_scope: EvalScope::default(),
        }
    }
}

/// Full rehearsal, no buffer and every bounded strategy.
pub fn all_methods() -> Vec<Method> {
    let mut out = vec![Method::Buffer(Strategy::Full), Method::NoBuffer];
    out.extend(Strategy::BOUNDED.map(Method::Buffer));
    out
}

/// Powers of two from 2 to 256, or 2 to 16 for datasets with at least 100
/// classes.
pub fn default_buffer_sizes(num_classes: usize) -> Vec<usize> {
    let top = if num_classes >= 100 { 4 } else { 8 };
    (1..=top).map(|p| 1usize << p).collect()
}

impl ExperimentConfig {
    /// Reads a config file; relative dataset paths resolve against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut config.dataset.features, &mut config.dataset.manifest]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        if self.orderings.is_empty() {
            return Err(Error::Config("orderings must not be empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        if let Some(sizes) = &self.buffer_sizes {
            if sizes.is_empty() || sizes.contains(&0) {
                return Err(Error::Config(
                    "buffer_sizes must be a non-empty list of positive sizes".into(),
                ));
            }
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        self.mlp.resolve().map(drop)
    }
}

/// Parses a JSON file, reporting the line and column of syntax or schema
/// errors.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// One point of the sweep's cartesian product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunKey {
    pub ordering: OrderingKind,
    pub method: Method,
    /// 0 for methods without a bounded buffer.
    pub buffer_size: usize,
    pub seed: u64,
}

impl RunKey {
    pub fn run_id(&self, dataset: &str) -> String {
        format!(
            "{dataset}/{}/{}/b{}/s{}",
            self.ordering.as_str(),
            self.method,
            self.buffer_size,
            self.seed
        )
    }
}

/// Expands the sweep in a fixed order: ordering, method, buffer size, seed.
/// Methods without a bounded buffer run once per seed with size 0.
pub fn expand(config: &ExperimentConfig, num_classes: usize) -> Vec<RunKey> {
    let sizes = config
        .buffer_sizes
        .clone()
        .unwrap_or_else(|| default_buffer_sizes(num_classes));
    let mut keys = Vec::new();
    for &ordering in &config.orderings {
        for &method in &config.methods {
            let method_sizes = if method.is_bounded() {
                sizes.clone()
            } else {
                vec![0]
            };
            for &buffer_size in &method_sizes {
                for &seed in &config.seeds {
                    let key = RunKey {
                        ordering,
                        method,
                        buffer_size,
                        seed,
                    };
                    if !keys.contains(&key) {
                        keys.push(key);
                    }
                }
            }
        }
    }
    keys
}
