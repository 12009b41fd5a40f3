//! A small fully-connected classifier trained with plain SGD.
//!
//! Each hidden layer is `affine → batch norm → activation → dropout`; the
//! output layer is affine followed by softmax, trained with cross-entropy.

mod checkpoint;
mod mlp;
mod offline;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mlp::{Gradients, Minibatch, MlpClassifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    /// ELU with `α = 1`.
    Elu,
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "elu" => Ok(Activation::Elu),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics (when the batch has at least two rows) and dropout.
    Train,
    /// Running statistics, no dropout.
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlpConfig {
    /// Hidden layer widths; empty means a single affine layer.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    /// Probability of keeping a hidden unit during training.
    pub dropout_keep: f64,
    /// L2 coefficient applied to weight matrices (not biases or batch-norm
    /// parameters).
    #[serde(default)]
    pub weight_decay: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
}

impl MlpConfig {
    /// Offline-tuned settings for 2048-d iCub1 features.
    pub fn icub1() -> Self {
        Self {
            layer_sizes: vec![300, 150, 100],
            activation: Activation::Relu,
            dropout_keep: 0.5,
            weight_decay: 0.005,
            learning_rate: 0.0001,
            batch_size: 256,
            seed: 0,
        }
    }

    pub fn core50() -> Self {
        Self {
            layer_sizes: vec![400, 100, 50],
            activation: Activation::Relu,
            dropout_keep: 0.5,
            weight_decay: 0.0,
            learning_rate: 0.002,
            batch_size: 256,
            seed: 0,
        }
    }

    pub fn cub200() -> Self {
        Self {
            layer_sizes: vec![350, 300],
            activation: Activation::Elu,
            dropout_keep: 0.75,
            weight_decay: 0.0,
            learning_rate: 0.002,
            batch_size: 100,
            seed: 0,
        }
    }

    /// Small fast learner for low-dimensional synthetic data. With one
    /// sample per step it overwrites old classes quickly, which makes the gap
    /// between rehearsal and plain fine-tuning easy to see.
    pub fn synth() -> Self {
        Self {
            layer_sizes: vec![32],
            activation: Activation::Relu,
            dropout_keep: 1.0,
            weight_decay: 0.01,
            learning_rate: 0.5,
            batch_size: 16,
            seed: 0,
        }
    }

    pub const PRESETS: [&'static str; 4] = ["icub1", "core50", "cub200", "synth"];

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "icub1" => Some(Self::icub1()),
            "core50" => Some(Self::core50()),
            "cub200" => Some(Self::cub200()),
            "synth" => Some(Self::synth()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.contains(&0) {
            return Err(Error::Config(
                "hidden layer widths must be at least 1".into(),
            ));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::Config(format!(
                "dropout_keep must be in (0, 1], got {}",
                self.dropout_keep
            )));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config("weight_decay must be non-negative".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}
