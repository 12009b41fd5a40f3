//! The streaming loop: buffer update, rehearsal, periodic evaluation.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::buffers::{BufferManager, Strategy};
use crate::data::{order_stream, Dataset, LabeledSample, StreamOrdering};
use crate::error::{Error, Result};
use crate::learner::{Minibatch, MlpClassifier, MlpConfig};
use crate::rng::{self, stream, Rng};

/// How a run updates its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Rehearse every stored prototype after each buffer update.
    Buffer(Strategy),
    /// One gradient step on the incoming sample only.
    NoBuffer,
}

impl Method {
    /// Whether the buffer size is meaningful (bounded buffer strategies).
    pub fn is_bounded(self) -> bool {
        matches!(self, Method::Buffer(s) if s.is_bounded())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Buffer(s) => s.fmt(f),
            Method::NoBuffer => f.write_str("no_buffer"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no_buffer" => Ok(Method::NoBuffer),
            other => other
                .parse()
                .map(Method::Buffer)
                .map_err(|_| Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which test samples a test event scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalScope {
    /// Test samples of classes that have appeared in the stream so far. Falls
    /// back to the whole test set while no seen class has test samples.
    #[default]
    SeenClasses,
    /// The whole test set at every event.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    /// Per-class capacity `b`; ignored by `full` and `no_buffer`.
    pub buffer_size: usize,
    pub ordering: StreamOrdering,
    /// Learner hyperparameters; `mlp.seed` seeds initialization, dropout and
    /// rehearsal shuffling.
    pub mlp: MlpConfig,
    pub eval_every: usize,
    #[serde(default)]
    pub eval_scope: EvalScope,
    pub buffer_seed: u64,
}

impl RunConfig {
    /// A config whose ordering, learner and buffer seeds all derive from `seed`.
    pub fn new(
        method: Method,
        buffer_size: usize,
        ordering: crate::data::OrderingKind,
        mlp: MlpConfig,
        seed: u64,
    ) -> Self {
        Self {
            method,
            buffer_size,
            ordering: StreamOrdering::new(ordering, seed),
            mlp: MlpConfig { seed, ..mlp },
            eval_every: 1,
            eval_scope: EvalScope::default(),
            buffer_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if self.method.is_bounded() && self.buffer_size == 0 {
            return Err(Error::Config(format!(
                "{} needs a buffer size of at least 1",
                self.method
            )));
        }
        self.mlp.validate()
    }

    /// Buffer size as logged: 0 for methods without a bounded buffer.
    pub fn logged_buffer_size(&self) -> usize {
        if self.method.is_bounded() {
            self.buffer_size
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveEvent {
    /// Training samples seen when the event fired.
    pub t: u64,
    pub accuracy: f64,
}

/// Test accuracy over the course of a stream; timestamps strictly increase.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AccuracyCurve {
    events: Vec<CurveEvent>,
}

impl AccuracyCurve {
    /// Panics if timestamps are not strictly increasing.
    pub fn from_events(events: Vec<CurveEvent>) -> Self {
        assert!(
            events.windows(2).all(|w| w[0].t < w[1].t),
            "timestamps must increase"
        );
        Self { events }
    }

    /// The same accuracy at every timestamp.
    pub fn constant(schedule: &[u64], accuracy: f64) -> Self {
        Self::from_events(
            schedule
                .iter()
                .map(|&t| CurveEvent { t, accuracy })
                .collect(),
        )
    }

    pub fn events(&self) -> &[CurveEvent] {
        &self.events
    }

    pub fn total_events(&self) -> usize {
        self.events.len()
    }

    pub fn timestamps(&self) -> Vec<u64> {
        self.events.iter().map(|e| e.t).collect()
    }

    pub fn last(&self) -> Option<CurveEvent> {
        self.events.last().copied()
    }

    fn push(&mut self, t: u64, accuracy: f64) {
        debug_assert!(self.events.last().is_none_or(|e| e.t < t));
        self.events.push(CurveEvent { t, accuracy });
    }
}

/// Timestamps at which a stream of `n` samples is evaluated: every multiple of
/// `eval_every`, plus the final sample.
pub fn event_schedule(n: usize, eval_every: usize) -> Vec<u64> {
    let n = n as u64;
    let every = eval_every.max(1) as u64;
    let mut out: Vec<u64> = (1..=n).filter(|t| t % every == 0).collect();
    if n > 0 && out.last() != Some(&n) {
        out.push(n);
    }
    out
}

/// Everything a finished streaming run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curve: AccuracyCurve,
    pub model: MlpClassifier,
    /// `None` for `no_buffer`.
    pub buffers: Option<BufferManager>,
    pub memory_cost: f64,
    /// Total samples fed through gradient steps over the run.
    pub presentations: u64,
}

/// Replays every stored prototype once, in shuffled order, in mini-batches of
/// `min(batch_size, stored)`. Returns the number of prototypes presented; an
/// empty buffer leaves the model untouched.
pub fn rehearsal_update(
    model: &mut MlpClassifier,
    manager: &BufferManager,
    rng: &mut Rng,
) -> Result<usize> {
    let contents = manager.contents();
    if contents.is_empty() {
        return Ok(0);
    }
    let mut order: Vec<usize> = (0..contents.len()).collect();
    order.shuffle(rng);
    for chunk in order.chunks(batch_size_for(model.config().batch_size, contents.len())) {
        let batch = Minibatch::from_rows(
            chunk
                .iter()
                .map(|&i| (contents[i].0.as_slice(), contents[i].1)),
            model.input_dim(),
        );
        model.train_minibatch(&batch)?;
    }
    Ok(contents.len())
}

/// Mini-batch size used for `stored` prototypes.
pub fn batch_size_for(batch_size: usize, stored: usize) -> usize {
    batch_size.min(stored).max(1)
}

/// Builds and caches the evaluation matrix for the current scope.
struct Evaluator<'a> {
    test: &'a [LabeledSample],
    scope: EvalScope,
    dim: usize,
    seen: Vec<bool>,
    cached: Option<(Vec<bool>, Array2<f64>, Vec<usize>)>,
}

impl<'a> Evaluator<'a> {
    fn new(dataset: &'a Dataset, scope: EvalScope) -> Self {
        Self {
            test: &dataset.test,
            scope,
            dim: dataset.dim,
            seen: vec![false; dataset.num_classes],
            cached: None,
        }
    }

    fn observe(&mut self, class: usize) {
        self.seen[class] = true;
    }

    fn accuracy(&mut self, model: &MlpClassifier) -> Result<f64> {
        let key = match self.scope {
            EvalScope::All => vec![true; self.seen.len()],
            EvalScope::SeenClasses => {
                if self.test.iter().any(|s| self.seen[s.class_label]) {
                    self.seen.clone()
                } else {
                    vec![true; self.seen.len()]
                }
            }
        };
        if self.cached.as_ref().is_none_or(|(k, _, _)| *k != key) {
            let batch = Minibatch::from_rows(
                self.test
                    .iter()
                    .filter(|s| key[s.class_label])
                    .map(|s| (s.features.as_slice(), s.class_label)),
                self.dim,
            );
            self.cached = Some((key, batch.inputs, batch.labels));
        }
        let (_, x, y) = self.cached.as_ref().unwrap();
        model.accuracy(x.view(), y)
    }
}

/// Runs one single-pass stream and records test accuracy on the schedule from
/// [`event_schedule`].
pub fn run(dataset: &Dataset, config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    if dataset.test.is_empty() {
        return Err(Error::Usage("dataset has no test samples".into()));
    }
    let order = order_stream(dataset, config.ordering)?;
    let mut model = MlpClassifier::new(config.mlp.clone(), dataset.dim, dataset.num_classes)?;
    let mut manager = match config.method {
        Method::Buffer(strategy) => Some(BufferManager::new(
            strategy,
            config.buffer_size,
            dataset.num_classes,
            dataset.dim,
            config.buffer_seed,
        )?),
        Method::NoBuffer => None,
    };
    let mut shuffle_rng = rng::seeded(config.mlp.seed, stream::REHEARSAL);
    let mut evaluator = Evaluator::new(dataset, config.eval_scope);
    let mut curve = AccuracyCurve::default();
    let mut presentations = 0u64;
    let n = order.len() as u64;

    for (step, &idx) in order.iter().enumerate() {
        let t = step as u64 + 1;
        let sample = &dataset.train[idx];
        evaluator.observe(sample.class_label);
        match &mut manager {
            Some(m) => {
                m.insert(&sample.features, sample.class_label, t)?;
                presentations += rehearsal_update(&mut model, m, &mut shuffle_rng)? as u64;
            }
            None => {
                let batch = Minibatch::from_rows(
                    [(sample.features.as_slice(), sample.class_label)],
                    dataset.dim,
                );
                model.train_minibatch(&batch)?;
                presentations += 1;
            }
        }
        if t.is_multiple_of(config.eval_every as u64) || t == n {
            curve.push(t, evaluator.accuracy(&model)?);
        }
    }
    let memory_cost = manager.as_ref().map_or(0.0, BufferManager::memory_cost);
    Ok(RunOutput {
        curve,
        model,
        buffers: manager,
        memory_cost,
        presentations,
    })
}

/// Streaming run with rehearsal from the configured buffer.
pub fn run_streaming(dataset: &Dataset, config: &RunConfig) -> Result<AccuracyCurve> {
    if config.method == Method::NoBuffer {
        return Err(Error::Config(
            "run_streaming needs a buffer strategy; use run_no_buffer".into(),
        ));
    }
    run(dataset, config).map(|o| o.curve)
}

/// Sample-by-sample fine-tuning without any buffer.
pub fn run_no_buffer(dataset: &Dataset, config: &RunConfig) -> Result<AccuracyCurve> {
    let config = RunConfig {
        method: Method::NoBuffer,
        ..config.clone()
    };
    run(dataset, &config).map(|o| o.curve)
}

/// Trains an offline model on all training data and returns its accuracy as a
/// constant curve on the streaming schedule of `config`.
pub fn run_offline_baseline(
    dataset: &Dataset,
    config: &RunConfig,
    epochs: usize,
) -> Result<(AccuracyCurve, f64)> {
    let mut model = MlpClassifier::new(config.mlp.clone(), dataset.dim, dataset.num_classes)?;
    let accuracy = model.fit_offline(dataset, epochs)?;
    let schedule = event_schedule(dataset.train.len(), config.eval_every);
    Ok((AccuracyCurve::constant(&schedule, accuracy), accuracy))
}
