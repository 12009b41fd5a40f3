//! Streaming classification with memory-bounded rehearsal.
//!
//! A stream of labeled feature vectors is consumed one sample at a time. Each
//! sample first updates a bounded per-class prototype buffer ([`buffers`]),
//! then every stored prototype is replayed through a small fully-connected
//! network ([`learner`]) for one gradient step. Test accuracy is recorded at a
//! fixed stride and summarized against an offline model ([`metrics`]).
//!
//! The [`protocol`] module ties these together; [`data`] handles feature
//! files, manifests, stream orderings and synthetic datasets.

pub mod buffers;
pub mod data;
pub mod error;
pub mod learner;
pub mod metrics;
pub mod protocol;
pub mod rng;

pub use buffers::{BufferManager, Prototype, Strategy};
pub use data::{Dataset, LabeledSample, OrderingKind, Split, StreamOrdering, SynthSpec};
pub use error::{Error, Result};
pub use learner::{Activation, MlpClassifier, MlpConfig, Mode};
pub use metrics::{mu_total, omega_b, MuTotalResult, OmegaResult};
pub use protocol::{AccuracyCurve, CurveEvent, EvalScope, Method, RunConfig};
