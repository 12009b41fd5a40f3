use rand::seq::SliceRandom;

use super::{Minibatch, MlpClassifier};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, stream};

impl MlpClassifier {
    /// Multi-epoch mini-batch SGD over the whole training set, reshuffled each
    /// epoch. Returns test accuracy.
    pub fn fit_offline(&mut self, dataset: &Dataset, epochs: usize) -> Result<f64> {
        if epochs == 0 {
            return Err(Error::Usage(
                "offline training needs at least one epoch".into(),
            ));
        }
        if dataset.train.is_empty() {
            return Err(Error::Usage(
                "offline training needs training samples".into(),
            ));
        }
        let mut order: Vec<usize> = (0..dataset.train.len()).collect();
        let batch_size = self.config.batch_size;
        for epoch in 0..epochs {
            order.shuffle(&mut rng::seeded_sub(
                self.config.seed,
                stream::OFFLINE,
                epoch as u64,
            ));
            for chunk in order.chunks(batch_size) {
                let batch = Minibatch::from_rows(
                    chunk.iter().map(|&i| {
                        let s = &dataset.train[i];
                        (s.features.as_slice(), s.class_label)
                    }),
                    dataset.dim,
                );
                self.train_minibatch(&batch)?;
            }
        }
        self.evaluate_accuracy(&dataset.test)
    }
}
