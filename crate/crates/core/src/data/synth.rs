//! Gaussian class/instance mixtures for desk-scale experiments.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, LabeledSample, Split};
use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Parameters of a synthetic dataset.
///
/// Each class gets a mean; each instance (clip) of a class gets a Gaussian
/// offset from that mean with std `instance_spread`; frames are the instance
/// mean plus isotropic noise with std `noise_std`. Test samples come from
/// their own held-out instances, so instance identity carries no label
/// information beyond the class mean. Missing fields take their
/// [`Default`] values when deserialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub dim: usize,
    pub samples_per_class_train: usize,
    pub samples_per_class_test: usize,
    pub instances_per_class: usize,
    pub class_mean_separation: f64,
    pub noise_std: f64,
    pub instance_spread: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            num_classes: 2,
            dim: 10,
            samples_per_class_train: 200,
            samples_per_class_test: 100,
            instances_per_class: 4,
            class_mean_separation: 10.0,
            noise_std: 1.0,
            instance_spread: 1.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_classes", self.num_classes),
            ("dim", self.dim),
            ("samples_per_class_train", self.samples_per_class_train),
            ("samples_per_class_test", self.samples_per_class_test),
            ("instances_per_class", self.instances_per_class),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be at least 1")));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config("noise_std must be positive".into()));
        }
        if !(self.class_mean_separation >= 0.0 && self.class_mean_separation.is_finite()) {
            return Err(Error::Config("class_mean_separation must be >= 0".into()));
        }
        if !(self.instance_spread >= 0.0 && self.instance_spread.is_finite()) {
            return Err(Error::Config("instance_spread must be >= 0".into()));
        }
        Ok(())
    }
}

/// Class means with pairwise distance at least `sep`.
///
/// With `K <= d` the means are scaled basis vectors `sep/sqrt(2) * e_k`
/// (a regular simplex, all pairwise distances exactly `sep`). Otherwise they
/// sit on an integer lattice with spacing `sep`.
pub(crate) fn class_means(k: usize, d: usize, sep: f64) -> Vec<Vec<f64>> {
    if k <= d {
        let scale = sep / std::f64::consts::SQRT_2;
        (0..k)
            .map(|c| {
                let mut m = vec![0.0; d];
                m[c] = scale;
                m
            })
            .collect()
    } else {
        let base = (1..)
            .find(|&b: &usize| (b as f64).powi(d as i32) >= k as f64)
            .unwrap();
        (0..k)
            .map(|c| {
                let mut m = vec![0.0; d];
                let mut rest = c;
                for v in m.iter_mut() {
                    *v = (rest % base) as f64 * sep;
                    rest /= base;
                }
                m
            })
            .collect()
    }
}

/// Deterministic under `spec.seed`.
pub fn synth_gaussian(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let d = spec.dim;
    let means = class_means(spec.num_classes, d, spec.class_mean_separation);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::Config(e.to_string()))?;
    let spread =
        Normal::new(0.0, spec.instance_spread).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = rng::seeded(spec.seed, stream::SYNTH);

    let mut next_instance = 0u64;
    let mut make_split = |split: Split, per_class: usize, rng: &mut rng::Rng| {
        let mut out = Vec::with_capacity(per_class * spec.num_classes);
        for (class, mean) in means.iter().enumerate() {
            let inst = spec.instances_per_class;
            for j in 0..inst {
                let instance_id = next_instance;
                next_instance += 1;
                let centre: Vec<f64> = mean.iter().map(|m| m + spread.sample(rng)).collect();
                // spread the remainder over the first instances
                let frames = per_class / inst + usize::from(j < per_class % inst);
                for frame in 0..frames {
                    let features = centre.iter().map(|c| c + noise.sample(rng)).collect();
                    out.push(LabeledSample {
                        features,
                        class_label: class,
                        instance_id,
                        frame_index: frame as u64,
                        split,
                    });
                }
            }
        }
        out
    };
    let train = make_split(Split::Train, spec.samples_per_class_train, &mut rng);
    let test = make_split(Split::Test, spec.samples_per_class_test, &mut rng);

    let ds = Dataset {
        name: format!("synth-k{}-d{}-s{}", spec.num_classes, d, spec.seed),
        num_classes: spec.num_classes,
        dim: d,
        train,
        test,
    };
    ds.validate()?;
    Ok(ds)
}
