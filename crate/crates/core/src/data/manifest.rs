//! CSV manifests mapping feature-matrix rows to samples.
//!
//! Header: `sample_id,row,split,class_label,instance_id,frame_index`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureMatrix, LabeledSample, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub sample_id: String,
    pub row: u64,
    pub split: String,
    pub class_label: String,
    pub instance_id: u64,
    pub frame_index: u64,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Manifest(format!("{}: {e}", path.display()))
}

/// Maps raw labels to dense indices. Integer labels keep their value and must
/// cover `0..K` without gaps; any non-integer label switches to mapping the
/// sorted distinct strings onto `0..K`.
fn dense_labels(raw: &[&str]) -> Result<(BTreeMap<String, usize>, usize)> {
    let distinct: BTreeSet<&str> = raw.iter().copied().collect();
    let as_ints: Option<BTreeSet<u64>> = distinct.iter().map(|s| s.parse::<u64>().ok()).collect();
    match as_ints {
        Some(ints) => {
            let k = ints.len();
            if let Some((pos, missing)) = ints.iter().enumerate().find(|&(i, &v)| i as u64 != v) {
                return Err(Error::Manifest(format!(
                    "class labels must cover 0..{k} densely; label {pos} is missing (next is {missing})"
                )));
            }
            let map = distinct
                .iter()
                .map(|s| (s.to_string(), s.parse::<usize>().unwrap()))
                .collect();
            Ok((map, k))
        }
        None => {
            let map: BTreeMap<String, usize> = distinct
                .iter()
                .enumerate()
                .map(|(i, s)| (s.to_string(), i))
                .collect();
            let k = map.len();
            Ok((map, k))
        }
    }
}

/// Builds a [`Dataset`] from a manifest and the feature matrix it indexes.
/// The dataset name is the manifest's file stem.
pub fn load_manifest(path: impl AsRef<Path>, features: &FeatureMatrix) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let rows: Vec<ManifestRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_err(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    dataset_from_rows(name, &rows, features)
}

pub(crate) fn dataset_from_rows(
    name: String,
    rows: &[ManifestRow],
    features: &FeatureMatrix,
) -> Result<Dataset> {
    let raw: Vec<&str> = rows.iter().map(|r| r.class_label.as_str()).collect();
    let (labels, num_classes) = dense_labels(&raw)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for r in rows {
        if r.row >= features.rows() as u64 {
            return Err(Error::Manifest(format!(
                "sample `{}` references row {} but the feature matrix has {} rows",
                r.sample_id,
                r.row,
                features.rows()
            )));
        }
        let split: Split = r.split.parse()?;
        let sample = LabeledSample {
            features: features.row_f64(r.row as usize),
            class_label: labels[&r.class_label],
            instance_id: r.instance_id,
            frame_index: r.frame_index,
            split,
        };
        match split {
            Split::Train => train.push(sample),
            Split::Test => test.push(sample),
        }
    }
    let ds = Dataset {
        name,
        num_classes,
        dim: features.dim(),
        train,
        test,
    };
    ds.validate()?;
    Ok(ds)
}

/// Writes manifest rows with the required header.
pub fn write_manifest(path: impl AsRef<Path>, rows: &[ManifestRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Flattens a dataset into a feature matrix (train rows first, then test)
/// plus the manifest that indexes it.
pub fn dataset_to_files(ds: &Dataset) -> Result<(FeatureMatrix, Vec<ManifestRow>)> {
    let all: Vec<&LabeledSample> = ds.train.iter().chain(&ds.test).collect();
    let rows: Vec<Vec<f64>> = all.iter().map(|s| s.features.clone()).collect();
    let matrix = FeatureMatrix::from_rows(ds.dim, &rows)?;
    let manifest = all
        .iter()
        .enumerate()
        .map(|(i, s)| ManifestRow {
            sample_id: format!("{}-{i}", s.split),
            row: i as u64,
            split: s.split.to_string(),
            class_label: s.class_label.to_string(),
            instance_id: s.instance_id,
            frame_index: s.frame_index,
        })
        .collect();
    Ok((matrix, manifest))
}
