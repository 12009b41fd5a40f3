//! Results log (JSON lines) and baseline records.

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use rehearsal_core::protocol::CurveEvent;
use rehearsal_core::{Error, Method, OrderingKind, Result};

/// One test event of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub run_id: String,
    pub dataset: String,
    pub method: Method,
    pub buffer_size: usize,
    pub ordering: OrderingKind,
    pub seed: u64,
    pub t: u64,
    pub accuracy: f64,
}

/// A stored prototype, written when buffer dumps are requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferDump {
    pub class: usize,
    pub count: u64,
    pub vector: Vec<f64>,
}

/// Last record of a run; its presence marks the run as complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndRecord {
    pub run_id: String,
    pub dataset: String,
    pub method: Method,
    pub buffer_size: usize,
    pub ordering: OrderingKind,
    pub seed: u64,
    pub num_events: usize,
    pub final_accuracy: f64,
    pub memory_cost: f64,
    pub presentations: u64,
    pub wall_clock_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffers: Option<Vec<BufferDump>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Record {
    End(EndRecord),
    Event(EventRecord),
}

impl Record {
    pub fn run_id(&self) -> &str {
        match self {
            Record::End(r) => &r.run_id,
            Record::Event(r) => &r.run_id,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Parsed lines of a results log, with the raw text kept for rewriting.
pub struct ResultsLog {
    pub lines: Vec<(String, Record)>,
    /// A final line that did not parse (an interrupted write).
    pub truncated_tail: bool,
}

/// Reads a results log. With `tolerate_tail`, an unparseable final line is
/// dropped instead of failing.
pub fn read_results(path: &Path, tolerate_tail: bool) -> Result<ResultsLog> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let raw: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let last = raw.iter().rposition(|l| !l.trim().is_empty());
    let mut lines = Vec::with_capacity(raw.len());
    let mut truncated_tail = false;
    for (i, line) in raw.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Record>(&line) {
            Ok(r) => lines.push((line, r)),
            Err(_) if tolerate_tail && Some(i) == last => truncated_tail = true,
            Err(e) => {
                return Err(Error::Format(format!(
                    "{}:{}: bad results record: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(ResultsLog {
        lines,
        truncated_tail,
    })
}

/// Offline accuracy for one dataset and seed. `curve`, when present, gives a
/// per-event offline accuracy instead of the constant `accuracy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineRecord {
    pub dataset: String,
    pub seed: u64,
    pub accuracy: f64,
    pub epochs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Vec<CurveEvent>>,
}

/// Reads one or more concatenated baseline objects.
pub fn read_baselines(path: &Path) -> Result<Vec<BaselineRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records = serde_json::Deserializer::from_str(&text)
        .into_iter::<BaselineRecord>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| {
            Error::Format(format!(
                "{}:{}:{}: bad baseline record: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
    if records.is_empty() {
        return Err(Error::Format(format!(
            "{}: no baseline records",
            path.display()
        )));
    }
    Ok(records)
}

/// The baseline for `(dataset, seed)`: an exact seed match, or the dataset's
/// only record.
pub fn find_baseline<'a>(
    records: &'a [BaselineRecord],
    dataset: &str,
    seed: u64,
) -> Result<&'a BaselineRecord> {
    let same: Vec<&BaselineRecord> = records.iter().filter(|r| r.dataset == dataset).collect();
    if let Some(r) = same.iter().find(|r| r.seed == seed) {
        return Ok(r);
    }
    match same.as_slice() {
        [only] => Ok(only),
        [] => {
            let known: Vec<&str> = records.iter().map(|r| r.dataset.as_str()).collect();
            Err(Error::Join(format!(
                "no baseline for dataset `{dataset}` (baselines cover: {})",
                known.join(", ")
            )))
        }
        _ => Err(Error::Join(format!(
            "no baseline for dataset `{dataset}` with seed {seed}"
        ))),
    }
}
