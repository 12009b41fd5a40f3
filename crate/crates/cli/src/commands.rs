//! `synth`, `baseline` and `run`.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use rehearsal_core::data::{
    dataset_to_files, load_feature_matrix, load_manifest, synth_gaussian, write_manifest,
};
use rehearsal_core::protocol::{run, RunConfig};
use rehearsal_core::{Dataset, Error, MlpClassifier, MlpConfig, Result, SynthSpec};

use crate::config::{expand, read_json, DatasetPaths, ExperimentConfig, RunKey};
use crate::records::{
    find_baseline, read_baselines, read_results, BaselineRecord, BufferDump, EndRecord,
    EventRecord, Record,
};

/// Loads the feature file and manifest named in `paths`.
pub fn load_dataset(paths: &DatasetPaths, normalize: bool) -> Result<Dataset> {
    let (Some(features), Some(manifest)) = (&paths.features, &paths.manifest) else {
        return Err(Error::Usage(
            "a dataset needs both --features and --manifest".into(),
        ));
    };
    let matrix = load_feature_matrix(features)?;
    let ds = load_manifest(manifest, &matrix)?;
    Ok(if normalize { ds.l2_normalized() } else { ds })
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

/// Writes `<name>.feat` and `<name>.csv` for the spec's dataset into
/// `out_dir` and returns their paths. The manifest's file stem is the
/// dataset name seen by the other commands.
pub fn cmd_synth(spec: &SynthSpec, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let ds = synth_gaussian(spec)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let (matrix, rows) = dataset_to_files(&ds)?;
    let features = out_dir.join(format!("{}.feat", ds.name));
    let manifest = out_dir.join(format!("{}.csv", ds.name));
    matrix.write(&features)?;
    write_manifest(&manifest, &rows)?;
    Ok((features, manifest))
}

/// Reads a synth spec file, or the default spec when `path` is `None`.
pub fn load_synth_spec(path: Option<&Path>) -> Result<SynthSpec> {
    let spec: SynthSpec = match path {
        Some(p) => read_json(p)?,
        None => SynthSpec::default(),
    };
    spec.validate()?;
    Ok(spec)
}

fn with_seed(mlp: &MlpConfig, seed: u64) -> MlpConfig {
    MlpConfig {
        seed,
        ..mlp.clone()
    }
}

/// Trains one offline model per configured seed and writes one record per
/// line to `out`.
pub fn cmd_baseline(
    config: &ExperimentConfig,
    out: &Path,
    jobs: Option<usize>,
) -> Result<Vec<BaselineRecord>> {
    config.validate()?;
    let ds = load_dataset(&config.dataset, config.normalize)?;
    let mlp = config.mlp.resolve()?;
    let records = pool(jobs)?.install(|| {
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                let mut model = MlpClassifier::new(with_seed(&mlp, seed), ds.dim, ds.num_classes)?;
                let accuracy = model.fit_offline(&ds, config.epochs)?;
                Ok(BaselineRecord {
                    dataset: ds.name.clone(),
                    seed,
                    accuracy,
                    epochs: config.epochs,
                    curve: None,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    create_parent(out)?;
    let mut text = String::new();
    for r in &records {
        text += &serde_json::to_string(r).expect("baseline serializes");
        text.push('\n');
    }
    fs::write(out, text).map_err(|e| Error::io(out, e))?;
    Ok(records)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub jobs: Option<usize>,
    /// Add every stored prototype to each run's final record.
    pub dump_buffers: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub planned: usize,
    pub skipped: usize,
    pub executed: usize,
}

/// Executes one sweep point and returns its log records, final record last.
pub fn execute_run(
    ds: &Dataset,
    config: &ExperimentConfig,
    key: RunKey,
    dump_buffers: bool,
) -> Result<Vec<Record>> {
    let started = Instant::now();
    let mut rc = RunConfig::new(
        key.method,
        key.buffer_size,
        key.ordering,
        config.mlp.resolve()?,
        key.seed,
    );
    rc.eval_every = config.eval_every;
    rc.eval_scope = config.eval_scope;
    let out = run(ds, &rc)?;
    let run_id = key.run_id(&ds.name);
    let mut records: Vec<Record> = out
        .curve
        .events()
        .iter()
        .map(|e| {
            Record::Event(EventRecord {
                run_id: run_id.clone(),
                dataset: ds.name.clone(),
                method: key.method,
                buffer_size: key.buffer_size,
                ordering: key.ordering,
                seed: key.seed,
                t: e.t,
                accuracy: e.accuracy,
            })
        })
        .collect();
    let buffers = match (&out.buffers, dump_buffers) {
        (Some(m), true) => Some(
            (0..m.num_classes())
                .flat_map(|class| {
                    m.class_buffer(class)
                        .prototypes()
                        .into_iter()
                        .map(move |p| BufferDump {
                            class,
                            count: p.count,
                            vector: p.vector,
                        })
                })
                .collect(),
        ),
        _ => None,
    };
    records.push(Record::End(EndRecord {
        run_id,
        dataset: ds.name.clone(),
        method: key.method,
        buffer_size: key.buffer_size,
        ordering: key.ordering,
        seed: key.seed,
        num_events: out.curve.total_events(),
        final_accuracy: out.curve.last().map_or(f64::NAN, |e| e.accuracy),
        memory_cost: out.memory_cost,
        presentations: out.presentations,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        buffers,
    }));
    Ok(records)
}

/// Keeps only the lines of completed runs in an existing log and returns
/// their run ids.
fn prune_incomplete(out: &Path) -> Result<HashSet<String>> {
    if !out.exists() {
        return Ok(HashSet::new());
    }
    let log = read_results(out, true)?;
    let done: HashSet<String> = log
        .lines
        .iter()
        .filter_map(|(_, r)| match r {
            Record::End(e) => Some(e.run_id.clone()),
            Record::Event(_) => None,
        })
        .collect();
    let keep: Vec<&str> = log
        .lines
        .iter()
        .filter(|(_, r)| done.contains(r.run_id()))
        .map(|(l, _)| l.as_str())
        .collect();
    if log.truncated_tail || keep.len() != log.lines.len() {
        let tmp = out.with_extension("jsonl.tmp");
        let mut text = keep.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, out).map_err(|e| Error::io(out, e))?;
    }
    Ok(done)
}

/// Runs every sweep point whose run id is not yet complete in `out`,
/// appending records in sweep order. Runs execute in parallel; a single
/// writer serializes the appends.
pub fn cmd_run(
    config: &ExperimentConfig,
    baseline: &Path,
    out: &Path,
    options: &RunOptions,
) -> Result<RunSummary> {
    config.validate()?;
    let ds = load_dataset(&config.dataset, config.normalize)?;
    if !baseline.exists() {
        return Err(Error::Usage(format!(
            "baseline file {} not found; create it with `rehearsal baseline` first",
            baseline.display()
        )));
    }
    let baselines = read_baselines(baseline)?;
    for &seed in &config.seeds {
        find_baseline(&baselines, &ds.name, seed).map_err(|e| {
            Error::Usage(format!(
                "{e}; run `rehearsal baseline` for this dataset first"
            ))
        })?;
    }

    let keys = expand(config, ds.num_classes);
    create_parent(out)?;
    let done = prune_incomplete(out)?;
    let pending: Vec<RunKey> = keys
        .iter()
        .copied()
        .filter(|k| !done.contains(&k.run_id(&ds.name)))
        .collect();
    let summary = RunSummary {
        planned: keys.len(),
        skipped: keys.len() - pending.len(),
        executed: pending.len(),
    };
    if pending.is_empty() {
        return Ok(summary);
    }

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out)
        .map_err(|e| Error::io(out, e))?;
    let pool = pool(options.jobs)?;
    let (tx, rx) = mpsc::channel::<(usize, Vec<Record>)>();
    let (outcome, written) = std::thread::scope(|scope| {
        let writer = scope.spawn(move || write_in_order(file, out, rx));
        let outcome = pool.install(|| {
            pending
                .par_iter()
                .enumerate()
                .try_for_each_with(tx, |tx, (i, &key)| {
                    let records = execute_run(&ds, config, key, options.dump_buffers)?;
                    tx.send((i, records)).expect("writer outlives the workers");
                    Ok::<_, Error>(())
                })
        });
        (outcome, writer.join().expect("writer thread panicked"))
    });
    written?;
    outcome?;
    Ok(summary)
}

/// Appends finished runs in index order; runs that finish early wait for
/// their predecessors. Whatever is left when the channel closes (after a
/// failed run) is flushed in index order too.
fn write_in_order(file: File, path: &Path, rx: mpsc::Receiver<(usize, Vec<Record>)>) -> Result<()> {
    let mut w = BufWriter::new(file);
    let mut waiting: BTreeMap<usize, Vec<Record>> = BTreeMap::new();
    let mut next = 0;
    let write = |records: Vec<Record>, w: &mut BufWriter<File>| -> Result<()> {
        for r in records {
            writeln!(w, "{}", r.to_line()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    };
    for (i, records) in rx {
        waiting.insert(i, records);
        while let Some(records) = waiting.remove(&next) {
            write(records, &mut w)?;
            next += 1;
        }
    }
    for (_, records) in std::mem::take(&mut waiting) {
        write(records, &mut w)?;
    }
    Ok(())
}
