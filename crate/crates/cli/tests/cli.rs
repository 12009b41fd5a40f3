use std::collections::HashSet;
use std::path::Path;
use std::process::Command;

use rehearsal_cli::commands::{cmd_baseline, cmd_run, cmd_synth, RunOptions};
use rehearsal_cli::config::ExperimentConfig;
use rehearsal_cli::records::{read_results, BaselineRecord, EndRecord, EventRecord, Record};
use rehearsal_cli::report::cmd_report;
use rehearsal_core::data::{load_feature_matrix, load_manifest};
use rehearsal_core::{Error, Method, OrderingKind, Strategy, SynthSpec};

fn small_spec() -> SynthSpec {
    SynthSpec {
        samples_per_class_train: 30,
        samples_per_class_test: 20,
        ..SynthSpec::default()
    }
}

fn setup(dir: &Path) -> ExperimentConfig {
    let (features, manifest) = cmd_synth(&small_spec(), &dir.join("data")).unwrap();
    let mut c = ExperimentConfig {
        methods: vec![
            Method::Buffer(Strategy::ExStream),
            Method::Buffer(Strategy::Reservoir),
        ],
        buffer_sizes: Some(vec![2, 4]),
        orderings: vec![OrderingKind::ClassIid],
        seeds: vec![0],
        eval_every: 5,
        epochs: 10,
        ..ExperimentConfig::default()
    };
    c.dataset.features = Some(features);
    c.dataset.manifest = Some(manifest);
    c
}

fn run_ids(path: &Path) -> Vec<String> {
    read_results(path, false)
        .unwrap()
        .lines
        .into_iter()
        .filter_map(|(_, r)| match r {
            Record::End(e) => Some(e.run_id),
            Record::Event(_) => None,
        })
        .collect()
}

#[test]
fn synth_outputs_are_seeded_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        instances_per_class: 3,
        seed: 4,
        ..small_spec()
    };
    let (f1, m1) = cmd_synth(&spec, &dir.path().join("a")).unwrap();
    let (f2, m2) = cmd_synth(&spec, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f2).unwrap());
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());
    let ds = load_manifest(&m1, &load_feature_matrix(&f1).unwrap()).unwrap();
    assert_eq!(ds.name, "synth-k2-d10-s4");
    for class in 0..2 {
        let ids: HashSet<u64> = ds
            .train
            .iter()
            .filter(|s| s.class_label == class)
            .map(|s| s.instance_id)
            .collect();
        assert_eq!(ids.len(), 3);
    }
}

#[test]
fn baseline_learns_separable_synth() {
    let dir = tempfile::tempdir().unwrap();
    let c = setup(dir.path());
    let out = dir.path().join("baseline.json");
    let recs = cmd_baseline(&ExperimentConfig { epochs: 50, ..c }, &out, Some(1)).unwrap();
    assert_eq!(recs.len(), 1);
    assert!(recs[0].accuracy >= 0.99, "{}", recs[0].accuracy);
    let text = std::fs::read_to_string(&out).unwrap();
    let back: BaselineRecord = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(back, recs[0]);
}

#[test]
fn sweep_runs_every_point_once_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let c = setup(dir.path());
    let baseline = dir.path().join("baseline.json");
    cmd_baseline(&c, &baseline, Some(1)).unwrap();
    let out = dir.path().join("results.jsonl");
    let s = cmd_run(
        &c,
        &baseline,
        &out,
        &RunOptions {
            jobs: Some(2),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!((s.planned, s.executed), (4, 4));
    let ids = run_ids(&out);
    assert_eq!(ids.len(), 4);
    assert_eq!(ids.iter().collect::<HashSet<_>>().len(), 4);
    let full = std::fs::read_to_string(&out).unwrap();

    // a rerun is a no-op
    let s = cmd_run(&c, &baseline, &out, &RunOptions::default()).unwrap();
    assert_eq!((s.skipped, s.executed), (4, 0));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), full);

    // cut the log inside the third run and resume
    let lines: Vec<&str> = full.lines().collect();
    let ends: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.contains("wall_clock_secs"))
        .map(|(i, _)| i)
        .collect();
    let cut = ends[1] + 3;
    let mut partial = lines[..cut].join("\n");
    partial.push_str("\n{\"run_id\":\"trunc");
    std::fs::write(&out, partial).unwrap();
    let s = cmd_run(
        &c,
        &baseline,
        &out,
        &RunOptions {
            jobs: Some(1),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!((s.skipped, s.executed), (2, 2));
    assert_eq!(
        strip_clock(&std::fs::read_to_string(&out).unwrap()),
        strip_clock(&full)
    );
}

fn strip_clock(text: &str) -> Vec<serde_json::Value> {
    text.lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("wall_clock_secs");
            v
        })
        .collect()
}

#[test]
fn job_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = setup(dir.path());
    c.methods.push(Method::NoBuffer);
    c.seeds = vec![0, 1];
    let baseline = dir.path().join("baseline.json");
    cmd_baseline(&c, &baseline, None).unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    cmd_run(
        &c,
        &baseline,
        &a,
        &RunOptions {
            jobs: Some(1),
            ..RunOptions::default()
        },
    )
    .unwrap();
    cmd_run(
        &c,
        &baseline,
        &b,
        &RunOptions {
            jobs: Some(4),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(
        strip_clock(&std::fs::read_to_string(&a).unwrap()),
        strip_clock(&std::fs::read_to_string(&b).unwrap())
    );
    let no_buffer: Vec<EndRecord> = read_results(&a, false)
        .unwrap()
        .lines
        .into_iter()
        .filter_map(|(_, r)| match r {
            Record::End(e) if e.method == Method::NoBuffer => Some(e),
            _ => None,
        })
        .collect();
    assert_eq!(no_buffer.len(), 2);
    assert!(no_buffer
        .iter()
        .all(|e| e.buffer_size == 0 && e.run_id.contains("/b0/")));
}

#[test]
fn run_without_baseline_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = setup(dir.path());
    let err = cmd_run(
        &c,
        &dir.path().join("missing.json"),
        &dir.path().join("r.jsonl"),
        &RunOptions::default(),
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::Usage(ref m) if m.contains("rehearsal baseline")),
        "{err}"
    );
    let other = dir.path().join("other.json");
    std::fs::write(
        &other,
        r#"{"dataset":"elsewhere","seed":0,"accuracy":0.9,"epochs":1}"#,
    )
    .unwrap();
    let err = cmd_run(
        &c,
        &other,
        &dir.path().join("r.jsonl"),
        &RunOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Usage(_)), "{err}");
}

fn event(run: &str, dataset: &str, method: Method, size: usize, t: u64, accuracy: f64) -> Record {
    Record::Event(EventRecord {
        run_id: run.into(),
        dataset: dataset.into(),
        method,
        buffer_size: size,
        ordering: OrderingKind::Iid,
        seed: 0,
        t,
        accuracy,
    })
}

fn end(run: &str, dataset: &str, method: Method, size: usize, n: usize) -> Record {
    Record::End(EndRecord {
        run_id: run.into(),
        dataset: dataset.into(),
        method,
        buffer_size: size,
        ordering: OrderingKind::Iid,
        seed: 0,
        num_events: n,
        final_accuracy: 0.8,
        memory_cost: 0.0,
        presentations: 0,
        wall_clock_secs: 0.0,
        buffers: None,
    })
}

fn write_log(path: &Path, records: &[Record]) {
    let text: String = records.iter().map(|r| r.to_line() + "\n").collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn report_of_offline_equal_curves_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let ex = Method::Buffer(Strategy::ExStream);
    let mut log = Vec::new();
    for size in [2, 4] {
        let id = format!("d/iid/exstream/b{size}/s0");
        log.extend((1..=3).map(|t| event(&id, "d", ex, size, t * 10, 0.8)));
        log.push(end(&id, "d", ex, size, 3));
    }
    let results = dir.path().join("r.jsonl");
    write_log(&results, &log);
    let baseline = dir.path().join("b.json");
    std::fs::write(
        &baseline,
        r#"{"dataset":"d","seed":0,"accuracy":0.8,"epochs":1}"#,
    )
    .unwrap();
    let (table, series) = cmd_report(&results, &baseline, &dir.path().join("rep")).unwrap();
    let table = std::fs::read_to_string(table).unwrap();
    assert_eq!(
        table,
        "dataset,ordering,method,buffer_size,omega,omega_std,mu_total\n\
         d,iid,exstream,2,1.000,0.000,\n\
         d,iid,exstream,4,1.000,0.000,\n\
         d,iid,exstream,all,,0.000,1.000\n"
    );
    let series = std::fs::read_to_string(series).unwrap();
    assert_eq!(series.lines().filter(|l| l.contains("exstream")).count(), 2);
}

#[test]
fn report_rejects_unmatched_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("r.jsonl");
    write_log(
        &results,
        &[
            event("x", "d", Method::NoBuffer, 0, 1, 0.5),
            end("x", "d", Method::NoBuffer, 0, 1),
        ],
    );
    let baseline = dir.path().join("b.json");
    std::fs::write(
        &baseline,
        r#"{"dataset":"other","seed":0,"accuracy":0.8,"epochs":1}"#,
    )
    .unwrap();
    assert!(matches!(
        cmd_report(&results, &baseline, dir.path()),
        Err(Error::Join(_))
    ));
}

#[test]
fn report_uses_supplied_offline_curve() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("r.jsonl");
    let nb = Method::NoBuffer;
    write_log(
        &results,
        &[
            event("x", "d", nb, 0, 1, 0.2),
            event("x", "d", nb, 0, 2, 0.8),
            end("x", "d", nb, 0, 2),
        ],
    );
    let baseline = dir.path().join("b.json");
    std::fs::write(
        &baseline,
        r#"{"dataset":"d","seed":0,"accuracy":0.8,"epochs":1,"curve":[{"t":1,"accuracy":0.4},{"t":2,"accuracy":0.8}]}"#,
    )
    .unwrap();
    let (table, _) = cmd_report(&results, &baseline, dir.path()).unwrap();
    assert!(std::fs::read_to_string(table)
        .unwrap()
        .contains("d,iid,no_buffer,0,0.750,"));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rehearsal"))
}

fn code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn binary_end_to_end_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = d.join("spec.json");
    std::fs::write(
        &spec,
        r#"{"samples_per_class_train": 20, "samples_per_class_test": 10}"#,
    )
    .unwrap();
    assert_eq!(
        code(
            bin()
                .args(["synth", "--config"])
                .arg(&spec)
                .arg("--out")
                .arg(d.join("data"))
        ),
        0
    );
    let manifest = d.join("data/synth-k2-d10-s0.csv");
    let config = d.join("exp.json");
    std::fs::write(
        &config,
        r#"{
  "dataset": {"features": "data/synth-k2-d10-s0.feat", "manifest": "data/synth-k2-d10-s0.csv"},
  "methods": ["full", "no_buffer", "queue"],
  "buffer_sizes": [2],
  "orderings": ["iid"],
  "epochs": 5
}"#,
    )
    .unwrap();
    let baseline = d.join("baseline.json");
    let results = d.join("results.jsonl");
    assert_eq!(
        code(
            bin()
                .args(["baseline", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&baseline)
        ),
        0
    );
    assert_eq!(
        code(
            bin()
                .args(["run", "--eval-every", "4", "--jobs", "2", "--config"])
                .arg(&config)
                .arg("--baseline")
                .arg(&baseline)
                .arg("--out")
                .arg(&results)
        ),
        0
    );
    assert_eq!(run_ids(&results).len(), 3);
    assert_eq!(
        code(
            bin()
                .args(["report", "--results"])
                .arg(&results)
                .arg("--baseline")
                .arg(&baseline)
                .arg("--out")
                .arg(d.join("rep"))
        ),
        0
    );
    assert!(d.join("rep/omega_table.csv").exists());

    // usage errors: unknown flag, missing baseline, malformed config
    assert_eq!(code(bin().args(["run", "--bogus"])), 2);
    assert_eq!(
        code(
            bin()
                .args(["run", "--config"])
                .arg(&config)
                .arg("--baseline")
                .arg(d.join("none.json"))
                .arg("--out")
                .arg(&results)
        ),
        2
    );
    let bad = d.join("bad.json");
    std::fs::write(&bad, "{\n  \"methods\": [\"exstream\",]\n}").unwrap();
    let out = bin()
        .args(["baseline", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(d.join("x.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json:2:"));

    // data errors: corrupt feature file
    let corrupt = d.join("corrupt.feat");
    std::fs::write(&corrupt, b"NOPE").unwrap();
    assert_eq!(
        code(
            bin()
                .args(["baseline", "--features"])
                .arg(&corrupt)
                .arg("--manifest")
                .arg(&manifest)
                .arg("--out")
                .arg(d.join("y.json"))
        ),
        3
    );
}
