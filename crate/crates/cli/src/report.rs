//! Ω tables and plot series from a results log.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rehearsal_core::metrics::{mean, std_dev};
use rehearsal_core::protocol::{AccuracyCurve, CurveEvent};
use rehearsal_core::{mu_total, omega_b, Error, Method, OmegaResult, OrderingKind, Result};

use crate::records::{find_baseline, read_baselines, read_results, BaselineRecord, Record};

/// Ω of one completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOmega {
    pub dataset: String,
    pub ordering: OrderingKind,
    pub method: Method,
    pub buffer_size: usize,
    pub seed: u64,
    pub omega: f64,
}

/// Computes Ω for every completed run in the log. Runs without a final
/// record are ignored.
pub fn run_omegas(log: &[Record], baselines: &[BaselineRecord]) -> Result<Vec<RunOmega>> {
    let mut events: BTreeMap<&str, Vec<CurveEvent>> = BTreeMap::new();
    for r in log {
        if let Record::Event(e) = r {
            events.entry(&e.run_id).or_default().push(CurveEvent {
                t: e.t,
                accuracy: e.accuracy,
            });
        }
    }
    let mut out = Vec::new();
    for r in log {
        let Record::End(end) = r else { continue };
        let mut evs = events.remove(end.run_id.as_str()).unwrap_or_default();
        evs.sort_by_key(|e| e.t);
        if evs.len() != end.num_events || evs.windows(2).any(|w| w[0].t == w[1].t) {
            return Err(Error::Format(format!(
                "run {} lists {} events but the log holds {} distinct ones",
                end.run_id,
                end.num_events,
                evs.len()
            )));
        }
        let stream = AccuracyCurve::from_events(evs);
        let base = find_baseline(baselines, &end.dataset, end.seed)?;
        let offline = match &base.curve {
            Some(curve) => AccuracyCurve::from_events(curve.clone()),
            None => AccuracyCurve::constant(&stream.timestamps(), base.accuracy),
        };
        let omega = omega_b(&stream, &offline, end.buffer_size)?.omega;
        out.push(RunOmega {
            dataset: end.dataset.clone(),
            ordering: end.ordering,
            method: end.method,
            buffer_size: end.buffer_size,
            seed: end.seed,
            omega,
        });
    }
    Ok(out)
}

type GroupKey = (String, OrderingKind, Method);

/// Per-seed Ω values grouped by (dataset, ordering, method), then buffer size.
fn group(omegas: &[RunOmega]) -> BTreeMap<GroupKey, BTreeMap<usize, BTreeMap<u64, f64>>> {
    let mut g: BTreeMap<GroupKey, BTreeMap<usize, BTreeMap<u64, f64>>> = BTreeMap::new();
    for r in omegas {
        g.entry((r.dataset.clone(), r.ordering, r.method))
            .or_default()
            .entry(r.buffer_size)
            .or_default()
            .insert(r.seed, r.omega);
    }
    g
}

fn fmt3(x: f64) -> String {
    format!("{x:.3}")
}

/// Rows of the Ω table: one per (dataset, ordering, method, buffer size) with
/// the mean and standard deviation over seeds, then a summary row with
/// buffer size `all` carrying μ_total (the mean of the Ω column above it) and
/// the spread of per-seed μ_total.
pub fn omega_table(omegas: &[RunOmega]) -> Result<Vec<[String; 7]>> {
    let mut rows = Vec::new();
    for ((dataset, ordering, method), by_size) in group(omegas) {
        let head = |size: String, omega: String, std: String, mu: String| {
            [
                dataset.clone(),
                ordering.as_str().to_string(),
                method.to_string(),
                size,
                omega,
                std,
                mu,
            ]
        };
        let mut means = Vec::new();
        let mut per_seed: BTreeMap<u64, Vec<OmegaResult>> = BTreeMap::new();
        for (&size, seeds) in &by_size {
            let values: Vec<f64> = seeds.values().copied().collect();
            let m = mean(&values);
            rows.push(head(
                size.to_string(),
                fmt3(m),
                fmt3(std_dev(&values)),
                String::new(),
            ));
            means.push(OmegaResult {
                buffer_size: size,
                omega: m,
                num_events: values.len(),
            });
            for (&seed, &omega) in seeds {
                per_seed.entry(seed).or_default().push(OmegaResult {
                    buffer_size: size,
                    omega,
                    num_events: 1,
                });
            }
        }
        let mu = mu_total(&means)?.mu;
        let seed_mus = per_seed
            .values()
            .map(|v| mu_total(v).map(|m| m.mu))
            .collect::<Result<Vec<_>>>()?;
        rows.push(head(
            "all".into(),
            String::new(),
            fmt3(std_dev(&seed_mus)),
            fmt3(mu),
        ));
    }
    Ok(rows)
}

/// Ω against buffer size for each (dataset, method, ordering), ready to plot.
pub fn omega_series(omegas: &[RunOmega]) -> Vec<[String; 7]> {
    let mut by_method: BTreeMap<(String, Method, OrderingKind), BTreeMap<usize, Vec<f64>>> =
        BTreeMap::new();
    for r in omegas {
        by_method
            .entry((r.dataset.clone(), r.method, r.ordering))
            .or_default()
            .entry(r.buffer_size)
            .or_default()
            .push(r.omega);
    }
    let mut rows = Vec::new();
    for ((dataset, method, ordering), sizes) in by_method {
        for (size, values) in sizes {
            rows.push([
                dataset.clone(),
                method.to_string(),
                ordering.as_str().to_string(),
                size.to_string(),
                fmt3(mean(&values)),
                fmt3(std_dev(&values)),
                values.len().to_string(),
            ]);
        }
    }
    rows
}

fn write_csv(path: &Path, header: &[&str], rows: &[[String; 7]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let csv_err = |e: csv::Error| Error::Format(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const TABLE_FILE: &str = "omega_table.csv";
pub const SERIES_FILE: &str = "omega_series.csv";

/// Writes `omega_table.csv` and `omega_series.csv` into `out_dir`.
pub fn cmd_report(results: &Path, baseline: &Path, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let log: Vec<Record> = read_results(results, true)?
        .lines
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    let baselines = read_baselines(baseline)?;
    let omegas = run_omegas(&log, &baselines)?;
    if omegas.is_empty() {
        return Err(Error::Data(format!(
            "{} holds no completed runs",
            results.display()
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let table = out_dir.join(TABLE_FILE);
    let series = out_dir.join(SERIES_FILE);
    write_csv(
        &table,
        &[
            "dataset",
            "ordering",
            "method",
            "buffer_size",
            "omega",
            "omega_std",
            "mu_total",
        ],
        &omega_table(&omegas)?,
    )?;
    write_csv(
        &series,
        &[
            "dataset",
            "method",
            "ordering",
            "buffer_size",
            "omega",
            "omega_std",
            "seeds",
        ],
        &omega_series(&omegas),
    )?;
    Ok((table, series))
}
