//! CSV and JSON persistence of scenario results.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::ScenarioConfig;
use super::scenarios::{arrival_report, ChainSweep, ClassifyBench, TraceSet};
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn meta(cfg: &ScenarioConfig, summary: serde_json::Value) -> serde_json::Value {
    json!({
        "version": VERSION,
        "config": cfg,
        "summary": summary,
    })
}

/// NaN and infinities are not valid JSON numbers.
fn num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Serialize)]
struct MsdRow {
    iteration: usize,
    msd0_db: f64,
    msd1_db: f64,
    agreement_fraction: f64,
}

#[derive(Serialize)]
struct AlignedRow {
    iteration: usize,
    msd_agreed_db: f64,
    msd_rejected_db: f64,
}

#[derive(Serialize)]
struct ReplicaRow {
    replica: usize,
    agreement_time: Option<usize>,
    agreed_model: Option<u8>,
    final_f_hat_accuracy: Option<f64>,
    belief_endpoints: Option<f64>,
}

/// Writes `msd.csv`, `msd_aligned.csv`, `desires.csv`, optional
/// `beliefs.csv` and `trajectory.csv`, and `meta.json`. Returns the paths
/// written.
pub fn write_traces(dir: &Path, traces: &TraceSet) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let mut written = Vec::new();
    let [m0, m1] = traces.msd_db();
    let agree = traces.agreement_fraction();
    let p = dir.join("msd.csv");
    write_rows(
        &p,
        (0..m0.len()).map(|i| MsdRow {
            iteration: i,
            msd0_db: m0[i],
            msd1_db: m1[i],
            agreement_fraction: agree[i],
        }),
    )?;
    written.push(p);

    let modified = traces.replicas.iter().all(|r| !r.desires.is_empty());
    if modified {
        let (a, r) = traces.aligned_db();
        let p = dir.join("msd_aligned.csv");
        write_rows(
            &p,
            (0..a.len()).map(|i| AlignedRow {
                iteration: i,
                msd_agreed_db: a[i],
                msd_rejected_db: r[i],
            }),
        )?;
        written.push(p);
    }

    let p = dir.join("desires.csv");
    write_rows(
        &p,
        traces.replicas.iter().map(|r| ReplicaRow {
            replica: r.replica,
            agreement_time: r.agreement_time,
            agreed_model: r.agreed_model,
            final_f_hat_accuracy: r.f_hat_accuracy.last().copied(),
            belief_endpoints: r.belief_endpoints.is_finite().then_some(r.belief_endpoints),
        }),
    )?;
    written.push(p);

    if let Some(r0) = traces.replicas.first() {
        if !r0.beliefs.is_empty() {
            let p = dir.join("beliefs.csv");
            write_rows(&p, r0.beliefs.iter())?;
            written.push(p);
        }
        if !r0.trajectory.is_empty() {
            let p = dir.join("trajectory.csv");
            write_rows(&p, r0.trajectory.iter())?;
            written.push(p);
        }
    }

    let p = dir.join("meta.json");
    write_json(&p, &meta(&traces.config, summarize(traces)))?;
    written.push(p);
    Ok(written)
}

/// Headline numbers of a simulation.
pub fn summarize(traces: &TraceSet) -> serde_json::Value {
    let ss = traces.steady_state_db();
    let mut s = json!({
        "replicas": traces.replicas.len(),
        "iterations": traces.iterations(),
        "mean_degree": traces.mean_degree,
        "steady_state_msd_db": [num(ss[0]), num(ss[1])],
    });
    let obj = s.as_object_mut().expect("object");
    if let Some(c) = &traces.conventional_limit {
        obj.insert("conventional_limit".into(), json!(c.as_slice()));
        obj.insert("tail_mean_estimate".into(), json!(traces.tail_mean_estimate().as_slice()));
    }
    if traces.replicas.iter().all(|r| !r.desires.is_empty()) {
        let (agreed, rejected) = traces.steady_state_aligned_db();
        let times = traces.agreement_times();
        let ev = traces.events();
        obj.insert("steady_state_agreed_db".into(), num(agreed));
        obj.insert("steady_state_rejected_db".into(), num(rejected));
        obj.insert("replicas_agreed".into(), json!(times.iter().filter(|t| t.is_some()).count()));
        obj.insert("median_agreement_time".into(), json!(traces.median_agreement_time()));
        obj.insert("time_to_minus_30_db".into(), json!(traces.time_to_level(-30.0)));
        obj.insert(
            "in_network_events".into(),
            json!({
                "same": ev.same,
                "different": ev.different,
                "detection_rate": num(ev.detection_rate()),
                "false_alarm_rate": num(ev.false_alarm_rate()),
            }),
        );
    }
    if traces.replicas.iter().any(|r| !r.positions.is_empty()) {
        let arrivals: Vec<_> = traces.replicas.iter().map(|r| arrival_report(r, &traces.config)).collect();
        obj.insert("arrival".into(), json!(arrivals));
    }
    s
}

pub fn write_chain_sweep(dir: &Path, cfg: &ScenarioConfig, sweep: &ChainSweep) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let p = dir.join("chain_sweep.csv");
    write_rows(&p, sweep.rows.iter())?;
    let m = dir.join("meta.json");
    let summary = json!({
        "strictly_decreasing": sweep.monotone,
        "lemma_checked": sweep.lemma_checked,
        "lemma_violations": sweep.lemma_violations,
    });
    write_json(&m, &meta(cfg, summary))?;
    Ok(vec![p, m])
}

pub fn write_classify_bench(dir: &Path, cfg: &ScenarioConfig, bench: &ClassifyBench) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let p = dir.join("classify_bench.json");
    write_json(&p, &serde_json::to_value(bench)?)?;
    let m = dir.join("meta.json");
    write_json(&m, &meta(cfg, serde_json::to_value(bench)?))?;
    Ok(vec![p, m])
}
