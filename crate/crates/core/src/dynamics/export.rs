//! Trajectory files.
//!
//! CSV columns: `step, log_flow_time, gamma, gamma_tilde, w_0..w_{d−1}`, then
//! one column per metric key in sorted order (empty where a record lacks the
//! key). Leading `#` lines carry the resolved run configuration. The JSON form
//! additionally keeps `s_accum` and the final parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{DynamicsError, Trajectory, TrajectoryRecord};
use crate::io::{fmt_f64, write_comment_header};

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, header: &str, out: W) -> Result<(), DynamicsError> {
    write_records_csv(&traj.records, header, out)
}

pub fn write_records_csv<W: Write>(
    records: &[TrajectoryRecord],
    header: &str,
    mut out: W,
) -> Result<(), DynamicsError> {
    write_comment_header(&mut out, header)?;
    let d = records.first().map_or(0, |r| r.w.len());
    let keys: BTreeSet<&String> = records.iter().flat_map(|r| r.metrics.keys()).collect();
    let mut wtr = csv::Writer::from_writer(out);
    let mut head: Vec<String> = ["step", "log_flow_time", "gamma", "gamma_tilde"].map(String::from).to_vec();
    head.extend((0..d).map(|i| format!("w_{i}")));
    head.extend(keys.iter().map(|k| k.to_string()));
    wtr.write_record(&head)?;
    for r in records {
        let mut row = vec![r.step.to_string(), fmt_f64(r.log_flow_time), fmt_f64(r.gamma), fmt_f64(r.gamma_tilde)];
        row.extend(r.w.iter().map(|&x| fmt_f64(x)));
        row.extend(keys.iter().map(|k| r.metrics.get(*k).map(|&v| fmt_f64(v)).unwrap_or_default()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads records back from the CSV form; `s_accum` is left empty.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRecord>, DynamicsError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let head: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let fixed = ["step", "log_flow_time", "gamma", "gamma_tilde"];
    if head.len() < 4 || head[..4] != fixed {
        return Err(DynamicsError::Parse(format!("unexpected trajectory header {head:?}")));
    }
    let d = head[4..].iter().take_while(|h| h.starts_with("w_")).count();
    let metric_names = &head[4 + d..];
    let num = |s: &str, col: &str| -> Result<f64, DynamicsError> {
        s.trim().parse().map_err(|_| DynamicsError::Parse(format!("bad value '{s}' in column {col}")))
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let step = row[0].trim().parse().map_err(|_| DynamicsError::Parse(format!("bad step '{}'", &row[0])))?;
        let w = (0..d).map(|i| num(&row[4 + i], &head[4 + i])).collect::<Result<Vec<_>, _>>()?;
        let mut metrics = BTreeMap::new();
        for (j, name) in metric_names.iter().enumerate() {
            let cell = &row[4 + d + j];
            if !cell.trim().is_empty() {
                metrics.insert(name.clone(), num(cell, name)?);
            }
        }
        out.push(TrajectoryRecord {
            step,
            log_flow_time: num(&row[1], "log_flow_time")?,
            gamma: num(&row[2], "gamma")?,
            gamma_tilde: num(&row[3], "gamma_tilde")?,
            w,
            s_accum: Vec::new(),
            metrics,
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct TrajectoryFile {
    config: serde_json::Value,
    #[serde(flatten)]
    trajectory: Trajectory,
}

pub fn trajectory_to_json(traj: &Trajectory, config: serde_json::Value) -> String {
    let file = TrajectoryFile { config, trajectory: traj.clone() };
    serde_json::to_string_pretty(&file).expect("trajectory serializes")
}

/// Parses the JSON form; returns the embedded config and the trajectory.
pub fn trajectory_from_json(text: &str) -> Result<(serde_json::Value, Trajectory), DynamicsError> {
    let file: TrajectoryFile = serde_json::from_str(text)?;
    Ok((file.config, file.trajectory))
}
