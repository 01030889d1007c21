//! Result files: trajectory table, snapshot fields and the manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use freebound::config::{Format, RunConfig};
use freebound::diagnostics::{eulerian_map, gronwall_monitor, xi_bound_monitor, TRAJECTORY_COLUMNS as COLUMNS};
use freebound::{DiagnosticsRecord, Galerkin, GalerkinState, Trajectory};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Shortest representation that reads back to the same `f64`.
fn exact(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(COLUMNS)?;
    for r in &traj.records {
        w.write_record(r.table_row().map(exact))?;
    }
    w.flush()
}

pub fn write_trajectory_json(path: &Path, traj: &Trajectory) -> io::Result<()> {
    let records: Vec<Value> = traj
        .records
        .iter()
        .map(|r| {
            let map = COLUMNS
                .iter()
                .zip(r.table_row())
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect::<serde_json::Map<_, _>>();
            Value::Object(map)
        })
        .collect();
    fs::write(path, serde_json::to_string_pretty(&json!({ "columns": COLUMNS, "records": records }))?)
}

/// `x, v, xi, rho, r` on the uniform grid at 17 significant digits.
pub fn write_snapshot(path: &Path, system: &Galerkin, state: &GalerkinState) -> Result<(), String> {
    let m = system.params().grid;
    let v = system.reconstruct_v(state, m).map_err(|e| e.to_string())?;
    let xi = system.reconstruct_xi(state, m);
    let (r, _) = eulerian_map(system, state, m).map_err(|e| e.to_string())?;
    let mut w = csv::Writer::from_path(path).map_err(|e| e.to_string())?;
    let io = |e: csv::Error| e.to_string();
    w.write_record(["x", "v", "xi", "rho", "r"]).map_err(io)?;
    for j in 0..m {
        let vals = [xi.x(j), v.values()[j], xi.values()[j], 1.0 / xi.values()[j], r.values()[j]];
        w.write_record(vals.map(|x| format!("{x:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:.6}.csv")
}

pub fn sha256_hex(path: &Path) -> io::Result<String> {
    let digest = Sha256::digest(fs::read(path)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Everything a run leaves behind, for the manifest.
pub struct RunOutcome<'a> {
    pub config: &'a RunConfig,
    pub config_path: &'a Path,
    pub system: &'a Galerkin,
    pub traj: &'a Trajectory,
    pub status: &'a str,
    pub error: Option<String>,
}

/// Writes the trajectory files and snapshots, then the manifest listing
/// each of them with its hash. Returns the written paths.
pub fn write_run(dir: &Path, out: &RunOutcome) -> Result<Vec<PathBuf>, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let mut files = Vec::new();
    let werr = |p: &Path, e: io::Error| format!("cannot write {}: {e}", p.display());

    for format in &out.config.output.formats {
        let path = match format {
            Format::Csv => {
                let p = dir.join("trajectory.csv");
                write_trajectory_csv(&p, out.traj).map_err(|e| werr(&p, e))?;
                p
            }
            Format::Json => {
                let p = dir.join("trajectory.json");
                write_trajectory_json(&p, out.traj).map_err(|e| werr(&p, e))?;
                p
            }
        };
        files.push(path);
    }

    for &ts in &out.config.output.snapshot_times {
        let found = out
            .traj
            .states
            .iter()
            .find(|s| (s.t - ts).abs() <= 1e-9 * ts.abs().max(1.0));
        if let Some(state) = found {
            let p = dir.join(snapshot_name(ts));
            write_snapshot(&p, out.system, state)?;
            files.push(p);
        }
    }

    let mut listed = Vec::new();
    for p in &files {
        listed.push(json!({
            "path": p.file_name().unwrap().to_string_lossy(),
            "sha256": sha256_hex(p).map_err(|e| werr(p, e))?,
        }));
    }
    let manifest = json!({
        "schema_version": freebound::config::SCHEMA_VERSION,
        "versions": {
            "freebound": env!("CARGO_PKG_VERSION"),
        },
        "config_path": out.config_path.to_string_lossy(),
        "config": serde_json::to_value(out.config).map_err(|e| e.to_string())?,
        "monitors": monitor_summary(out),
        "files": listed,
    });
    let p = dir.join("manifest.json");
    fs::write(&p, serde_json::to_string_pretty(&manifest).unwrap() + "\n").map_err(|e| werr(&p, e))?;
    files.push(p);
    Ok(files)
}

fn monitor_summary(out: &RunOutcome) -> Value {
    let traj = out.traj;
    let params = out.system.params();
    let max = |f: fn(&DiagnosticsRecord) -> f64| traj.records.iter().map(f).fold(0.0f64, |m, x| m.max(x.abs()));
    let gr = gronwall_monitor(traj, params, 1e-6);
    let xb = xi_bound_monitor(traj, params);
    let xi_plus = traj.records.iter().map(|r| r.xi_max).fold(0.0, f64::max);
    json!({
        "status": out.status,
        "error": out.error,
        "records": traj.len(),
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "max_abs_energy_residual": max(|r| r.energy_residual),
        "max_mean_v_residual": max(|r| r.mean_v_residual),
        "max_endpoint_mismatch": max(|r| r.endpoint_mismatch),
        "max_u_end": max(|r| r.u_end),
        "xi_min": traj.records.iter().map(|r| r.xi_min).fold(f64::INFINITY, f64::min),
        "xi_max": xi_plus,
        "gronwall_local_ok": gr.local_ok,
        "gronwall_local_margin": gr.local_margin,
        "smallness_holds": gr.global_applicable,
        "smallness_threshold": params.smallness_threshold(xi_plus),
        "gronwall_global_ok": gr.global_ok,
        "upper_bound_hypothesis": xb.hypothesis_holds,
        "upper_bound_holds": xb.bound_holds,
        "lower_bound_cutoff_applies": xb.lower_bound_applies,
    })
}
