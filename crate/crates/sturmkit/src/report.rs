//! Serialization of pipeline results: CSV tables, JSON documents, DOT graphs.
//! Floating-point values in CSV are printed with 17 significant digits so a
//! re-read reproduces them bit for bit; JSON uses the shortest round-trip
//! encoding of serde_json.

use std::path::Path;

use crate::connection::{validate_dot, ConnectionGraph};
use crate::error::Result;
use crate::invariants::SturmData;
use crate::shooting::{Equilibrium, ShootingCurve};
use crate::sim::SimTrajectory;

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn equilibria_csv(eqs: &[Equilibrium]) -> String {
    let mut out = String::from("id,a,b,theta_pi,morse\n");
    for e in eqs {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.id,
            fmt_f64(e.a),
            fmt_f64(e.b),
            fmt_f64(e.theta_pi),
            e.morse.map(|m| m.to_string()).unwrap_or_default()
        ));
    }
    out
}

pub fn curve_csv(curve: &ShootingCurve) -> String {
    let mut out = String::from("a,u_pi,p_pi,theta_pi\n");
    for s in &curve.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(s.a),
            fmt_f64(s.u_pi),
            fmt_f64(s.p_pi),
            fmt_f64(s.theta_pi)
        ));
    }
    out
}

pub fn trajectory_csv(traj: &SimTrajectory) -> String {
    let mut out = String::from("t");
    for i in 0..traj.m {
        out.push_str(&format!(",u{i}"));
    }
    out.push('\n');
    for snap in &traj.snapshots {
        out.push_str(&fmt_f64(snap.t));
        for v in &snap.u {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EquilibriumRecord {
    pub id: usize,
    pub a: f64,
    pub b: f64,
    pub theta_pi: f64,
    pub transversality: f64,
    pub morse: Option<usize>,
}

pub fn equilibria_json(eqs: &[Equilibrium]) -> Result<String> {
    let records: Vec<EquilibriumRecord> = eqs
        .iter()
        .map(|e| EquilibriumRecord {
            id: e.id,
            a: e.a,
            b: e.b,
            theta_pi: e.theta_pi,
            transversality: e.transversality,
            morse: e.morse,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&records).expect("equilibrium records serialize"))
}

pub fn sturm_json(data: &SturmData) -> String {
    serde_json::to_string_pretty(data).expect("sturm data serializes")
}

pub fn graph_json(graph: &ConnectionGraph) -> String {
    serde_json::to_string_pretty(graph).expect("graph serializes")
}

/// Validate and render the DOT document for a graph.
pub fn attractor_dot(graph: &ConnectionGraph) -> Result<String> {
    let dot = graph.to_dot();
    validate_dot(&dot)?;
    Ok(dot)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}
