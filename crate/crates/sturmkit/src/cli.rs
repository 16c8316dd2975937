//! Command implementations behind the `sturmkit` binary. Each command returns
//! a process exit code; the contract is part of the public interface:
//!
//! - 0: success (for `verify`: every check passed)
//! - 1: configuration or numerical failure
//! - 2: a non-hyperbolic equilibrium was detected
//! - 3: connection-graph inconsistency (Wolfrum checksum failed)
//! - 4: unresolved heteroclinic probes

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Result, SturmError};
use crate::pipeline::{probe_plan, run_attractor, run_shooting, run_verify};
use crate::report;
use crate::sim::heteroclinic_probe_recorded;

pub fn exit_code_for(err: &SturmError) -> i32 {
    match err {
        SturmError::NonHyperbolic { .. } => 2,
        SturmError::Inconsistency { .. } => 3,
        SturmError::UnresolvedProbe { .. } | SturmError::ProbesUnresolved { .. } => 4,
        _ => 1,
    }
}

pub struct OutputTargets {
    dir: PathBuf,
    json: bool,
    csv: bool,
    dot: bool,
}

impl OutputTargets {
    fn new(cfg: &RunConfig, out_override: Option<&Path>) -> Self {
        let dir = out_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
        let has = |f: &str| cfg.output.formats.iter().any(|x| x == f);
        OutputTargets { dir, json: has("json"), csv: has("csv"), dot: has("dot") }
    }

    fn write(&self, enabled: bool, name: &str, contents: &str) -> Result<()> {
        if enabled {
            report::write_file(&self.dir, name, contents)?;
            println!("wrote {}", self.dir.join(name).display());
        }
        Ok(())
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Shooting stage only: equilibrium table and curve dump.
pub fn cmd_equilibria(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let stage = run_shooting(cfg)?;
    print_warnings(&stage.warnings);
    let targets = OutputTargets::new(cfg, out);
    targets.write(targets.csv, "equilibria.csv", &report::equilibria_csv(&stage.eqs))?;
    targets.write(targets.csv, "curve.csv", &report::curve_csv(&stage.curve))?;
    targets.write(targets.json, "equilibria.json", &report::equilibria_json(&stage.eqs)?)?;
    println!(
        "{}: {} equilibria, morse {:?}",
        stage.spec.name,
        stage.eqs.len(),
        stage.eqs.iter().map(|e| e.morse.unwrap_or(0)).collect::<Vec<_>>()
    );
    Ok(())
}

/// Pipeline through the Fusco-Rocha permutation.
pub fn cmd_permutation(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let stage = run_attractor(cfg)?;
    print_warnings(&stage.shooting.warnings);
    let targets = OutputTargets::new(cfg, out);
    targets.write(targets.json, "sturm.json", &report::sturm_json(&stage.data))?;
    println!("sigma = {}", stage.data.sigma_one_line());
    Ok(())
}

/// Full pipeline: Sturm data, connection graph, DOT export, summary line.
pub fn cmd_attractor(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let stage = run_attractor(cfg)?;
    print_warnings(&stage.shooting.warnings);
    let targets = OutputTargets::new(cfg, out);
    targets.write(targets.csv, "equilibria.csv", &report::equilibria_csv(&stage.shooting.eqs))?;
    targets.write(targets.csv, "curve.csv", &report::curve_csv(&stage.shooting.curve))?;
    targets.write(targets.json, "sturm.json", &report::sturm_json(&stage.data))?;
    targets.write(targets.json, "attractor.json", &report::graph_json(&stage.graph))?;
    targets.write(targets.dot, "attractor.dot", &report::attractor_dot(&stage.graph)?)?;
    println!(
        "{}: {} equilibria, sigma = {}, {} hasse edges, {} connections",
        stage.shooting.spec.name,
        stage.data.n,
        stage.data.sigma_one_line(),
        stage.graph.hasse_edges.len(),
        stage.graph.edges.len()
    );
    Ok(())
}

/// Run the configured probes (or the full default plan) and dump the
/// trajectories.
pub fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    if cfg.sim.is_none() {
        return Err(SturmError::Config("simulation requires a [sim] section".into()));
    }
    let stage = run_attractor(cfg)?;
    if stage.shooting.spec.ftilde.is_none() {
        return Err(SturmError::Config("simulation requires a simulable spec".into()));
    }
    print_warnings(&stage.shooting.warnings);
    let targets = OutputTargets::new(cfg, out);
    let sim = cfg.sim_options();
    let plan = probe_plan(cfg, &stage.shooting.eqs);
    let mut reports = Vec::new();
    for &(source, mode, sign, eps) in &plan {
        let e = stage
            .shooting
            .eqs
            .iter()
            .find(|e| e.id == source)
            .ok_or_else(|| SturmError::Config(format!("probe source e{source} not found")))?;
        let opts = crate::sim::SimOptions { eps, ..sim.clone() };
        let (report, traj) =
            heteroclinic_probe_recorded(&stage.shooting.spec, e, mode, sign, &stage.shooting.eqs, &opts)?;
        let tag = format!("probe_e{}_m{}_{}", source, mode, if sign > 0 { "p" } else { "n" });
        targets.write(targets.csv, &format!("{tag}.csv"), &report::trajectory_csv(&traj))?;
        println!(
            "probe e{} mode {} sign {:+}: -> e{} at t = {:.3}",
            source, mode, sign, report.target, report.transit_time
        );
        reports.push(report);
    }
    targets.write(
        targets.json,
        "probes.json",
        &serde_json::to_string_pretty(&reports).expect("probe reports serialize"),
    )?;
    Ok(())
}

/// Dropping-lemma checks and probe validation against the connection graph.
pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let (stage, verify) = run_verify(cfg)?;
    print_warnings(&verify.warnings);
    let targets = OutputTargets::new(cfg, out);
    targets.write(
        targets.json,
        "verify.json",
        &serde_json::to_string_pretty(&verify).expect("verify report serializes"),
    )?;
    println!(
        "dropping lemma: {} pairs over t in [0, {}], {} violations",
        verify.dropping.pairs,
        verify.dropping.t_pair,
        verify.dropping.violations.len()
    );
    println!(
        "probes: {} resolved, {} unresolved, targets in graph: {}",
        verify.probes.len(),
        verify.unresolved.len(),
        verify.targets_in_graph
    );
    for p in &verify.probes {
        println!(
            "  e{} mode {} sign {:+} -> e{} (t = {:.3}, z vs source = {})",
            p.source, p.mode, p.sign, p.target, p.transit_time, p.z_against_source
        );
    }
    if !verify.unresolved.is_empty() {
        for u in &verify.unresolved {
            eprintln!("unresolved: {u}");
        }
        return Err(SturmError::ProbesUnresolved { count: verify.unresolved.len() });
    }
    if !verify.all_pass {
        return Err(SturmError::Invariant(
            "verification failed (see verify.json for details)".into(),
        ));
    }
    let _ = stage;
    println!("verification passed");
    Ok(())
}
