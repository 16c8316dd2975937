//! Orchestration of the full run: problem -> parabolicity check -> shooting ->
//! invariants -> connection graph -> (optional) simulation-based verification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ProbeConfig, RunConfig};
use crate::connection::{build_connection_graph, ConnectionGraph};
use crate::error::{Result, SturmError};
use crate::invariants::{build_sturm_data, morse_index, InvariantOptions, SturmData};
use crate::problem::{check_parabolicity, ParabolicityReport, ProblemSpec};
use crate::shooting::{
    find_equilibria, integrate_shoot, scan_curve, Equilibrium, ShootOptions, ShootingCurve,
};
use crate::sim::{
    cosine_ic, evolve, heteroclinic_probe, ic_valid, is_nonincreasing, zero_number_series,
    ProbeReport, SimOptions,
};

pub struct ShootingStage {
    pub spec: ProblemSpec,
    pub opts: ShootOptions,
    pub curve: ShootingCurve,
    pub eqs: Vec<Equilibrium>,
    pub parabolicity: Option<ParabolicityReport>,
    pub warnings: Vec<String>,
}

pub struct AttractorStage {
    pub shooting: ShootingStage,
    pub data: SturmData,
    pub graph: ConnectionGraph,
}

/// Fill Morse indices from the winding angle, re-integrating once at tighter
/// tolerance if an angle lands in the guard band.
fn fill_morse(spec: &ProblemSpec, eqs: &mut [Equilibrium], opts: &ShootOptions) -> Result<()> {
    for e in eqs.iter_mut() {
        let idx = match morse_index(e) {
            Ok(i) => i,
            Err(SturmError::IndeterminateAngle { .. }) => {
                e.profile = integrate_shoot(spec, e.a, &opts.tightened(100.0))?;
                e.theta_pi = e.profile.terminal().theta;
                morse_index(e)?
            }
            Err(other) => return Err(other),
        };
        e.morse = Some(idx);
    }
    Ok(())
}

/// Problem construction, parabolicity check, curve scan, root finding and
/// angle-formula Morse indices.
pub fn run_shooting(cfg: &RunConfig) -> Result<ShootingStage> {
    let spec = cfg.build_problem()?;
    let opts = cfg.shoot_options();
    let mut warnings = bifurcation_warnings(&spec);

    let parabolicity = if spec.ftilde.is_some() {
        let report = check_parabolicity(&spec, &cfg.parabolicity_grid(&spec))?;
        if !report.is_parabolic() {
            return Err(SturmError::Config(format!(
                "problem is not parabolic: dF~/dq reached {:.3e} on the sampled box \
                 ({} violations)",
                report.min_dq, report.violation_count
            )));
        }
        Some(report)
    } else {
        None
    };

    let curve = scan_curve(&spec, cfg.n_init(), &opts)?;
    warnings.extend(curve.warnings.iter().cloned());
    let mut eqs = find_equilibria(&spec, &curve, &opts)?;
    fill_morse(&spec, &mut eqs, &opts)?;
    Ok(ShootingStage { spec, opts, curve, eqs, parabolicity, warnings })
}

/// Full combinatorial pipeline: shooting, Sturm data, connection graph.
pub fn run_attractor(cfg: &RunConfig) -> Result<AttractorStage> {
    let mut stage = run_shooting(cfg)?;
    let inv = InvariantOptions { m_spectral: cfg.m_spectral() };
    let data =
        build_sturm_data(&stage.spec, &stage.curve, &mut stage.eqs, &stage.opts, &inv)?;
    stage.warnings.extend(data.warnings.iter().cloned());
    let a_values: Vec<f64> = stage.eqs.iter().map(|e| e.a).collect();
    let graph = build_connection_graph(&data, &a_values)?;
    Ok(AttractorStage { shooting: stage, data, graph })
}

/// Cubic families slow down near the bifurcation values of lambda*c1.
fn bifurcation_warnings(spec: &ProblemSpec) -> Vec<String> {
    let mut warnings = Vec::new();
    if let Some(lambda) = spec.param("lambda") {
        let eff = lambda * spec.param("c1").unwrap_or(1.0);
        for k in [1.0, 4.0, 9.0] {
            if (eff - k).abs() < 0.05 {
                warnings.push(format!(
                    "lambda*c1 = {eff} is within 0.05 of the bifurcation value {k}; \
                     convergence may be arbitrarily slow"
                ));
            }
        }
    }
    warnings
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PairViolation {
    pub ic_i: usize,
    pub ic_j: usize,
    pub series: Vec<(f64, i64)>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DroppingCheck {
    pub pairs: usize,
    pub t_pair: f64,
    pub violations: Vec<PairViolation>,
    pub pass: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub dropping: DroppingCheck,
    pub probes: Vec<ProbeReport>,
    pub unresolved: Vec<String>,
    pub targets_in_graph: bool,
    pub warnings: Vec<String>,
    pub all_pass: bool,
}

/// Draw a Neumann-compatible random initial condition inside the validity
/// domain: low-mode cosine data, shrinking the amplitude if the evolution
/// form rejects it.
pub fn random_valid_ic(
    spec: &ProblemSpec,
    m: usize,
    rng: &mut impl Rng,
    mut amplitude: f64,
) -> Result<Vec<f64>> {
    for attempt in 0..200 {
        let coeffs: Vec<f64> =
            (0..5).map(|k| amplitude * rng.random_range(-1.0..1.0) / (1 + k * k) as f64).collect();
        let ic = cosine_ic(&coeffs, m);
        if ic_valid(spec, &ic) {
            return Ok(ic);
        }
        if attempt % 10 == 9 {
            amplitude *= 0.5;
        }
    }
    Err(SturmError::InvalidParameter(
        "could not draw an initial condition inside the validity domain".into(),
    ))
}

/// Dropping-lemma check: evolve random initial conditions and verify the
/// zero-number series of every tested pair difference is nonincreasing.
pub fn dropping_check(
    spec: &ProblemSpec,
    n_pairs: usize,
    t_pair: f64,
    sim: &SimOptions,
    seed: u64,
) -> Result<DroppingCheck> {
    // enough distinct trajectories to host n_pairs distinct pairs
    let mut n_ics = 2;
    while n_ics * (n_ics - 1) / 2 < n_pairs {
        n_ics += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ics: Vec<Vec<f64>> = (0..n_ics)
        .map(|_| random_valid_ic(spec, sim.m, &mut rng, 0.8))
        .collect::<Result<Vec<_>>>()?;
    let trajectories: Vec<_> = ics
        .par_iter()
        .map(|ic| evolve(spec, ic, t_pair, sim))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    'outer: for i in 0..n_ics {
        for j in i + 1..n_ics {
            pairs.push((i, j));
            if pairs.len() == n_pairs {
                break 'outer;
            }
        }
    }
    let mut violations = Vec::new();
    for &(i, j) in &pairs {
        let series = zero_number_series(&trajectories[i], &trajectories[j])?;
        if !is_nonincreasing(&series) {
            violations.push(PairViolation { ic_i: i, ic_j: j, series });
        }
    }
    Ok(DroppingCheck { pairs: pairs.len(), t_pair, pass: violations.is_empty(), violations })
}

/// The probe list from the config, or every unstable direction of every
/// equilibrium in both signs when none is configured.
pub fn probe_plan(cfg: &RunConfig, eqs: &[Equilibrium]) -> Vec<(usize, usize, i32, f64)> {
    let default_eps = cfg.sim_options().eps;
    let configured: Vec<&ProbeConfig> =
        cfg.sim.as_ref().map(|s| s.probes.iter().collect()).unwrap_or_default();
    let mut plan = Vec::new();
    if configured.is_empty() {
        for e in eqs {
            let morse = e.morse.unwrap_or(0);
            for mode in 0..morse {
                for sign in [1, -1] {
                    plan.push((e.id, mode, sign, default_eps));
                }
            }
        }
    } else {
        for p in configured {
            let eps = p.eps.unwrap_or(default_eps);
            match p.sign {
                Some(s) => plan.push((p.source, p.mode, s, eps)),
                None => {
                    plan.push((p.source, p.mode, 1, eps));
                    plan.push((p.source, p.mode, -1, eps));
                }
            }
        }
    }
    plan
}

/// Run the configured probes in parallel; unresolved probes are collected,
/// not fatal.
pub fn run_probes(
    spec: &ProblemSpec,
    eqs: &[Equilibrium],
    plan: &[(usize, usize, i32, f64)],
    sim: &SimOptions,
) -> Result<(Vec<ProbeReport>, Vec<String>)> {
    let outcomes: Vec<std::result::Result<ProbeReport, String>> = plan
        .par_iter()
        .map(|&(source, mode, sign, eps)| {
            let e = eqs
                .iter()
                .find(|e| e.id == source)
                .ok_or_else(|| format!("probe source e{source} does not exist"))?;
            let opts = SimOptions { eps, ..sim.clone() };
            match heteroclinic_probe(spec, e, mode, sign, eqs, &opts) {
                Ok(report) => Ok(report),
                Err(e @ SturmError::UnresolvedProbe { .. }) => Err(e.to_string()),
                Err(other) => Err(format!("probe e{source} mode {mode} failed: {other}")),
            }
        })
        .collect();
    let mut reports = Vec::new();
    let mut unresolved = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => reports.push(r),
            Err(msg) => unresolved.push(msg),
        }
    }
    Ok((reports, unresolved))
}

/// Full verification: dropping-lemma pair checks plus all planned probes,
/// with every probe target checked against the connection graph.
pub fn run_verify(cfg: &RunConfig) -> Result<(AttractorStage, VerifyReport)> {
    if cfg.sim.is_none() {
        return Err(SturmError::Config("verification requires a simulable spec".into()));
    }
    let stage = run_attractor(cfg)?;
    if stage.shooting.spec.ftilde.is_none() {
        return Err(SturmError::Config("verification requires a simulable spec".into()));
    }
    let sim = cfg.sim_options();
    let sim_cfg = cfg.sim.as_ref().expect("sim section present");
    let n_pairs = sim_cfg.n_pairs.unwrap_or(20);
    let t_pair = sim_cfg.t_pair.unwrap_or(20.0);
    let seed = sim_cfg.seed.unwrap_or(7);

    let dropping = dropping_check(&stage.shooting.spec, n_pairs, t_pair, &sim, seed)?;

    let plan = probe_plan(cfg, &stage.shooting.eqs);
    let (probes, unresolved) =
        run_probes(&stage.shooting.spec, &stage.shooting.eqs, &plan, &sim)?;

    let mut warnings = stage.shooting.warnings.clone();
    let mut targets_in_graph = true;
    for p in &probes {
        if p.degenerate {
            warnings.push(format!(
                "probe e{} mode {} sign {:+} matched its own source (eps too small?)",
                p.source, p.mode, p.sign
            ));
            continue;
        }
        if !stage.graph.has_edge(p.source, p.target) {
            targets_in_graph = false;
            warnings.push(format!(
                "probe e{} mode {} sign {:+} reached e{}, which is not a graph successor",
                p.source, p.mode, p.sign, p.target
            ));
        }
    }

    let all_pass = dropping.pass && unresolved.is_empty() && targets_in_graph;
    let report =
        VerifyReport { dropping, probes, unresolved, targets_in_graph, warnings, all_pass };
    Ok((stage, report))
}
