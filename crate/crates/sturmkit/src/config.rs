//! Run configuration: a strict TOML schema (unknown keys are rejected) with
//! per-section defaults. The CLI loads a file, applies `--param` overrides,
//! and hands the sections to the pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SturmError};
use crate::problem::{GridBox, ProblemSpec};
use crate::shooting::ShootOptions;
use crate::sim::SimOptions;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub shooting: ShootingConfig,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: String,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Override of the family's default bracket of equilibrium boundary values.
    #[serde(default)]
    pub a_bracket: Option<[f64; 2]>,
    /// Sampling box for the parabolicity check.
    #[serde(default)]
    pub grid: Option<ParabolicityGrid>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicityGrid {
    #[serde(default)]
    pub u_range: Option<[f64; 2]>,
    #[serde(default)]
    pub q_range: Option<[f64; 2]>,
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootingConfig {
    pub n_init: Option<usize>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub n_profile: Option<usize>,
    pub escape_factor: Option<f64>,
    pub tol_root_scale: Option<f64>,
    pub eps_hyp: Option<f64>,
    pub tol_sep: Option<f64>,
    pub arc_bound: Option<f64>,
    pub gap_resolution: Option<f64>,
    /// Grid size of the spectral Morse oracle.
    pub m_spectral: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub m: Option<usize>,
    pub t_max: Option<f64>,
    pub snapshot_dt: Option<f64>,
    pub c_cfl: Option<f64>,
    pub eps: Option<f64>,
    pub delta_match: Option<f64>,
    pub delta_rest: Option<f64>,
    /// Horizon of each dropping-lemma pair check.
    pub t_pair: Option<f64>,
    /// Number of random trajectory pairs checked by `verify`.
    pub n_pairs: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub probes: Vec<ProbeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// 1-based curve index of the source equilibrium.
    pub source: usize,
    /// Eigenfunction index, 0 <= mode < i(source).
    pub mode: usize,
    /// +1 or -1; omitted means both directions.
    #[serde(default)]
    pub sign: Option<i32>,
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_out_dir() -> String {
    "out".to_string()
}

fn default_formats() -> Vec<String> {
    vec!["json".into(), "csv".into(), "dot".into()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out_dir(), formats: default_formats() }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SturmError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| SturmError::Config(format!("config error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !(x > 0.0) => Err(SturmError::Config(format!(
                    "config error: '{name}' must be positive, got {x}"
                ))),
                _ => Ok(()),
            }
        };
        let s = &self.shooting;
        positive("shooting.abs_tol", s.abs_tol)?;
        positive("shooting.rel_tol", s.rel_tol)?;
        positive("shooting.escape_factor", s.escape_factor)?;
        positive("shooting.tol_root_scale", s.tol_root_scale)?;
        positive("shooting.eps_hyp", s.eps_hyp)?;
        positive("shooting.tol_sep", s.tol_sep)?;
        positive("shooting.arc_bound", s.arc_bound)?;
        positive("shooting.gap_resolution", s.gap_resolution)?;
        if let Some(sim) = &self.sim {
            positive("sim.t_max", sim.t_max)?;
            positive("sim.snapshot_dt", sim.snapshot_dt)?;
            positive("sim.c_cfl", sim.c_cfl)?;
            positive("sim.eps", sim.eps)?;
            positive("sim.delta_match", sim.delta_match)?;
            positive("sim.delta_rest", sim.delta_rest)?;
            positive("sim.t_pair", sim.t_pair)?;
            for p in &sim.probes {
                if let Some(sign) = p.sign {
                    if sign != 1 && sign != -1 {
                        return Err(SturmError::Config(format!(
                            "config error: probe sign must be +1 or -1, got {sign}"
                        )));
                    }
                }
                positive("sim.probes.eps", p.eps)?;
            }
        }
        for f in &self.output.formats {
            if !matches!(f.as_str(), "json" | "csv" | "dot") {
                return Err(SturmError::Config(format!(
                    "config error: unknown output format '{f}' (expected json, csv, dot)"
                )));
            }
        }
        Ok(())
    }

    /// Apply `--param key=value` overrides (the key `λ` is accepted as an
    /// alias of `lambda`).
    pub fn apply_param_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                SturmError::Config(format!("--param expects key=value, got '{item}'"))
            })?;
            let key = if key.trim() == "λ" { "lambda" } else { key.trim() };
            let value: f64 = value.trim().parse().map_err(|_| {
                SturmError::Config(format!("--param {key}: '{value}' is not a number"))
            })?;
            self.problem.params.insert(key.to_string(), value);
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<ProblemSpec> {
        let mut spec = ProblemSpec::from_family(&self.problem.family, &self.problem.params)?;
        if let Some(name) = &self.problem.name {
            spec.name = name.clone();
        }
        if let Some([lo, hi]) = self.problem.a_bracket {
            if !(hi > lo) {
                return Err(SturmError::Config(format!(
                    "config error: a_bracket must be increasing, got [{lo}, {hi}]"
                )));
            }
            spec.a_bracket = (lo, hi);
        }
        Ok(spec)
    }

    pub fn shoot_options(&self) -> ShootOptions {
        let d = ShootOptions::default();
        let s = &self.shooting;
        ShootOptions {
            abs_tol: s.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: s.rel_tol.unwrap_or(d.rel_tol),
            n_profile: s.n_profile.unwrap_or(d.n_profile),
            escape_factor: s.escape_factor.unwrap_or(d.escape_factor),
            tol_root_scale: s.tol_root_scale.unwrap_or(d.tol_root_scale),
            eps_hyp: s.eps_hyp.unwrap_or(d.eps_hyp),
            tol_sep: s.tol_sep.unwrap_or(d.tol_sep),
            arc_bound: s.arc_bound.unwrap_or(d.arc_bound),
            gap_resolution: s.gap_resolution.unwrap_or(d.gap_resolution),
            max_samples: d.max_samples,
        }
    }

    pub fn n_init(&self) -> usize {
        self.shooting.n_init.unwrap_or(64)
    }

    pub fn m_spectral(&self) -> usize {
        self.shooting.m_spectral.unwrap_or(257)
    }

    pub fn sim_options(&self) -> SimOptions {
        let d = SimOptions::default();
        match &self.sim {
            None => d,
            Some(s) => SimOptions {
                m: s.m.unwrap_or(d.m),
                c_cfl: s.c_cfl.unwrap_or(d.c_cfl),
                snapshot_dt: s.snapshot_dt.unwrap_or(d.snapshot_dt),
                t_max: s.t_max.unwrap_or(d.t_max),
                eps: s.eps.unwrap_or(d.eps),
                delta_match: s.delta_match.unwrap_or(d.delta_match),
                delta_rest: s.delta_rest.unwrap_or(d.delta_rest),
            },
        }
    }

    /// Box for the parabolicity check, defaulting to the a-bracket in u.
    pub fn parabolicity_grid(&self, spec: &ProblemSpec) -> GridBox {
        let g = self.problem.grid.as_ref();
        let u = g.and_then(|g| g.u_range).unwrap_or([spec.a_bracket.0, spec.a_bracket.1]);
        let q = g.and_then(|g| g.q_range).unwrap_or([-4.0, 4.0]);
        let n = g.and_then(|g| g.n).unwrap_or(21);
        GridBox::uq(u[0], u[1], q[0], q[1], n)
    }
}
