//! Desk-scale method-of-lines evolution of u_t = F~(x, u, u_x, u_xx) with
//! Neumann boundary conditions: second-order central differences in space
//! with ghost-point closure, classical RK4 in time under a CFL-style cap
//! dt <= c_cfl * dx^2 / max dF~/dq. Used to validate the combinatorial
//! predictions: zero numbers of differences must not increase in time, and
//! perturbed unstable equilibria must run to predicted targets.

use std::f64::consts::PI;

use crate::error::{Result, SturmError};
use crate::invariants::linearization_tridiag;
use crate::problem::{Ftilde, ProblemSpec};
use crate::shooting::Equilibrium;
use crate::zeros;

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Spatial grid points on [0, pi], endpoints included.
    pub m: usize,
    /// CFL constant in dt <= c_cfl * dx^2 / max dF~/dq.
    pub c_cfl: f64,
    /// Snapshot cadence for recorded trajectories and probe match checks.
    pub snapshot_dt: f64,
    /// Probe wall: a probe unresolved at t_max is an error.
    pub t_max: f64,
    /// Probe perturbation amplitude (sup-norm).
    pub eps: f64,
    /// Sup-norm distance at which a state matches an equilibrium.
    pub delta_match: f64,
    /// Rest condition: sup-norm of u_t must be below this at a match.
    pub delta_rest: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            m: 257,
            c_cfl: 0.4,
            snapshot_dt: 0.05,
            t_max: 500.0,
            eps: 1e-2,
            delta_match: 1e-4,
            delta_rest: 1e-3,
        }
    }
}

/// One snapshot of the evolving state.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SimState {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimTrajectory {
    pub m: usize,
    pub snapshots: Vec<SimState>,
}

impl SimTrajectory {
    pub fn last(&self) -> &SimState {
        self.snapshots.last().expect("trajectory has at least the initial state")
    }
}

struct Stepper<'a> {
    ft: &'a Ftilde,
    xs: Vec<f64>,
    h: f64,
    c_cfl: f64,
    pub u: Vec<f64>,
    pub t: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a ProblemSpec, u0: &[f64], opts: &SimOptions) -> Result<Self> {
        let ft = spec.ftilde()?;
        let m = u0.len();
        if m < 16 {
            return Err(SturmError::InvalidParameter(format!("sim grid too small (m={m})")));
        }
        let h = PI / (m - 1) as f64;
        let xs = (0..m).map(|i| h * i as f64).collect();
        let s = Stepper {
            ft,
            xs,
            h,
            c_cfl: opts.c_cfl,
            u: u0.to_vec(),
            t: 0.0,
            k: [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]],
            tmp: vec![0.0; m],
        };
        // the initial state must lie in the validity domain
        let mut probe = vec![0.0; m];
        rhs_of(s.ft, &s.xs, s.h, 0.0, &s.u, &mut probe)?;
        Ok(s)
    }

    /// Stability cap from dF~/dq sampled along the current state.
    fn dt_cap(&self) -> Result<f64> {
        let m = self.u.len();
        let h = self.h;
        let mut max_fq = 0.0f64;
        for i in 0..m {
            let (p, q) = if i == 0 {
                (0.0, 2.0 * (self.u[1] - self.u[0]) / (h * h))
            } else if i == m - 1 {
                (0.0, 2.0 * (self.u[m - 2] - self.u[m - 1]) / (h * h))
            } else {
                (
                    (self.u[i + 1] - self.u[i - 1]) / (2.0 * h),
                    (self.u[i + 1] - 2.0 * self.u[i] + self.u[i - 1]) / (h * h),
                )
            };
            max_fq = max_fq.max(self.ft.d_q(self.xs[i], self.u[i], p, q).abs());
        }
        if max_fq <= 0.0 || !max_fq.is_finite() {
            return Err(SturmError::BlowUp { t: self.t });
        }
        Ok(self.c_cfl * h * h / max_fq)
    }

    /// Advance exactly to t_target with RK4 steps under the CFL cap. The cap
    /// is refreshed every 16 steps (with a 0.95 margin); dF~/dq drifts slowly
    /// along these flows while c_cfl = 0.4 sits well inside the RK4
    /// stability interval.
    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        let mut since_refresh = 16;
        let mut cap = 0.0;
        while self.t < t_target - 1e-13 {
            if since_refresh >= 16 {
                cap = 0.95 * self.dt_cap()?;
                since_refresh = 0;
            }
            since_refresh += 1;
            let dt = cap.min(t_target - self.t);
            let m = self.u.len();
            let [k1, k2, k3, k4] = &mut self.k;

            self.tmp.copy_from_slice(&self.u);
            rhs_of(self.ft, &self.xs, self.h, self.t, &self.tmp, k1)?;
            for i in 0..m {
                self.tmp[i] = self.u[i] + 0.5 * dt * k1[i];
            }
            rhs_of(self.ft, &self.xs, self.h, self.t + 0.5 * dt, &self.tmp, k2)?;
            for i in 0..m {
                self.tmp[i] = self.u[i] + 0.5 * dt * k2[i];
            }
            rhs_of(self.ft, &self.xs, self.h, self.t + 0.5 * dt, &self.tmp, k3)?;
            for i in 0..m {
                self.tmp[i] = self.u[i] + dt * k3[i];
            }
            rhs_of(self.ft, &self.xs, self.h, self.t + dt, &self.tmp, k4)?;
            for i in 0..m {
                self.u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if !self.u[i].is_finite() {
                    return Err(SturmError::BlowUp { t: self.t });
                }
            }
            self.t += dt;
        }
        self.t = t_target;
        Ok(())
    }
}

fn rhs_of(
    ft: &Ftilde,
    xs: &[f64],
    h: f64,
    t: f64,
    u: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let m = u.len();
    for i in 0..m {
        let (p, q) = if i == 0 {
            (0.0, 2.0 * (u[1] - u[0]) / (h * h))
        } else if i == m - 1 {
            (0.0, 2.0 * (u[m - 2] - u[m - 1]) / (h * h))
        } else {
            ((u[i + 1] - u[i - 1]) / (2.0 * h), (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h))
        };
        let x = xs[i];
        if !ft.is_valid(x, u[i], p, q) {
            return Err(SturmError::DomainViolation { t, x, u: u[i] });
        }
        out[i] = ft.eval(x, u[i], p, q);
        if !out[i].is_finite() {
            return Err(SturmError::BlowUp { t });
        }
    }
    Ok(())
}

/// Evolve u0 to t_end, recording snapshots at the configured cadence.
pub fn evolve(
    spec: &ProblemSpec,
    u0: &[f64],
    t_end: f64,
    opts: &SimOptions,
) -> Result<SimTrajectory> {
    let mut stepper = Stepper::new(spec, u0, opts)?;
    let mut traj = SimTrajectory {
        m: u0.len(),
        snapshots: vec![SimState { t: 0.0, u: u0.to_vec() }],
    };
    let n_snaps = (t_end / opts.snapshot_dt).ceil() as usize;
    for s in 1..=n_snaps {
        let t_next = (s as f64 * opts.snapshot_dt).min(t_end);
        stepper.advance_to(t_next)?;
        traj.snapshots.push(SimState { t: stepper.t, u: stepper.u.clone() });
        if stepper.t >= t_end {
            break;
        }
    }
    Ok(traj)
}

/// Zero number of the difference of two trajectories at each shared snapshot
/// time. By the dropping lemma the sequence must be nonincreasing.
pub fn zero_number_series(
    a: &SimTrajectory,
    b: &SimTrajectory,
) -> Result<Vec<(f64, i64)>> {
    if a.m != b.m || a.snapshots.len() != b.snapshots.len() {
        return Err(SturmError::InvalidParameter(
            "zero-number series needs a common grid and time mesh".into(),
        ));
    }
    let mut series = Vec::with_capacity(a.snapshots.len());
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if (sa.t - sb.t).abs() > 1e-12 {
            return Err(SturmError::InvalidParameter(
                "zero-number series needs identical snapshot times".into(),
            ));
        }
        let w: Vec<f64> = sa.u.iter().zip(&sb.u).map(|(x, y)| x - y).collect();
        series.push((sa.t, zeros::zero_number(&w)));
    }
    Ok(series)
}

pub fn is_nonincreasing(series: &[(f64, i64)]) -> bool {
    series.windows(2).all(|w| w[1].1 <= w[0].1)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub source: usize,
    pub mode: usize,
    pub sign: i32,
    pub eps: f64,
    pub target: usize,
    pub transit_time: f64,
    /// closest sup-norm approach to each equilibrium, by curve index
    pub min_distance: Vec<f64>,
    /// zero number of (state - source profile) at the match
    pub z_against_source: i64,
    /// the probe never left the source (eps too small)
    pub degenerate: bool,
}

/// Perturb an unstable equilibrium along its k-th eigenfunction (sup-norm
/// eps) and evolve until the state comes to rest at some equilibrium:
/// sup-distance below delta_match with sup|u_t| below delta_rest.
pub fn heteroclinic_probe(
    spec: &ProblemSpec,
    source: &Equilibrium,
    mode: usize,
    sign: i32,
    eqs: &[Equilibrium],
    opts: &SimOptions,
) -> Result<ProbeReport> {
    probe_impl(spec, source, mode, sign, eqs, opts, false).map(|(r, _)| r)
}

/// Same as [`heteroclinic_probe`] but also returns the snapshot trajectory.
pub fn heteroclinic_probe_recorded(
    spec: &ProblemSpec,
    source: &Equilibrium,
    mode: usize,
    sign: i32,
    eqs: &[Equilibrium],
    opts: &SimOptions,
) -> Result<(ProbeReport, SimTrajectory)> {
    probe_impl(spec, source, mode, sign, eqs, opts, true)
        .map(|(r, t)| (r, t.expect("recorded probe returns a trajectory")))
}

fn probe_impl(
    spec: &ProblemSpec,
    source: &Equilibrium,
    mode: usize,
    sign: i32,
    eqs: &[Equilibrium],
    opts: &SimOptions,
    record: bool,
) -> Result<(ProbeReport, Option<SimTrajectory>)> {
    let morse = match source.morse {
        Some(m) => m,
        None => crate::invariants::morse_index(source)?,
    };
    if mode >= morse {
        return Err(SturmError::InvalidParameter(format!(
            "probe mode {mode} needs mode < i(source) = {morse}"
        )));
    }
    let m = opts.m;
    let tri = linearization_tridiag(spec, source, m)?;
    let lambda_k = tri.eigenvalue_desc(mode)?;
    let mut psi = tri.eigenvector(lambda_k)?;
    let sup = psi.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    for v in psi.iter_mut() {
        *v /= sup;
    }

    let source_grid = source.profile.u_on_grid(m);
    let u0: Vec<f64> = source_grid
        .iter()
        .zip(&psi)
        .map(|(u, e)| u + sign as f64 * opts.eps * e)
        .collect();

    let profiles: Vec<Vec<f64>> = eqs.iter().map(|e| e.profile.u_on_grid(m)).collect();
    let mut min_distance = vec![f64::INFINITY; eqs.len()];

    let mut stepper = Stepper::new(spec, &u0, opts)?;
    let mut trail = record.then(|| SimTrajectory {
        m,
        snapshots: vec![SimState { t: 0.0, u: u0.clone() }],
    });
    let mut rest = vec![0.0; m];
    loop {
        let t_next = stepper.t + opts.snapshot_dt;
        stepper.advance_to(t_next)?;
        if let Some(trail) = trail.as_mut() {
            trail.snapshots.push(SimState { t: stepper.t, u: stepper.u.clone() });
        }

        let mut nearest = (0usize, f64::INFINITY);
        for (idx, profile) in profiles.iter().enumerate() {
            let d = sup_distance(&stepper.u, profile);
            min_distance[idx] = min_distance[idx].min(d);
            if d < nearest.1 {
                nearest = (idx, d);
            }
        }
        if nearest.1 < opts.delta_match {
            rhs_of(stepper.ft, &stepper.xs, stepper.h, stepper.t, &stepper.u, &mut rest)?;
            let speed = rest.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
            if speed < opts.delta_rest {
                let target = &eqs[nearest.0];
                let w: Vec<f64> =
                    stepper.u.iter().zip(&source_grid).map(|(x, y)| x - y).collect();
                let report = ProbeReport {
                    source: source.id,
                    mode,
                    sign,
                    eps: opts.eps,
                    target: target.id,
                    transit_time: stepper.t,
                    min_distance,
                    z_against_source: zeros::zero_number(&w),
                    degenerate: target.id == source.id,
                };
                return Ok((report, trail));
            }
        }
        if stepper.t >= opts.t_max {
            let nearest_id = eqs[nearest.0].id;
            return Err(SturmError::UnresolvedProbe {
                source_id: source.id,
                mode,
                sign,
                t_max: opts.t_max,
                nearest: nearest_id,
                distance: nearest.1,
            });
        }
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// True if the initial state lies inside the validity domain of the
/// evolution form (so a simulation can start from it).
pub fn ic_valid(spec: &ProblemSpec, u0: &[f64]) -> bool {
    let Ok(ft) = spec.ftilde() else { return false };
    let m = u0.len();
    if m < 16 {
        return false;
    }
    let h = PI / (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| h * i as f64).collect();
    let mut out = vec![0.0; m];
    rhs_of(ft, &xs, h, 0.0, u0, &mut out).is_ok()
}

/// Neumann-compatible initial condition from cosine coefficients:
/// u(x) = sum_k coeffs[k] cos(k x).
pub fn cosine_ic(coeffs: &[f64], m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let x = PI * i as f64 / (m - 1) as f64;
            coeffs.iter().enumerate().map(|(k, c)| c * (k as f64 * x).cos()).sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::{find_equilibria, scan_curve, ShootOptions};

    fn small_opts() -> SimOptions {
        SimOptions { m: 65, snapshot_dt: 0.1, ..SimOptions::default() }
    }

    #[test]
    fn constant_equilibrium_is_a_fixed_point() {
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let u0 = vec![-1.0; 65];
        let traj = evolve(&spec, &u0, 10.0, &small_opts()).unwrap();
        let drift =
            traj.last().u.iter().fold(0.0f64, |acc, &v| acc.max((v + 1.0).abs()));
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn validity_violation_is_reported_with_location() {
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let mut u0 = vec![0.0; 65];
        u0[32] = 1.0; // spike: u_xx ~ -2/h^2 pushes the log argument negative
        match evolve(&spec, &u0, 1.0, &small_opts()) {
            Err(SturmError::DomainViolation { t, .. }) => assert_eq!(t, 0.0),
            other => panic!("expected domain violation, got {other:?}"),
        }
    }

    #[test]
    fn generic_data_converges_to_an_equilibrium() {
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let shoot = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &shoot).unwrap();
        let eqs = find_equilibria(&spec, &curve, &shoot).unwrap();
        let opts = small_opts();
        let u0 = cosine_ic(&[-0.05, 0.9], opts.m);
        let traj = evolve(&spec, &u0, 30.0, &opts).unwrap();
        let last = &traj.last().u;
        let best = eqs
            .iter()
            .map(|e| sup_distance(last, &e.profile.u_on_grid(opts.m)))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3, "not near any equilibrium (distance {best})");
    }

    #[test]
    fn difference_of_identical_trajectories_is_the_sentinel() {
        let spec = ProblemSpec::chafee_infante_semilinear(2.0).unwrap();
        let opts = small_opts();
        let u0 = cosine_ic(&[0.1, 0.4, 0.0, 0.2], opts.m);
        let traj = evolve(&spec, &u0, 1.0, &opts).unwrap();
        let series = zero_number_series(&traj, &traj).unwrap();
        assert!(series.iter().all(|&(_, z)| z == -1));
    }

    #[test]
    fn constant_shift_gives_zero_and_stays() {
        let spec = ProblemSpec::chafee_infante_semilinear(0.5).unwrap();
        let opts = small_opts();
        let a = evolve(&spec, &cosine_ic(&[0.3], opts.m), 5.0, &opts).unwrap();
        let b = evolve(&spec, &cosine_ic(&[0.32], opts.m), 5.0, &opts).unwrap();
        let series = zero_number_series(&a, &b).unwrap();
        assert!(is_nonincreasing(&series));
        assert_eq!(series[0].1, 0);
    }

    #[test]
    fn dropping_lemma_on_a_random_pair() {
        let spec = ProblemSpec::chafee_infante_semilinear(2.0).unwrap();
        let opts = small_opts();
        let a = evolve(&spec, &cosine_ic(&[0.2, -0.5, 0.3, 0.1], opts.m), 20.0, &opts).unwrap();
        let b = evolve(&spec, &cosine_ic(&[-0.1, 0.4, -0.2, 0.05], opts.m), 20.0, &opts).unwrap();
        let series = zero_number_series(&a, &b).unwrap();
        assert!(is_nonincreasing(&series), "series {series:?}");
    }

    #[test]
    fn dropping_lemma_holds_for_the_fully_nonlinear_form_too() {
        // small-amplitude data keeps the argument of the logarithm positive
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let opts = small_opts();
        let a = evolve(&spec, &cosine_ic(&[0.05, -0.12, 0.06], opts.m), 10.0, &opts).unwrap();
        let b = evolve(&spec, &cosine_ic(&[-0.03, 0.1, -0.05], opts.m), 10.0, &opts).unwrap();
        let series = zero_number_series(&a, &b).unwrap();
        assert!(is_nonincreasing(&series), "series {series:?}");
    }

    #[test]
    fn probe_from_the_saddle_reaches_a_stable_constant() {
        let spec = ProblemSpec::chafee_infante(0.5).unwrap();
        let shoot = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &shoot).unwrap();
        let mut eqs = find_equilibria(&spec, &curve, &shoot).unwrap();
        let mut inv = crate::invariants::InvariantOptions::default();
        inv.m_spectral = 129;
        crate::invariants::build_sturm_data(&spec, &curve, &mut eqs, &shoot, &inv).unwrap();
        let opts = SimOptions { m: 129, ..SimOptions::default() };
        let up = heteroclinic_probe(&spec, &eqs[1], 0, 1, &eqs, &opts).unwrap();
        let down = heteroclinic_probe(&spec, &eqs[1], 0, -1, &eqs, &opts).unwrap();
        let mut targets = vec![up.target, down.target];
        targets.sort_unstable();
        assert_eq!(targets, vec![1, 3]);
        assert!(!up.degenerate);
    }

    #[test]
    fn probe_mode_must_be_unstable() {
        let spec = ProblemSpec::chafee_infante(0.5).unwrap();
        let shoot = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &shoot).unwrap();
        let mut eqs = find_equilibria(&spec, &curve, &shoot).unwrap();
        for e in eqs.iter_mut() {
            e.morse = Some(crate::invariants::morse_index(e).unwrap());
        }
        let opts = SimOptions { m: 129, ..SimOptions::default() };
        assert!(heteroclinic_probe(&spec, &eqs[0], 0, 1, &eqs, &opts).is_err());
        assert!(heteroclinic_probe(&spec, &eqs[1], 1, 1, &eqs, &opts).is_err());
    }
}
