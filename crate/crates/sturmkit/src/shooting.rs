//! Shooting flow for the equilibrium ODE u_xx = F0(x, u, u_x) on [0, pi].
//!
//! The Neumann line {(u, p) = (a, 0)} is evolved under the 4-dimensional
//! augmented flow
//!
//! ```text
//!   u'  = p                    u(0)  = a
//!   p'  = F0(x, u, p)          p(0)  = 0
//!   ua' = pa                   ua(0) = 1
//!   pa' = F0_p pa + F0_u ua    pa(0) = 0
//! ```
//!
//! where (ua, pa) is the tangent of the shooting curve. The winding angle
//! `theta` is the clockwise rotation of (ua, pa) in the (u, p)-plane, unwound
//! continuously from theta(0) = 0; clockwise rotation increases theta, and
//! Sturm theory keeps theta > -pi/2. Equilibria are the transverse
//! intersections of the curve at x = pi with the line {p = 0}.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Result, SturmError};
use crate::ode::{dp45_step, error_norm, next_step, rk4_step};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone)]
pub struct ShootOptions {
    /// Absolute / relative tolerance of the embedded RK 4(5) integrator.
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Samples per profile (grid on [0, pi], endpoints included).
    pub n_profile: usize,
    /// Blow-up is declared at |u| + |p| > escape_factor * (1 + |a_bracket|).
    pub escape_factor: f64,
    /// Root tolerance scale: |p(pi)| < tol_root_scale * (1 + |b|).
    pub tol_root_scale: f64,
    /// Hyperbolicity threshold on |pa(pi)|.
    pub eps_hyp: f64,
    /// Minimal separation of distinct roots (in a and in b).
    pub tol_sep: f64,
    /// Arc-length bound on consecutive curve samples in (u_pi, p_pi, theta_pi).
    pub arc_bound: f64,
    /// Resolution to which finite/escaped boundaries of the curve are located.
    pub gap_resolution: f64,
    /// Hard cap on curve samples.
    pub max_samples: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            n_profile: 2049,
            escape_factor: 1e3,
            tol_root_scale: 1e-9,
            eps_hyp: 1e-6,
            tol_sep: 1e-7,
            arc_bound: 0.2,
            gap_resolution: 1e-7,
            max_samples: 200_000,
        }
    }
}

impl ShootOptions {
    pub fn escape_bound(&self, a_bracket: (f64, f64)) -> f64 {
        self.escape_factor * (1.0 + a_bracket.0.abs().max(a_bracket.1.abs()))
    }

    /// Same options with integration tolerances tightened by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        let mut opts = self.clone();
        opts.abs_tol /= factor;
        opts.rel_tol /= factor;
        opts
    }
}

/// State of the augmented shooting flow at x = pi.
#[derive(Debug, Clone, Copy)]
pub struct TerminalState {
    pub u: f64,
    pub p: f64,
    pub ua: f64,
    pub pa: f64,
    pub theta: f64,
}

/// Outcome of a single shot: either it reaches x = pi or it blows up.
#[derive(Debug, Clone, Copy)]
pub enum ShotOutcome {
    Terminal(TerminalState),
    Escaped { x: f64 },
}

/// A full trajectory of the augmented flow, sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct ShootTrajectory {
    pub a: f64,
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub ua: Vec<f64>,
    pub pa: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ShootTrajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn terminal(&self) -> TerminalState {
        let n = self.len() - 1;
        TerminalState {
            u: self.u[n],
            p: self.p[n],
            ua: self.ua[n],
            pa: self.pa[n],
            theta: self.theta[n],
        }
    }

    /// Linear interpolation of u at position x (grid is uniform).
    pub fn u_at(&self, x: f64) -> f64 {
        let n = self.len();
        let h = PI / (n - 1) as f64;
        let t = (x / h).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let frac = t - i as f64;
        self.u[i] * (1.0 - frac) + self.u[i + 1] * frac
    }

    /// Resample u onto a uniform m-point grid on [0, pi].
    pub fn u_on_grid(&self, m: usize) -> Vec<f64> {
        (0..m).map(|i| self.u_at(PI * i as f64 / (m - 1) as f64)).collect()
    }
}

struct Integrator<'a> {
    spec: &'a ProblemSpec,
    opts: &'a ShootOptions,
    escape_bound: f64,
}

const H_MAX: f64 = PI / 8.0;
const H_MIN: f64 = 1e-14;

impl<'a> Integrator<'a> {
    fn rhs(&self, x: f64, y: &[f64; 4]) -> [f64; 4] {
        let f0 = self.spec.f0(x, y[0], y[1]);
        let fu = self.spec.f0_u(x, y[0], y[1]);
        let fp = self.spec.f0_p(x, y[0], y[1]);
        [y[1], f0, y[3], fp * y[3] + fu * y[2]]
    }

    /// Adaptive run from x = 0 to x = pi. `grid` forces the integrator to land
    /// exactly on each grid point and report the state there.
    fn run(
        &self,
        a: f64,
        grid: Option<&[f64]>,
        mut on_sample: impl FnMut(f64, &[f64; 4], f64),
    ) -> Result<ShotOutcome> {
        let mut x = 0.0;
        let mut y = [a, 0.0, 1.0, 0.0];
        let mut theta = 0.0;
        let mut h = PI / 64.0;
        let mut grid_next = 0usize;

        if let Some(g) = grid {
            debug_assert!(g.first() == Some(&0.0));
            on_sample(0.0, &y, 0.0);
            grid_next = 1;
        }

        while x < PI {
            if PI - x < 1e-12 {
                break;
            }
            let mut h_try = h.min(PI - x).min(H_MAX);
            if let Some(g) = grid {
                h_try = h_try.min(g[grid_next] - x);
            }
            loop {
                if h_try < H_MIN {
                    return Err(SturmError::Stiffness { a, x });
                }
                let (y_new, err) = dp45_step(&|x, y: &[f64; 4]| self.rhs(x, y), x, &y, h_try);
                if y_new.iter().any(|v| !v.is_finite()) {
                    return Err(SturmError::NonFiniteEvaluation { x, u: y[0], p: y[1] });
                }
                let en = error_norm(&y, &y_new, &err, self.opts.abs_tol, self.opts.rel_tol);
                // Rotation of the tangent over the step; must stay below pi/2
                // so the continuous unwinding is unambiguous.
                let cross = y[2] * y_new[3] - y[3] * y_new[2];
                let dot = y[2] * y_new[2] + y[3] * y_new[3];
                let d_phi = cross.atan2(dot);
                if en <= 1.0 && d_phi.abs() < std::f64::consts::FRAC_PI_2 {
                    x += h_try;
                    y = y_new;
                    theta -= d_phi; // clockwise rotation is positive
                    h = next_step(h_try, en).min(H_MAX);
                    break;
                }
                h_try *= if en > 1.0 { (next_step(1.0, en)).max(0.2) } else { 0.5 };
            }

            if y[0].abs() + y[1].abs() > self.escape_bound {
                return Ok(ShotOutcome::Escaped { x });
            }
            if let Some(g) = grid {
                if (x - g[grid_next]).abs() < 1e-12 {
                    x = g[grid_next];
                    on_sample(x, &y, theta);
                    grid_next += 1;
                    if grid_next == g.len() {
                        break;
                    }
                }
            }
        }

        Ok(ShotOutcome::Terminal(TerminalState {
            u: y[0],
            p: y[1],
            ua: y[2],
            pa: y[3],
            theta,
        }))
    }
}

/// Integrate the augmented shooting flow from u(0) = a and record the full
/// profile. Blow-up before x = pi is an error here.
pub fn integrate_shoot(spec: &ProblemSpec, a: f64, opts: &ShootOptions) -> Result<ShootTrajectory> {
    let n = opts.n_profile.max(2);
    let xs: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let mut traj = ShootTrajectory {
        a,
        xs: xs.clone(),
        u: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        ua: Vec::with_capacity(n),
        pa: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
    };
    let integ = Integrator { spec, opts, escape_bound: opts.escape_bound(spec.a_bracket) };
    let outcome = integ.run(a, Some(&xs), |_x, y, theta| {
        traj.u.push(y[0]);
        traj.p.push(y[1]);
        traj.ua.push(y[2]);
        traj.pa.push(y[3]);
        traj.theta.push(theta);
    })?;
    match outcome {
        ShotOutcome::Terminal(_) => Ok(traj),
        ShotOutcome::Escaped { x } => Err(SturmError::TrajectoryEscape {
            a,
            x,
            bound: integ.escape_bound,
        }),
    }
}

/// Terminal state only (no profile storage); escapes are reported, not errors.
pub fn shoot_terminal(spec: &ProblemSpec, a: f64, opts: &ShootOptions) -> Result<ShotOutcome> {
    let integ = Integrator { spec, opts, escape_bound: opts.escape_bound(spec.a_bracket) };
    integ.run(a, None, |_, _, _| {})
}

/// Fixed-step RK4 cross-check of the shooting flow (default 4096 steps).
pub fn shoot_terminal_rk4(spec: &ProblemSpec, a: f64, n_steps: usize) -> Result<ShotOutcome> {
    let opts = ShootOptions::default();
    let integ = Integrator { spec, opts: &opts, escape_bound: opts.escape_bound(spec.a_bracket) };
    let h = PI / n_steps as f64;
    let mut y = [a, 0.0, 1.0, 0.0];
    let mut theta = 0.0;
    for i in 0..n_steps {
        let x = i as f64 * h;
        let y_new = rk4_step(&|x, y: &[f64; 4]| integ.rhs(x, y), x, &y, h);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(SturmError::NonFiniteEvaluation { x, u: y[0], p: y[1] });
        }
        let cross = y[2] * y_new[3] - y[3] * y_new[2];
        let dot = y[2] * y_new[2] + y[3] * y_new[3];
        theta -= cross.atan2(dot);
        y = y_new;
        if y[0].abs() + y[1].abs() > integ.escape_bound {
            return Ok(ShotOutcome::Escaped { x: x + h });
        }
    }
    Ok(ShotOutcome::Terminal(TerminalState { u: y[0], p: y[1], ua: y[2], pa: y[3], theta }))
}

/// One sample of the shooting curve M_pi.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurveSample {
    pub a: f64,
    pub u_pi: f64,
    pub p_pi: f64,
    pub theta_pi: f64,
}

/// An a-value whose trajectory escaped before x = pi.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct CurveGap {
    pub a: f64,
    pub escape_x: f64,
}

/// The sampled shooting curve: terminal states ordered by a, with escaped
/// samples recorded as gaps.
#[derive(Debug, Clone)]
pub struct ShootingCurve {
    pub samples: Vec<CurveSample>,
    pub gaps: Vec<CurveGap>,
    pub a_bracket: (f64, f64),
    pub n_init: usize,
    pub warnings: Vec<String>,
}

impl ShootingCurve {
    /// Number of sign changes of a -> p_pi over consecutive finite samples.
    pub fn p_sign_changes(&self) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for s in &self.samples {
            if s.p_pi != 0.0 {
                if last != 0.0 && s.p_pi.signum() != last {
                    count += 1;
                }
                last = s.p_pi.signum();
            } else {
                // an exact root is a sign change in itself
                count += 1;
                last = 0.0;
            }
        }
        count
    }

    /// True if some escaped a lies strictly inside (lo, hi).
    pub fn has_gap_inside(&self, lo: f64, hi: f64) -> bool {
        self.gaps.iter().any(|g| g.a > lo && g.a < hi)
    }
}

#[derive(Clone, Copy)]
enum Entry {
    Finite(CurveSample),
    Escaped(CurveGap),
}

impl Entry {
    fn a(&self) -> f64 {
        match self {
            Entry::Finite(s) => s.a,
            Entry::Escaped(g) => g.a,
        }
    }
}

fn shoot_entry(spec: &ProblemSpec, a: f64, opts: &ShootOptions) -> Result<Entry> {
    Ok(match shoot_terminal(spec, a, opts)? {
        ShotOutcome::Terminal(t) => Entry::Finite(CurveSample {
            a,
            u_pi: t.u,
            p_pi: t.p,
            theta_pi: t.theta,
        }),
        ShotOutcome::Escaped { x } => Entry::Escaped(CurveGap { a, escape_x: x }),
    })
}

/// Scan the Neumann line over the a-bracket: n_init equally spaced shots,
/// then adaptive midpoint insertion until consecutive finite samples satisfy
/// the arc-length bound in (u_pi, p_pi, theta_pi) and finite/escaped
/// boundaries are localized to `gap_resolution`.
pub fn scan_curve(spec: &ProblemSpec, n_init: usize, opts: &ShootOptions) -> Result<ShootingCurve> {
    if n_init < 16 {
        return Err(SturmError::InvalidParameter(format!(
            "scan requires n_init >= 16, got {n_init}"
        )));
    }
    let (lo, hi) = spec.a_bracket;
    if !(hi > lo) {
        return Err(SturmError::InvalidParameter(format!(
            "a_bracket must be a proper interval, got [{lo}, {hi}]"
        )));
    }
    // Curve geometry only matters where equilibria and crossings can live;
    // outside this window only the finite/escaped boundary is refined.
    let clip = 10.0 * (1.0 + lo.abs().max(hi.abs()));

    let init: Vec<f64> =
        (0..n_init).map(|i| lo + (hi - lo) * i as f64 / (n_init - 1) as f64).collect();
    let mut entries: Vec<Entry> = init
        .par_iter()
        .map(|&a| shoot_entry(spec, a, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut warnings: Vec<String> = Vec::new();

    loop {
        let mut inserts: Vec<f64> = Vec::new();
        for w in entries.windows(2) {
            let da = w[1].a() - w[0].a();
            let mid = 0.5 * (w[0].a() + w[1].a());
            match (&w[0], &w[1]) {
                (Entry::Finite(s0), Entry::Finite(s1)) => {
                    let inside = |s: &CurveSample| s.u_pi.abs() + s.p_pi.abs() <= clip;
                    if inside(s0) && inside(s1) {
                        let dist = ((s1.u_pi - s0.u_pi).powi(2)
                            + (s1.p_pi - s0.p_pi).powi(2)
                            + (s1.theta_pi - s0.theta_pi).powi(2))
                        .sqrt();
                        let theta_jump = (s1.theta_pi - s0.theta_pi).abs();
                        if (dist > opts.arc_bound || theta_jump >= std::f64::consts::FRAC_PI_4)
                            && da > 1e-12 * (hi - lo)
                        {
                            inserts.push(mid);
                        }
                    } else if !(inside(s0) == inside(s1)) && da > opts.gap_resolution {
                        inserts.push(mid);
                    }
                }
                (Entry::Finite(_), Entry::Escaped(_)) | (Entry::Escaped(_), Entry::Finite(_)) => {
                    if da > opts.gap_resolution {
                        inserts.push(mid);
                    }
                }
                (Entry::Escaped(_), Entry::Escaped(_)) => {}
            }
        }
        let over_budget = entries.len() + inserts.len() > opts.max_samples;
        if inserts.is_empty() || over_budget {
            if over_budget {
                warnings.push(format!(
                    "curve refinement stopped at the sample budget ({})",
                    opts.max_samples
                ));
            }
            break;
        }
        let new_entries: Vec<Entry> = inserts
            .par_iter()
            .map(|&a| shoot_entry(spec, a, opts))
            .collect::<Result<Vec<_>>>()?;
        entries.extend(new_entries);
        entries.sort_by(|x, y| x.a().total_cmp(&y.a()));
    }

    let mut curve = ShootingCurve {
        samples: Vec::new(),
        gaps: Vec::new(),
        a_bracket: (lo, hi),
        n_init,
        warnings,
    };
    for e in entries {
        match e {
            Entry::Finite(s) => curve.samples.push(s),
            Entry::Escaped(g) => curve.gaps.push(g),
        }
    }
    let escaped_fraction =
        curve.gaps.len() as f64 / (curve.gaps.len() + curve.samples.len()) as f64;
    if escaped_fraction > 0.5 {
        curve.warnings.push(format!(
            "bracket too large: {:.0}% of shots escaped before x = pi",
            100.0 * escaped_fraction
        ));
    }
    Ok(curve)
}

/// An equilibrium located on the shooting curve: a transverse root of
/// a -> p(pi). Ids are 1-based in order of increasing a (curve order);
/// the Morse index is filled by the invariants stage.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub id: usize,
    pub a: f64,
    pub b: f64,
    pub theta_pi: f64,
    /// |pa(pi)|, the hyperbolicity margin of the transverse intersection.
    pub transversality: f64,
    pub profile: ShootTrajectory,
    pub morse: Option<usize>,
}

/// Bracket and bisect every sign change of a -> p_pi on the curve, then refine
/// each root and check hyperbolicity.
pub fn find_equilibria(
    spec: &ProblemSpec,
    curve: &ShootingCurve,
    opts: &ShootOptions,
) -> Result<Vec<Equilibrium>> {
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for w in curve.samples.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s0.p_pi == 0.0 {
            brackets.push((s0.a, s0.a));
            continue;
        }
        if s1.p_pi != 0.0 && s0.p_pi.signum() != s1.p_pi.signum() {
            if curve.has_gap_inside(s0.a, s1.a) {
                return Err(SturmError::CurveGap { lo: s0.a, hi: s1.a });
            }
            brackets.push((s0.a, s1.a));
        }
    }
    if let Some(last) = curve.samples.last() {
        if last.p_pi == 0.0 {
            brackets.push((last.a, last.a));
        }
    }

    let roots: Vec<f64> = brackets
        .par_iter()
        .map(|&(lo, hi)| bisect_root(spec, lo, hi, opts))
        .collect::<Result<Vec<_>>>()?;

    for w in roots.windows(2) {
        if (w[1] - w[0]).abs() < opts.tol_sep {
            return Err(SturmError::Resolution {
                what: format!("initial values a={} and a={}", w[0], w[1]),
                sep: (w[1] - w[0]).abs(),
                tol: opts.tol_sep,
            });
        }
    }

    let mut eqs: Vec<Equilibrium> = roots
        .par_iter()
        .map(|&a| -> Result<Equilibrium> {
            let profile = integrate_shoot(spec, a, opts)?;
            let t = profile.terminal();
            let margin = t.pa.abs();
            if margin <= opts.eps_hyp {
                return Err(SturmError::NonHyperbolic { a, margin, threshold: opts.eps_hyp });
            }
            Ok(Equilibrium {
                id: 0,
                a,
                b: t.u,
                theta_pi: t.theta,
                transversality: margin,
                profile,
                morse: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    eqs.sort_by(|x, y| x.a.total_cmp(&y.a));
    for (i, e) in eqs.iter_mut().enumerate() {
        e.id = i + 1;
    }
    Ok(eqs)
}

fn bisect_root(spec: &ProblemSpec, mut lo: f64, mut hi: f64, opts: &ShootOptions) -> Result<f64> {
    let bracket = (lo, hi);
    let p_at = move |a: f64| -> Result<(f64, f64)> {
        match shoot_terminal(spec, a, opts)? {
            ShotOutcome::Terminal(t) => Ok((t.p, t.u)),
            ShotOutcome::Escaped { .. } => {
                Err(SturmError::CurveGap { lo: bracket.0, hi: bracket.1 })
            }
        }
    };
    if lo == hi {
        return Ok(lo);
    }
    let (mut flo, _) = p_at(lo)?;
    let (fhi, _) = p_at(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    debug_assert!(flo.signum() != fhi.signum());
    let mut best = (lo, flo.abs());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (fmid, b) = p_at(mid)?;
        if fmid.abs() < best.1 {
            best = (mid, fmid.abs());
        }
        let tol_root = opts.tol_root_scale * (1.0 + b.abs());
        if fmid == 0.0 || fmid.abs() < tol_root {
            return Ok(mid);
        }
        if hi - lo < 1e-14 * (1.0 + mid.abs()) {
            return Ok(best.0);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(best.0)
}
