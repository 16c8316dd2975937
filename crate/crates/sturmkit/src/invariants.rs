//! Sturm invariants of the equilibrium set: Morse indices (winding-angle
//! formula, cross-checked by a spectral oracle), the Fusco-Rocha permutation,
//! and the pairwise zero-number matrix (profile-difference oracle,
//! cross-checked by the signed-intersection formula on the shooting curve).

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::eigen::Tridiag;
use crate::error::{Result, SturmError};
use crate::problem::ProblemSpec;
use crate::shooting::{
    integrate_shoot, shoot_terminal, Equilibrium, ShootOptions, ShootingCurve, ShotOutcome,
};
use crate::zeros;

/// Guard band around multiples of pi (Morse index) and pi/2 (crossing-case
/// selection); a hyperbolic equilibrium cannot sit on these boundaries, so a
/// hit means insufficient integration accuracy.
pub const ANGLE_GUARD: f64 = 1e-6;

/// Morse index from the winding angle: i = 1 + floor(theta(pi) / pi).
pub fn morse_index(e: &Equilibrium) -> Result<usize> {
    morse_index_of_angle(e.theta_pi)
}

pub fn morse_index_of_angle(theta: f64) -> Result<usize> {
    if theta <= -FRAC_PI_2 {
        return Err(SturmError::IntegrationCorrupt { theta });
    }
    let nearest = (theta / PI).round() * PI;
    if (theta - nearest).abs() < ANGLE_GUARD {
        return Err(SturmError::IndeterminateAngle { theta, band: ANGLE_GUARD });
    }
    Ok(((theta / PI).floor() as i64 + 1) as usize)
}

/// Discretized linearization of the evolution form along an equilibrium:
/// second-order central differences, ghost-point Neumann closure, m points.
/// The drift term vanishes at the boundary rows because the mirrored ghost
/// point forces u_x = 0 there.
pub fn linearization_tridiag(spec: &ProblemSpec, e: &Equilibrium, m: usize) -> Result<Tridiag> {
    let ft = spec.ftilde()?;
    if m < 64 {
        return Err(SturmError::InvalidParameter(format!(
            "spectral grid needs m >= 64, got {m}"
        )));
    }
    let h = PI / (m - 1) as f64;
    let n_prof = e.profile.len();
    let stride = (n_prof - 1) as f64 / (m - 1) as f64;
    let mut diag = vec![0.0; m];
    let mut sub = vec![0.0; m - 1];
    let mut sup = vec![0.0; m - 1];
    for i in 0..m {
        let x = PI * i as f64 / (m - 1) as f64;
        // profile state at x (exact sample when the grids are commensurate)
        let t = (i as f64 * stride).round();
        let (u, p) = if (t - i as f64 * stride).abs() < 1e-9 {
            let idx = t as usize;
            (e.profile.u[idx], e.profile.p[idx])
        } else {
            (e.profile.u_at(x), interp(&e.profile.p, x))
        };
        let q = spec.f0(x, u, p);
        let fq = ft.d_q(x, u, p, q);
        let fp = ft.d_p(x, u, p, q);
        let fu = ft.d_u(x, u, p, q);
        diag[i] = -2.0 * fq / (h * h) + fu;
        if i == 0 {
            sup[0] = 2.0 * fq / (h * h);
        } else if i == m - 1 {
            sub[m - 2] = 2.0 * fq / (h * h);
        } else {
            sub[i - 1] = fq / (h * h) - fp / (2.0 * h);
            sup[i] = fq / (h * h) + fp / (2.0 * h);
        }
    }
    Tridiag::new(diag, sub, sup)
}

fn interp(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let h = PI / (n - 1) as f64;
    let t = (x / h).clamp(0.0, (n - 1) as f64);
    let i = (t.floor() as usize).min(n - 2);
    let frac = t - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SpectralReport {
    pub positive_count: usize,
    /// Eigenvalue of smallest magnitude: the hyperbolicity gap proxy.
    pub nearest_eigenvalue: f64,
    pub near_nonhyperbolic: bool,
}

/// Count positive eigenvalues of the discretized linearization along the
/// equilibrium profile; the independent oracle for the Morse index.
pub fn spectral_morse_oracle(
    spec: &ProblemSpec,
    e: &Equilibrium,
    m: usize,
) -> Result<SpectralReport> {
    let tri = linearization_tridiag(spec, e, m)?;
    let positive_count = tri.count_positive();
    let nearest = tri.smallest_abs_eigenvalue()?;
    let top = tri.eigenvalue_desc(0)?;
    let near = nearest.abs() < 1e-4 * top.abs().max(1.0);
    Ok(SpectralReport {
        positive_count,
        nearest_eigenvalue: nearest,
        near_nonhyperbolic: near,
    })
}

/// The Fusco-Rocha permutation: eqs are indexed 1..n along the curve
/// (increasing a); sigma[k-1] is the curve index of the equilibrium with the
/// k-th smallest terminal value b.
pub fn fusco_rocha_permutation(eqs: &[Equilibrium]) -> Result<Vec<usize>> {
    let tol_sep = ShootOptions::default().tol_sep;
    let mut order: Vec<usize> = (0..eqs.len()).collect();
    order.sort_by(|&i, &j| eqs[i].b.total_cmp(&eqs[j].b));
    for w in order.windows(2) {
        let sep = (eqs[w[1]].b - eqs[w[0]].b).abs();
        if sep < tol_sep {
            return Err(SturmError::Resolution {
                what: format!("terminal values b of e{} and e{}", eqs[w[0]].id, eqs[w[1]].id),
                sep,
                tol: tol_sep,
            });
        }
    }
    Ok(order.iter().map(|&i| eqs[i].id).collect())
}

/// Ground-truth zero number: strict sign changes of the profile difference
/// e_j - e_k on the common grid.
pub fn zero_number_profiles(e_j: &Equilibrium, e_k: &Equilibrium) -> Result<i64> {
    if e_j.id == e_k.id {
        return Err(SturmError::InvalidParameter("zero number needs distinct equilibria".into()));
    }
    debug_assert_eq!(e_j.profile.len(), e_k.profile.len());
    let w: Vec<f64> =
        e_j.profile.u.iter().zip(&e_k.profile.u).map(|(a, b)| a - b).collect();
    let frac = zeros::fraction_below_tol(&w);
    if frac > 0.01 {
        return Err(SturmError::ProfilesTooClose {
            j: e_j.id,
            k: e_k.id,
            fraction: 100.0 * frac,
        });
    }
    Ok(zeros::zero_number(&w))
}

/// Which of the two cases of the signed-intersection formula applies at e_j:
/// the count starts from i(e_j) when theta_j mod pi lies in (pi/2, pi) and
/// from i(e_j) - 1 when it lies in (0, pi/2).
fn crossing_base(theta_j: f64, morse_j: usize) -> Result<i64> {
    let phase = theta_j.rem_euclid(PI);
    if phase < ANGLE_GUARD || (PI - phase) < ANGLE_GUARD || (phase - FRAC_PI_2).abs() < ANGLE_GUARD
    {
        return Err(SturmError::IndeterminateAngle { theta: theta_j, band: ANGLE_GUARD });
    }
    Ok(if phase > FRAC_PI_2 { morse_j as i64 } else { morse_j as i64 - 1 })
}

/// Zero number by the shooting curve: walk the curve from e_j to e_k, count
/// the signed crossings of the vertical line u = b_j (r_jk), and combine with
/// the two-case formula keyed on theta_j. A crossing counts +1 when the curve
/// point rotates clockwise about (b_j, 0), which is sign(u_a(pi) * p(pi)) at
/// the crossing; this convention was calibrated once against the profile
/// oracle on the Chafee-Infante suite and is frozen here.
///
/// Returns (z, r_jk). The profile oracle remains authoritative; callers
/// compare and flag disagreement.
pub fn zero_number_shooting(
    spec: &ProblemSpec,
    curve: &ShootingCurve,
    eqs: &[Equilibrium],
    j: usize,
    k: usize,
    opts: &ShootOptions,
) -> Result<(i64, i64)> {
    if j >= k || j == 0 || k > eqs.len() {
        return Err(SturmError::InvalidParameter(format!(
            "zero_number_shooting needs 1 <= j < k <= n, got ({j}, {k})"
        )));
    }
    let e_j = &eqs[j - 1];
    let e_k = &eqs[k - 1];
    if curve.has_gap_inside(e_j.a, e_k.a) {
        return Err(SturmError::CurveGap { lo: e_j.a, hi: e_k.a });
    }
    let morse_j = morse_index(e_j)?;
    let base = crossing_base(e_j.theta_pi, morse_j)?;
    let r = signed_crossings(spec, curve, e_j, e_k, opts)?;
    Ok((base + r, r))
}

fn signed_crossings(
    spec: &ProblemSpec,
    curve: &ShootingCurve,
    e_j: &Equilibrium,
    e_k: &Equilibrium,
    opts: &ShootOptions,
) -> Result<i64> {
    let b_j = e_j.b;
    // Hysteresis floor on u_pi - b_j: genuine crossings swing past the
    // b-separation scale (tol_sep), while integration noise and the envelope
    // graze of a near-constant equilibrium live around the integrator
    // tolerance. Sub-floor samples are dropped; a there-and-back excursion
    // entirely below the floor is a tangential touch with net count zero.
    let eta = 0.2 * opts.tol_sep * (1.0 + b_j.abs());
    let g_of = |u_pi: f64| u_pi - b_j;

    let mut walk: Vec<(f64, f64)> = curve
        .samples
        .iter()
        .filter(|s| s.a > e_j.a && s.a < e_k.a)
        .map(|s| (s.a, g_of(s.u_pi)))
        .filter(|&(_, g)| g.abs() > eta)
        .collect();
    walk.push((e_k.a, g_of(e_k.b)));

    // Departure sign at e_j: g(a) ~ u_a(pi) * (a - a_j) just after a_j.
    let dep = e_j.profile.terminal().ua;
    if dep.abs() < 1e-9 {
        return Err(SturmError::IndeterminateAngle { theta: e_j.theta_pi, band: ANGLE_GUARD });
    }
    let mut prev = (e_j.a, dep.signum());

    let shoot_g = |a: f64| -> Result<(f64, f64, f64)> {
        match shoot_terminal(spec, a, opts)? {
            ShotOutcome::Terminal(t) => Ok((g_of(t.u), t.p, t.ua)),
            ShotOutcome::Escaped { .. } => Err(SturmError::CurveGap { lo: e_j.a, hi: e_k.a }),
        }
    };

    // Same-sign intervals whose endpoints come near the line are resampled
    // once at 8x density before detection, to catch there-and-back double
    // crossings hiding between samples.
    let near = 0.35 * (1.0 + b_j.abs()) * opts.arc_bound;
    let mut r = 0i64;
    for &(a1, g1) in &walk {
        let (a0, g0) = prev;
        if g0.signum() != g1.signum() {
            r += crossing_sign(&shoot_g, a0, g0, a1)?;
        } else if g0.abs().min(g1.abs()) < near {
            let mut sub: Vec<(f64, f64)> = vec![(a0, g0)];
            for i in 1..8 {
                let am = a0 + (a1 - a0) * i as f64 / 8.0;
                let (gm, _, _) = shoot_g(am)?;
                if gm.abs() > eta {
                    sub.push((am, gm));
                }
            }
            sub.push((a1, g1));
            for w in sub.windows(2) {
                if w[0].1.signum() != w[1].1.signum() {
                    r += crossing_sign(&shoot_g, w[0].0, w[0].1, w[1].0)?;
                }
            }
        }
        prev = (a1, g1);
    }
    Ok(r)
}

fn crossing_sign(
    shoot_g: &impl Fn(f64) -> Result<(f64, f64, f64)>,
    mut a0: f64,
    g0: f64,
    mut a1: f64,
) -> Result<i64> {
    let sign0 = g0.signum();
    let mut at = (0.0, 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (a0 + a1);
        let (gm, p, ua) = shoot_g(mid)?;
        at = (p, ua);
        if a1 - a0 < 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        if gm.signum() == sign0 {
            a0 = mid;
        } else {
            a1 = mid;
        }
    }
    let (p, ua) = at;
    if p.abs() < 1e-9 || ua.abs() < 1e-9 {
        return Err(SturmError::Resolution {
            what: "tangential crossing of the vertical line".into(),
            sep: p.abs().min(ua.abs()),
            tol: 1e-9,
        });
    }
    Ok((ua * p).signum() as i64)
}

/// The Sturm data of an equilibrium set: permutation, Morse vector,
/// zero-number matrix (diagonal -1, the zero function), signed crossing
/// counts, and per-entry method agreement.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct SturmData {
    pub n: usize,
    /// one-line notation, 1-based curve indices ordered by increasing b
    pub sigma: Vec<usize>,
    pub morse: Vec<usize>,
    pub zmat: Vec<Vec<i64>>,
    pub rcounts: Vec<Vec<i64>>,
    pub zmat_method: String,
    pub cross_check: String,
    pub agreement: Vec<Vec<bool>>,
    pub warnings: Vec<String>,
}

impl SturmData {
    pub fn sigma_one_line(&self) -> String {
        let body: Vec<String> = self.sigma.iter().map(|v| v.to_string()).collect();
        format!("({})", body.join(" "))
    }
}

/// Options for [`build_sturm_data`].
#[derive(Debug, Clone)]
pub struct InvariantOptions {
    /// Grid size of the spectral oracle.
    pub m_spectral: usize,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        InvariantOptions { m_spectral: 257 }
    }
}

/// Assemble the full Sturm data. Morse indices come from the angle formula and
/// must agree with the spectral oracle; zero numbers come from the profile
/// oracle and must agree with the shooting formula. Either disagreement is
/// fatal. Equilibria are updated in place with their Morse indices.
pub fn build_sturm_data(
    spec: &ProblemSpec,
    curve: &ShootingCurve,
    eqs: &mut [Equilibrium],
    opts: &ShootOptions,
    inv: &InvariantOptions,
) -> Result<SturmData> {
    if eqs.is_empty() {
        return Err(SturmError::InvalidParameter("no equilibria".into()));
    }
    let n = eqs.len();
    let mut warnings = Vec::new();

    // Morse indices: angle formula, re-integrating once at tighter tolerance
    // if the angle falls inside the guard band.
    let mut morse = Vec::with_capacity(n);
    for e in eqs.iter_mut() {
        let idx = match morse_index(e) {
            Ok(i) => i,
            Err(SturmError::IndeterminateAngle { .. }) => {
                let tight = opts.tightened(100.0);
                e.profile = integrate_shoot(spec, e.a, &tight)?;
                e.theta_pi = e.profile.terminal().theta;
                morse_index(e)?
            }
            Err(other) => return Err(other),
        };
        e.morse = Some(idx);
        morse.push(idx);
    }

    // Spectral cross-check (skipped with a warning if no evolution form).
    if spec.ftilde.is_some() {
        let reports: Vec<SpectralReport> = eqs
            .par_iter()
            .map(|e| spectral_morse_oracle(spec, e, inv.m_spectral))
            .collect::<Result<Vec<_>>>()?;
        for (e, rep) in eqs.iter().zip(&reports) {
            if rep.positive_count != e.morse.unwrap() {
                return Err(SturmError::MorseDisagreement {
                    j: e.id,
                    angle: e.morse.unwrap(),
                    spectral: rep.positive_count,
                });
            }
            if rep.near_nonhyperbolic {
                warnings.push(format!(
                    "e{}: eigenvalue {:.3e} is close to zero (near-nonhyperbolic)",
                    e.id, rep.nearest_eigenvalue
                ));
            }
        }
    } else {
        warnings.push("no evolution form: spectral Morse cross-check skipped".into());
    }

    for w in morse.windows(2) {
        if w[0].abs_diff(w[1]) != 1 {
            return Err(SturmError::Invariant(format!(
                "curve-adjacent Morse indices must differ by one, got {} and {}",
                w[0], w[1]
            )));
        }
    }

    let sigma = fusco_rocha_permutation(eqs)?;

    let mut zmat = vec![vec![-1i64; n]; n];
    let mut rcounts = vec![vec![0i64; n]; n];
    let mut agreement = vec![vec![true; n]; n];
    let pairs: Vec<(usize, usize)> =
        (1..=n).flat_map(|j| (j + 1..=n).map(move |k| (j, k))).collect();
    let results: Vec<(usize, usize, i64, i64, i64)> = pairs
        .par_iter()
        .map(|&(j, k)| -> Result<(usize, usize, i64, i64, i64)> {
            let z_p = zero_number_profiles(&eqs[j - 1], &eqs[k - 1])?;
            let (z_s, r) = zero_number_shooting(spec, curve, eqs, j, k, opts)?;
            Ok((j, k, z_p, z_s, r))
        })
        .collect::<Result<Vec<_>>>()?;
    for (j, k, z_p, z_s, r) in results {
        let agree = z_p == z_s;
        zmat[j - 1][k - 1] = z_p;
        zmat[k - 1][j - 1] = z_p;
        rcounts[j - 1][k - 1] = r;
        rcounts[k - 1][j - 1] = -r;
        agreement[j - 1][k - 1] = agree;
        agreement[k - 1][j - 1] = agree;
        if !agree {
            return Err(SturmError::MethodDisagreement { j, k, profile: z_p, shooting: z_s, r });
        }
    }

    // Empirical consequence of the nodal structure on the cubic suite:
    // consecutive equilibria satisfy z = min of the Morse indices. Flag only.
    for j in 0..n.saturating_sub(1) {
        let expect = morse[j].min(morse[j + 1]) as i64;
        if zmat[j][j + 1] != expect {
            warnings.push(format!(
                "z(e{}-e{}) = {} differs from min Morse {}",
                j + 1,
                j + 2,
                zmat[j][j + 1],
                expect
            ));
        }
    }

    Ok(SturmData {
        n,
        sigma,
        morse,
        zmat,
        rcounts,
        zmat_method: "profile_difference".into(),
        cross_check: "shooting_signed_crossings".into(),
        agreement,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan_curve;
    use crate::shooting::find_equilibria;

    fn pipeline(lambda: f64) -> (ProblemSpec, ShootingCurve, Vec<Equilibrium>, SturmData) {
        let spec = ProblemSpec::chafee_infante(lambda).unwrap();
        let opts = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &opts).unwrap();
        let mut eqs = find_equilibria(&spec, &curve, &opts).unwrap();
        let data =
            build_sturm_data(&spec, &curve, &mut eqs, &opts, &InvariantOptions::default())
                .unwrap();
        (spec, curve, eqs, data)
    }

    #[test]
    fn morse_index_formula_on_synthetic_angles() {
        assert_eq!(morse_index_of_angle(-0.3).unwrap(), 0);
        assert_eq!(morse_index_of_angle(1.8).unwrap(), 1);
        assert_eq!(morse_index_of_angle(4.52).unwrap(), 2);
        assert_eq!(morse_index_of_angle(7.02).unwrap(), 3);
        assert!(matches!(
            morse_index_of_angle(-2.0),
            Err(SturmError::IntegrationCorrupt { .. })
        ));
        assert!(matches!(
            morse_index_of_angle(PI + 1e-8),
            Err(SturmError::IndeterminateAngle { .. })
        ));
    }

    #[test]
    fn spectral_counts_match_closed_forms() {
        // eigenvalues of d^2 + lambda with Neumann are lambda - k^2
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let opts = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &opts).unwrap();
        let eqs = find_equilibria(&spec, &curve, &opts).unwrap();
        let center = spectral_morse_oracle(&spec, &eqs[2], 257).unwrap();
        assert_eq!(center.positive_count, 2);
        // linearization at u = -1 has eigenvalues -2 lambda - k^2 < 0
        let stable = spectral_morse_oracle(&spec, &eqs[0], 257).unwrap();
        assert_eq!(stable.positive_count, 0);

        let spec = ProblemSpec::chafee_infante(0.5).unwrap();
        let curve = scan_curve(&spec, 64, &opts).unwrap();
        let eqs = find_equilibria(&spec, &curve, &opts).unwrap();
        let center = spectral_morse_oracle(&spec, &eqs[1], 257).unwrap();
        assert_eq!(center.positive_count, 1);
    }

    #[test]
    fn permutation_is_identity_below_first_bifurcation() {
        let (_, _, _, data) = pipeline(0.5);
        assert_eq!(data.sigma, vec![1, 2, 3]);
        assert_eq!(data.morse, vec![0, 1, 0]);
    }

    #[test]
    fn permutation_is_the_transposition_two_four() {
        let (_, _, _, data) = pipeline(2.0);
        assert_eq!(data.sigma, vec![1, 4, 3, 2, 5]);
        assert_eq!(data.morse, vec![0, 1, 2, 1, 0]);
    }

    #[test]
    fn zero_numbers_of_the_five_equilibrium_regime() {
        let (_, _, _, data) = pipeline(2.0);
        let z = &data.zmat;
        for j in 1..5 {
            assert_eq!(z[0][j], 0, "z(e1-e{})", j + 1);
        }
        assert_eq!(z[1][2], 1);
        assert_eq!(z[1][3], 1);
        assert_eq!(z[1][4], 0);
        assert_eq!(z[2][3], 1);
        assert_eq!(z[2][4], 0);
        assert_eq!(z[3][4], 0);
        // signed crossing counts
        assert_eq!(data.rcounts[1][4], -1, "r25");
        assert_eq!(data.rcounts[2][4], -1, "r35");
        assert_eq!(data.rcounts[3][4], -1, "r45");
        assert_eq!(data.rcounts[0][1], 0, "r12");
        assert_eq!(data.rcounts[1][2], 0, "r23");
        assert_eq!(data.rcounts[2][3], 0, "r34");
        assert!(data.agreement.iter().flatten().all(|&a| a));
    }

    #[test]
    fn constant_equilibria_have_zero_number_zero() {
        let (_, _, eqs, _) = pipeline(0.5);
        assert_eq!(zero_number_profiles(&eqs[0], &eqs[2]).unwrap(), 0);
    }

    #[test]
    fn zmat_is_symmetric_and_diagonal_is_sentinel() {
        let (_, _, _, data) = pipeline(2.0);
        for j in 0..data.n {
            assert_eq!(data.zmat[j][j], -1);
            for k in 0..data.n {
                assert_eq!(data.zmat[j][k], data.zmat[k][j]);
                assert_eq!(data.rcounts[j][k], -data.rcounts[k][j]);
            }
        }
    }

    #[test]
    fn single_pair_shooting_formula() {
        let spec = ProblemSpec::chafee_infante(2.0).unwrap();
        let opts = ShootOptions::default();
        let curve = scan_curve(&spec, 64, &opts).unwrap();
        let eqs = find_equilibria(&spec, &curve, &opts).unwrap();
        let (z, r) = zero_number_shooting(&spec, &curve, &eqs, 2, 5, &opts).unwrap();
        assert_eq!((z, r), (0, -1));
        let (z, r) = zero_number_shooting(&spec, &curve, &eqs, 1, 2, &opts).unwrap();
        assert_eq!((z, r), (0, 0));
    }

    #[test]
    fn extremal_equilibria_are_stable() {
        let (_, _, _, data) = pipeline(2.0);
        assert_eq!(data.morse[0], 0);
        assert_eq!(*data.morse.last().unwrap(), 0);
    }
}
