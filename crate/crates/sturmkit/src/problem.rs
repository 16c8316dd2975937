//! Problem definitions for the scalar parabolic equation on [0, pi] with
//! Neumann boundary conditions, in its two splittings:
//!
//! - equilibrium form:  u_xx = F0(x, u, u_x)           (drives the shooting flow)
//! - evolution form:    u_t  = F~(x, u, u_x, u_xx)     (drives the time stepper)
//!
//! The evolution form need not be defined globally; it carries an explicit
//! validity predicate instead of relying on NaN propagation.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SturmError};

pub type Eval3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;
pub type Eval4 = Arc<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;
pub type Pred4 = Arc<dyn Fn(f64, f64, f64, f64) -> bool + Send + Sync>;

/// Relative step for central finite differences of missing partials.
pub const H_FD: f64 = 1e-5;

fn fd_step(arg: f64) -> f64 {
    H_FD * arg.abs().max(1.0)
}

/// The evolution right-hand side F~(x, u, p, q) with its domain of validity
/// and optional analytic partial derivatives.
#[derive(Clone)]
pub struct Ftilde {
    pub eval: Eval4,
    pub valid: Pred4,
    pub dq: Option<Eval4>,
    pub dp: Option<Eval4>,
    pub du: Option<Eval4>,
}

impl Ftilde {
    pub fn new(eval: Eval4, valid: Pred4) -> Self {
        Ftilde { eval, valid, dq: None, dp: None, du: None }
    }

    pub fn eval(&self, x: f64, u: f64, p: f64, q: f64) -> f64 {
        (self.eval)(x, u, p, q)
    }

    pub fn is_valid(&self, x: f64, u: f64, p: f64, q: f64) -> bool {
        (self.valid)(x, u, p, q)
    }

    /// dF~/dq, analytic when supplied, else central differences.
    pub fn d_q(&self, x: f64, u: f64, p: f64, q: f64) -> f64 {
        match &self.dq {
            Some(f) => f(x, u, p, q),
            None => {
                let h = fd_step(q);
                ((self.eval)(x, u, p, q + h) - (self.eval)(x, u, p, q - h)) / (2.0 * h)
            }
        }
    }

    pub fn d_p(&self, x: f64, u: f64, p: f64, q: f64) -> f64 {
        match &self.dp {
            Some(f) => f(x, u, p, q),
            None => {
                let h = fd_step(p);
                ((self.eval)(x, u, p + h, q) - (self.eval)(x, u, p - h, q)) / (2.0 * h)
            }
        }
    }

    pub fn d_u(&self, x: f64, u: f64, p: f64, q: f64) -> f64 {
        match &self.du {
            Some(f) => f(x, u, p, q),
            None => {
                let h = fd_step(u);
                ((self.eval)(x, u + h, p, q) - (self.eval)(x, u - h, p, q)) / (2.0 * h)
            }
        }
    }
}

/// A parabolic problem: the equilibrium right-hand side F0 (mandatory), the
/// evolution right-hand side F~ (optional, needed for time stepping and the
/// spectral oracle), named parameters, and the bracket of boundary values
/// u(0) asserted to contain every equilibrium.
///
/// Immutable after construction; evaluators must be pure, so a spec can be
/// shared freely across threads.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub f0: Eval3,
    pub f0_u: Option<Eval3>,
    pub f0_p: Option<Eval3>,
    pub ftilde: Option<Ftilde>,
    pub a_bracket: (f64, f64),
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("a_bracket", &self.a_bracket)
            .field("has_ftilde", &self.ftilde.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn f0(&self, x: f64, u: f64, p: f64) -> f64 {
        (self.f0)(x, u, p)
    }

    /// dF0/du, analytic when supplied, else central differences with step h_fd.
    pub fn f0_u(&self, x: f64, u: f64, p: f64) -> f64 {
        match &self.f0_u {
            Some(f) => f(x, u, p),
            None => {
                let h = fd_step(u);
                ((self.f0)(x, u + h, p) - (self.f0)(x, u - h, p)) / (2.0 * h)
            }
        }
    }

    /// dF0/dp, analytic when supplied, else central differences with step h_fd.
    pub fn f0_p(&self, x: f64, u: f64, p: f64) -> f64 {
        match &self.f0_p {
            Some(f) => f(x, u, p),
            None => {
                let h = fd_step(p);
                ((self.f0)(x, u, p + h) - (self.f0)(x, u, p - h)) / (2.0 * h)
            }
        }
    }

    pub fn ftilde(&self) -> Result<&Ftilde> {
        self.ftilde.as_ref().ok_or(SturmError::MissingEvolutionForm)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// The Chafee-Infante problem in its fully nonlinear form
    /// `0 = 1 - exp(u_t) + u_xx + lambda u (1 - u^2)`.
    ///
    /// Solving for u_xx at u_t = 0 gives F0 = -lambda u (1 - u^2); solving for
    /// u_t gives F~ = ln(1 + u_xx + lambda u (1 - u^2)), defined where the
    /// argument of the logarithm is positive.
    pub fn chafee_infante(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(SturmError::InvalidParameter(format!(
                "chafee_infante requires lambda > 0, got {lambda}"
            )));
        }
        let mut spec = Self::chafee_infante_semilinear(lambda)?;
        spec.name = format!("chafee_infante(lambda={lambda})");
        let cubic = move |u: f64| lambda * u * (1.0 - u * u);
        spec.ftilde = Some(Ftilde {
            eval: Arc::new(move |_x, u, _p, q| (1.0 + q + cubic(u)).ln()),
            valid: Arc::new(move |_x, u, _p, q| 1.0 + q + cubic(u) > 0.0),
            dq: Some(Arc::new(move |_x, u, _p, q| 1.0 / (1.0 + q + cubic(u)))),
            dp: Some(Arc::new(|_, _, _, _| 0.0)),
            du: Some(Arc::new(move |_x, u, _p, q| {
                lambda * (1.0 - 3.0 * u * u) / (1.0 + q + cubic(u))
            })),
        });
        Ok(spec)
    }

    /// The standard (semilinear) Chafee-Infante problem
    /// `u_t = u_xx + lambda u (1 - u^2)`. Same shooting flow as the fully
    /// nonlinear form, so the same equilibria and permutation.
    pub fn chafee_infante_semilinear(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(SturmError::InvalidParameter(format!(
                "chafee_infante_semilinear requires lambda > 0, got {lambda}"
            )));
        }
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), lambda);
        let cubic = move |u: f64| lambda * u * (1.0 - u * u);
        Ok(ProblemSpec {
            name: format!("chafee_infante_semilinear(lambda={lambda})"),
            params,
            f0: Arc::new(move |_x, u, _p| -cubic(u)),
            f0_u: Some(Arc::new(move |_x, u, _p| -lambda * (1.0 - 3.0 * u * u))),
            f0_p: Some(Arc::new(|_, _, _| 0.0)),
            ftilde: Some(Ftilde {
                eval: Arc::new(move |_x, u, _p, q| q + cubic(u)),
                valid: Arc::new(|_, _, _, _| true),
                dq: Some(Arc::new(|_, _, _, _| 1.0)),
                dp: Some(Arc::new(|_, _, _, _| 0.0)),
                du: Some(Arc::new(move |_x, u, _p, _q| lambda * (1.0 - 3.0 * u * u))),
            }),
            a_bracket: (-2.0, 2.0),
        })
    }

    /// Odd cubic reaction `u_t = u_xx + lambda (c1 u - c3 u^3)`. Rescaling u
    /// shows this is Chafee-Infante at effective parameter lambda*c1, so its
    /// equilibria are hyperbolic whenever lambda*c1 avoids {1, 4, 9, ...}.
    pub fn odd_cubic(lambda: f64, c1: f64, c3: f64) -> Result<Self> {
        if !(lambda > 0.0 && c1 > 0.0 && c3 > 0.0) {
            return Err(SturmError::InvalidParameter(format!(
                "odd_cubic requires lambda, c1, c3 > 0, got ({lambda}, {c1}, {c3})"
            )));
        }
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), lambda);
        params.insert("c1".to_string(), c1);
        params.insert("c3".to_string(), c3);
        let reaction = move |u: f64| lambda * (c1 * u - c3 * u * u * u);
        let radius = (c1 / c3).sqrt();
        Ok(ProblemSpec {
            name: format!("odd_cubic(lambda={lambda}, c1={c1}, c3={c3})"),
            params,
            f0: Arc::new(move |_x, u, _p| -reaction(u)),
            f0_u: Some(Arc::new(move |_x, u, _p| -lambda * (c1 - 3.0 * c3 * u * u))),
            f0_p: Some(Arc::new(|_, _, _| 0.0)),
            ftilde: Some(Ftilde {
                eval: Arc::new(move |_x, u, _p, q| q + reaction(u)),
                valid: Arc::new(|_, _, _, _| true),
                dq: Some(Arc::new(|_, _, _, _| 1.0)),
                dp: Some(Arc::new(|_, _, _, _| 0.0)),
                du: Some(Arc::new(move |_x, u, _p, _q| lambda * (c1 - 3.0 * c3 * u * u))),
            }),
            a_bracket: (-2.0 * radius, 2.0 * radius),
        })
    }

    /// Construct a builtin family from a config-style id and parameter map.
    pub fn from_family(family: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let need = |key: &str| -> Result<f64> {
            params.get(key).copied().ok_or_else(|| {
                SturmError::InvalidParameter(format!("family '{family}' requires parameter '{key}'"))
            })
        };
        match family {
            "chafee_infante" => Self::chafee_infante(need("lambda")?),
            "chafee_infante_semilinear" => Self::chafee_infante_semilinear(need("lambda")?),
            "odd_cubic" => Self::odd_cubic(need("lambda")?, need("c1")?, need("c3")?),
            other => Err(SturmError::InvalidParameter(format!(
                "unknown problem family '{other}' (expected chafee_infante, \
                 chafee_infante_semilinear, or odd_cubic)"
            ))),
        }
    }
}

/// Sampling box for [`check_parabolicity`]: (min, max, count) per axis.
#[derive(Debug, Clone, Copy)]
pub struct GridBox {
    pub x: (f64, f64, usize),
    pub u: (f64, f64, usize),
    pub p: (f64, f64, usize),
    pub q: (f64, f64, usize),
}

impl GridBox {
    /// Box over u and q only, with x in [0, pi] and p = 0.
    pub fn uq(u_lo: f64, u_hi: f64, q_lo: f64, q_hi: f64, n: usize) -> Self {
        GridBox {
            x: (0.0, std::f64::consts::PI, 3),
            u: (u_lo, u_hi, n),
            p: (0.0, 0.0, 1),
            q: (q_lo, q_hi, n),
        }
    }

    fn axis(range: (f64, f64, usize)) -> Vec<f64> {
        let (lo, hi, n) = range;
        if n <= 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.x.2 == 0 || self.u.2 == 0 || self.p.2 == 0 || self.q.2 == 0
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ParabolicityReport {
    pub min_dq: f64,
    pub max_dq: f64,
    pub sampled: usize,
    pub outside_domain: usize,
    /// Points (x, u, p, q, dF~/dq) where positivity failed (at most 32 kept).
    pub violations: Vec<(f64, f64, f64, f64, f64)>,
    pub violation_count: usize,
}

impl ParabolicityReport {
    pub fn is_parabolic(&self) -> bool {
        self.violation_count == 0 && self.sampled > 0
    }
}

/// Sample dF~/dq by central differences over the grid, restricted to the
/// validity predicate, and report the range and any positivity violations.
pub fn check_parabolicity(spec: &ProblemSpec, grid: &GridBox) -> Result<ParabolicityReport> {
    let ft = spec.ftilde()?;
    if grid.is_empty() {
        return Err(SturmError::InvalidParameter("empty sampling grid".into()));
    }
    let mut report = ParabolicityReport {
        min_dq: f64::INFINITY,
        max_dq: f64::NEG_INFINITY,
        sampled: 0,
        outside_domain: 0,
        violations: Vec::new(),
        violation_count: 0,
    };
    for &x in &GridBox::axis(grid.x) {
        for &u in &GridBox::axis(grid.u) {
            for &p in &GridBox::axis(grid.p) {
                for &q in &GridBox::axis(grid.q) {
                    let h = fd_step(q);
                    // The centered stencil must stay inside the validity domain.
                    if !(ft.is_valid(x, u, p, q)
                        && ft.is_valid(x, u, p, q - h)
                        && ft.is_valid(x, u, p, q + h))
                    {
                        report.outside_domain += 1;
                        continue;
                    }
                    let dq = (ft.eval(x, u, p, q + h) - ft.eval(x, u, p, q - h)) / (2.0 * h);
                    report.sampled += 1;
                    report.min_dq = report.min_dq.min(dq);
                    report.max_dq = report.max_dq.max(dq);
                    if !(dq > 0.0) {
                        report.violation_count += 1;
                        if report.violations.len() < 32 {
                            report.violations.push((x, u, p, q, dq));
                        }
                    }
                }
            }
        }
    }
    if report.sampled == 0 {
        return Err(SturmError::EmptyDomain);
    }
    Ok(report)
}
