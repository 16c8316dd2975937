use thiserror::Error;

/// Errors produced by the shooting / invariant / simulation pipeline.
#[derive(Debug, Error)]
pub enum SturmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluator returned a non-finite value at (x={x}, u={u}, p={p})")]
    NonFiniteEvaluation { x: f64, u: f64, p: f64 },

    #[error("no grid point satisfies the validity predicate of the evolution form")]
    EmptyDomain,

    #[error("trajectory escaped at x={x:.6} (|u|+|p| exceeded {bound:.3e}) shooting from a={a}")]
    TrajectoryEscape { a: f64, x: f64, bound: f64 },

    #[error("step size underflow at x={x:.6} shooting from a={a} (stiff or singular problem)")]
    Stiffness { a: f64, x: f64 },

    #[error("winding angle {theta} fell at or below -pi/2; integration is corrupt")]
    IntegrationCorrupt { theta: f64 },

    #[error(
        "winding angle {theta} lies within {band:.1e} of a multiple of pi/2; \
         Morse index / crossing case indeterminate (re-integrate at tighter tolerance)"
    )]
    IndeterminateAngle { theta: f64, band: f64 },

    #[error(
        "equilibrium at a={a} is not hyperbolic: |p_a(pi)| = {margin:.3e} <= {threshold:.1e}"
    )]
    NonHyperbolic { a: f64, margin: f64, threshold: f64 },

    #[error("cannot resolve distinct roots: {what} differ by {sep:.3e} < {tol:.1e}")]
    Resolution { what: String, sep: f64, tol: f64 },

    #[error("curve has a gap (escaped trajectories) inside the bracket [{lo}, {hi}]")]
    CurveGap { lo: f64, hi: f64 },

    #[error(
        "zero-number methods disagree for pair (e{j}, e{k}): profile oracle {profile}, \
         shooting formula {shooting} (r={r}); profile oracle is authoritative"
    )]
    MethodDisagreement { j: usize, k: usize, profile: i64, shooting: i64, r: i64 },

    #[error(
        "Morse index methods disagree for e{j}: angle formula {angle}, \
         spectral count {spectral}"
    )]
    MorseDisagreement { j: usize, angle: usize, spectral: usize },

    #[error(
        "profiles of e{j} and e{k} are too close: {fraction:.1}% of grid points below \
         the zero tolerance (duplicate root?)"
    )]
    ProfilesTooClose { j: usize, k: usize, fraction: f64 },

    #[error(
        "connection graph inconsistency (Wolfrum check) for pair (e{j}, e{k}): \
         direct adjacency {direct}, cascade closure {cascade}; z(e{j}-e{k})={z}, \
         i(e{j})={ij}, i(e{k})={ik}"
    )]
    Inconsistency {
        j: usize,
        k: usize,
        direct: bool,
        cascade: bool,
        z: i64,
        ij: usize,
        ik: usize,
    },

    #[error("validity predicate violated at t={t:.6}, x={x:.6} (u={u:.6}); F~ undefined there")]
    DomainViolation { t: f64, x: f64, u: f64 },

    #[error("simulation state became non-finite at t={t:.6}")]
    BlowUp { t: f64 },

    #[error(
        "probe from e{source_id} (mode {mode}, sign {sign:+}) unresolved after t={t_max}: \
         nearest equilibrium e{nearest} at sup-distance {distance:.3e}"
    )]
    UnresolvedProbe {
        source_id: usize,
        mode: usize,
        sign: i32,
        t_max: f64,
        nearest: usize,
        distance: f64,
    },

    #[error("{count} heteroclinic probe(s) unresolved")]
    ProbesUnresolved { count: usize },

    #[error("the evolution form F~ is required for this operation but absent from the problem")]
    MissingEvolutionForm,

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("{0}")]
    Config(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SturmError>;
