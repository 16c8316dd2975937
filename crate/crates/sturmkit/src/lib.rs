//! sturmkit computes the global attractor of scalar one-dimensional parabolic
//! equations: all equilibria by a shooting method, their Morse indices and
//! pairwise zero numbers, the Fusco-Rocha permutation, and the resulting
//! heteroclinic connection graph, cross-validated by a method-of-lines time
//! stepper.

pub mod cli;
pub mod config;
pub mod connection;
pub mod eigen;
pub mod error;
pub mod invariants;
pub mod ode;
pub mod pipeline;
pub mod problem;
pub mod report;
pub mod shooting;
pub mod sim;
pub mod zeros;

pub use connection::{
    adjacent, blocked, build_connection_graph, is_between, BlockingVerdict, ConnectionGraph,
};
pub use error::{Result, SturmError};
pub use invariants::{
    build_sturm_data, fusco_rocha_permutation, morse_index, spectral_morse_oracle,
    zero_number_profiles, zero_number_shooting, InvariantOptions, SturmData,
};
pub use problem::{check_parabolicity, GridBox, ParabolicityReport, ProblemSpec};
pub use shooting::{
    find_equilibria, integrate_shoot, scan_curve, Equilibrium, ShootOptions, ShootingCurve,
    ShootTrajectory,
};
