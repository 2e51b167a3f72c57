//! Self-similar solutions of the one-dimensional multi-phase Stefan problem
//! on the half line, with Dirichlet or Neumann data at `x = 0`.
//!
//! Solutions have the form `u(t, x) = U(x/√t)` with free boundaries at
//! `x = ξ_i √t`. The vector `ξ` is the unique minimizer of a strictly convex
//! potential on the cone `ξ₁ > … > ξ_m > 0`; the Neumann case splits into
//! one potential per solution type and may have several solutions or none.
//!
//! ```
//! use stefan_core::{build_dirichlet_profile, enumerate, solve_dirichlet, DirichletProblem, NeumannProblem, PhaseConfig};
//!
//! let phases = PhaseConfig::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0])?;
//! let p = DirichletProblem::new(phases.clone(), 2.0)?;
//! let sol = solve_dirichlet(&p)?;
//! let profile = build_dirichlet_profile(&p, &sol.point)?;
//! assert!((profile.evaluate(0.0)? - 2.0).abs() < 1e-12);
//!
//! let set = enumerate(&NeumannProblem::new(phases, -0.4)?)?;
//! assert_eq!(set.count, set.existing().count());
//! # Ok::<(), stefan_core::Error>(())
//! ```

pub mod enthalpy;
pub mod error;
pub mod kernel;
pub mod minimize;
pub mod neumann;
pub mod potential;
pub mod problem;
pub mod profile;
pub mod verify;

pub use enthalpy::{compare_with_profile, simulate, GridBoundary, GridRun, OracleComparison, SimulationResult};
pub use error::{Error, Result};
pub use kernel::{
    eval_f, eval_f_complement, eval_f_prime, eval_f_second, f_difference, inverse_f, inverse_f_complement, Coord,
    KernelValue,
};
pub use minimize::{
    boundary_test, minimize_interior, minimize_neumann, solve_dirichlet, BoundaryTest, MinimizeOptions,
    MinimizeResult,
};
pub use neumann::{check_type0, check_type_n, compute_kbar, enumerate, NeumannSolutionSet, Threshold, TypeOutcome, TypeStatus};
pub use potential::{
    dirichlet_residuals, eval_dirichlet_potential, eval_neumann_potential, neumann_residuals, Cone, FreeBoundaries,
    Potential, PotentialReport,
};
pub use problem::{
    build_enthalpy_pair, DirichletProblem, EnthalpyPair, NeumannProblem, PhaseConfig, Problem, ProblemDocument,
    Violation,
};
pub use profile::{build_dirichlet_profile, build_neumann_profile, ProfileKind, Segment, SimilarityProfile};
pub use verify::{
    verify_dirichlet, verify_neumann, NeumannVerification, Thresholds, TypeVerification, VerificationReport,
    VerifyOptions, THRESHOLDS,
};
