//! Independent certification of computed solutions.
//!
//! Every check re-evaluates from the problem definition: fresh potential
//! evaluations, fresh finite-difference stencils, fresh solves from random
//! starting points. Nothing computed by the solver is trusted apart from the
//! point being certified. All thresholds live in [`Thresholds`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enthalpy::{compare_with_profile, GridBoundary};
use crate::error::Result;
use crate::kernel;
use crate::minimize::{boundary_test, minimize_interior, random_cone_point, solve_dirichlet, MinimizeResult, BOUNDARY_TIE};
use crate::neumann::{NeumannSolutionSet, TypeOutcome, TypeStatus};
use crate::potential::{dirichlet_residuals, neumann_residuals, FreeBoundaries, Potential};
use crate::problem::{DirichletProblem, EnthalpyPair, NeumannProblem};
use crate::profile::SimilarityProfile;

/// Pass/fail thresholds. Relative errors are defined next to the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Gradient vs. explicit interface residuals, absolute.
    pub gradient_identity: f64,
    /// Analytic vs. central-difference gradient, relative.
    pub gradient_fd: f64,
    /// Analytic vs. central-difference Hessian, entrywise relative.
    pub hessian_fd: f64,
    /// Interface residuals and flux balance at the solution, absolute.
    pub stefan_residual: f64,
    /// `a²u'' + (ξ/2)u'` by finite differences, relative.
    pub ode_residual: f64,
    /// Jump of the profile at the free boundaries, absolute.
    pub continuity: f64,
    /// `u(0) = u_D` or `u'(0) = b_N`, and `u(∞) = u₀`, absolute.
    pub boundary_condition: f64,
    /// Max-norm spread of minimizers from random starts.
    pub uniqueness: f64,
    /// Neumann solution vs. the Dirichlet re-solve with `u_D = u(0)`.
    pub duality: f64,
    /// Enthalpy oracle vs. profile, max-norm.
    pub oracle_linf: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    gradient_identity: 1e-12,
    gradient_fd: 1e-6,
    hessian_fd: 1e-4,
    stefan_residual: 1e-9,
    ode_residual: 1e-6,
    continuity: 1e-12,
    boundary_condition: 1e-10,
    uniqueness: 1e-8,
    duality: 1e-8,
    oracle_linf: 5e-2,
};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub starts: usize,
    /// Run the enthalpy oracle on this many cells.
    pub oracle_cells: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, starts: 5, oracle_cells: None }
    }
}

/// Oracle runs start from the profile at this time and stop at `ORACLE_T_END`.
pub const ORACLE_T_START: f64 = 0.25;
pub const ORACLE_T_END: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub gradient_identity_error: f64,
    pub gradient_fd_error: f64,
    pub hessian_fd_error: f64,
    pub hessian_positive_definite: bool,
    pub stefan_residual_max: f64,
    pub ode_residual_max: f64,
    pub continuity_error_max: f64,
    pub boundary_condition_error: f64,
    pub uniqueness_spread: f64,
    pub duality_error: Option<f64>,
    pub oracle_linf: Option<f64>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    fn empty() -> Self {
        VerificationReport {
            gradient_identity_error: 0.0,
            gradient_fd_error: 0.0,
            hessian_fd_error: 0.0,
            hessian_positive_definite: true,
            stefan_residual_max: 0.0,
            ode_residual_max: 0.0,
            continuity_error_max: 0.0,
            boundary_condition_error: 0.0,
            uniqueness_spread: 0.0,
            duality_error: None,
            oracle_linf: None,
            failures: Vec::new(),
            pass: false,
        }
    }

    fn finish(mut self) -> Self {
        let t = THRESHOLDS;
        let mut check = |name: &str, value: f64, limit: f64| {
            if !(value <= limit) {
                self.failures.push(format!("{name} = {value:e} exceeds {limit:e}"));
            }
        };
        check("gradient_identity_error", self.gradient_identity_error, t.gradient_identity);
        check("gradient_fd_error", self.gradient_fd_error, t.gradient_fd);
        check("hessian_fd_error", self.hessian_fd_error, t.hessian_fd);
        check("stefan_residual_max", self.stefan_residual_max, t.stefan_residual);
        check("ode_residual_max", self.ode_residual_max, t.ode_residual);
        check("continuity_error_max", self.continuity_error_max, t.continuity);
        check("boundary_condition_error", self.boundary_condition_error, t.boundary_condition);
        check("uniqueness_spread", self.uniqueness_spread, t.uniqueness);
        if let Some(d) = self.duality_error {
            check("duality_error", d, t.duality);
        }
        if let Some(o) = self.oracle_linf {
            check("oracle_linf", o, t.oracle_linf);
        }
        if !self.hessian_positive_definite {
            self.failures.push("Hessian is not positive definite".to_string());
        }
        self.pass = self.failures.is_empty();
        self
    }
}

/// Central-difference step for coordinate `i`, shrunk to stay in the cone.
fn fd_step(xi: &[f64], i: usize) -> f64 {
    let mut h = 1e-5 * xi[i].abs().max(1.0);
    if i > 0 {
        h = h.min(0.25 * (xi[i - 1] - xi[i]));
    }
    let below = if i + 1 < xi.len() { xi[i] - xi[i + 1] } else { xi[i] };
    h.min(0.25 * below)
}

/// Max relative error of the analytic gradient against central differences
/// of `E`, normalised by `max(1, |g_i|)`.
pub fn gradient_fd_error(potential: &Potential, xi: &[f64]) -> Result<f64> {
    let report = potential.evaluate(xi)?;
    let mut worst: f64 = 0.0;
    for i in 0..xi.len() {
        let h = fd_step(xi, i);
        let mut plus = xi.to_vec();
        let mut minus = xi.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let fd = (potential.value(&plus)? - potential.value(&minus)?) / (2.0 * h);
        let g = report.gradient[i];
        worst = worst.max((fd - g).abs() / g.abs().max(1.0));
    }
    Ok(worst)
}

/// Max entrywise relative error of the analytic Hessian against central
/// differences of the analytic gradient. Entries are compared relative to
/// `max(|H_ij|, 1e-6·max|H|)`.
pub fn hessian_fd_error(potential: &Potential, xi: &[f64]) -> Result<f64> {
    let report = potential.evaluate(xi)?;
    let n = xi.len();
    let floor = 1e-6 * report.hessian.amax();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let h = fd_step(xi, j);
        let mut plus = xi.to_vec();
        let mut minus = xi.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let gp = potential.evaluate(&plus)?.gradient;
        let gm = potential.evaluate(&minus)?.gradient;
        for i in 0..n {
            let fd = (gp[i] - gm[i]) / (2.0 * h);
            let exact = report.hessian[(i, j)];
            worst = worst.max((fd - exact).abs() / exact.abs().max(floor));
        }
    }
    Ok(worst)
}

/// Max relative residual of `a²u'' + (ξ/2)u' = 0` on every non-constant
/// segment, from fourth-order central differences of the segment offset at `samples`
/// interior points. The residual is normalised by
/// `a²|u''| + (ξ/2)|u'| + a|u'|`.
pub fn ode_residual(profile: &SimilarityProfile, samples: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for seg in &profile.segments {
        if seg.c1 == 0.0 {
            continue;
        }
        let a = seg.diffusivity;
        let hi = seg.outer.to_f64().min(seg.inner + 8.0 * a);
        // Stencils may reach past the segment ends; the segment formula is analytic there.
        let h = 2e-3 * a;
        for s in 0..samples {
            let xi = seg.inner + (hi - seg.inner) * (s as f64 + 0.5) / samples as f64;
            let f = |j: f64| seg.offset(xi + j * h);
            let (f2m, fm, f0, fp, f2p) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
            let d1 = (f2m - 8.0 * fm + 8.0 * fp - f2p) / (12.0 * h);
            let d2 = (-f2m + 16.0 * fm - 30.0 * f0 + 16.0 * fp - f2p) / (12.0 * h * h);
            let scale = a * a * d2.abs() + 0.5 * xi * d1.abs() + a * d1.abs();
            if scale > 0.0 {
                worst = worst.max((a * a * d2 + 0.5 * xi * d1).abs() / scale);
            }
        }
    }
    worst
}

/// Max jump of the segment formulas at the free boundaries and their
/// distance from the transition temperatures.
pub fn continuity_error(profile: &SimilarityProfile) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..profile.segments.len() {
        let xi = profile.segments[i].outer.to_f64();
        let cold = profile.segments[i - 1].value(xi);
        let warm = profile.segments[i].value(xi);
        let target = profile.segments[i].u_outer;
        worst = worst.max((cold - target).abs()).max((warm - target).abs());
    }
    worst
}

/// `d_iξ_i/2 + k_i u'(ξ_i, warm) − k_{i−1} u'(ξ_i, cold)` from the analytic
/// one-sided derivatives of the profile.
pub fn flux_balance(profile: &SimilarityProfile, k: &[f64], d: &[f64]) -> Vec<f64> {
    (1..=profile.transitions())
        .map(|i| {
            let xi = profile.boundaries.xi(i);
            let (warm, cold) = profile.one_sided_derivatives(i);
            d[i - 1] * xi / 2.0 + k[i] * warm - k[i - 1] * cold
        })
        .collect()
}

/// `u'(0)` by a third-order one-sided difference of the innermost segment.
pub fn surface_gradient_fd(profile: &SimilarityProfile) -> f64 {
    let seg = profile.segments.last().expect("profile has a segment");
    let h = 1e-3 * seg.diffusivity.min(seg.outer.to_f64());
    let f = |j: f64| seg.offset(j * h);
    (-11.0 * f(0.0) + 18.0 * f(1.0) - 9.0 * f(2.0) + 2.0 * f(3.0)) / (6.0 * h)
}

fn far_field_error(profile: &SimilarityProfile) -> Result<f64> {
    let outer = profile.boundaries.as_slice().first().copied().unwrap_or(0.0);
    let xi = outer + 50.0 * profile.segments[0].diffusivity;
    Ok((profile.evaluate(xi)? - profile.far_field()).abs())
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Checks shared by both problem kinds for a point of an interior minimum.
fn potential_checks(
    report: &mut VerificationReport,
    potential: &Potential,
    point: &[f64],
    residuals: &[f64],
    scale: f64,
    opts: &VerifyOptions,
) -> Result<()> {
    let fresh = potential.evaluate(point)?;
    report.gradient_identity_error = max_abs(residuals.iter().zip(&fresh.gradient).map(|(r, g)| r - g));
    report.gradient_fd_error = gradient_fd_error(potential, point)?;
    report.hessian_fd_error = hessian_fd_error(potential, point)?;
    report.hessian_positive_definite = fresh.hessian.clone().cholesky().is_some();
    report.stefan_residual_max = report.stefan_residual_max.max(max_abs(residuals.iter().copied()));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let here = FreeBoundaries::new(point.to_vec());
    for _ in 0..opts.starts {
        let start = random_cone_point(&mut rng, point.len(), scale);
        let spread = match minimize_interior(potential, &start) {
            Ok(r) => r.point.distance(&here),
            Err(_) => f64::INFINITY,
        };
        report.uniqueness_spread = report.uniqueness_spread.max(spread);
    }
    Ok(())
}

fn profile_checks(report: &mut VerificationReport, profile: &SimilarityProfile, k: &[f64], d: &[f64]) -> Result<()> {
    report.stefan_residual_max = report.stefan_residual_max.max(max_abs(flux_balance(profile, k, d)));
    report.ode_residual_max = ode_residual(profile, 100);
    report.continuity_error_max = continuity_error(profile);
    report.boundary_condition_error = report.boundary_condition_error.max(far_field_error(profile)?);
    Ok(())
}

/// Certify a Dirichlet solution.
pub fn verify_dirichlet(
    problem: &DirichletProblem,
    result: &MinimizeResult,
    profile: &SimilarityProfile,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::empty();
    let potential = Potential::dirichlet(problem);
    let point = result.point.as_slice();
    let residuals = match dirichlet_residuals(problem, &result.point) {
        Ok(r) => r,
        Err(e) => {
            report.failures.push(format!("point rejected: {e}"));
            return Ok(report.finish());
        }
    };
    let scale = max_a(problem.phases().diffusivities());
    potential_checks(&mut report, &potential, point, &residuals, scale, opts)?;
    let p = problem.phases();
    profile_checks(&mut report, profile, p.conductivities(), p.latent_heats())?;
    let surface = profile.segments.last().expect("profile has a segment").value(0.0);
    report.boundary_condition_error = report.boundary_condition_error.max((surface - problem.u_d()).abs());

    if let Some(cells) = opts.oracle_cells {
        let pair = crate::problem::build_enthalpy_pair(problem);
        let cmp = compare_with_profile(&pair, profile, GridBoundary::Dirichlet(problem.u_d()), cells, ORACLE_T_START, ORACLE_T_END)?;
        report.oracle_linf = Some(cmp.linf);
    }
    Ok(report.finish())
}

fn max_a(a: &[f64]) -> f64 {
    a.iter().copied().fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeVerification {
    pub n: usize,
    pub status: TypeStatus,
    /// Full certificate for an existing solution.
    pub report: Option<VerificationReport>,
    /// The deciding inequality, recomputed from scratch, gives the same verdict.
    pub witness_consistent: bool,
    pub classification_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannVerification {
    pub types: Vec<TypeVerification>,
    pub count: usize,
    pub pass: bool,
}

/// Certify an enumerated Neumann solution set.
pub fn verify_neumann(
    problem: &NeumannProblem,
    set: &NeumannSolutionSet,
    opts: &VerifyOptions,
) -> Result<NeumannVerification> {
    let mut types = Vec::with_capacity(set.outcomes.len());
    for outcome in &set.outcomes {
        types.push(verify_outcome(problem, outcome, opts)?);
    }
    let count_ok = set.count == set.outcomes.iter().filter(|o| o.exists()).count();
    let pass = count_ok
        && types.iter().all(|t| {
            t.witness_consistent && t.classification_ok && t.report.as_ref().map_or(true, |r| r.pass)
        });
    Ok(NeumannVerification { types, count: set.count, pass })
}

fn verify_outcome(problem: &NeumannProblem, outcome: &TypeOutcome, opts: &VerifyOptions) -> Result<TypeVerification> {
    let p = problem.phases();
    let n = outcome.n;
    let sqrt_pi = kernel::sqrt_pi();

    // Re-derive the verdict without looking at the stored witness.
    let fresh_exists = if n == 0 {
        p.u(0) != p.u(1) && -problem.b_n() * sqrt_pi <= (p.u(1) - p.u(0)) / p.a(0)
    } else {
        let test = boundary_test(problem, n)?;
        let interior = test.value < -BOUNDARY_TIE * test.reduced_flux.abs().max(test.boundary_flux.abs());
        interior && {
            let potential = Potential::neumann(problem, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
            let start = random_cone_point(&mut rng, n, max_a(p.diffusivities()));
            let xi = minimize_interior(&potential, &start)?.point;
            n == p.m() || -problem.b_n() * sqrt_pi * kernel::f_raw(xi.xi(n) / p.a(n)) <= (p.u(n + 1) - p.u(n)) / p.a(n)
        }
    };
    let witness_consistent = fresh_exists == outcome.exists();

    let Some(profile) = outcome.profile.as_ref().filter(|_| outcome.exists()) else {
        return Ok(TypeVerification {
            n,
            status: outcome.status,
            report: None,
            witness_consistent,
            classification_ok: outcome.profile.is_none(),
        });
    };

    let u0 = profile.segments.last().expect("profile has a segment").value(0.0);
    let upper = if n < p.m() { p.u(n + 1) } else { f64::INFINITY };
    let classification_ok = p.u(n) < u0 && u0 <= upper;

    let mut report = VerificationReport::empty();
    if n >= 1 {
        let xi = &profile.boundaries;
        let potential = Potential::neumann(problem, n)?;
        let residuals = neumann_residuals(problem, n, xi)?;
        potential_checks(&mut report, &potential, xi.as_slice(), &residuals, max_a(p.diffusivities()), opts)?;

        let truncated = p.truncated(n)?;
        let dual = DirichletProblem::new(truncated, u0)?;
        report.duality_error = Some(match solve_dirichlet(&dual) {
            Ok(r) => r.point.distance(xi),
            Err(_) => f64::INFINITY,
        });
    }
    let mut k = p.conductivities()[..=n].to_vec();
    k.truncate(n + 1);
    profile_checks(&mut report, profile, &k, &p.latent_heats()[..n])?;
    report.boundary_condition_error = report
        .boundary_condition_error
        .max((surface_gradient_fd(profile) - problem.b_n()).abs());

    if let Some(cells) = opts.oracle_cells {
        let pair = EnthalpyPair::from_phases(p);
        let cmp = compare_with_profile(&pair, profile, GridBoundary::NeumannFlux(problem.b_n()), cells, ORACLE_T_START, ORACLE_T_END)?;
        report.oracle_linf = Some(cmp.linf);
    }
    Ok(TypeVerification {
        n,
        status: outcome.status,
        report: Some(report.finish()),
        witness_consistent,
        classification_ok,
    })
}
