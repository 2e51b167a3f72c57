//! Damped Newton minimization of the potential on its cone, and the
//! boundary/interior case split for Neumann solutions of a given type.

use log::{debug, trace};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel;
use crate::potential::{FreeBoundaries, Potential};
use crate::problem::{DirichletProblem, NeumannProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Stop once `‖∇E‖∞ ≤ relative_tolerance · (1 + ‖∇E(start)‖∞)`.
    pub relative_tolerance: f64,
    /// Upper cap on the stopping tolerance.
    pub absolute_cap: f64,
    /// Minimum gap between trial coordinates and minimum last coordinate.
    pub margin: f64,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 200,
            relative_tolerance: 1e-12,
            absolute_cap: 1e-10,
            margin: 1e-14,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeResult {
    pub point: FreeBoundaries,
    pub value: f64,
    /// Max-norm of the gradient at `point` (of the reduced gradient for a
    /// boundary result).
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Neumann only: the minimum sits on the face `ξ_n = 0`.
    pub on_boundary: bool,
    /// `E` at the start and after every accepted step.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

/// Newton iteration from an interior starting point.
pub fn minimize_interior(potential: &Potential, initial: &FreeBoundaries) -> Result<MinimizeResult> {
    minimize_interior_with(potential, initial, &MinimizeOptions::default())
}

pub fn minimize_interior_with(
    potential: &Potential,
    initial: &FreeBoundaries,
    opts: &MinimizeOptions,
) -> Result<MinimizeResult> {
    let cone = potential.cone();
    let mut x = initial.as_slice().to_vec();
    if !cone.contains_with_margin(&x, opts.margin) {
        return Err(Error::ConeViolation(format!(
            "starting point {x:?} is not strictly inside the cone"
        )));
    }
    let mut report = potential.evaluate(&x)?;
    let tolerance = (opts.relative_tolerance * (1.0 + report.grad_norm())).min(opts.absolute_cap);
    let mut trace = vec![report.value];

    for iteration in 0..=opts.max_iterations {
        let grad_norm = report.grad_norm();
        trace!("newton iter {iteration}: E = {:e}, |g| = {grad_norm:e}", report.value);
        if grad_norm <= tolerance {
            debug!("converged in {iteration} iterations, |g| = {grad_norm:e}");
            return Ok(MinimizeResult {
                point: FreeBoundaries::new(x),
                value: report.value,
                grad_norm,
                iterations: iteration,
                converged: true,
                on_boundary: false,
                trace,
            });
        }
        if iteration == opts.max_iterations {
            break;
        }

        let chol = report
            .hessian
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite { point: x.clone() })?;
        let neg_grad = nalgebra::DVector::from_iterator(x.len(), report.gradient.iter().map(|g| -g));
        let step = chol.solve(&neg_grad);
        let slope: f64 = report.gradient.iter().zip(step.iter()).map(|(g, p)| g * p).sum();

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, p)| xi + t * p).collect();
            if cone.contains_with_margin(&trial, opts.margin) {
                if let Ok(value) = potential.value(&trial) {
                    if value <= report.value + opts.armijo * t * slope {
                        accepted = Some(trial);
                        break;
                    }
                    // Near the minimum the decrease drops below rounding in
                    // E; fall back to requiring a smaller gradient.
                    let noise = 16.0 * f64::EPSILON * report.value.abs().max(1.0);
                    if value <= report.value + noise {
                        let r = potential.evaluate(&trial)?;
                        if r.grad_norm() < grad_norm {
                            accepted = Some(trial);
                            break;
                        }
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(trial) => {
                x = trial;
                report = potential.evaluate(&x)?;
                trace.push(report.value);
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iteration,
                    grad_norm,
                    last: x,
                })
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        grad_norm: report.grad_norm(),
        last: x,
    })
}

/// `ξ_i = c·(n + 1 − i)·max a_i` with `c = 1`, rescaled until `E` is finite.
pub fn initial_guess(potential: &Potential, max_diffusivity: f64) -> Result<FreeBoundaries> {
    let n = potential.dim();
    let at = |c: f64| -> Vec<f64> { (1..=n).map(|i| c * (n + 1 - i) as f64 * max_diffusivity).collect() };
    let mut c = 1.0;
    for _ in 0..12 {
        if potential.value(&at(c)).is_ok() {
            return Ok(at(c).into());
        }
        c *= 2.0;
    }
    // Doubling only helps when the guess hugs the origin; shrink otherwise.
    c = 0.5;
    for _ in 0..60 {
        if potential.value(&at(c)).is_ok() {
            return Ok(at(c).into());
        }
        c *= 0.5;
    }
    Err(Error::ConeViolation("no finite starting point found".to_string()))
}

/// Uniformly random point of the open cone: gaps drawn from
/// `[0.05, 1.5]·scale`, accumulated from the origin.
pub fn random_cone_point<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> FreeBoundaries {
    let mut xi = vec![0.0; n];
    let mut acc = 0.0;
    for slot in xi.iter_mut().rev() {
        acc += scale * rng.random_range(0.05..1.5);
        *slot = acc;
    }
    xi.into()
}

fn max_diffusivity(a: &[f64]) -> f64 {
    a.iter().copied().fold(0.0, f64::max)
}

/// Minimize the Dirichlet potential from the default starting point.
pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<MinimizeResult> {
    let potential = Potential::dirichlet(problem);
    let start = initial_guess(&potential, max_diffusivity(problem.phases().diffusivities()))?;
    minimize_interior(&potential, &start)
}

/// Minimize the Dirichlet potential from a caller-supplied starting point.
pub fn solve_dirichlet_from(problem: &DirichletProblem, start: &FreeBoundaries) -> Result<MinimizeResult> {
    minimize_interior(&Potential::dirichlet(problem), start)
}

/// The decisive boundary test for Neumann type `n`.
///
/// `reduced` holds the minimizer `(ξ₁⁰, …, ξ_{n−1}⁰)` of the Dirichlet
/// problem truncated at `n − 1` with `u_D = u_n`. The derivative of the
/// type-`n` potential along `ξ_n` at `(reduced, 0)` is
/// `reduced_flux + boundary_flux`; a non-negative value puts the minimum on
/// the face `ξ_n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTest {
    pub n: usize,
    pub reduced: FreeBoundaries,
    pub reduced_grad_norm: f64,
    /// `k_{n−1}(u_n − u_{n−1}) / (√π a_{n−1} F(ξ_{n−1}⁰/a_{n−1}))`.
    pub reduced_flux: f64,
    /// `k_n b_N`.
    pub boundary_flux: f64,
    pub value: f64,
    pub boundary_case: bool,
}

/// Relative tie band for the sign of the boundary test.
pub const BOUNDARY_TIE: f64 = 1e-15;

/// Solve the reduced problem and evaluate the boundary test for type `n`.
pub fn boundary_test(problem: &NeumannProblem, n: usize) -> Result<BoundaryTest> {
    let p = problem.phases();
    if n == 0 || n > p.m() {
        return Err(Error::TypeOutOfRange { n, m: p.m() });
    }
    let (reduced, reduced_grad_norm, f_outer) = if n == 1 {
        (FreeBoundaries::empty(), 0.0, 1.0)
    } else {
        let red = DirichletProblem::new(p.truncated(n - 1)?, p.u(n))?;
        let r = solve_dirichlet(&red)?;
        let f = kernel::f_raw(r.point.xi(n - 1) / p.a(n - 1));
        (r.point, r.grad_norm, f)
    };
    let reduced_flux = p.k(n - 1) * (p.u(n) - p.u(n - 1)) / (kernel::sqrt_pi() * p.a(n - 1) * f_outer);
    let boundary_flux = p.k(n) * problem.b_n();
    let value = reduced_flux + boundary_flux;
    let band = BOUNDARY_TIE * reduced_flux.abs().max(boundary_flux.abs());
    Ok(BoundaryTest {
        n,
        reduced,
        reduced_grad_norm,
        reduced_flux,
        boundary_flux,
        value,
        boundary_case: value >= -band,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannMinimum {
    pub result: MinimizeResult,
    pub test: BoundaryTest,
}

/// Minimum of the type-`n` Neumann potential on the closed cone.
///
/// The face `ξ_n = 0` is handled by reduction: the minimum lies there iff the
/// reduced Dirichlet minimizer satisfies the boundary test. Otherwise the
/// minimum is interior and Newton runs on the full potential.
pub fn minimize_neumann(problem: &NeumannProblem, n: usize) -> Result<NeumannMinimum> {
    let test = boundary_test(problem, n)?;
    let potential = Potential::neumann(problem, n)?;
    if test.boundary_case {
        let mut point = test.reduced.as_slice().to_vec();
        point.push(0.0);
        let value = potential.value(&point)?;
        let result = MinimizeResult {
            point: point.into(),
            value,
            grad_norm: test.reduced_grad_norm,
            iterations: 0,
            converged: true,
            on_boundary: true,
            trace: vec![value],
        };
        return Ok(NeumannMinimum { result, test });
    }
    let start = initial_guess(&potential, max_diffusivity(problem.phases().diffusivities()))?;
    let result = minimize_interior(&potential, &start)?;
    Ok(NeumannMinimum { result, test })
}
