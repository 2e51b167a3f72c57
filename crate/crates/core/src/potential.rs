//! The potential `E(ξ̄)` whose critical points are the free-boundary systems.
//!
//! Every term of `E` is one of
//!
//! * a log term `−c·ln(F(upper/a) − F(lower/a))` with `c = k_i(u_{i+1} − u_i)`,
//!   where `upper` is a free boundary or `+∞` and `lower` a free boundary or `0`;
//! * a latent-heat term `d_i ξ_i²/4`;
//! * (Neumann only) the flux term `k_n a_n b_N √π F(ξ_n/a_n)`.
//!
//! Gradient and Hessian are assembled term by term in closed form. For
//! `P(x, y) = −ln(F(x) − F(y))` with `D = F(x) − F(y)`:
//!
//! ```text
//! P_xx = F'(x)·(F'(x) + (x/2)·D) / D²
//! P_yy = F'(y)·(F'(y) − (y/2)·D) / D²
//! P_xy = −F'(x)·F'(y) / D²
//! ```
//!
//! using `F'' = −(x/2)F'`; the chain rule through `x = ξ/a` adds `1/a²`. Each
//! log term couples at most two adjacent coordinates, so the Hessian is
//! tridiagonal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, Coord};
use crate::problem::{DirichletProblem, NeumannProblem};

/// Log arguments below this are treated as leaving the cone.
pub const MIN_LOG_ARGUMENT: f64 = 1e-300;

/// Free-boundary positions `ξ₁ > ξ₂ > … > ξ_n` in similarity variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreeBoundaries(Vec<f64>);

impl FreeBoundaries {
    pub fn new(xi: Vec<f64>) -> Self {
        FreeBoundaries(xi)
    }

    pub fn empty() -> Self {
        FreeBoundaries(Vec::new())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `ξ_i` for `1 ≤ i ≤ n`.
    pub fn xi(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    /// Max-norm distance to another point of the same dimension.
    pub fn distance(&self, other: &FreeBoundaries) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for FreeBoundaries {
    fn from(v: Vec<f64>) -> Self {
        FreeBoundaries(v)
    }
}

/// Which cone the coordinates live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cone {
    /// `ξ₁ > … > ξ_n > 0`.
    Open,
    /// `ξ₁ > … > ξ_n ≥ 0`.
    ClosedAtZero,
}

impl Cone {
    /// Strict ordering, finiteness and the sign condition on the last entry.
    pub fn contains(self, xi: &[f64]) -> bool {
        self.contains_with_margin(xi, 0.0)
    }

    /// Gaps and the last coordinate at least `margin`; a zero margin means the
    /// plain cone condition.
    pub fn contains_with_margin(self, xi: &[f64], margin: f64) -> bool {
        if xi.iter().any(|x| !x.is_finite()) {
            return false;
        }
        let gaps_ok = xi.windows(2).all(|w| {
            let gap = w[0] - w[1];
            if margin > 0.0 { gap >= margin } else { gap > 0.0 }
        });
        let last_ok = match xi.last() {
            None => true,
            Some(&last) if margin > 0.0 => last >= margin,
            Some(&last) => match self {
                Cone::Open => last > 0.0,
                Cone::ClosedAtZero => last >= 0.0,
            },
        };
        gaps_ok && last_ok
    }
}

/// `E`, `∇E` and `D²E` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

impl PotentialReport {
    pub fn grad_norm(&self) -> f64 {
        self.gradient.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Upper {
    Infinity,
    Var(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Lower {
    Zero,
    Var(usize),
}

#[derive(Debug, Clone, PartialEq)]
struct LogTerm {
    coef: f64,
    diffusivity: f64,
    upper: Upper,
    lower: Lower,
}

#[derive(Debug, Clone, PartialEq)]
struct FluxTerm {
    /// `k_n a_n b_N √π`.
    coef: f64,
    diffusivity: f64,
    var: usize,
}

/// A potential ready for evaluation: the Dirichlet `E` or the
/// Neumann type-`n` potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    dim: usize,
    cone: Cone,
    log_terms: Vec<LogTerm>,
    latent: Vec<f64>,
    flux: Option<FluxTerm>,
}

impl Potential {
    /// Potential of the Dirichlet problem over the open cone in `ℝ^m`.
    pub fn dirichlet(problem: &DirichletProblem) -> Self {
        let p = problem.phases();
        let m = p.m();
        let mut log_terms = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let coef = p.k(i) * (problem.u_ext(i + 1) - p.u(i));
            // k₀(u₁ − u₀) vanishes exactly when u₀ = u₁; drop the term.
            if coef == 0.0 {
                continue;
            }
            log_terms.push(LogTerm {
                coef,
                diffusivity: p.a(i),
                upper: if i == 0 { Upper::Infinity } else { Upper::Var(i - 1) },
                lower: if i == m { Lower::Zero } else { Lower::Var(i) },
            });
        }
        Potential {
            dim: m,
            cone: Cone::Open,
            log_terms,
            latent: p.latent_heats().to_vec(),
            flux: None,
        }
    }

    /// Potential for Neumann solutions of type `n` (`1 ≤ n ≤ m`) over the
    /// closed cone `ξ₁ > … > ξ_n ≥ 0`.
    pub fn neumann(problem: &NeumannProblem, n: usize) -> Result<Self> {
        let p = problem.phases();
        if n == 0 || n > p.m() {
            return Err(Error::TypeOutOfRange { n, m: p.m() });
        }
        let mut log_terms = Vec::with_capacity(n);
        for i in 0..n {
            let coef = p.k(i) * (p.u(i + 1) - p.u(i));
            if coef == 0.0 {
                continue;
            }
            log_terms.push(LogTerm {
                coef,
                diffusivity: p.a(i),
                upper: if i == 0 { Upper::Infinity } else { Upper::Var(i - 1) },
                lower: Lower::Var(i),
            });
        }
        Ok(Potential {
            dim: n,
            cone: Cone::ClosedAtZero,
            log_terms,
            latent: p.latent_heats()[..n].to_vec(),
            flux: Some(FluxTerm {
                coef: p.k(n) * p.a(n) * problem.b_n() * kernel::sqrt_pi(),
                diffusivity: p.a(n),
                var: n - 1,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cone(&self) -> Cone {
        self.cone
    }

    fn check_point(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: xi.len() });
        }
        if !self.cone.contains(xi) {
            return Err(Error::ConeViolation(format!(
                "{xi:?} is not in the cone {:?}",
                self.cone
            )));
        }
        Ok(())
    }

    fn log_argument(&self, term: &LogTerm, xi: &[f64]) -> Result<(Coord, f64, f64)> {
        let a = term.diffusivity;
        let x = match term.upper {
            Upper::Infinity => Coord::Infinity,
            Upper::Var(j) => Coord::Finite(xi[j] / a),
        };
        let y = match term.lower {
            Lower::Zero => 0.0,
            Lower::Var(j) => xi[j] / a,
        };
        let diff = kernel::f_diff_raw(x, y);
        if !(diff >= MIN_LOG_ARGUMENT) {
            return Err(Error::ConeViolation(format!(
                "log argument F({x}) − F({y}) = {diff:e} underflows at {xi:?}"
            )));
        }
        Ok((x, y, diff))
    }

    /// `E(ξ̄)` only.
    pub fn value(&self, xi: &[f64]) -> Result<f64> {
        self.check_point(xi)?;
        let mut value = 0.0;
        for term in &self.log_terms {
            let (_, _, diff) = self.log_argument(term, xi)?;
            value -= term.coef * diff.ln();
        }
        for (d, x) in self.latent.iter().zip(xi) {
            value += 0.25 * d * x * x;
        }
        if let Some(flux) = &self.flux {
            value += flux.coef * kernel::f_raw(xi[flux.var] / flux.diffusivity);
        }
        Ok(value)
    }

    /// Value, analytic gradient and analytic Hessian.
    pub fn evaluate(&self, xi: &[f64]) -> Result<PotentialReport> {
        self.check_point(xi)?;
        let n = self.dim;
        let mut value = 0.0;
        let mut gradient = vec![0.0; n];
        let mut hessian = DMatrix::zeros(n, n);

        for term in &self.log_terms {
            let (x, y, diff) = self.log_argument(term, xi)?;
            let c = term.coef;
            let a = term.diffusivity;
            value -= c * diff.ln();
            let fpx = kernel::fp_coord_raw(x);
            let fpy = kernel::fp_raw(y);
            let d2 = diff * diff;
            let scale = c / (a * a);
            if let (Upper::Var(i), Coord::Finite(xv)) = (term.upper, x) {
                gradient[i] -= c * fpx / (a * diff);
                hessian[(i, i)] += scale * fpx * (fpx + 0.5 * xv * diff) / d2;
            }
            if let Lower::Var(j) = term.lower {
                gradient[j] += c * fpy / (a * diff);
                hessian[(j, j)] += scale * fpy * (fpy - 0.5 * y * diff) / d2;
                if let Upper::Var(i) = term.upper {
                    let off = -scale * fpx * fpy / d2;
                    hessian[(i, j)] += off;
                    hessian[(j, i)] += off;
                }
            }
        }
        for (i, (d, x)) in self.latent.iter().zip(xi).enumerate() {
            value += 0.25 * d * x * x;
            gradient[i] += 0.5 * d * x;
            hessian[(i, i)] += 0.5 * d;
        }
        if let Some(flux) = &self.flux {
            let a = flux.diffusivity;
            let s = xi[flux.var] / a;
            value += flux.coef * kernel::f_raw(s);
            gradient[flux.var] += flux.coef * kernel::fp_raw(s) / a;
            hessian[(flux.var, flux.var)] += flux.coef * kernel::fpp_raw(s) / (a * a);
        }
        Ok(PotentialReport { value, gradient, hessian })
    }
}

/// `E`, `∇E`, `D²E` for the Dirichlet problem at a point of the open cone.
pub fn eval_dirichlet_potential(
    problem: &DirichletProblem,
    xi: &FreeBoundaries,
) -> Result<PotentialReport> {
    Potential::dirichlet(problem).evaluate(xi.as_slice())
}

/// `E`, `∇E`, `D²E` for Neumann type `n` at a point of the closed cone.
pub fn eval_neumann_potential(
    problem: &NeumannProblem,
    type_n: usize,
    xi: &FreeBoundaries,
) -> Result<PotentialReport> {
    Potential::neumann(problem, type_n)?.evaluate(xi.as_slice())
}

/// Left-hand sides of the Dirichlet free-boundary system, written out term
/// by term in the form of the interface conditions (not via the potential).
pub fn dirichlet_residuals(problem: &DirichletProblem, xi: &FreeBoundaries) -> Result<Vec<f64>> {
    let m = problem.m();
    let xs = xi.as_slice();
    check_cone(xs, m, Cone::Open)?;
    let p = problem.phases();
    let bound = |i: usize| -> Coord {
        if i == 0 {
            Coord::Infinity
        } else if i == m + 1 {
            Coord::Finite(0.0)
        } else {
            Coord::Finite(xs[i - 1])
        }
    };
    (1..=m)
        .map(|i| {
            let xi_i = xs[i - 1];
            let warm = warm_side_flux(p.k(i), problem.u_ext(i + 1) - p.u(i), p.a(i), xi_i, bound(i + 1));
            let cold = cold_side_flux(p.k(i - 1), p.u(i) - p.u(i - 1), p.a(i - 1), xi_i, bound(i - 1));
            Ok(p.d(i) * xi_i / 2.0 + warm? - cold?)
        })
        .collect()
}

/// Left-hand sides of the Neumann type-`n` system: interface conditions for
/// `i < n` and the flux-driven condition at `i = n`.
pub fn neumann_residuals(problem: &NeumannProblem, n: usize, xi: &FreeBoundaries) -> Result<Vec<f64>> {
    let p = problem.phases();
    if n == 0 || n > p.m() {
        return Err(Error::TypeOutOfRange { n, m: p.m() });
    }
    let xs = xi.as_slice();
    check_cone(xs, n, Cone::ClosedAtZero)?;
    let bound = |i: usize| -> Coord {
        if i == 0 { Coord::Infinity } else { Coord::Finite(xs[i - 1]) }
    };
    (1..=n)
        .map(|i| {
            let xi_i = xs[i - 1];
            let warm = if i < n {
                warm_side_flux(p.k(i), p.u(i + 1) - p.u(i), p.a(i), xi_i, bound(i + 1))?
            } else {
                p.k(n) * problem.b_n() * kernel::sqrt_pi() * kernel::fp_raw(xi_i / p.a(n))
            };
            let cold = cold_side_flux(p.k(i - 1), p.u(i) - p.u(i - 1), p.a(i - 1), xi_i, bound(i - 1))?;
            Ok(p.d(i) * xi_i / 2.0 + warm - cold)
        })
        .collect()
}

fn check_cone(xs: &[f64], dim: usize, cone: Cone) -> Result<()> {
    if xs.len() != dim {
        return Err(Error::Dimension { expected: dim, got: xs.len() });
    }
    if !cone.contains(xs) {
        return Err(Error::ConeViolation(format!("{xs:?} is not in the cone {cone:?}")));
    }
    Ok(())
}

/// `k (Δu) F'(ξ/a) / (a (F(ξ_next/a) − F(ξ/a)))`, the warm-side term at `ξ`
/// where `ξ_next < ξ` is the inner end of the phase.
fn warm_side_flux(k: f64, du: f64, a: f64, xi: f64, inner: Coord) -> Result<f64> {
    let inner = match inner {
        Coord::Finite(v) => v,
        Coord::Infinity => unreachable!("inner end of a phase is finite"),
    };
    let denom = -kernel::f_diff_raw(Coord::Finite(xi / a), inner / a);
    if !(denom.abs() >= MIN_LOG_ARGUMENT) {
        return Err(Error::ConeViolation(format!("degenerate phase at ξ = {xi}")));
    }
    Ok(k * du * kernel::fp_raw(xi / a) / (a * denom))
}

/// `k (Δu) F'(ξ/a) / (a (F(ξ/a) − F(ξ_prev/a)))`, the cold-side term at `ξ`
/// where `ξ_prev > ξ` (possibly `+∞`) is the outer end of the phase.
fn cold_side_flux(k: f64, du: f64, a: f64, xi: f64, outer: Coord) -> Result<f64> {
    if du == 0.0 {
        return Ok(0.0);
    }
    let denom = -kernel::f_diff_raw(outer.scaled(a), xi / a);
    if !(denom.abs() >= MIN_LOG_ARGUMENT) {
        return Err(Error::ConeViolation(format!("degenerate phase at ξ = {xi}")));
    }
    Ok(k * du * kernel::fp_raw(xi / a) / (a * denom))
}
