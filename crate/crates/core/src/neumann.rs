//! Which solution types exist for a Neumann problem.
//!
//! A decreasing self-similar solution has type `n` when `u_n < u(0) ≤ u_{n+1}`
//! (with `u_{m+1} = +∞`). Each type is decided independently:
//!
//! * type 0 exists iff `−b_N √π ≤ (u₁ − u₀)/a₀` (never when `u₀ = u₁`);
//! * type `n ≥ 1` needs the minimum of its potential to be interior
//!   ([`crate::minimize::boundary_test`]) and then `u(0) ≤ u_{n+1}`, i.e.
//!   `−b_N √π F(ξ_n/a_n) ≤ (u_{n+1} − u_n)/a_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel;
use crate::minimize::{boundary_test, minimize_neumann, BoundaryTest};
use crate::potential::FreeBoundaries;
use crate::problem::NeumannProblem;
use crate::profile::{build_neumann_profile, SimilarityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeStatus {
    Exists,
    FailsCon0,
    FailsBoundaryCaseB,
    FailsConn,
}

/// Both sides of the inequality that decided a type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub relation: String,
    pub lhs: f64,
    /// `None` stands for `+∞`.
    pub rhs: Option<f64>,
    pub holds: bool,
    /// The two sides are equal to the last bit.
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeOutcome {
    pub n: usize,
    pub status: TypeStatus,
    pub profile: Option<SimilarityProfile>,
    /// Minimizer of the type-`n` potential, when one was computed.
    pub minimizer: Option<FreeBoundaries>,
    pub threshold_kbar: Option<f64>,
    pub witness: Witness,
    /// The boundary test, for `n ≥ 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_test: Option<BoundaryTest>,
}

impl TypeOutcome {
    pub fn exists(&self) -> bool {
        self.status == TypeStatus::Exists
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannSolutionSet {
    #[serde(rename = "types")]
    pub outcomes: Vec<TypeOutcome>,
    pub count: usize,
}

impl NeumannSolutionSet {
    pub fn existing(&self) -> impl Iterator<Item = &TypeOutcome> {
        self.outcomes.iter().filter(|o| o.exists())
    }

    pub fn existing_types(&self) -> Vec<usize> {
        self.existing().map(|o| o.n).collect()
    }
}

/// Critical conductivity `k̄_n`: type `n` has no solution for `k_n ≤ k̄_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub value: f64,
    /// `n = 1` with `u₀ = u₁`: the numerator vanishes, so every `k₁ > 0`
    /// passes the boundary test.
    pub degenerate: bool,
}

fn kbar_from_test(problem: &NeumannProblem, test: &BoundaryTest) -> Threshold {
    let value = -test.reduced_flux / problem.b_n();
    Threshold { value, degenerate: value == 0.0 }
}

/// `k̄_n = −k_{n−1}(u_n − u_{n−1}) / (√π a_{n−1} b_N F(ξ_{n−1}⁰/a_{n−1}))`.
pub fn compute_kbar(problem: &NeumannProblem, n: usize) -> Result<Threshold> {
    Ok(kbar_from_test(problem, &boundary_test(problem, n)?))
}

/// Type 0: no free boundary, `u(ξ) = u₀ + a₀ b_N √π (F(ξ/a₀) − 1)`.
pub fn check_type0(problem: &NeumannProblem) -> Result<TypeOutcome> {
    let p = problem.phases();
    let lhs = -problem.b_n() * kernel::sqrt_pi();
    let rhs = (p.u(1) - p.u(0)) / p.a(0);
    let holds = !p.starts_at_transition() && lhs <= rhs;
    let witness = Witness {
        relation: "-b_N*sqrt(pi) <= (u_1 - u_0)/a_0".to_string(),
        lhs,
        rhs: Some(rhs),
        holds,
        equality: lhs == rhs,
    };
    let (status, profile) = if holds {
        (TypeStatus::Exists, Some(build_neumann_profile(problem, 0, &FreeBoundaries::empty())?))
    } else {
        (TypeStatus::FailsCon0, None)
    };
    Ok(TypeOutcome {
        n: 0,
        status,
        profile,
        minimizer: None,
        threshold_kbar: None,
        witness,
        boundary_test: None,
    })
}

/// Type `n ≥ 1`.
pub fn check_type_n(problem: &NeumannProblem, n: usize) -> Result<TypeOutcome> {
    let p = problem.phases();
    let m = p.m();
    if n == 0 {
        return check_type0(problem);
    }
    if n > m {
        return Err(Error::TypeOutOfRange { n, m });
    }
    let min = minimize_neumann(problem, n)?;
    let kbar = kbar_from_test(problem, &min.test);
    let threshold_kbar = Some(kbar.value);

    if min.result.on_boundary {
        let witness = Witness {
            relation: format!(
                "k_{}(u_{n} - u_{})/(sqrt(pi) a_{} F(xi_{}^0/a_{})) + k_{n} b_N >= 0",
                n - 1,
                n - 1,
                n - 1,
                n - 1,
                n - 1
            ),
            lhs: min.test.value,
            rhs: Some(0.0),
            holds: true,
            equality: min.test.value == 0.0,
        };
        return Ok(TypeOutcome {
            n,
            status: TypeStatus::FailsBoundaryCaseB,
            profile: None,
            minimizer: Some(min.result.point),
            threshold_kbar,
            witness,
            boundary_test: Some(min.test),
        });
    }

    let xi = min.result.point;
    let lhs = -problem.b_n() * kernel::sqrt_pi() * kernel::f_raw(xi.xi(n) / p.a(n));
    let rhs = (n < m).then(|| (p.u(n + 1) - p.u(n)) / p.a(n));
    let holds = rhs.map_or(true, |r| lhs <= r);
    let witness = Witness {
        relation: format!("-b_N*sqrt(pi)*F(xi_{n}/a_{n}) <= (u_{} - u_{n})/a_{n}", n + 1),
        lhs,
        rhs,
        holds,
        equality: rhs == Some(lhs),
    };
    let (status, profile) = if holds {
        (TypeStatus::Exists, Some(build_neumann_profile(problem, n, &xi)?))
    } else {
        (TypeStatus::FailsConn, None)
    };
    Ok(TypeOutcome {
        n,
        status,
        profile,
        minimizer: Some(xi),
        threshold_kbar,
        witness,
        boundary_test: Some(min.test),
    })
}

/// Decide every type `0..=m`.
pub fn enumerate(problem: &NeumannProblem) -> Result<NeumannSolutionSet> {
    let outcomes = (0..=problem.m())
        .map(|n| check_type_n(problem, n))
        .collect::<Result<Vec<_>>>()?;
    let count = outcomes.iter().filter(|o| o.exists()).count();
    Ok(NeumannSolutionSet { outcomes, count })
}
