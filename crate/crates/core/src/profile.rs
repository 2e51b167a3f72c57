//! Piecewise self-similar temperature profiles `u(ξ)`, `ξ = x/√t`.
//!
//! On each phase the profile is `C₁·F(ξ/a_i) + C₂`. Segments are stored from
//! the outermost phase (`ξ > ξ₁`) inwards to the boundary `ξ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{self, Coord};
use crate::potential::{Cone, FreeBoundaries};
use crate::problem::{DirichletProblem, NeumannProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Dirichlet,
    Neumann { n: usize },
}

/// One phase of the profile on `inner ≤ ξ ≤ outer`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub phase: usize,
    pub diffusivity: f64,
    pub outer: Coord,
    pub inner: f64,
    pub u_outer: f64,
    pub u_inner: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Segment {
    fn new(phase: usize, diffusivity: f64, outer: Coord, inner: f64, u_outer: f64, c1: f64) -> Self {
        let c2 = u_outer - c1 * kernel::f_coord_raw(outer.scaled(diffusivity));
        let mut seg = Segment { phase, diffusivity, outer, inner, u_outer, u_inner: u_outer, c1, c2 };
        seg.u_inner = seg.value(inner);
        seg
    }

    /// Segment between two known temperatures (interpolating form).
    fn interpolating(phase: usize, a: f64, outer: Coord, inner: f64, u_outer: f64, u_inner: f64) -> Self {
        let c1 = if u_inner == u_outer {
            0.0
        } else {
            -(u_inner - u_outer) / kernel::f_diff_raw(outer.scaled(a), inner / a)
        };
        let mut seg = Segment::new(phase, a, outer, inner, u_outer, c1);
        seg.u_inner = u_inner;
        seg
    }

    /// The segment formula at `ξ`, extended analytically past its ends.
    pub fn value(&self, xi: f64) -> f64 {
        self.u_outer + self.offset(xi)
    }

    /// `u(ξ) − u_outer`, computed without forming `u` first.
    pub fn offset(&self, xi: f64) -> f64 {
        if self.c1 == 0.0 {
            return 0.0;
        }
        let a = self.diffusivity;
        -self.c1 * kernel::f_diff_raw(self.outer.scaled(a), xi / a)
    }

    /// `u'(ξ) = C₁ F'(ξ/a)/a`.
    pub fn derivative(&self, xi: f64) -> f64 {
        self.c1 * kernel::fp_raw(xi / self.diffusivity) / self.diffusivity
    }

    /// `u''(ξ) = C₁ F''(ξ/a)/a²`.
    pub fn second_derivative(&self, xi: f64) -> f64 {
        let a = self.diffusivity;
        self.c1 * kernel::fpp_raw(xi / a) / (a * a)
    }

    pub fn contains(&self, xi: f64) -> bool {
        xi >= self.inner && xi <= self.outer.to_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityProfile {
    #[serde(flatten)]
    pub kind: ProfileKind,
    /// `ξ₁ > … > ξ_n`; the sentinels `+∞` and `0` are implicit.
    pub boundaries: FreeBoundaries,
    pub segments: Vec<Segment>,
}

impl SimilarityProfile {
    /// `u(ξ)` for `ξ ≥ 0`.
    pub fn evaluate(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) {
            return Err(Error::Domain(format!("profile needs ξ ≥ 0, got {xi}")));
        }
        if xi == f64::INFINITY {
            return Ok(self.segments[0].u_outer);
        }
        let seg = &self.segments[self.segment_index(xi)];
        if xi == seg.inner {
            return Ok(seg.u_inner);
        }
        Ok(seg.value(xi))
    }

    /// Index of the segment containing `ξ`; a point exactly on `ξ_i` belongs
    /// to the colder (outer) side.
    pub fn segment_index(&self, xi: f64) -> usize {
        self.boundaries.as_slice().partition_point(|&b| b > xi)
    }

    /// `u(t, x) = u(x/√t)`.
    pub fn evaluate_physical(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("physical evaluation needs t > 0, got {t}")));
        }
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("physical evaluation needs x ≥ 0, got {x}")));
        }
        self.evaluate(x / t.sqrt())
    }

    /// Positions `x_i(t) = ξ_i √t` of the free boundaries.
    pub fn front_positions(&self, t: f64) -> Vec<f64> {
        self.boundaries.as_slice().iter().map(|xi| xi * t.sqrt()).collect()
    }

    /// `u(0)`.
    pub fn surface_temperature(&self) -> f64 {
        self.segments.last().map(|s| s.u_inner).unwrap_or(f64::NAN)
    }

    /// `u(+∞)`.
    pub fn far_field(&self) -> f64 {
        self.segments[0].u_outer
    }

    /// `u'(0)` from the innermost segment.
    pub fn surface_gradient(&self) -> f64 {
        self.segments.last().expect("profile has a segment").derivative(0.0)
    }

    /// One-sided derivatives at `ξ_i` (`1 ≤ i ≤ n`): `(warm, cold)`, where the
    /// warm side is the smaller-`ξ` phase `i` and the cold side phase `i − 1`.
    pub fn one_sided_derivatives(&self, i: usize) -> (f64, f64) {
        let xi = self.boundaries.xi(i);
        (self.segments[i].derivative(xi), self.segments[i - 1].derivative(xi))
    }

    /// Number of free boundaries.
    pub fn transitions(&self) -> usize {
        self.boundaries.len()
    }
}

fn check_boundaries(xi: &FreeBoundaries, dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::Dimension { expected: dim, got: xi.len() });
    }
    if !Cone::Open.contains(xi.as_slice()) {
        return Err(Error::ConeViolation(format!("{:?} is not in the open cone", xi.as_slice())));
    }
    Ok(())
}

/// Profile of the Dirichlet problem from its free boundaries.
pub fn build_dirichlet_profile(problem: &DirichletProblem, xi: &FreeBoundaries) -> Result<SimilarityProfile> {
    let m = problem.m();
    check_boundaries(xi, m)?;
    let p = problem.phases();
    let segments = (0..=m)
        .map(|i| {
            let outer = if i == 0 { Coord::Infinity } else { Coord::Finite(xi.xi(i)) };
            let inner = if i == m { 0.0 } else { xi.xi(i + 1) };
            Segment::interpolating(i, p.a(i), outer, inner, p.u(i), problem.u_ext(i + 1))
        })
        .collect();
    Ok(SimilarityProfile { kind: ProfileKind::Dirichlet, boundaries: xi.clone(), segments })
}

/// Profile of a Neumann solution of type `n`; `xi` is empty for `n = 0`.
pub fn build_neumann_profile(problem: &NeumannProblem, n: usize, xi: &FreeBoundaries) -> Result<SimilarityProfile> {
    let p = problem.phases();
    if n > p.m() {
        return Err(Error::TypeOutOfRange { n, m: p.m() });
    }
    check_boundaries(xi, n)?;
    let flux = problem.b_n() * kernel::sqrt_pi();
    let mut segments = Vec::with_capacity(n + 1);
    for i in 0..n {
        let outer = if i == 0 { Coord::Infinity } else { Coord::Finite(xi.xi(i)) };
        segments.push(Segment::interpolating(i, p.a(i), outer, xi.xi(i + 1), p.u(i), p.u(i + 1)));
    }
    let outer = if n == 0 { Coord::Infinity } else { Coord::Finite(xi.xi(n)) };
    segments.push(Segment::new(n, p.a(n), outer, 0.0, p.u(n), p.a(n) * flux));
    Ok(SimilarityProfile { kind: ProfileKind::Neumann { n }, boundaries: xi.clone(), segments })
}
