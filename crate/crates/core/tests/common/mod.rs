//! Test-only oracles, independent of the library's kernel: adaptive Simpson
//! quadrature for `F`, scalar bisection, and random problem generators.
#![allow(dead_code)]

use rand::Rng;
use stefan_core::{DirichletProblem, NeumannProblem, PhaseConfig};

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn density(s: f64) -> f64 {
    (-0.25 * s * s).exp() / SQRT_PI
}

/// `F(x) = (1/√π)∫₀^x e^{−s²/4} ds` by quadrature, on unit panels.
pub fn quad_f(x: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = 0.0;
    while lo < x {
        let hi = (lo + 1.0).min(x);
        total += simpson(&density, lo, hi, 1e-16);
        lo = hi;
    }
    total
}

/// `F` at sorted points, integrating only the increments between them.
pub fn quad_f_sorted(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let (mut at, mut total) = (0.0, 0.0);
    for &x in xs {
        assert!(x >= at, "points must be sorted");
        total += simpson(&density, at, x, 1e-18);
        at = x;
        out.push(total);
    }
    out
}

/// `1 − F(x)` by quadrature of the tail, accurate in relative terms.
pub fn quad_fc(x: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = x;
    while density(lo) > 1e-20 * total {
        let hi = lo + 0.5;
        total += simpson(&density, lo, hi, 1e-15 * density(lo));
        lo = hi;
    }
    total
}

/// Bisection for a sign change of `f` on `[lo, hi]`, down to adjacent floats.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    assert!(f_lo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// A random valid phase configuration with `m` transitions. With
/// probability 1/4 the start temperature coincides with `u₁`.
pub fn random_phases<R: Rng>(rng: &mut R, m: usize) -> PhaseConfig {
    let coincident = rng.random_bool(0.25);
    let mut u = vec![0.0];
    for i in 1..=m {
        let step = if i == 1 && coincident { 0.0 } else { rng.random_range(0.2..2.0) };
        u.push(u[i - 1] + step);
    }
    let a = (0..=m).map(|_| rng.random_range(0.5..2.0)).collect();
    let k = (0..=m).map(|_| rng.random_range(0.5..2.0)).collect();
    let d = (1..=m)
        .map(|i| if i == 1 && coincident { rng.random_range(0.5..2.0) } else { rng.random_range(0.0..2.0) })
        .collect();
    PhaseConfig::new(u, a, k, d).expect("generator produces valid phases")
}

pub fn random_dirichlet<R: Rng>(rng: &mut R, m: usize) -> DirichletProblem {
    let phases = random_phases(rng, m);
    let u_d = phases.u(m) + rng.random_range(0.2..2.0);
    DirichletProblem::new(phases, u_d).expect("valid Dirichlet problem")
}

pub fn random_neumann<R: Rng>(rng: &mut R, m: usize) -> NeumannProblem {
    let phases = random_phases(rng, m);
    let b_n = -rng.random_range(0.05..2.0);
    NeumannProblem::new(phases, b_n).expect("valid Neumann problem")
}

/// A random strictly decreasing positive vector; gaps scale with `scale`.
pub fn random_point<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    let mut gaps: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.5) * scale).collect();
    let mut xi = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += gaps.pop().expect("one gap per coordinate");
        xi[i] = acc;
    }
    xi
}
