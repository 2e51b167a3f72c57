//! The similarity kernel `F(x) = (1/√π) ∫₀ˣ exp(−s²/4) ds` and friends.
//!
//! `F(x) = erf(x/2)`, so every evaluation goes through the rational
//! approximations of the error-function family in `libm` (the FreeBSD
//! `s_erf.c` port), which are accurate to about one ulp. The complement
//! `1 − F(x) = erfc(x/2)` is exposed separately because the outermost phase
//! of every problem needs it deep in the Gaussian tail, where forming `1 − F`
//! by subtraction would cancel to zero.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1/√π`.
pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Largest bracket endpoint tried before the inverse gives up.
const MAX_BRACKET: f64 = 96.0;

/// A similarity coordinate: a finite non-negative number or the `+∞` end of
/// the half-line.
///
/// The outer end of the outermost phase (`ξ₀ = +∞`) is represented by the
/// [`Coord::Infinity`] tag rather than a large float so that `F(ξ₀/a₀) = 1`
/// holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Finite(f64),
    #[serde(with = "infinity_tag")]
    Infinity,
}

mod infinity_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("+inf")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let tag = String::deserialize(d)?;
        if tag == "+inf" || tag == "inf" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!("expected \"+inf\", got {tag:?}")))
        }
    }
}

impl Coord {
    pub fn is_infinite(self) -> bool {
        matches!(self, Coord::Infinity)
    }

    /// Divide by a positive scale (`ξ ↦ ξ/a`); infinity stays infinity.
    pub fn scaled(self, a: f64) -> Coord {
        match self {
            Coord::Finite(x) => Coord::Finite(x / a),
            Coord::Infinity => Coord::Infinity,
        }
    }

    /// The value as an `f64`, mapping the sentinel to `f64::INFINITY`.
    /// Only for display and ordering, never for kernel arithmetic.
    pub fn to_f64(self) -> f64 {
        match self {
            Coord::Finite(x) => x,
            Coord::Infinity => f64::INFINITY,
        }
    }
}

impl From<f64> for Coord {
    fn from(x: f64) -> Self {
        Coord::Finite(x)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Finite(x) => write!(f, "{x}"),
            Coord::Infinity => f.write_str("+inf"),
        }
    }
}

/// Kernel value bundle at one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub x: Coord,
    pub f: f64,
    pub f_prime: f64,
}

impl KernelValue {
    pub fn at(x: Coord) -> Result<Self> {
        let f = eval_f(x)?;
        let f_prime = match x {
            Coord::Finite(x) => eval_f_prime(x)?,
            Coord::Infinity => 0.0,
        };
        Ok(KernelValue { x, f, f_prime })
    }
}

fn check_finite_nonneg(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "kernel argument must be finite and non-negative, got {x}"
        )))
    }
}

/// `F(x)`; `F(+∞) = 1` exactly.
pub fn eval_f(x: Coord) -> Result<f64> {
    match x {
        Coord::Infinity => Ok(1.0),
        Coord::Finite(x) => {
            check_finite_nonneg(x)?;
            Ok(f_raw(x))
        }
    }
}

/// `1 − F(x)`, accurate in relative terms for large `x`.
pub fn eval_f_complement(x: Coord) -> Result<f64> {
    match x {
        Coord::Infinity => Ok(0.0),
        Coord::Finite(x) => {
            check_finite_nonneg(x)?;
            Ok(fc_raw(x))
        }
    }
}

/// `F'(x) = exp(−x²/4)/√π`.
pub fn eval_f_prime(x: f64) -> Result<f64> {
    check_finite_nonneg(x)?;
    Ok(fp_raw(x))
}

/// `F''(x) = −(x/2)·F'(x)`.
pub fn eval_f_second(x: f64) -> Result<f64> {
    check_finite_nonneg(x)?;
    Ok(fpp_raw(x))
}

/// `F(upper) − F(lower)` for `upper ≥ lower ≥ 0`, without cancellation when
/// both arguments sit in the tail.
pub fn f_difference(upper: Coord, lower: f64) -> Result<f64> {
    check_finite_nonneg(lower)?;
    if let Coord::Finite(u) = upper {
        check_finite_nonneg(u)?;
        if u < lower {
            return Err(Error::Domain(format!(
                "F difference needs upper ≥ lower, got {u} < {lower}"
            )));
        }
    }
    Ok(f_diff_raw(upper, lower))
}

/// Inverse of `F` on `(0, 1)`.
///
/// Inputs above `1/2` are handed to [`inverse_f_complement`] with `1 − y`,
/// which is exact in floating point for `y ≥ 1/2`. Note that the conditioning
/// of `F` itself limits round trips: once `F'(x)` falls below the spacing of
/// doubles near one (around `x ≈ 7.5`), distinct `x` share the same `F(x)`
/// and only the complement keeps enough information.
pub fn inverse_f(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("inverse_F needs 0 < y < 1, got {y}")));
    }
    if y > 0.5 {
        return inverse_f_complement(1.0 - y);
    }
    // F(x) − y is increasing and concave on x ≥ 0.
    let (lo, hi) = bracket(|x| f_raw(x) >= y)?;
    Ok(safeguarded_newton(lo, hi, |x| (f_raw(x) - y, fp_raw(x))))
}

/// The `x` with `1 − F(x) = q`, for `0 < q < 1`.
pub fn inverse_f_complement(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!(
            "inverse of 1 − F needs 0 < q < 1, got {q}"
        )));
    }
    let (lo, hi) = bracket(|x| fc_raw(x) <= q)?;
    // Newton on ln(1 − F(x)) − ln q keeps relative accuracy in the tail.
    let log_q = q.ln();
    Ok(safeguarded_newton(lo, hi, |x| {
        let fc = fc_raw(x);
        (log_q - fc.ln(), fp_raw(x) / fc)
    }))
}

/// Expand `[0, 12]` geometrically until `reached(hi)`.
fn bracket(reached: impl Fn(f64) -> bool) -> Result<(f64, f64)> {
    let mut lo = 0.0;
    let mut hi = 12.0;
    while !reached(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_BRACKET {
            return Err(Error::Domain(
                "target lies outside the invertible range of F".to_string(),
            ));
        }
    }
    Ok((lo, hi))
}

/// Root of an increasing function on `[lo, hi]`; `eval` returns
/// `(value, derivative)`. Newton steps that leave the bracket are replaced by
/// bisection.
fn safeguarded_newton(mut lo: f64, mut hi: f64, eval: impl Fn(f64) -> (f64, f64)) -> f64 {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (g, dg) = eval(x);
        if g == 0.0 {
            return x;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - g / dg;
        let next = if dg > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    x
}

// Unchecked evaluations for hot paths whose callers have already validated
// their arguments.

#[inline]
pub(crate) fn f_raw(x: f64) -> f64 {
    libm::erf(0.5 * x)
}

#[inline]
pub(crate) fn fc_raw(x: f64) -> f64 {
    libm::erfc(0.5 * x)
}

#[inline]
pub(crate) fn fp_raw(x: f64) -> f64 {
    FRAC_1_SQRT_PI * (-0.25 * x * x).exp()
}

#[inline]
pub(crate) fn fpp_raw(x: f64) -> f64 {
    -0.5 * x * fp_raw(x)
}

#[inline]
pub(crate) fn f_coord_raw(x: Coord) -> f64 {
    match x {
        Coord::Finite(x) => f_raw(x),
        Coord::Infinity => 1.0,
    }
}

#[inline]
pub(crate) fn fp_coord_raw(x: Coord) -> f64 {
    match x {
        Coord::Finite(x) => fp_raw(x),
        Coord::Infinity => 0.0,
    }
}

/// Switch to complement arithmetic once `lower/2` passes this erf argument.
const TAIL_SWITCH: f64 = 0.5;

#[inline]
pub(crate) fn f_diff_raw(upper: Coord, lower: f64) -> f64 {
    match upper {
        Coord::Infinity => fc_raw(lower),
        Coord::Finite(u) => {
            if 0.5 * lower >= TAIL_SWITCH {
                fc_raw(lower) - fc_raw(u)
            } else {
                f_raw(u) - f_raw(lower)
            }
        }
    }
}

/// `√π`, used by the Neumann flux terms.
pub fn sqrt_pi() -> f64 {
    PI.sqrt()
}
