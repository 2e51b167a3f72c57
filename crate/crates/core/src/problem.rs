//! Phase physics, the Dirichlet and Neumann problems, and the enthalpy pair
//! `(α, β)` used by the finite-difference oracle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One violated standing assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "constraint", rename_all = "snake_case")]
pub enum Violation {
    TooFewPhases,
    LengthMismatch { field: &'static str, expected: usize, got: usize },
    NonFinite { field: &'static str, index: usize },
    NotIncreasing { index: usize },
    StartAboveFirstTransition,
    NonPositiveDiffusivity { index: usize },
    NonPositiveConductivity { index: usize },
    NegativeLatentHeat { index: usize },
    MissingLatentHeatAtCoincidentStart,
    BoundaryTemperatureNotAboveLastTransition { u_d: f64, u_m: f64 },
    IncreasingProfile { detail: &'static str },
    HomogeneousNeumann,
    BoundaryDataMissing,
    BoundaryDataAmbiguous,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            TooFewPhases => f.write_str("at least one phase transition is required (u needs length ≥ 2)"),
            LengthMismatch { field, expected, got } => {
                write!(f, "\"{field}\" must have length {expected}, got {got}")
            }
            NonFinite { field, index } => write!(f, "{field}[{index}] is not finite"),
            NotIncreasing { index } => write!(
                f,
                "u_i not strictly increasing: u[{}] ≥ u[{}]",
                index,
                index + 1
            ),
            StartAboveFirstTransition => f.write_str("u₀ must not exceed u₁"),
            NonPositiveDiffusivity { index } => write!(f, "a[{index}] must be > 0"),
            NonPositiveConductivity { index } => write!(f, "k[{index}] must be > 0"),
            NegativeLatentHeat { index } => write!(f, "d[{index}] (d_{}) must be ≥ 0", index + 1),
            MissingLatentHeatAtCoincidentStart => f.write_str("d₁ must be > 0 when u₀=u₁"),
            BoundaryTemperatureNotAboveLastTransition { u_d, u_m } => {
                write!(f, "u_D = {u_d} must exceed the last transition temperature u_m = {u_m}")
            }
            IncreasingProfile { detail } => write!(
                f,
                "increasing profiles are not supported ({detail}); reflect u ↦ −u to obtain the decreasing case"
            ),
            HomogeneousNeumann => f.write_str(
                "b_N = 0: homogeneous Neumann data admits only the constant solution u ≡ u₀",
            ),
            BoundaryDataMissing => f.write_str("exactly one of \"u_D\" or \"b_N\" must be given (found neither)"),
            BoundaryDataAmbiguous => f.write_str("exactly one of \"u_D\" or \"b_N\" must be given (found both)"),
        }
    }
}

/// Validated phase physics: transition temperatures `u₀ ≤ u₁ < … < u_m`,
/// diffusivities `a₀…a_m`, conductivities `k₀…k_m` and latent heats `d₁…d_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseConfig {
    u: Vec<f64>,
    a: Vec<f64>,
    k: Vec<f64>,
    d: Vec<f64>,
}

impl PhaseConfig {
    /// Validate raw arrays. Every violated constraint is reported, with its
    /// index where one applies.
    pub fn new(u: Vec<f64>, a: Vec<f64>, k: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        let violations = Self::check(&u, &a, &k, &d);
        if violations.is_empty() {
            Ok(PhaseConfig { u, a, k, d })
        } else {
            Err(Error::Validation(violations))
        }
    }

    fn check(u: &[f64], a: &[f64], k: &[f64], d: &[f64]) -> Vec<Violation> {
        let mut out = Vec::new();
        if u.len() < 2 {
            out.push(Violation::TooFewPhases);
            return out;
        }
        let m = u.len() - 1;
        for (field, values, expected) in [("a", a, m + 1), ("k", k, m + 1), ("d", d, m)] {
            if values.len() != expected {
                out.push(Violation::LengthMismatch { field, expected, got: values.len() });
            }
        }
        for (field, values) in [("u", u), ("a", a), ("k", k), ("d", d)] {
            for (index, v) in values.iter().enumerate() {
                if !v.is_finite() {
                    out.push(Violation::NonFinite { field, index });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        if u[0] > u[1] {
            out.push(Violation::StartAboveFirstTransition);
        }
        for i in 1..m {
            if u[i] >= u[i + 1] {
                out.push(Violation::NotIncreasing { index: i });
            }
        }
        for (index, &ai) in a.iter().enumerate() {
            if ai <= 0.0 {
                out.push(Violation::NonPositiveDiffusivity { index });
            }
        }
        for (index, &ki) in k.iter().enumerate() {
            if ki <= 0.0 {
                out.push(Violation::NonPositiveConductivity { index });
            }
        }
        for (index, &di) in d.iter().enumerate() {
            if di < 0.0 {
                out.push(Violation::NegativeLatentHeat { index });
            }
        }
        // Exact equality on purpose: the model changes when u₀ = u₁.
        if u[0] == u[1] && d[0] <= 0.0 {
            out.push(Violation::MissingLatentHeatAtCoincidentStart);
        }
        out
    }

    /// Re-run validation on an already validated config.
    pub fn revalidate(&self) -> Result<Self> {
        Self::new(self.u.clone(), self.a.clone(), self.k.clone(), self.d.clone())
    }

    /// Number of phase transitions `m`.
    pub fn m(&self) -> usize {
        self.u.len() - 1
    }

    /// `u₀ … u_m`.
    pub fn temperatures(&self) -> &[f64] {
        &self.u
    }

    pub fn diffusivities(&self) -> &[f64] {
        &self.a
    }

    pub fn conductivities(&self) -> &[f64] {
        &self.k
    }

    /// `d₁ … d_m` (index 0 holds `d₁`).
    pub fn latent_heats(&self) -> &[f64] {
        &self.d
    }

    pub fn u(&self, i: usize) -> f64 {
        self.u[i]
    }

    pub fn a(&self, i: usize) -> f64 {
        self.a[i]
    }

    pub fn k(&self, i: usize) -> f64 {
        self.k[i]
    }

    /// Latent heat `d_i` for `1 ≤ i ≤ m`.
    pub fn d(&self, i: usize) -> f64 {
        self.d[i - 1]
    }

    /// True when the initial temperature sits exactly at the first transition.
    pub fn starts_at_transition(&self) -> bool {
        self.u[0] == self.u[1]
    }

    /// Phases `0..=n` only, i.e. the config seen by a profile with `n`
    /// transitions. Requires `1 ≤ n ≤ m`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.m() {
            return Err(Error::TypeOutOfRange { n, m: self.m() });
        }
        Self::new(
            self.u[..=n].to_vec(),
            self.a[..=n].to_vec(),
            self.k[..=n].to_vec(),
            self.d[..n].to_vec(),
        )
    }

    /// Copy with `k_i` replaced; validation is re-run.
    pub fn with_conductivity(&self, i: usize, value: f64) -> Result<Self> {
        let mut k = self.k.clone();
        k[i] = value;
        Self::new(self.u.clone(), self.a.clone(), k, self.d.clone())
    }

    pub fn with_diffusivity(&self, i: usize, value: f64) -> Result<Self> {
        let mut a = self.a.clone();
        a[i] = value;
        Self::new(self.u.clone(), a, self.k.clone(), self.d.clone())
    }

    /// Copy with `d_i` (`1 ≤ i ≤ m`) replaced.
    pub fn with_latent_heat(&self, i: usize, value: f64) -> Result<Self> {
        let mut d = self.d.clone();
        d[i - 1] = value;
        Self::new(self.u.clone(), self.a.clone(), self.k.clone(), d)
    }
}

/// Constant initial temperature `u₀` and a fixed boundary temperature
/// `u_D > u_m` at `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletProblem {
    phases: PhaseConfig,
    u_d: f64,
}

impl DirichletProblem {
    pub fn new(phases: PhaseConfig, u_d: f64) -> Result<Self> {
        let u_m = phases.u(phases.m());
        if !u_d.is_finite() {
            return Err(Error::Validation(vec![Violation::NonFinite { field: "u_D", index: 0 }]));
        }
        if u_d <= phases.u(0) {
            return Err(Error::Validation(vec![Violation::IncreasingProfile {
                detail: "u_D ≤ u₀",
            }]));
        }
        if u_d <= u_m {
            return Err(Error::Validation(vec![
                Violation::BoundaryTemperatureNotAboveLastTransition { u_d, u_m },
            ]));
        }
        Ok(DirichletProblem { phases, u_d })
    }

    pub fn phases(&self) -> &PhaseConfig {
        &self.phases
    }

    pub fn u_d(&self) -> f64 {
        self.u_d
    }

    pub fn m(&self) -> usize {
        self.phases.m()
    }

    /// `u_i` for `0 ≤ i ≤ m+1`, with `u_{m+1} = u_D`.
    pub fn u_ext(&self, i: usize) -> f64 {
        if i == self.m() + 1 {
            self.u_d
        } else {
            self.phases.u(i)
        }
    }
}

/// Constant initial temperature `u₀` and boundary flux `u_x(t,0) = b_N/√t`
/// with `b_N < 0`. The phase list must cover every transition above `u₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannProblem {
    phases: PhaseConfig,
    b_n: f64,
}

impl NeumannProblem {
    pub fn new(phases: PhaseConfig, b_n: f64) -> Result<Self> {
        if !b_n.is_finite() {
            return Err(Error::Validation(vec![Violation::NonFinite { field: "b_N", index: 0 }]));
        }
        if b_n == 0.0 {
            return Err(Error::Validation(vec![Violation::HomogeneousNeumann]));
        }
        if b_n > 0.0 {
            return Err(Error::Validation(vec![Violation::IncreasingProfile { detail: "b_N > 0" }]));
        }
        Ok(NeumannProblem { phases, b_n })
    }

    pub fn phases(&self) -> &PhaseConfig {
        &self.phases
    }

    pub fn b_n(&self) -> f64 {
        self.b_n
    }

    pub fn m(&self) -> usize {
        self.phases.m()
    }

    pub fn with_phases(&self, phases: PhaseConfig) -> Result<Self> {
        Self::new(phases, self.b_n)
    }

    pub fn with_flux(&self, b_n: f64) -> Result<Self> {
        Self::new(self.phases.clone(), b_n)
    }
}

/// JSON problem document. `m` is inferred from the length of `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub u: Vec<f64>,
    pub a: Vec<f64>,
    pub k: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(rename = "u_D", default, skip_serializing_if = "Option::is_none")]
    pub u_d: Option<f64>,
    #[serde(rename = "b_N", default, skip_serializing_if = "Option::is_none")]
    pub b_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Dirichlet(DirichletProblem),
    Neumann(NeumannProblem),
}

impl ProblemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks on `u_D` and `b_N` that need only the raw temperature list, so
    /// they can be reported alongside phase violations.
    fn boundary_data_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let (Some(u_d), Some(&u_m)) = (self.u_d, self.u.last()) {
            if u_d.is_finite() && u_m.is_finite() && u_d <= u_m {
                out.push(Violation::BoundaryTemperatureNotAboveLastTransition { u_d, u_m });
            }
        }
        match self.b_n {
            Some(b) if b == 0.0 => out.push(Violation::HomogeneousNeumann),
            Some(b) if b > 0.0 => out.push(Violation::IncreasingProfile { detail: "b_N > 0" }),
            _ => {}
        }
        out
    }

    /// Validate into a typed problem, collecting phase violations together
    /// with any boundary-data violation.
    pub fn into_problem(self) -> Result<Problem> {
        let boundary = match (self.u_d, self.b_n) {
            (Some(_), Some(_)) => Some(Violation::BoundaryDataAmbiguous),
            (None, None) => Some(Violation::BoundaryDataMissing),
            _ => None,
        };
        let data = self.boundary_data_violations();
        let phases = match PhaseConfig::new(self.u, self.a, self.k, self.d) {
            Ok(p) => p,
            Err(Error::Validation(mut v)) => {
                v.extend(boundary);
                v.extend(data);
                return Err(Error::Validation(v));
            }
            Err(e) => return Err(e),
        };
        if let Some(v) = boundary {
            return Err(Error::Validation(vec![v]));
        }
        match (self.u_d, self.b_n) {
            (Some(u_d), None) => Ok(Problem::Dirichlet(DirichletProblem::new(phases, u_d)?)),
            (None, Some(b_n)) => Ok(Problem::Neumann(NeumannProblem::new(phases, b_n)?)),
            _ => unreachable!("boundary data checked above"),
        }
    }
}

impl From<&DirichletProblem> for ProblemDocument {
    fn from(p: &DirichletProblem) -> Self {
        ProblemDocument {
            u: p.phases.u.clone(),
            a: p.phases.a.clone(),
            k: p.phases.k.clone(),
            d: p.phases.d.clone(),
            u_d: Some(p.u_d),
            b_n: None,
        }
    }
}

impl From<&NeumannProblem> for ProblemDocument {
    fn from(p: &NeumannProblem) -> Self {
        ProblemDocument {
            u: p.phases.u.clone(),
            a: p.phases.a.clone(),
            k: p.phases.k.clone(),
            d: p.phases.d.clone(),
            u_d: None,
            b_n: Some(p.b_n),
        }
    }
}

/// Piecewise-linear flux potential `α` and enthalpy `β` of the degenerate
/// diffusion form `β(u)_t − α(u)_xx = 0`.
///
/// Both are normalised to vanish at `u₀`. On `(u_i, u_{i+1})` the slopes are
/// `k_i` and `k_i/a_i²`; `β` jumps by `d_i` at `u_i`. When `u₀ = u₁` phase 0
/// is empty and the first jump sits at `u₀` itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnthalpyPair {
    /// `u₀ … u_m`.
    pub breakpoints: Vec<f64>,
    pub alpha_slopes: Vec<f64>,
    pub beta_slopes: Vec<f64>,
    /// `d₁ … d_m`.
    pub beta_jumps: Vec<f64>,
    /// `u_D` for a Dirichlet problem; the last phase is unbounded otherwise.
    pub upper: Option<f64>,
}

/// Build the enthalpy pair for a Dirichlet problem on `[u₀, u_D]`.
pub fn build_enthalpy_pair(problem: &DirichletProblem) -> EnthalpyPair {
    let mut pair = EnthalpyPair::from_phases(problem.phases());
    pair.upper = Some(problem.u_d());
    pair
}

impl EnthalpyPair {
    pub fn from_phases(phases: &PhaseConfig) -> Self {
        let m = phases.m();
        EnthalpyPair {
            breakpoints: phases.temperatures().to_vec(),
            alpha_slopes: phases.conductivities().to_vec(),
            beta_slopes: (0..=m).map(|i| phases.k(i) / (phases.a(i) * phases.a(i))).collect(),
            beta_jumps: phases.latent_heats().to_vec(),
            upper: None,
        }
    }

    fn m(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Index of the phase containing `u` (`u_i < u ≤ u_{i+1}` picks `i`,
    /// anything at or below `u₁` is phase 0).
    pub fn phase_of(&self, u: f64) -> usize {
        let m = self.m();
        (1..=m).rev().find(|&i| u > self.breakpoints[i]).unwrap_or(0)
    }

    /// `α(u)`; continuous.
    pub fn alpha(&self, u: f64) -> f64 {
        self.integrate(u, &self.alpha_slopes, false)
    }

    /// `β(u)`, taking the lower limit `β(u_i−)` at a transition temperature.
    pub fn beta(&self, u: f64) -> f64 {
        self.integrate(u, &self.beta_slopes, true)
    }

    /// `β(u_i+)`, the upper end of the jump at transition `i ≥ 1`.
    pub fn beta_upper(&self, i: usize) -> f64 {
        self.beta(self.breakpoints[i]) + self.beta_jumps[i - 1]
    }

    fn integrate(&self, u: f64, slopes: &[f64], with_jumps: bool) -> f64 {
        let u0 = self.breakpoints[0];
        if u <= u0 {
            return slopes[0] * (u - u0);
        }
        let m = self.m();
        let mut acc = 0.0;
        for i in 0..=m {
            let lo = self.breakpoints[i];
            if i >= 1 && with_jumps && u > lo {
                acc += self.beta_jumps[i - 1];
            }
            let hi = if i < m { self.breakpoints[i + 1] } else { f64::INFINITY };
            if u <= hi {
                return acc + slopes[i] * (u - lo);
            }
            acc += slopes[i] * (hi - lo);
        }
        acc
    }

    /// Invert the monotone graph `w = β(u)`; enthalpies inside a jump map to
    /// the transition temperature.
    pub fn temperature(&self, w: f64) -> f64 {
        let u0 = self.breakpoints[0];
        if w <= 0.0 {
            return u0 + w / self.beta_slopes[0];
        }
        let m = self.m();
        let mut base = 0.0;
        for i in 0..=m {
            let lo = self.breakpoints[i];
            if i >= 1 {
                let top = base + self.beta_jumps[i - 1];
                if w <= top {
                    return lo;
                }
                base = top;
            }
            if i == m {
                break;
            }
            let top = base + self.beta_slopes[i] * (self.breakpoints[i + 1] - lo);
            if w <= top {
                return lo + (w - base) / self.beta_slopes[i];
            }
            base = top;
        }
        self.breakpoints[m] + (w - base) / self.beta_slopes[m]
    }
}
