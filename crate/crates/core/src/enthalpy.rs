//! Explicit enthalpy-method integration of `β(u)_t = α(u)_xx`, used only to
//! cross-check the self-similar profiles against a direct PDE solve.
//!
//! Nodes sit at `x_j = j·h`, `j = 0..=J`. The state is the enthalpy
//! `w_j = β(u_j)`; each step applies
//! `w_j += dt/h²·(α(u_{j+1}) − 2α(u_j) + α(u_{j−1}))` and recovers `u` by
//! inverting the monotone graph of `β` (a `w` inside a latent-heat jump maps
//! to the transition temperature). The far end `x = L` is held at the
//! initial temperature. At `x = 0` either the temperature is held, or the flux
//! `α'(u)·b_N/√t` enters through the half cell of node 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::EnthalpyPair;
use crate::profile::SimilarityProfile;

/// Safety factor on the explicit stability limit `dt ≤ h²/(2 max a_i²)`.
pub const CFL_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum GridBoundary {
    Dirichlet(f64),
    /// The coefficient `b_N` of `u_x(t, 0) = b_N/√t`.
    NeumannFlux(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRun {
    pub length: f64,
    pub cells: usize,
    /// Start time; the initial field is given at this time.
    pub t_start: f64,
    pub t_end: f64,
    /// Overrides the stable default when set.
    pub dt: Option<f64>,
    pub boundary: GridBoundary,
}

impl GridRun {
    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.cells).map(|j| j as f64 * h).collect()
    }
}

/// `CFL_FACTOR · h² / max a_i²`, with `a_i² = α'/β'` on each phase.
pub fn stable_time_step(pair: &EnthalpyPair, h: f64) -> f64 {
    let max_diffusivity_sq = pair
        .alpha_slopes
        .iter()
        .zip(&pair.beta_slopes)
        .map(|(ka, kb)| ka / kb)
        .fold(0.0, f64::max);
    CFL_FACTOR * h * h / max_diffusivity_sq
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    /// Change of `Σ V_j w_j` over the free nodes.
    pub enthalpy_change: f64,
    /// Time integral of the boundary fluxes into the free nodes.
    pub boundary_inflow: f64,
}

impl SimulationResult {
    /// `|Δ(enthalpy) − inflow| / max(|Δ(enthalpy)|, |inflow|)`.
    pub fn balance_error(&self) -> f64 {
        let scale = self.enthalpy_change.abs().max(self.boundary_inflow.abs());
        if scale == 0.0 {
            return 0.0;
        }
        (self.enthalpy_change - self.boundary_inflow).abs() / scale
    }

    /// Max-norm distance to a profile at the final time.
    pub fn linf_error(&self, profile: &SimilarityProfile) -> Result<f64> {
        let mut err: f64 = 0.0;
        for (x, u) in self.x.iter().zip(&self.u) {
            err = err.max((profile.evaluate_physical(self.t, *x)? - u).abs());
        }
        Ok(err)
    }

    /// Outermost position where the field crosses `level` from above,
    /// by linear interpolation between nodes.
    pub fn level_crossing(&self, level: f64) -> Option<f64> {
        let j = self.u.iter().rposition(|&u| u > level)?;
        if j + 1 >= self.u.len() {
            return None;
        }
        let (u0, u1) = (self.u[j], self.u[j + 1]);
        let (x0, x1) = (self.x[j], self.x[j + 1]);
        Some(x0 + (u0 - level) / (u0 - u1) * (x1 - x0))
    }
}

/// Integrate from the given initial temperatures to `grid.t_end`.
pub fn simulate(pair: &EnthalpyPair, grid: &GridRun, initial: &[f64]) -> Result<SimulationResult> {
    let cells = grid.cells;
    if cells < 2 {
        return Err(Error::Grid("at least two cells are required".to_string()));
    }
    if initial.len() != cells + 1 {
        return Err(Error::Grid(format!(
            "initial field has {} values, expected {}",
            initial.len(),
            cells + 1
        )));
    }
    if !(grid.length > 0.0) || !(grid.t_end > grid.t_start) || !(grid.t_start >= 0.0) {
        return Err(Error::Grid("need L > 0 and t_end > t_start ≥ 0".to_string()));
    }
    let h = grid.spacing();
    let stable = stable_time_step(pair, h);
    let target_dt = grid.dt.unwrap_or(stable);
    if !(target_dt > 0.0) {
        return Err(Error::Grid(format!("time step must be positive, got {target_dt}")));
    }
    let span = grid.t_end - grid.t_start;
    let steps = (span / target_dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let r = dt / (h * h);

    let mut u = initial.to_vec();
    if let GridBoundary::Dirichlet(u_d) = grid.boundary {
        u[0] = u_d;
    }
    let mut w: Vec<f64> = u.iter().map(|&v| pair.beta(v)).collect();
    let mut alpha: Vec<f64> = u.iter().map(|&v| pair.alpha(v)).collect();

    let neumann = matches!(grid.boundary, GridBoundary::NeumannFlux(_));
    let first_free = if neumann { 0 } else { 1 };
    let volume = |j: usize| if j == 0 { 0.5 * h } else { h };
    let total = |w: &[f64]| -> f64 { (first_free..cells).map(|j| volume(j) * w[j]).sum() };
    let initial_enthalpy = total(&w);

    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo).max(1.0);

    let mut inflow = 0.0;
    let mut next = w.clone();
    for step in 0..steps {
        for j in 1..cells {
            next[j] = w[j] + r * (alpha[j + 1] - 2.0 * alpha[j] + alpha[j - 1]);
        }
        // Flux leaving through the far end.
        inflow += dt * (alpha[cells] - alpha[cells - 1]) / h;
        match grid.boundary {
            GridBoundary::Dirichlet(_) => {
                inflow += dt * (alpha[0] - alpha[1]) / h;
            }
            GridBoundary::NeumannFlux(b_n) => {
                let t_half = grid.t_start + (step as f64 + 0.5) * dt;
                let k = pair.alpha_slopes[pair.phase_of(u[0])];
                let q_in = -k * b_n / t_half.sqrt();
                next[0] = w[0] + 2.0 * dt / h * ((alpha[1] - alpha[0]) / h + q_in);
                inflow += dt * q_in;
            }
        }
        for j in first_free..cells {
            w[j] = next[j];
            u[j] = pair.temperature(w[j]);
            alpha[j] = pair.alpha(u[j]);
        }
        if step % 256 == 0 || step + 1 == steps {
            if let Some(j) = (0..=cells).find(|&j| !u[j].is_finite() || (u[j] - lo).abs() > 4.0 * spread + (hi - lo).abs()) {
                return Err(Error::Unstable {
                    step,
                    detail: format!("u[{j}] = {} left the admissible range", u[j]),
                });
            }
        }
    }

    Ok(SimulationResult {
        x: grid.nodes(),
        u,
        t: grid.t_end,
        dt,
        steps,
        enthalpy_change: total(&w) - initial_enthalpy,
        boundary_inflow: inflow,
    })
}

/// Result of running the oracle against a self-similar profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    pub cells: usize,
    pub spacing: f64,
    pub linf: f64,
    /// `|x_i(simulated) − ξ_i √t|` for each free boundary.
    pub front_errors: Vec<f64>,
    pub balance_error: f64,
    #[serde(skip)]
    pub simulation: SimulationResult,
}

/// Domain length covering the fronts plus ten outer diffusion lengths.
pub fn default_length(profile: &SimilarityProfile, t_end: f64) -> f64 {
    let outer = profile.boundaries.as_slice().first().copied().unwrap_or(0.0);
    (outer + 10.0 * profile.segments[0].diffusivity) * t_end.sqrt()
}

/// Start from the profile at `t_start`, integrate to `t_end` and compare.
pub fn compare_with_profile(
    pair: &EnthalpyPair,
    profile: &SimilarityProfile,
    boundary: GridBoundary,
    cells: usize,
    t_start: f64,
    t_end: f64,
) -> Result<OracleComparison> {
    let grid = GridRun {
        length: default_length(profile, t_end),
        cells,
        t_start,
        t_end,
        dt: None,
        boundary,
    };
    let initial = grid
        .nodes()
        .iter()
        .map(|&x| profile.evaluate_physical(t_start, x))
        .collect::<Result<Vec<_>>>()?;
    let sim = simulate(pair, &grid, &initial)?;
    let linf = sim.linf_error(profile)?;
    let front_errors = profile
        .front_positions(t_end)
        .iter()
        .enumerate()
        .map(|(i, &x_exact)| {
            let level = profile.segments[i].u_inner;
            sim.level_crossing(level).map_or(f64::INFINITY, |x| (x - x_exact).abs())
        })
        .collect();
    Ok(OracleComparison {
        cells,
        spacing: grid.spacing(),
        linf,
        front_errors,
        balance_error: sim.balance_error(),
        simulation: sim,
    })
}
