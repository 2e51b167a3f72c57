use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use stefan_core::enthalpy::{compare_with_profile, GridBoundary};
use stefan_core::verify::{ORACLE_T_END, ORACLE_T_START};
use stefan_core::{
    build_dirichlet_profile, build_enthalpy_pair, check_type_n, enumerate, solve_dirichlet, verify_dirichlet,
    verify_neumann, EnthalpyPair, Error, FreeBoundaries, Problem, ProblemDocument, SimilarityProfile, VerifyOptions,
};

mod output;

use output::{emit, to_csv, to_json};

/// Self-similar solutions of the multi-phase Stefan problem.
#[derive(Debug, Parser)]
#[command(name = "stefan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Problem document (JSON).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the Dirichlet potential and report the free boundaries and profile.
    SolveDirichlet {
        #[command(flatten)]
        io: Io,
    },
    /// Decide and, if it exists, compute one Neumann solution type.
    SolveNeumann {
        #[command(flatten)]
        io: Io,
        #[arg(long = "type", value_name = "N")]
        n: usize,
    },
    /// Decide every Neumann solution type.
    Enumerate {
        #[command(flatten)]
        io: Io,
    },
    /// Solve and certify; exits with status 3 when a check fails.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random starts for the uniqueness check.
        #[arg(long, default_value_t = 5)]
        starts: usize,
        /// Also run the enthalpy oracle on this many cells.
        #[arg(long, value_name = "J")]
        oracle_cells: Option<usize>,
    },
    /// Tabulate a profile as CSV and write the free boundaries next to it.
    Sample {
        #[command(flatten)]
        io: Io,
        /// Sample `u(t, x)` at this time; without it the similarity variable is sampled.
        #[arg(long)]
        t: Option<f64>,
        /// Upper end of the sampled range (x with `--t`, ξ otherwise).
        #[arg(long)]
        xmax: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Neumann solution type; defaults to the lowest existing type.
        #[arg(long = "type", value_name = "N")]
        solution_type: Option<usize>,
    },
    /// Run the finite-difference enthalpy oracle against the profile.
    Oracle {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 400)]
        cells: usize,
        #[arg(long, default_value_t = ORACLE_T_START)]
        t_start: f64,
        #[arg(long, default_value_t = ORACLE_T_END)]
        t_end: f64,
        #[arg(long = "type", value_name = "N")]
        solution_type: Option<usize>,
        /// CSV of `x, u_fd, u_profile` at the final time.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
}

/// Failure classes, mapped one-to-one onto exit codes.
#[derive(Debug)]
enum Failure {
    Invalid(anyhow::Error),
    Solver(anyhow::Error),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Verification => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::NotPositiveDefinite { .. } | Error::Unstable { .. } => {
                Failure::Solver(e.into())
            }
            other => Failure::Invalid(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<Error>() {
            Ok(core) => core.into(),
            Err(e) => Failure::Invalid(e),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load(path: &Path) -> std::result::Result<Problem, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(ProblemDocument::from_json(&text)?.into_problem()?)
}

#[derive(Serialize)]
struct DirichletSolution<'a> {
    xi: &'a FreeBoundaries,
    energy: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    profile: &'a SimilarityProfile,
}

#[derive(Serialize)]
struct Boundaries {
    t: Option<f64>,
    xi: Vec<f64>,
    x: Option<Vec<f64>>,
    surface_temperature: f64,
    surface_gradient: f64,
}

/// The profile a sampling verb works on: the Dirichlet solution, or the
/// requested (default: lowest existing) Neumann type.
fn select_profile(problem: &Problem, n: Option<usize>) -> std::result::Result<(SimilarityProfile, GridBoundary, EnthalpyPair), Failure> {
    match problem {
        Problem::Dirichlet(p) => {
            let r = solve_dirichlet(p)?;
            Ok((build_dirichlet_profile(p, &r.point)?, GridBoundary::Dirichlet(p.u_d()), build_enthalpy_pair(p)))
        }
        Problem::Neumann(p) => {
            let outcome = match n {
                Some(n) => check_type_n(p, n)?,
                None => enumerate(p)?
                    .outcomes
                    .into_iter()
                    .find(|o| o.exists())
                    .ok_or_else(|| Failure::Invalid(anyhow!("no self-similar solution exists for this problem")))?,
            };
            let n = outcome.n;
            let profile = outcome
                .profile
                .ok_or_else(|| Failure::Invalid(anyhow!("solution type {n} does not exist ({:?})", outcome.status)))?;
            Ok((profile, GridBoundary::NeumannFlux(p.b_n()), EnthalpyPair::from_phases(p.phases())))
        }
    }
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("boundaries.json")
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::SolveDirichlet { io } => {
            let Problem::Dirichlet(p) = load(&io.input)? else {
                return Err(Failure::Invalid(anyhow!("solve-dirichlet needs a problem with u_D")));
            };
            let r = solve_dirichlet(&p)?;
            let profile = build_dirichlet_profile(&p, &r.point)?;
            let doc = DirichletSolution {
                xi: &r.point,
                energy: r.value,
                grad_norm: r.grad_norm,
                iterations: r.iterations,
                converged: r.converged,
                profile: &profile,
            };
            emit(io.out.as_deref(), &to_json(&doc)?)?;
        }
        Command::SolveNeumann { io, n } => {
            let Problem::Neumann(p) = load(&io.input)? else {
                return Err(Failure::Invalid(anyhow!("solve-neumann needs a problem with b_N")));
            };
            emit(io.out.as_deref(), &to_json(&check_type_n(&p, n)?)?)?;
        }
        Command::Enumerate { io } => {
            let Problem::Neumann(p) = load(&io.input)? else {
                return Err(Failure::Invalid(anyhow!("enumerate needs a problem with b_N")));
            };
            emit(io.out.as_deref(), &to_json(&enumerate(&p)?)?)?;
        }
        Command::Verify { io, seed, starts, oracle_cells } => {
            let opts = VerifyOptions { seed, starts, oracle_cells };
            let pass = match load(&io.input)? {
                Problem::Dirichlet(p) => {
                    let r = solve_dirichlet(&p)?;
                    let profile = build_dirichlet_profile(&p, &r.point)?;
                    let report = verify_dirichlet(&p, &r, &profile, &opts)?;
                    emit(io.out.as_deref(), &to_json(&report)?)?;
                    report.pass
                }
                Problem::Neumann(p) => {
                    let set = enumerate(&p)?;
                    let report = verify_neumann(&p, &set, &opts)?;
                    emit(io.out.as_deref(), &to_json(&report)?)?;
                    report.pass
                }
            };
            if !pass {
                return Err(Failure::Verification);
            }
        }
        Command::Sample { io, t, xmax, n, solution_type } => {
            if !(xmax > 0.0 && xmax.is_finite()) || n < 2 {
                return Err(Failure::Invalid(anyhow!("sampling needs xmax > 0 and n ≥ 2")));
            }
            if let Some(t) = t {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Failure::Invalid(anyhow!("sampling needs t > 0, got {t}")));
                }
            }
            let problem = load(&io.input)?;
            let (profile, _, _) = select_profile(&problem, solution_type)?;
            let rows = (0..n)
                .map(|j| {
                    let s = xmax * j as f64 / (n - 1) as f64;
                    let u = match t {
                        Some(t) => profile.evaluate_physical(t, s)?,
                        None => profile.evaluate(s)?,
                    };
                    Ok(vec![s, u])
                })
                .collect::<stefan_core::Result<Vec<_>>>()?;
            let header: &[&str] = if t.is_some() { &["x", "u"] } else { &["xi", "u"] };
            emit(io.out.as_deref(), &to_csv(header, &rows)?)?;
            if let Some(out) = io.out.as_deref() {
                let b = Boundaries {
                    t,
                    xi: profile.boundaries.as_slice().to_vec(),
                    x: t.map(|t| profile.front_positions(t)),
                    surface_temperature: profile.surface_temperature(),
                    surface_gradient: profile.surface_gradient(),
                };
                emit(Some(&sidecar(out)), &to_json(&b)?)?;
            }
        }
        Command::Oracle { io, cells, t_start, t_end, solution_type, csv } => {
            if !(t_start > 0.0 && t_end > t_start) {
                return Err(Failure::Invalid(anyhow!("oracle needs 0 < t_start < t_end")));
            }
            let problem = load(&io.input)?;
            let (profile, boundary, pair) = select_profile(&problem, solution_type)?;
            let cmp = compare_with_profile(&pair, &profile, boundary, cells, t_start, t_end)?;
            if let Some(path) = csv {
                let sim = &cmp.simulation;
                let rows = sim
                    .x
                    .iter()
                    .zip(&sim.u)
                    .map(|(&x, &u)| Ok(vec![x, u, profile.evaluate_physical(sim.t, x)?]))
                    .collect::<stefan_core::Result<Vec<_>>>()?;
                emit(Some(&path), &to_csv(&["x", "u_fd", "u_profile"], &rows)?)?;
            }
            emit(io.out.as_deref(), &to_json(&cmp)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STEFAN_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(e) => eprintln!("error: {e:#}"),
                Failure::Solver(e) => eprintln!("solver failure: {e:#}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let nc = Error::NonConvergence { iterations: 200, grad_norm: 1.0, last: vec![1.0] };
        assert_eq!(Failure::from(nc).code(), 2);
        assert_eq!(Failure::from(Error::NotPositiveDefinite { point: vec![] }).code(), 2);
        assert_eq!(Failure::from(Error::Validation(vec![])).code(), 1);
        assert_eq!(Failure::from(anyhow::Error::from(Error::Domain("x".into()))).code(), 1);
        assert_eq!(Failure::from(anyhow!("io")).code(), 1);
        assert_eq!(Failure::Verification.code(), 3);
    }
}
