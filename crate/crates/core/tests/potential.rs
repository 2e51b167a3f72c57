mod common;

use common::{random_dirichlet, random_neumann, random_point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stefan_core::{dirichlet_residuals, neumann_residuals, FreeBoundaries, Potential};

fn central_gradient(p: &Potential, xi: &[f64]) -> Vec<f64> {
    (0..xi.len())
        .map(|i| {
            let h = 1e-6 * xi[i].max(1e-2);
            let mut plus = xi.to_vec();
            let mut minus = xi.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (p.value(&plus).unwrap() - p.value(&minus).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn gradient_is_the_interface_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..20 {
        let problem = random_dirichlet(&mut rng, 1 + trial % 4);
        let potential = Potential::dirichlet(&problem);
        for _ in 0..25 {
            let xi = random_point(&mut rng, problem.m(), 1.0);
            let g = potential.evaluate(&xi).unwrap().gradient;
            let r = dirichlet_residuals(&problem, &FreeBoundaries::new(xi.clone())).unwrap();
            for (gi, ri) in g.iter().zip(&r) {
                assert!((gi - ri).abs() <= 1e-12 * gi.abs().max(1.0), "{gi} vs {ri} at {xi:?}");
            }
        }
    }
}

#[test]
fn neumann_gradient_is_the_interface_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let problem = random_neumann(&mut rng, 1 + trial % 4);
        for n in 1..=problem.m() {
            let potential = Potential::neumann(&problem, n).unwrap();
            for _ in 0..10 {
                let xi = random_point(&mut rng, n, 1.0);
                let g = potential.evaluate(&xi).unwrap().gradient;
                let r = neumann_residuals(&problem, n, &FreeBoundaries::new(xi.clone())).unwrap();
                for (gi, ri) in g.iter().zip(&r) {
                    assert!((gi - ri).abs() <= 1e-12 * gi.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..12 {
        let problem = random_dirichlet(&mut rng, 1 + trial % 4);
        let potential = Potential::dirichlet(&problem);
        for _ in 0..10 {
            let xi = random_point(&mut rng, problem.m(), 1.0);
            let g = potential.evaluate(&xi).unwrap().gradient;
            for (fd, exact) in central_gradient(&potential, &xi).iter().zip(&g) {
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
            }
        }
    }
}

#[test]
fn hessian_is_symmetric_tridiagonal_and_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for trial in 0..20 {
        let problem = random_dirichlet(&mut rng, 1 + trial % 4);
        let potential = Potential::dirichlet(&problem);
        for _ in 0..20 {
            let scale = rng.random_range(0.1..3.0);
            let xi = random_point(&mut rng, problem.m(), scale);
            let h = potential.evaluate(&xi).unwrap().hessian;
            let n = xi.len();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(h[(i, j)], h[(j, i)]);
                    if i.abs_diff(j) > 1 {
                        assert_eq!(h[(i, j)], 0.0);
                    }
                }
            }
            assert!(h.clone().cholesky().is_some(), "not PD at {xi:?}");

            // Column j against central differences of the gradient.
            let scale = h.amax();
            for j in 0..n {
                let step = 1e-4 * xi[j];
                let mut plus = xi.clone();
                let mut minus = xi.clone();
                plus[j] += step;
                minus[j] -= step;
                let gp = potential.evaluate(&plus).unwrap().gradient;
                let gm = potential.evaluate(&minus).unwrap().gradient;
                for i in 0..n {
                    let fd = (gp[i] - gm[i]) / (2.0 * step);
                    let rel = (fd - h[(i, j)]).abs() / h[(i, j)].abs().max(1e-6 * scale);
                    assert!(rel <= 1e-4, "H[{i},{j}] = {} vs {fd}", h[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn neumann_hessian_positive_definite_up_to_the_face() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for trial in 0..20 {
        let problem = random_neumann(&mut rng, 1 + trial % 4);
        for n in 1..=problem.m() {
            let potential = Potential::neumann(&problem, n).unwrap();
            let mut xi = random_point(&mut rng, n, 1.0);
            assert!(potential.evaluate(&xi).unwrap().hessian.cholesky().is_some());
            xi[n - 1] = 0.0;
            let at_face = potential.evaluate(&xi).unwrap();
            assert!(at_face.value.is_finite());
            assert!(at_face.hessian.cholesky().is_some());
        }
    }
}

/// Move `ξ₁..ξ_j` down so that gap `j` (`ξ_j − ξ_{j+1}`, with `ξ_{m+1} = 0`)
/// becomes `gap·ratio`.
fn collapse(xi: &[f64], j: usize, ratio: f64) -> Vec<f64> {
    let below = if j + 1 < xi.len() { xi[j + 1] } else { 0.0 };
    let delta = (xi[j] - below) * (1.0 - ratio);
    xi.iter().enumerate().map(|(i, &x)| if i <= j { x - delta } else { x }).collect()
}

#[test]
fn potential_escapes_toward_the_cone_boundary_and_infinity() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for ray in 0..50 {
        let problem = random_dirichlet(&mut rng, 1 + ray % 4);
        let potential = Potential::dirichlet(&problem);
        let xi = random_point(&mut rng, problem.m(), 1.0);
        let e0 = potential.value(&xi).unwrap();
        let to_infinity = ray % 3 == 0;
        let j = rng.random_range(0..problem.m());
        let escaped = (1..60).any(|k| {
            let p = if to_infinity {
                xi.iter().map(|x| x * 2f64.powi(k)).collect()
            } else {
                collapse(&xi, j, 10f64.powi(-k))
            };
            potential.value(&p).map_or(true, |e| e > e0 + 10.0)
        });
        assert!(escaped, "ray {ray} stayed bounded");
    }
}
