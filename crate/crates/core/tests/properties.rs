use proptest::prelude::*;
use stefan_core::kernel::{self, Coord};
use stefan_core::{
    build_dirichlet_profile, dirichlet_residuals, enumerate, solve_dirichlet, DirichletProblem, NeumannProblem,
    PhaseConfig, Potential,
};

fn phases(m: usize) -> impl Strategy<Value = PhaseConfig> {
    (
        prop::collection::vec(0.2f64..2.0, m),
        prop::collection::vec(0.5f64..2.0, m + 1),
        prop::collection::vec(0.5f64..2.0, m + 1),
        prop::collection::vec(0.1f64..2.0, m),
    )
        .prop_map(|(steps, a, k, d)| {
            let mut u = vec![0.0];
            for s in steps {
                u.push(u.last().unwrap() + s);
            }
            PhaseConfig::new(u, a, k, d).unwrap()
        })
}

fn dirichlet() -> impl Strategy<Value = DirichletProblem> {
    (1usize..=4)
        .prop_flat_map(|m| (phases(m), 0.2f64..2.0))
        .prop_map(|(ph, lift)| {
            let u_d = ph.u(ph.m()) + lift;
            DirichletProblem::new(ph, u_d).unwrap()
        })
}

fn neumann() -> impl Strategy<Value = NeumannProblem> {
    (1usize..=3)
        .prop_flat_map(|m| (phases(m), 0.05f64..2.0))
        .prop_map(|(ph, b)| NeumannProblem::new(ph, -b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_increasing_and_bounded(x in 0.0f64..12.0, dx in 1e-6f64..1.0) {
        let f = kernel::eval_f(Coord::Finite(x)).unwrap();
        let g = kernel::eval_f(Coord::Finite(x + dx)).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(g >= f);
        prop_assert!(g - f <= dx / std::f64::consts::PI.sqrt() + 1e-16);
    }

    #[test]
    fn inverse_round_trips(x in 1e-3f64..7.0) {
        let y = kernel::eval_f(Coord::Finite(x)).unwrap();
        prop_assert!((kernel::inverse_f(y).unwrap() - x).abs() <= 1e-10);
        let q = kernel::eval_f_complement(Coord::Finite(x * 4.0)).unwrap();
        prop_assert!((kernel::inverse_f_complement(q).unwrap() - 4.0 * x).abs() <= 1e-10 * (4.0 * x).max(1.0));
    }

    #[test]
    fn gradient_matches_residuals(p in dirichlet(), seed in prop::collection::vec(0.05f64..1.5, 4)) {
        let mut xi: Vec<f64> = seed[..p.m()].to_vec();
        for i in (0..xi.len().saturating_sub(1)).rev() {
            xi[i] += xi[i + 1];
        }
        let g = Potential::dirichlet(&p).evaluate(&xi).unwrap().gradient;
        let r = dirichlet_residuals(&p, &xi.clone().into()).unwrap();
        for (gi, ri) in g.iter().zip(&r) {
            prop_assert!((gi - ri).abs() <= 1e-12 * gi.abs().max(1.0));
        }
    }

    #[test]
    fn solution_is_a_stationary_point(p in dirichlet()) {
        let r = solve_dirichlet(&p).unwrap();
        prop_assert!(r.converged);
        let res = dirichlet_residuals(&p, &r.point).unwrap();
        prop_assert!(res.iter().all(|v| v.abs() <= 1e-9));
        let profile = build_dirichlet_profile(&p, &r.point).unwrap();
        prop_assert!((profile.evaluate(0.0).unwrap() - p.u_d()).abs() <= 1e-12);
    }

    #[test]
    fn solution_count_matches_statuses(p in neumann()) {
        let set = enumerate(&p).unwrap();
        prop_assert_eq!(set.count, set.outcomes.iter().filter(|o| o.exists()).count());
        prop_assert_eq!(set.outcomes.len(), p.m() + 1);
        for o in set.existing() {
            let u0 = o.profile.as_ref().unwrap().evaluate(0.0).unwrap();
            prop_assert!(u0 > p.phases().u(o.n));
        }
    }
}
