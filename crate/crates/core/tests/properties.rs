use proptest::prelude::*;

use trip::bnb::{solve, SolverConfig};
use trip::cuts::box_lb;
use trip::dualdecomp::dd_bound;
use trip::heuristic::improve;
use trip::instance::{gen_random, is_feasible, objective_og};
use trip::num::rat;
use trip::oracle::{brute_box_cut, brute_force_ip};
use trip::relax::solve_lr;
use trip::{Grid, TripInstance};

fn instance() -> impl Strategy<Value = TripInstance> {
    (any::<u64>(), 1usize..=3, 1usize..=4, 1i64..=2, 0i64..=5)
        .prop_map(|(seed, n, m, hi, delta)| gen_random(seed, n, m, 0, hi, delta, rat(3)).unwrap())
}

fn binary_instance() -> impl Strategy<Value = TripInstance> {
    (any::<u64>(), 1usize..=3, 1usize..=4, 0i64..=5)
        .prop_map(|(seed, n, m, delta)| gen_random(seed, n, m, 0, 1, delta, rat(3)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solve_matches_enumeration(inst in instance()) {
        let r = solve(&inst, &SolverConfig { gap_tol: 0.0, ..SolverConfig::default() }).unwrap();
        let opt = brute_force_ip(&inst).unwrap();
        prop_assert_eq!(r.objective, opt.objective);
        prop_assert!(is_feasible(&inst, &r.step).unwrap().feasible);
    }

    #[test]
    fn relaxations_bound_the_optimum(inst in binary_instance()) {
        let opt = brute_force_ip(&inst).unwrap().objective;
        prop_assert!(solve_lr(&inst).unwrap().value <= opt);
        let (n, m) = inst.shape();
        prop_assert!(dd_bound(&inst, &Grid::filled(n, m, rat(0))).unwrap().bound <= opt);
    }

    #[test]
    fn heuristic_never_worsens(inst in instance()) {
        let r = improve(&inst, &inst.zero_step()).unwrap();
        prop_assert!(r.objective <= r.start_objective);
        prop_assert!(objective_og(&inst, &r.step).unwrap() <= rat(0));
    }

    #[test]
    fn zero_step_predicts_no_reduction(inst in instance()) {
        prop_assert_eq!(objective_og(&inst, &inst.zero_step()).unwrap(), rat(0));
    }

    #[test]
    fn box_bound_below_exact_cut(n in 1usize..=4, m in 1usize..=4, frac in 0.0f64..=1.0) {
        let k = (frac * (n * m) as f64).round() as usize;
        let exact = brute_box_cut(k, n, m).unwrap() as i64;
        prop_assert!(box_lb(k as i64, n as i64, m as i64, 0).unwrap() <= exact);
    }
}
