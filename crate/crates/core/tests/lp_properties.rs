use trip::instance::gen_random;
use trip::num::{rat, to_f64};
use trip::oracle::brute_force_ip;
use trip::simplex::{
    build_lp, capacity_row, extract_components, solve_lp, solve_lp_from, SimplexOptions,
};

fn suite() -> Vec<trip::TripInstance> {
    let mut out = Vec::new();
    for seed in 0..220u64 {
        let n = 2 + (seed % 5) as usize;
        let m = 2 + ((seed / 5) % 5) as usize;
        let hi = if seed % 2 == 0 { 1 } else { 2 };
        let delta = 1 + (seed % 7) as i64;
        out.push(gen_random(1000 + seed, n, m, 0, hi, delta, rat(3)).unwrap());
    }
    out
}

#[test]
fn vertex_solutions_have_one_fractional_component_and_tight_capacity() {
    let opts = SimplexOptions::default();
    for (k, inst) in suite().iter().enumerate() {
        let lp = build_lp(inst, &[]).unwrap();
        let sol = solve_lp(&lp, &opts);
        assert!(
            sol.is_optimal(),
            "instance {k}: {:?} {}",
            sol.status,
            sol.diagnostics
        );
        let fa = extract_components(inst, &sol);
        assert!(
            fa.components.len() <= 1,
            "instance {k}: {:?}",
            fa.components
        );
        if !fa.is_integral {
            let cap = sol.row_activity[capacity_row(&lp)];
            assert!(
                (cap - to_f64(inst.delta_cap())).abs() <= 1e-7,
                "instance {k}: capacity {cap}"
            );
        }
    }
}

#[test]
fn relaxation_bounds_integer_optimum() {
    let opts = SimplexOptions::default();
    for seed in 0..60u64 {
        let hi = 1 + (seed % 2) as i64;
        let inst = gen_random(
            seed,
            3 + (seed % 2) as usize,
            3,
            0,
            hi,
            1 + (seed % 5) as i64,
            rat(3),
        )
        .unwrap();
        let sol = solve_lp(&build_lp(&inst, &[]).unwrap(), &opts);
        let opt = brute_force_ip(&inst).unwrap().objective;
        assert!(
            sol.objective <= to_f64(opt) + 1e-9,
            "seed {seed}: {} > {}",
            sol.objective,
            opt
        );
    }
}

#[test]
fn resolving_from_returned_basis_is_stable() {
    let opts = SimplexOptions::default();
    for inst in suite().iter().take(50) {
        let lp = build_lp(inst, &[]).unwrap();
        let a = solve_lp(&lp, &opts);
        let b = solve_lp_from(&lp, Some(&a.basis), &opts);
        assert!(b.is_optimal());
        assert!((a.objective - b.objective).abs() < 1e-9);
    }
}
