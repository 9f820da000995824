use std::time::Duration;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shmnet_lp::oracle::{binary_enumeration, random_binary_program, random_lp, vertex_enumeration};
use shmnet_lp::{solve_lp, solve_milp, tol, Status};

#[test]
fn lp_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let model = random_lp(&mut rng, 5, 8);
        let expected = vertex_enumeration(&model).expect("generator builds feasible LPs");
        let got = solve_lp(&model);
        assert_eq!(got.status, Status::Optimal, "case {case}");
        assert!(
            (got.objective_value - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
            "case {case}: simplex {} vs vertices {expected}",
            got.objective_value
        );
        assert!(model.max_violation(&got.values) <= tol::FEASIBILITY);
    }
}

#[test]
fn lp_solutions_are_basic() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let model = random_lp(&mut rng, 6, 5);
        let s = solve_lp(&model);
        for j in 0..model.num_vars() {
            if s.basic[j] {
                continue;
            }
            let v = s.values[j];
            let at_bound = (v - model.lower(j)).abs() <= tol::BOUND || (v - model.upper(j)).abs() <= tol::BOUND;
            assert!(at_bound, "nonbasic x{j} = {v} strictly inside its bounds");
        }
    }
}

#[test]
fn branch_and_bound_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut feasible = 0;
    for case in 0..200 {
        let vars = 3 + case % 10;
        let model = random_binary_program(&mut rng, vars, 1 + case % 6);
        let expected = binary_enumeration(&model);
        let got = solve_milp(&model, Duration::from_secs(30)).unwrap();
        match expected {
            None => assert_eq!(got.status, Status::Infeasible, "case {case}"),
            Some((obj, _)) => {
                feasible += 1;
                assert_eq!(got.status, Status::Optimal, "case {case}");
                assert!((got.objective_value - obj).abs() <= tol::OBJECTIVE, "case {case}");
                assert!(model.is_feasible(&got.values));
                let lp = solve_lp(&model);
                let relaxation_ok = match model.sense() {
                    shmnet_lp::Sense::Minimize => lp.objective_value <= obj + 1e-6,
                    shmnet_lp::Sense::Maximize => lp.objective_value >= obj - 1e-6,
                };
                assert!(relaxation_ok, "case {case}: relaxation bound violated");
            }
        }
    }
    assert!(feasible > 50, "generator produced too few feasible programs");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolving_is_bit_identical(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_binary_program(&mut rng, 8, 4);
        let a = solve_milp(&model, Duration::from_secs(30)).unwrap();
        let b = solve_milp(&model, Duration::from_secs(30)).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.nodes_explored, b.nodes_explored);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a.values), bits(&b.values));
    }
}
