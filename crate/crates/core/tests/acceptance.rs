//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shmnet_core::annealing::{build_sa_ilp, extract_sa_plan, sa_cost, sa_greedy, HeadRouting, SaSchedule, SaStep};
use shmnet_core::approx::{check_nonfull_frontier_property, daa, lpr, repair_accuracy};
use shmnet_core::experiment::{run_experiment, Algorithm, ExperimentConfig, NodeLimit, ResultRow};
use shmnet_core::milp_models::{build_ilp_p1, build_ilp_p3, extract_plan_p1, P1Options};
use shmnet_core::netmodel::{generate_random_topology, shortest_paths, DelayConstraints, EnergyParams, NetworkGraph};
use shmnet_core::plans::{
    centralized_baseline_energy, check_combinable, lower_bound_for, plan_energy, tree_solution, validate_plan,
};
use shmnet_core::trees::{build_dct, build_ddct_flow, build_ddct_ilp, meets_constraints, RoutedTree};
use shmnet_core::Error;
use shmnet_lp::oracle::{binary_enumeration, random_binary_program, random_lp, vertex_enumeration};
use shmnet_lp::{solve_lp, solve_milp, Status};

use common::{brute_ddct, brute_plan, brute_sa, depth_sum, random_graph, satisfies};

/// Absolute tolerance for LP and MILP objective agreement.
const OBJ_TOL: f64 = 1e-6;
/// Median tree-solution energy over the lower bound allowed for DAA and LPR.
const MEDIAN_GAP_LIMIT: f64 = 1.15;
/// In-network energy allowed as a fraction of the centralized baseline.
const CENTRAL_FRACTION: f64 = 0.5;
const SOLVER_BUDGET: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ddct_objective(t: &RoutedTree, g: &NetworkGraph) -> f64 {
    (0..g.num_nodes()).map(|v| t.weighted_depth(g, v)).sum()
}

fn golden_example() -> Outcome {
    let e = EnergyParams::default();
    let chain = NetworkGraph::path(4);
    let branch = NetworkGraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]).unwrap();
    let mut got = Vec::new();
    for g in [&chain, &branch] {
        let spt = shortest_paths(g);
        let tree = build_dct(g);
        got.push(centralized_baseline_energy(g, &spt, &e));
        got.push(plan_energy(&tree_solution(&tree), &spt, &e).unwrap().total);
    }
    let want = [6.0 * 8192.0, 3.0 * 8192.0 + 6.0 * 32.0, 5.0 * 8192.0, 3.0 * 8192.0 + 3.0 * 32.0];
    outcome(
        e.e_b() == 1.0 && got == want,
        format!("chain {} / {}, branch {} / {} bytes", got[0], got[1], got[2], got[3]),
    )
}

fn p3_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc2);
    let (mut checks, mut mismatches, mut infeasible) = (0, 0, 0);
    for graph in 0..25 {
        let size = rng.gen_range(4..=7);
        let g = random_graph(&mut rng, size, 0.45, if graph % 2 == 0 { 1 } else { 3 });
        for n in 2..=4 {
            let c = DelayConstraints::uniform(size, n);
            let expected = brute_ddct(&g, &c);
            let (model, _) = build_ilp_p3(&g, &c, None).unwrap();
            let flow = solve_milp(&model, SOLVER_BUDGET).unwrap();
            let routed = build_ddct_ilp(&g, &c, SOLVER_BUDGET);
            checks += 1;
            let ok = match expected {
                Some(best) => {
                    flow.status == Status::Optimal
                        && (flow.objective_value - best).abs() <= OBJ_TOL
                        && routed.is_ok_and(|t| satisfies(&t, &c) && (depth_sum(&t, &g) - best).abs() <= OBJ_TOL)
                }
                None => {
                    infeasible += 1;
                    flow.status == Status::Infeasible && matches!(routed, Err(Error::Infeasible(_)))
                }
            };
            if !ok {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checks} graph/limit pairs ({infeasible} infeasible), {mismatches} mismatches"),
    )
}

fn p1_exactness() -> Outcome {
    let e = EnergyParams::default();
    let graphs = [
        ("star", NetworkGraph::star(4)),
        ("chain", NetworkGraph::path(4)),
        ("complete", NetworkGraph::complete(4)),
    ];
    let mut mismatches = Vec::new();
    let mut checks = 0;
    for (name, g) in &graphs {
        let spt = shortest_paths(g);
        for n in 2..=4 {
            checks += 1;
            let c = DelayConstraints::uniform(4, n);
            let (model, layout) = build_ilp_p1(g, &spt, &e, &c, P1Options::default()).unwrap();
            let sol = solve_milp(&model, SOLVER_BUDGET);
            let oracle = brute_plan(&spt, &c, &e);
            let ok = match (&sol, &oracle) {
                (Ok(s), Some((best, _))) if s.status == Status::Optimal => {
                    let plan = extract_plan_p1(s, &layout);
                    (s.objective_value - best).abs() <= OBJ_TOL
                        && s.objective_value >= lower_bound_for(g, &c, &e) - OBJ_TOL
                        && plan.is_ok_and(|p| validate_plan(&p, &c).is_empty())
                }
                (Ok(s), None) => s.status == Status::Infeasible,
                _ => false,
            };
            if !ok {
                mismatches.push(format!("{name} n={n}"));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{checks} instances, mismatches: [{}]", mismatches.join(", ")),
    )
}

fn energy_of(rows: &[ResultRow], seed: u64, alg: Algorithm) -> Option<f64> {
    rows.iter()
        .find(|r| r.seed == seed && r.algorithm == alg)
        .and_then(|r| r.energy_total)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn approximation_quality() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.topology.num_nodes = 30;
    cfg.topology.side = 50.0;
    cfg.topology.tx_range = 30.0;
    cfg.topology.seeds = (1..=20).collect();
    cfg.constraints.n = NodeLimit::Uniform(6);
    cfg.energy.fft_bytes = 8192.0;
    cfg.energy.eig_bytes = 32.0;
    cfg.algorithms = vec![Algorithm::LowerBound, Algorithm::Lpr, Algorithm::Daa, Algorithm::Centralized];
    let rows = run_experiment(&cfg).unwrap();
    let mut above_bound = true;
    let mut gaps = [Vec::new(), Vec::new()];
    let mut worst_fraction: f64 = 0.0;
    for &seed in &cfg.topology.seeds {
        let lb = energy_of(&rows, seed, Algorithm::LowerBound).unwrap();
        let central = energy_of(&rows, seed, Algorithm::Centralized).unwrap();
        for (k, alg) in [Algorithm::Daa, Algorithm::Lpr].into_iter().enumerate() {
            match energy_of(&rows, seed, alg) {
                Some(energy) => {
                    above_bound &= energy >= lb;
                    gaps[k].push(energy / lb);
                    worst_fraction = worst_fraction.max(energy / central);
                }
                None => above_bound = false,
            }
        }
    }
    let complete = gaps.iter().all(|g| g.len() == 20);
    let (daa_gap, lpr_gap) = (median(gaps[0].clone()), median(gaps[1].clone()));
    let b = complete && daa_gap <= MEDIAN_GAP_LIMIT && lpr_gap <= MEDIAN_GAP_LIMIT;
    let c = complete && worst_fraction <= CENTRAL_FRACTION;
    outcome(
        above_bound && b && c,
        format!(
            "(a) {} (b) median gap daa {daa_gap:.4} lpr {lpr_gap:.4} {} (c) worst in-network/centralized {worst_fraction:.3} {}",
            if above_bound { "ok" } else { "FAILED" },
            if b { "ok" } else { "FAILED" },
            if c { "ok" } else { "FAILED" },
        ),
    )
}

fn monotone_in_delay() -> Outcome {
    let mut failures = Vec::new();
    let mut table = Vec::new();
    for seed in 1..=5u64 {
        let g = generate_random_topology(seed, 20, 50.0, 30.0).unwrap();
        let mut row = Vec::new();
        for n in 3..=6 {
            match build_ddct_ilp(&g, &DelayConstraints::uniform(20, n), SOLVER_BUDGET) {
                Ok(t) => row.push(ddct_objective(&t, &g)),
                Err(e) => {
                    failures.push(format!("seed {seed} n={n}: {e}"));
                    row.push(f64::NAN);
                }
            }
        }
        if row.windows(2).any(|w| !(w[1] <= w[0])) {
            failures.push(format!("seed {seed} not monotone"));
        }
        table.push(format!("{row:?}"));
    }
    outcome(
        failures.is_empty(),
        format!("optima for n=3..6: {}{}", table.join(" "), failures.join("; ")),
    )
}

fn structural_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc6);
    let mut violations = [0usize; 4];
    let (mut outputs, mut declined) = (0, 0);
    for case in 0..1000u64 {
        let size = rng.gen_range(5..=15);
        let g = if case % 2 == 0 {
            generate_random_topology(case, size, 50.0, rng.gen_range(15.0..40.0)).unwrap()
        } else {
            random_graph(&mut rng, size, 0.3, 3)
        };
        let c = DelayConstraints::uniform(size, rng.gen_range(2..=6));
        let spt = shortest_paths(&g);
        for t in [daa(&g, &c).map(|o| o.tree), lpr(&g, &c).map(|o| o.tree)] {
            let Ok(t) = t else {
                declined += 1;
                continue;
            };
            outputs += 1;
            violations[0] += usize::from(!t.respects_capacity(&c));
            let plan = tree_solution(&t);
            violations[1] += usize::from(!check_combinable(&plan) || !validate_plan(&plan, &c).is_empty());
            violations[2] += usize::from(!check_nonfull_frontier_property(&t, &g, &c));
            violations[3] += usize::from((0..size).any(|v| t.weighted_depth(&g, v) < spt.dist(v, 0) - 1e-9));
        }
    }
    outcome(
        violations.iter().all(|&v| v == 0) && outputs > 1000,
        format!(
            "{outputs} trees from 1000 instances ({declined} declined); violations: degree {}, combinable {}, frontier {}, height {}",
            violations[0], violations[1], violations[2], violations[3]
        ),
    )
}

fn solver_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc7);
    let mut lp_bad = 0;
    for _ in 0..100 {
        let vars = rng.gen_range(2..=6);
        let rows = rng.gen_range(1..=8);
        let model = random_lp(&mut rng, vars, rows);
        let expected = vertex_enumeration(&model);
        let got = solve_lp(&model);
        let ok = match expected {
            Some(v) => got.status == Status::Optimal && (got.objective_value - v).abs() <= OBJ_TOL * (1.0 + v.abs()),
            None => got.status == Status::Infeasible,
        };
        lp_bad += usize::from(!ok);
    }
    let mut bb_bad = 0;
    for case in 0..100 {
        let vars = 1 + case % 12;
        let rows = rng.gen_range(1..=6);
        let model = random_binary_program(&mut rng, vars, rows);
        let got = solve_milp(&model, SOLVER_BUDGET).unwrap();
        let ok = match binary_enumeration(&model) {
            Some((v, _)) => got.status == Status::Optimal && (got.objective_value - v).abs() <= OBJ_TOL,
            None => got.status == Status::Infeasible,
        };
        bb_bad += usize::from(!ok);
    }
    outcome(
        lp_bad == 0 && bb_bad == 0,
        format!("LP disagreements {lp_bad}/100, branch-and-bound disagreements {bb_bad}/100"),
    )
}

fn accuracy_feasibility() -> Outcome {
    let mut problems = Vec::new();
    let (mut both, mut ilp_infeasible, mut repair_declined) = (0, 0, 0);
    for seed in 0..100u64 {
        let size = 8 + (seed % 5) as usize;
        let g = generate_random_topology(1000 + seed, size, 50.0, 30.0).unwrap();
        let c = DelayConstraints::uniform(size, 6).with_accuracy(3);
        let exact = build_ddct_ilp(&g, &c, SOLVER_BUDGET);
        let repaired = daa(&g, &c).and_then(|o| repair_accuracy(&o.tree, &g, &c));
        match &exact {
            Ok(t) if !meets_constraints(t, &c) => problems.push(format!("seed {seed}: ILP tree violates limits")),
            Ok(_) => {}
            Err(Error::Infeasible(_)) => {
                ilp_infeasible += 1;
                if build_ddct_flow(&g, &c, SOLVER_BUDGET).is_ok() {
                    problems.push(format!("seed {seed}: ILP reports infeasible but the flow model solves"));
                }
            }
            Err(e) => problems.push(format!("seed {seed}: ILP error {e}")),
        }
        match &repaired {
            Ok(t) if !meets_constraints(t, &c) => problems.push(format!("seed {seed}: repaired tree violates limits")),
            Ok(_) => {}
            Err(_) => {
                repair_declined += 1;
                if exact.is_ok() {
                    problems.push(format!("seed {seed}: repair reports infeasible on a feasible instance"));
                }
            }
        }
        if let (Ok(a), Ok(b)) = (&exact, &repaired) {
            both += 1;
            if ddct_objective(a, &g) > ddct_objective(b, &g) + OBJ_TOL {
                problems.push(format!("seed {seed}: ILP objective above repaired DAA"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{both} instances solved by both, ILP infeasible {ilp_infeasible}, repair declined {repair_declined}; {}",
            if problems.is_empty() { "no problems".to_string() } else { problems.join("; ") }
        ),
    )
}

fn annealing_plans() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacc9);
    let mut problems = Vec::new();
    let mut verified = 0;
    for case in 0..20 {
        let size = rng.gen_range(4..=8);
        let g = random_graph(&mut rng, size, 0.35, 1);
        let spt = shortest_paths(&g);
        let k1 = rng.gen_range(1..size);
        let k2 = rng.gen_range(1..=size - k1);
        let sched = SaSchedule::new(vec![
            SaStep {
                k: k1,
                iterations: rng.gen_range(5..=50) as f64,
                a: rng.gen_range(1..=9) as f64 / 10.0,
            },
            SaStep {
                k: k2,
                iterations: rng.gen_range(5..=50) as f64,
                a: rng.gen_range(1..=9) as f64 / 10.0,
            },
        ]);
        let (model, layout) = build_sa_ilp(&g, &spt, &sched).unwrap();
        let sol = solve_milp(&model, SOLVER_BUDGET).unwrap();
        if sol.status != Status::Optimal {
            problems.push(format!("case {case}: ILP status {:?}", sol.status));
            continue;
        }
        let plan = extract_sa_plan(&sol, &layout).unwrap();
        let ilp_cost = sa_cost(&plan, &sched, &spt, HeadRouting::Chain).unwrap();
        let greedy = sa_greedy(&g, &spt, &sched).unwrap();
        let greedy_cost = sa_cost(&greedy, &sched, &spt, HeadRouting::Chain).unwrap();
        if greedy_cost < sol.objective_value - OBJ_TOL * (1.0 + ilp_cost) {
            problems.push(format!("case {case}: greedy {greedy_cost} below ILP {}", sol.objective_value));
        }
        if size <= 6 {
            verified += 1;
            let best = brute_sa(&spt, &sched);
            if (best - sol.objective_value).abs() > OBJ_TOL * (1.0 + best) || (best - ilp_cost).abs() > OBJ_TOL * (1.0 + best)
            {
                problems.push(format!("case {case}: ILP {} vs enumeration {best}", sol.objective_value));
            }
        }
    }
    outcome(
        problems.is_empty() && verified > 0,
        format!(
            "20 instances, {verified} checked by enumeration; {}",
            if problems.is_empty() { "no problems".to_string() } else { problems.join("; ") }
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, u64); 9] = [
        ("golden four-node examples", golden_example, 1),
        ("ILP_P3 equals tree enumeration", p3_exactness, 120),
        ("ILP_P1 equals plan enumeration", p1_exactness, 300),
        ("approximation quality at |V|=30", approximation_quality, 600),
        ("ILP_P3 monotone in delay budget", monotone_in_delay, 300),
        ("structural properties of DAA and LPR", structural_suites, 120),
        ("LP and branch-and-bound oracles", solver_correctness, 120),
        ("accuracy-constrained trees", accuracy_feasibility, 300),
        ("annealing plans", annealing_plans, 300),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let pass = result.pass && secs < *limit as f64;
        failed += usize::from(!pass);
        println!(
            "{} criterion {}: {name}: {} [{secs:.2}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
