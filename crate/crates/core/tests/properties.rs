//! Module-level invariants on randomized inputs, exact throughout.

mod common;

use common::{random_instance, random_t_bounded_instance};
use proptest::prelude::{prop_assert_eq, proptest};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rfot::analysis::{
    asymptotic_bound, compute_eta, compute_k, optimality_gap, AsymptoticBound, Gap,
};
use rfot::evaluation::{
    greedy_adversary_tr, robust_value, robust_value_tr, tr_value_under_scenario,
    verify_feasibility, Feasibility,
};
use rfot::generators::{
    gen_clique_reduction, gen_disjoint_paths_reduction, gen_linear_gap, gen_log_gap,
    gen_static_embedding, static_data_of, DirectedGraph, UndirectedGraph,
};
use rfot::lp::{LpProblem, LpSolution, Relation};
use rfot::model::{
    enumerate_scenarios, rat, ratio, scenario_count, validate_instance, Capacity, Delay, Instance,
    Path, Rational, Scenario, TemporallyRepeatedFlow, Triple, TripleSolution,
};
use rfot::paths::{capped_delay, enumerate_paths, scenario_delay, PathMetrics};
use rfot::solvers::{solve_general, solve_tr_exact};
use rfot::Caps;

fn caps() -> Caps {
    Caps::default()
}

// -------------------------------------------------------------- model

proptest! {
    #[test]
    fn scenario_enumeration_is_complete_and_duplicate_free(
        edges in 1usize..9,
        gamma in 0usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64((edges * 31 + gamma) as u64);
        let mut inst = None;
        for _ in 0..10 {
            let candidate = random_instance(&mut rng, 4, edges, 3, gamma, true);
            if candidate.edges().len() == edges {
                inst = Some(candidate);
                break;
            }
        }
        let inst = match inst {
            Some(i) => i.with_budget(gamma),
            None => return Ok(()),
        };
        let all: Vec<Scenario> = enumerate_scenarios(&inst, &caps()).unwrap().collect();
        let unique: std::collections::BTreeSet<_> = all.iter().cloned().collect();
        prop_assert_eq!(unique.len(), all.len());
        let expected = scenario_count(inst.edges().len(), gamma);
        prop_assert_eq!(num_bigint::BigUint::from(all.len()), expected);
    }

    #[test]
    fn rational_addition_round_trips(
        an in -50i64..50, ad in 1i64..20,
        bn in -50i64..50, bd in 1i64..20,
    ) {
        let a = ratio(an, ad);
        let b = ratio(bn, bd);
        prop_assert_eq!(&(&a + &b) - &b, a);
    }
}

#[test]
fn generators_produce_valid_instances() {
    for r in 2..=6 {
        let (inst, cert) = gen_log_gap(r);
        assert!(validate_instance(&inst).is_empty());
        cert.validate(&inst).unwrap();
        let (inst, cert) = gen_linear_gap(r);
        assert!(validate_instance(&inst).is_empty());
        cert.validate(&inst).unwrap();
    }
    for (graph, r) in [
        (UndirectedGraph::complete(3), 3),
        (UndirectedGraph::complete(4), 4),
        (UndirectedGraph::cycle(5), 3),
    ] {
        let (inst, cand) = gen_clique_reduction(&graph, r).unwrap();
        assert!(validate_instance(&inst).is_empty());
        cand.validate(&inst).unwrap();
    }
    let g = DirectedGraph {
        n: 4,
        edges: vec![(1, 3), (2, 4), (1, 4)],
    };
    let inst = gen_disjoint_paths_reduction(&g, 1, 2, 3, 4).unwrap();
    assert!(validate_instance(&inst).is_empty());
    let (base, _) = gen_log_gap(3);
    let inst = gen_static_embedding(&static_data_of(&base)).unwrap();
    assert!(validate_instance(&inst).is_empty());
}

// -------------------------------------------------------------- paths

#[test]
fn path_metrics_and_delay_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let inst = random_instance(&mut rng, 5, 8, 4, 2, true);
        let paths = enumerate_paths(&inst, None, &caps()).unwrap();
        for p in &paths {
            let m = PathMetrics::new(&inst, p);
            for pos in 0..p.len() {
                let tau_e = inst.edge(p.edges()[pos]).travel_time;
                assert!(m.prefix_tau(pos) + tau_e <= m.total_tau);
                assert_eq!(m.prefix_tau(pos) + m.suffix_tau(pos), m.total_tau);
            }
            // disjoint finite scenarios add up
            let on_path: Vec<usize> = p
                .edges()
                .iter()
                .copied()
                .filter(|&e| !inst.edge(e).delay.is_infinite())
                .collect();
            if on_path.len() >= 2 {
                let z1 = Scenario::new(vec![on_path[0]]);
                let z2 = Scenario::new(vec![on_path[1]]);
                let both = Scenario::new(vec![on_path[0], on_path[1]]);
                if let (Delay::Finite(a), Delay::Finite(b), Delay::Finite(c)) = (
                    scenario_delay(&inst, p, &z1),
                    scenario_delay(&inst, p, &z2),
                    scenario_delay(&inst, p, &both),
                ) {
                    assert_eq!(a + b, c);
                }
            }
            // capped delay never exceeds the window, and matches the raw
            // delay whenever that fits
            let tau = p.travel_time(&inst);
            if tau <= inst.horizon() {
                let window = inst.horizon() - tau;
                for z in enumerate_scenarios(&inst, &caps()).unwrap().take(20) {
                    let capped = capped_delay(&inst, p, &z);
                    assert!(capped <= window);
                    if let Delay::Finite(d) = scenario_delay(&inst, p, &z) {
                        if d <= window {
                            assert_eq!(capped, d);
                        }
                    }
                }
            }
        }
    }
}

// -------------------------------------------------------------- lp

fn random_bounded_lp(rng: &mut impl Rng, vars: usize, rows: usize) -> LpProblem {
    let mut lp = LpProblem::new(vars);
    for j in 0..vars {
        lp.set_objective(j, rat(rng.gen_range(-3..=5)));
    }
    for _ in 0..rows {
        let mut terms: Vec<(usize, Rational)> = Vec::new();
        for j in 0..vars {
            if rng.gen_bool(0.6) {
                terms.push((j, rat(rng.gen_range(-2..=3))));
            }
        }
        lp.add_row(terms, Relation::Le, rat(rng.gen_range(0..=6)));
    }
    // keep the region bounded
    lp.add_row(
        (0..vars).map(|j| (j, rat(1))).collect(),
        Relation::Le,
        rat(10),
    );
    lp
}

#[test]
fn lp_certificates_and_row_permutation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..80 {
        let vars = rng.gen_range(1..=6);
        let rows = rng.gen_range(0..=6);
        let lp = random_bounded_lp(&mut rng, vars, rows);
        let LpSolution::Optimal(opt) = lp.solve(&caps()).unwrap() else {
            panic!("case {case}: bounded feasible LP must be optimal");
        };
        // strong duality exactly (also asserted inside solve)
        assert_eq!(opt.objective, lp.dual_objective(&opt));

        // same optimum after shuffling the constraint rows
        let mut shuffled_rows: Vec<_> = lp.rows().to_vec();
        shuffled_rows.shuffle(&mut rng);
        let mut shuffled = LpProblem::new(vars);
        for (j, c) in lp.objective().iter().enumerate() {
            shuffled.set_objective(j, c.clone());
        }
        for row in shuffled_rows {
            shuffled.add_row(row.terms, row.relation, row.rhs);
        }
        let LpSolution::Optimal(b) = shuffled.solve(&caps()).unwrap() else {
            panic!("case {case}: permuted LP must stay optimal");
        };
        assert_eq!(
            opt.objective, b.objective,
            "case {case}: permuted rows changed the optimum"
        );
    }
}

// -------------------------------------------------------------- evaluation

#[test]
fn budget_monotonicity_of_robust_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 5, 7, 4, 0, true);
        let paths = enumerate_paths(&inst, Some(inst.horizon() - 1), &caps()).unwrap();
        if paths.is_empty() {
            continue;
        }
        let sol = TripleSolution::new(
            paths
                .iter()
                .take(3)
                .map(|p| Triple {
                    path: p.clone(),
                    rate: ratio(1, 2),
                    a: 0,
                    b: inst.horizon(),
                })
                .collect(),
        );
        let mut previous: Option<Rational> = None;
        for gamma in 0..=3 {
            let v = robust_value(&inst.with_budget(gamma), &sol, &caps())
                .unwrap()
                .robust_value;
            if let Some(p) = previous {
                assert!(v <= p, "enlarging the budget increased the robust value");
            }
            previous = Some(v);
        }
    }
}

#[test]
fn tr_capped_loss_equals_direct_cutoff_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 5, 8, 4, 2, true);
        let result = solve_tr_exact(&inst, &caps()).unwrap();
        let as_triples = result.flow.to_triples(&inst);
        for z in enumerate_scenarios(&inst, &caps()).unwrap() {
            assert_eq!(
                tr_value_under_scenario(&inst, &result.flow, &z),
                rfot::evaluation::value_under_scenario(&inst, &as_triples, &z),
            );
        }
    }
}

#[test]
fn greedy_adversary_is_exact_on_t_bounded_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..60 {
        let inst = random_t_bounded_instance(&mut rng, 5, 8, 2);
        let result = solve_tr_exact(&inst, &caps()).unwrap();
        let greedy = greedy_adversary_tr(&inst, &result.flow, &caps()).unwrap();
        let enumerated = robust_value_tr(&inst, &result.flow, &caps()).unwrap();
        assert_eq!(
            tr_value_under_scenario(&inst, &result.flow, &greedy),
            enumerated.robust_value
        );
    }
}

// -------------------------------------------------------------- analysis

/// Independent stable-set oracle: recompute the visit windows from public
/// path APIs and brute-force the maximum pairwise-disjoint subset.
#[test]
fn coverability_matches_brute_force_stable_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 5, 7, 5, 2, false);
        let report = compute_k(&inst, &caps()).unwrap();
        let paths = enumerate_paths(&inst, Some(inst.horizon()), &caps()).unwrap();
        for cov in &report.per_edge {
            let intervals: Vec<(u64, u64)> = paths
                .iter()
                .filter_map(|p| {
                    let pos = p.position(cov.edge)?;
                    let m = PathMetrics::new(&inst, p);
                    Some((m.prefix_tau(pos), inst.horizon() - m.suffix_tau(pos)))
                })
                .collect();
            if intervals.len() > 12 {
                continue;
            }
            let mut best = 0usize;
            for mask in 0u32..(1 << intervals.len()) {
                let chosen: Vec<(u64, u64)> = intervals
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask & (1 << b) != 0)
                    .map(|(_, &iv)| iv)
                    .collect();
                let ok = chosen
                    .iter()
                    .enumerate()
                    .all(|(i, a)| chosen.iter().skip(i + 1).all(|b| a.1 < b.0 || b.1 < a.0));
                if ok {
                    best = best.max(chosen.len());
                }
            }
            assert_eq!(cov.k_e, best, "greedy stable set size must be maximum");
        }
    }
}

#[test]
fn gap_respects_asymptotic_bound_on_finite_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut comparable = 0;
    for _ in 0..60 {
        let inst = random_instance(&mut rng, 4, 6, 4, 2, false);
        let bound = match asymptotic_bound(&inst, &caps()).unwrap() {
            AsymptoticBound::Bound(b) => b,
            AsymptoticBound::Undefined { .. } => continue,
        };
        let gap = match optimality_gap(&inst, &caps()).unwrap() {
            Gap::Finite(g) => g,
            Gap::Infinite => panic!("finite bound implies finite gap"),
        };
        assert!(
            gap <= bound,
            "optimality gap must respect the asymptotic bound"
        );
        comparable += 1;
    }
    assert!(comparable >= 10, "suite must exercise defined bounds");
}

#[test]
fn eta_is_one_for_zero_or_infinite_delays() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..40 {
        // all delays in {0, inf}: every nonempty on-path scenario either
        // cuts nothing or the whole window
        let base = random_instance(&mut rng, 5, 8, 4, 2, false);
        let edges = base
            .edges()
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    base.vertex_name(e.tail).to_string(),
                    base.vertex_name(e.head).to_string(),
                    e.capacity.clone(),
                    e.travel_time,
                    if rng.gen_bool(0.5) {
                        Delay::Infinite
                    } else {
                        Delay::Finite(0)
                    },
                )
            })
            .collect();
        let inst = Instance::new(
            base.vertex_names().to_vec(),
            edges,
            base.vertex_name(base.source()),
            base.vertex_name(base.sink()),
            base.horizon(),
            base.budget(),
        )
        .unwrap();
        assert_eq!(compute_eta(&inst, &caps()).unwrap().eta, rat(1));
    }
}

// -------------------------------------------------------------- generators

#[test]
fn clique_reduction_equivalence_holds_at_r_four() {
    // at r = 4 early collisions are impossible (gamma = 4 < binom(4,2)),
    // so infeasibility is exactly K_4 existence
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (inst, cand) = gen_clique_reduction(&UndirectedGraph::complete(4), 4).unwrap();
    assert!(!verify_feasibility(&inst, &cand, &caps())
        .unwrap()
        .is_feasible());

    let mut checked = 0;
    while checked < 25 {
        let n = rng.gen_range(4..=7);
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                if rng.gen_bool(0.55) {
                    edges.push((i, j));
                }
            }
        }
        if edges.len() < n {
            continue;
        }
        let graph = UndirectedGraph::new(n, edges).unwrap();
        let (inst, cand) = gen_clique_reduction(&graph, 4).unwrap();
        let feasible = verify_feasibility(&inst, &cand, &caps())
            .unwrap()
            .is_feasible();
        assert_eq!(!feasible, graph.has_clique(4));
        checked += 1;
    }
}

#[test]
fn disjoint_paths_reduction_yes_and_no_instances() {
    // YES: two vertex-disjoint terminal paths; the two unit triples reach
    // robust value 1
    let yes = DirectedGraph {
        n: 4,
        edges: vec![(1, 3), (2, 4)],
    };
    let inst = gen_disjoint_paths_reduction(&yes, 1, 2, 3, 4).unwrap();
    let p1 = Path::from_edge_ids(&inst, &["s1", "g0", "t1"]).unwrap();
    let p2 = Path::from_edge_ids(&inst, &["s2", "g1", "t2"]).unwrap();
    let sol = TripleSolution::new(vec![
        Triple {
            path: p1,
            rate: rat(1),
            a: 0,
            b: 1,
        },
        Triple {
            path: p2,
            rate: rat(1),
            a: 0,
            b: 1,
        },
    ]);
    assert!(verify_feasibility(&inst, &sol, &caps())
        .unwrap()
        .is_feasible());
    assert_eq!(
        robust_value(&inst, &sol, &caps()).unwrap().robust_value,
        rat(1)
    );

    // NO: both terminal pairs must cross the same middle edge; every
    // feasible unit-rate solution on at most two paths has robust value 0
    let no = DirectedGraph {
        n: 6,
        edges: vec![(1, 5), (5, 6), (6, 3), (2, 5), (6, 4)],
    };
    let inst = gen_disjoint_paths_reduction(&no, 1, 2, 3, 4).unwrap();
    let paths = enumerate_paths(&inst, Some(inst.horizon() - 1), &caps()).unwrap();
    let intervals = [(0u64, 1u64), (1, 2), (0, 2)];
    let mut candidates: Vec<TripleSolution> = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        for (a, b) in intervals {
            candidates.push(TripleSolution::new(vec![Triple {
                path: p.clone(),
                rate: rat(1),
                a,
                b,
            }]));
            for q in paths.iter().skip(i + 1) {
                for (a2, b2) in intervals {
                    candidates.push(TripleSolution::new(vec![
                        Triple {
                            path: p.clone(),
                            rate: rat(1),
                            a,
                            b,
                        },
                        Triple {
                            path: q.clone(),
                            rate: rat(1),
                            a: a2,
                            b: b2,
                        },
                    ]));
                }
            }
        }
    }
    let mut feasible_count = 0;
    for sol in candidates {
        if let Feasibility::Feasible = verify_feasibility(&inst, &sol, &caps()).unwrap() {
            feasible_count += 1;
            assert_eq!(
                robust_value(&inst, &sol, &caps()).unwrap().robust_value,
                rat(0),
                "NO-instances admit no positive-robust-value integral solution"
            );
        }
    }
    assert!(
        feasible_count > 0,
        "the NO-instance check must see feasible candidates"
    );
}

// -------------------------------------------------------------- solvers

#[test]
fn gap_families_scale_exactly() {
    // log-gap ratio is H_r, linear-gap ratio is r
    for r in 2..=5u64 {
        let (inst, _) = gen_log_gap(r);
        let tr = solve_tr_exact(&inst, &caps()).unwrap();
        let gen = solve_general(&inst, &caps()).unwrap();
        let h = common::harmonic(r);
        assert_eq!(&gen.robust_value / &tr.robust_value, h);
    }
    for r in 2..=4u64 {
        let (inst, _) = gen_linear_gap(r);
        let tr = solve_tr_exact(&inst, &caps()).unwrap();
        let gen = solve_general(&inst, &caps()).unwrap();
        assert_eq!(&gen.robust_value / &tr.robust_value, rat(r as i64));
    }
}

#[test]
fn tr_solutions_are_capacity_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, 5, 8, 4, 2, true);
        let result = solve_tr_exact(&inst, &caps()).unwrap();
        result.flow.validate(&inst).unwrap();
        for (e, edge) in inst.edges().iter().enumerate() {
            if let Capacity::Finite(u) = &edge.capacity {
                assert!(result.flow.edge_load(e) <= *u);
            }
        }
        // general solutions pass the scenario-wise verifier
        let general = solve_general(&inst, &caps()).unwrap();
        assert!(verify_feasibility(&inst, &general.solution, &caps())
            .unwrap()
            .is_feasible());
    }
}

#[test]
fn tr_flow_reconstruction_from_text_round_trips() {
    use rfot::model::text::{parse_solution, write_tr, Solution};
    let (inst, _) = gen_log_gap(3);
    let result = solve_tr_exact(&inst, &caps()).unwrap();
    let text = write_tr(&result.flow, &inst);
    match parse_solution(&text, &inst).unwrap() {
        Solution::TemporallyRepeated(flow) => {
            assert_eq!(flow, result.flow);
            let report = robust_value_tr(&inst, &flow, &caps()).unwrap();
            assert_eq!(report.robust_value, result.robust_value);
        }
        _ => panic!("expected temporally repeated solution"),
    }
    let _ = TemporallyRepeatedFlow::default();
}
