//! Optimal robust flows: temporally repeated flows via the
//! scenario-enumeration LP or via the compact reformulation with column
//! generation, and general dispatch solutions via the time-indexed LP.

use crate::analysis::check_t_bounded;
use crate::lp::{LpOptimum, LpProblem, LpSolution, Relation};
use crate::model::{
    enumerate_scenarios, rat_u, Capacity, Delay, Instance, Path, Rational, Scenario,
    TemporallyRepeatedFlow, Triple, TripleSolution,
};
use crate::paths::{capped_delay, enumerate_paths, PathMetrics};
use crate::{Caps, Error, Result};
use num_traits::{One, Signed, Zero};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrMode {
    ScenarioEnumeration,
    CompactColumnGeneration,
}

/// Dual certificates of a temporally repeated solve.
#[derive(Debug, Clone)]
pub enum TrDuals {
    /// Duals of the scenario-enumeration LP: one alpha per edge (zero for
    /// uncapacitated edges), one beta per enumerated scenario.
    PerScenario {
        alpha: Vec<Rational>,
        beta: Vec<(Scenario, Rational)>,
    },
    /// Duals of the compact reformulation: alpha per capacity row, beta per
    /// delayable-edge row (zeros where no row exists).
    PerEdge {
        alpha: Vec<Rational>,
        beta: Vec<Rational>,
    },
}

#[derive(Debug, Clone)]
pub struct TrSolveResult {
    pub flow: TemporallyRepeatedFlow,
    pub robust_value: Rational,
    pub mode: TrMode,
    pub duals: TrDuals,
}

#[derive(Debug, Clone)]
pub struct GeneralSolveResult {
    pub solution: TripleSolution,
    pub robust_value: Rational,
}

/// The scenario-enumeration LP for temporally repeated flows, with the
/// variable/row bookkeeping needed to interpret its solution.
pub struct TrLp {
    pub lp: LpProblem,
    pub pool: Vec<Path>,
    pub scenarios: Vec<Scenario>,
    /// Edges owning a capacity row, in row order.
    pub capacity_rows: Vec<usize>,
}

/// Builds the LP: variables `x_P` for every simple path with `tau(P) < T`
/// plus the loss variable `lambda`; capacity rows over finite-capacity
/// edges; one row `sum barDelta_z(P) x_P - lambda <= 0` per scenario;
/// objective `max sum (T - tau(P)) x_P - lambda`.
pub fn build_tr_exact_lp(inst: &Instance, caps: &Caps) -> Result<TrLp> {
    let pool = enumerate_paths(inst, Some(inst.horizon() - 1), caps)?;
    let scenarios: Vec<Scenario> = enumerate_scenarios(inst, caps)?.collect();
    let lambda = pool.len();
    let mut lp = LpProblem::new(pool.len() + 1);
    for (p, path) in pool.iter().enumerate() {
        lp.set_objective(p, rat_u(inst.horizon() - path.travel_time(inst)));
    }
    lp.set_objective(lambda, -Rational::one());

    let mut capacity_rows = Vec::new();
    for (e, edge) in inst.edges().iter().enumerate() {
        if let Capacity::Finite(u) = &edge.capacity {
            let terms: Vec<(usize, Rational)> = pool
                .iter()
                .enumerate()
                .filter(|(_, p)| p.contains(e))
                .map(|(i, _)| (i, Rational::one()))
                .collect();
            if !terms.is_empty() {
                lp.add_row(terms, Relation::Le, u.clone());
                capacity_rows.push(e);
            }
        }
    }
    for z in &scenarios {
        let mut terms: Vec<(usize, Rational)> = Vec::new();
        for (p, path) in pool.iter().enumerate() {
            let bar = capped_delay(inst, path, z);
            if bar > 0 {
                terms.push((p, rat_u(bar)));
            }
        }
        terms.push((lambda, -Rational::one()));
        lp.add_row(terms, Relation::Le, Rational::zero());
    }
    Ok(TrLp {
        lp,
        pool,
        scenarios,
        capacity_rows,
    })
}

fn expect_optimum(solution: LpSolution, what: &str) -> Result<LpOptimum> {
    match solution {
        LpSolution::Optimal(opt) => Ok(opt),
        LpSolution::Unbounded => Err(Error::Unbounded(format!(
            "{what}: some path can carry unlimited value (no finite capacity or loss binds it)"
        ))),
        LpSolution::Infeasible => {
            unreachable!("the zero flow is always feasible")
        }
    }
}

fn collect_flow(pool: &[Path], primal: &[Rational]) -> TemporallyRepeatedFlow {
    TemporallyRepeatedFlow::new(
        pool.iter()
            .zip(primal)
            .filter(|(_, x)| x.is_positive())
            .map(|(p, x)| (p.clone(), x.clone()))
            .collect(),
    )
}

/// Optimal robust temporally repeated flow by full scenario enumeration.
/// Valid for arbitrary instances; infinite delays enter through the capped
/// window cut.
pub fn solve_tr_exact(inst: &Instance, caps: &Caps) -> Result<TrSolveResult> {
    let built = build_tr_exact_lp(inst, caps)?;
    let opt = expect_optimum(built.lp.solve(caps)?, "temporally repeated LP")?;

    let mut alpha = vec![Rational::zero(); inst.edges().len()];
    for (row, &e) in built.capacity_rows.iter().enumerate() {
        alpha[e] = opt.duals[row].clone();
    }
    let beta = built
        .scenarios
        .iter()
        .cloned()
        .zip(opt.duals[built.capacity_rows.len()..].iter().cloned())
        .collect();
    Ok(TrSolveResult {
        flow: collect_flow(&built.pool, &opt.primal),
        robust_value: opt.objective,
        mode: TrMode::ScenarioEnumeration,
        duals: TrDuals::PerScenario { alpha, beta },
    })
}

struct CompactLp {
    lp: LpProblem,
    capacity_rows: Vec<usize>,
    gamma_rows: Vec<usize>,
}

/// Restricted master of the compact reformulation over a path pool:
/// maximize `sum x_P (T - tau(P)) - Gamma g0 - sum g_e` subject to capacity
/// and `Delta_e sum_{P ni e} x_P - g0 - g_e <= 0` for delayable edges.
fn build_compact_lp(inst: &Instance, pool: &[Path]) -> CompactLp {
    let delayable: Vec<usize> = (0..inst.edges().len())
        .filter(|&e| matches!(inst.edge(e).delay, Delay::Finite(d) if d > 0))
        .filter(|&e| pool.iter().any(|p| p.contains(e)))
        .collect();
    let g0 = pool.len();
    let mut lp = LpProblem::new(pool.len() + 1 + delayable.len());
    for (p, path) in pool.iter().enumerate() {
        lp.set_objective(p, rat_u(inst.horizon() - path.travel_time(inst)));
    }
    lp.set_objective(g0, -rat_u(inst.budget() as u64));
    for (i, _) in delayable.iter().enumerate() {
        lp.set_objective(g0 + 1 + i, -Rational::one());
    }

    let mut capacity_rows = Vec::new();
    for (e, edge) in inst.edges().iter().enumerate() {
        if let Capacity::Finite(u) = &edge.capacity {
            let terms: Vec<(usize, Rational)> = pool
                .iter()
                .enumerate()
                .filter(|(_, p)| p.contains(e))
                .map(|(i, _)| (i, Rational::one()))
                .collect();
            if !terms.is_empty() {
                lp.add_row(terms, Relation::Le, u.clone());
                capacity_rows.push(e);
            }
        }
    }
    for (i, &e) in delayable.iter().enumerate() {
        let delta = inst.edge(e).delay.finite().expect("delayable is finite");
        let mut terms: Vec<(usize, Rational)> = pool
            .iter()
            .enumerate()
            .filter(|(_, p)| p.contains(e))
            .map(|(p, _)| (p, rat_u(delta)))
            .collect();
        terms.push((g0, -Rational::one()));
        terms.push((g0 + 1 + i, -Rational::one()));
        lp.add_row(terms, Relation::Le, Rational::zero());
    }
    CompactLp {
        lp,
        capacity_rows,
        gamma_rows: delayable,
    }
}

/// Dijkstra over nonnegative rational edge costs; returns the cheapest
/// simple s-d path and its cost.
fn shortest_path<F>(inst: &Instance, cost: F) -> Option<(Rational, Path)>
where
    F: Fn(usize) -> Rational,
{
    let n = inst.vertex_count();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in inst.edges().iter().enumerate() {
        adjacency[e.tail].push(i);
    }
    let mut dist: Vec<Option<Rational>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[inst.source()] = Some(Rational::zero());
    heap.push(Reverse((Rational::zero(), inst.source())));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].as_ref() != Some(&d) {
            continue;
        }
        if v == inst.sink() {
            break;
        }
        for &ei in &adjacency[v] {
            let edge = inst.edge(ei);
            let nd = &d + &cost(ei);
            if dist[edge.head].as_ref().is_none_or(|old| &nd < old) {
                dist[edge.head] = Some(nd.clone());
                pred[edge.head] = Some(ei);
                heap.push(Reverse((nd, edge.head)));
            }
        }
    }
    let total = dist[inst.sink()].clone()?;
    let mut edges = Vec::new();
    let mut v = inst.sink();
    while v != inst.source() {
        let e = pred[v].expect("predecessor chain reaches the source");
        edges.push(e);
        v = inst.edge(e).tail;
    }
    edges.reverse();
    Some((
        total,
        Path::new(inst, edges).expect("tree paths are simple"),
    ))
}

/// Optimal robust temporally repeated flow by column generation over the
/// compact reformulation. Requires the T-bounded path length property and
/// finite delays; pricing is a shortest-path problem with costs
/// `alpha_e + beta_e delta_e + tau_e`, and a column joins the pool while the
/// minimum stays below `T`. Agrees exactly with [`solve_tr_exact`] on its
/// domain.
pub fn solve_tr_compact(inst: &Instance, caps: &Caps) -> Result<TrSolveResult> {
    for e in inst.edges() {
        if e.delay.is_infinite() {
            return Err(Error::Precondition(format!(
                "compact mode requires finite delays, edge `{}` has delta=inf",
                e.id
            )));
        }
    }
    let check = check_t_bounded(inst, caps)?;
    if let Some((p, z)) = check.witness {
        return Err(Error::Precondition(format!(
            "compact mode requires the T-bounded path length property; path {} under scenario {{{}}} exceeds the horizon",
            p.display(inst),
            z.display(inst)
        )));
    }

    let horizon = rat_u(inst.horizon());
    let zero_result = || TrSolveResult {
        flow: TemporallyRepeatedFlow::default(),
        robust_value: Rational::zero(),
        mode: TrMode::CompactColumnGeneration,
        duals: TrDuals::PerEdge {
            alpha: vec![Rational::zero(); inst.edges().len()],
            beta: vec![Rational::zero(); inst.edges().len()],
        },
    };
    let seed = match shortest_path(inst, |e| rat_u(inst.edge(e).travel_time)) {
        // even the quickest path has an empty dispatch window
        Some((tau, _)) if tau >= horizon => return Ok(zero_result()),
        Some((_, path)) => path,
        None => return Ok(zero_result()),
    };

    let mut pool = vec![seed];
    let mut known: HashSet<Path> = pool.iter().cloned().collect();
    loop {
        let built = build_compact_lp(inst, &pool);
        let opt = expect_optimum(built.lp.solve(caps)?, "compact master LP")?;

        let mut alpha = vec![Rational::zero(); inst.edges().len()];
        for (row, &e) in built.capacity_rows.iter().enumerate() {
            alpha[e] = opt.duals[row].clone();
        }
        let mut beta = vec![Rational::zero(); inst.edges().len()];
        for (i, &e) in built.gamma_rows.iter().enumerate() {
            beta[e] = opt.duals[built.capacity_rows.len() + i].clone();
        }

        let (reduced, candidate) = shortest_path(inst, |e| {
            let edge = inst.edge(e);
            let delta = edge.delay.finite().expect("checked finite");
            &alpha[e] + &beta[e] * rat_u(delta) + rat_u(edge.travel_time)
        })
        .expect("a path exists once the seed was found");

        if reduced < horizon {
            assert!(
                known.insert(candidate.clone()),
                "pricing must return a path outside the pool"
            );
            pool.push(candidate);
            continue;
        }
        return Ok(TrSolveResult {
            flow: collect_flow(&pool, &opt.primal),
            robust_value: opt.objective,
            mode: TrMode::CompactColumnGeneration,
            duals: TrDuals::PerEdge { alpha, beta },
        });
    }
}

/// The time-indexed LP for general solutions, with its variable map.
pub struct GeneralLp {
    pub lp: LpProblem,
    pub pool: Vec<Path>,
    /// First variable index of each path's dispatch block.
    pub offsets: Vec<usize>,
    pub lambda: usize,
    pub scenarios: Vec<Scenario>,
}

/// Builds the LP with one variable per path and unit dispatch interval
/// (`x_P^i` for `0 <= i < T - tau(P)`) plus the loss `lambda`. Capacity is
/// enforced for every (edge, integer time, scenario); a term appears only
/// when the dispatch index lands inside the path's window, and an infinite
/// prefix delay drops the term (the particle never reaches the edge within
/// the horizon). One cutoff row per scenario collects the dispatch
/// intervals that miss the sink. Duplicate rows are emitted once.
pub fn build_general_lp(inst: &Instance, caps: &Caps) -> Result<GeneralLp> {
    let horizon = inst.horizon();
    let pool = enumerate_paths(inst, Some(horizon - 1), caps)?;
    let scenarios: Vec<Scenario> = enumerate_scenarios(inst, caps)?.collect();

    let mut offsets = Vec::with_capacity(pool.len());
    let mut total: usize = 0;
    let windows: Vec<u64> = pool.iter().map(|p| horizon - p.travel_time(inst)).collect();
    for w in &windows {
        offsets.push(total);
        total = total
            .checked_add(*w as usize)
            .filter(|&t| (t as u64) <= caps.max_lp_nonzeros)
            .ok_or(Error::CapExceeded {
                what: "general LP variable",
                actual: u128::MAX,
                cap: caps.max_lp_nonzeros as u128,
            })?;
    }
    let lambda = total;
    let mut lp = LpProblem::new(total + 1);
    for j in 0..total {
        lp.set_objective(j, Rational::one());
    }
    lp.set_objective(lambda, -Rational::one());

    let metrics: Vec<PathMetrics> = pool.iter().map(|p| PathMetrics::new(inst, p)).collect();
    let mut on_edge: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.edges().len()];
    for (p, path) in pool.iter().enumerate() {
        for (pos, &e) in path.edges().iter().enumerate() {
            on_edge[e].push((p, pos));
        }
    }

    let mut seen_rows: HashSet<(Vec<(usize, Rational)>, Rational)> = HashSet::new();
    let mut add_unique = |lp: &mut LpProblem, terms: Vec<(usize, Rational)>, rhs: Rational| {
        if seen_rows.insert((terms.clone(), rhs.clone())) {
            lp.add_row(terms, Relation::Le, rhs);
        }
    };

    for z in &scenarios {
        // arrival shift of each (path, position) under z; None = never
        let shifts: Vec<Vec<Option<u64>>> = pool
            .iter()
            .enumerate()
            .map(|(p, path)| {
                let mut acc: Option<u64> = Some(0);
                path.edges()
                    .iter()
                    .enumerate()
                    .map(|(pos, &e)| {
                        let here = acc.map(|d| metrics[p].prefix_tau(pos) + d);
                        if z.contains(e) {
                            acc = match (acc, inst.edge(e).delay) {
                                (Some(d), Delay::Finite(x)) => Some(d + x),
                                _ => None,
                            };
                        }
                        here
                    })
                    .collect()
            })
            .collect();

        for (e, edge) in inst.edges().iter().enumerate() {
            let Capacity::Finite(u) = &edge.capacity else {
                continue;
            };
            if on_edge[e].is_empty() {
                continue;
            }
            for t in 0..horizon {
                let mut terms: Vec<(usize, Rational)> = Vec::new();
                for &(p, pos) in &on_edge[e] {
                    let Some(shift) = shifts[p][pos] else {
                        continue;
                    };
                    if t < shift {
                        continue;
                    }
                    let i = t - shift;
                    if i < windows[p] {
                        terms.push((offsets[p] + i as usize, Rational::one()));
                    }
                }
                if !terms.is_empty() {
                    terms.sort_by_key(|(j, _)| *j);
                    add_unique(&mut lp, terms, u.clone());
                }
            }
        }

        let mut cut_terms: Vec<(usize, Rational)> = Vec::new();
        for (p, path) in pool.iter().enumerate() {
            let lo = match crate::paths::scenario_delay(inst, path, z) {
                Delay::Infinite => 0,
                Delay::Finite(d) => windows[p].saturating_sub(d),
            };
            for i in lo..windows[p] {
                cut_terms.push((offsets[p] + i as usize, Rational::one()));
            }
        }
        cut_terms.push((lambda, -Rational::one()));
        add_unique(&mut lp, cut_terms, Rational::zero());
    }

    Ok(GeneralLp {
        lp,
        pool,
        offsets,
        lambda,
        scenarios,
    })
}

/// Optimal general robust solution from the time-indexed LP; consecutive
/// equal-rate unit intervals merge into single dispatch triples.
pub fn solve_general(inst: &Instance, caps: &Caps) -> Result<GeneralSolveResult> {
    let built = build_general_lp(inst, caps)?;
    let opt = expect_optimum(built.lp.solve(caps)?, "general LP")?;

    let horizon = inst.horizon();
    let mut triples = Vec::new();
    for (p, path) in built.pool.iter().enumerate() {
        let window = horizon - path.travel_time(inst);
        let mut run: Option<(u64, u64, Rational)> = None;
        for i in 0..window {
            let rate = opt.primal[built.offsets[p] + i as usize].clone();
            run = match run {
                Some((a, b, r)) if b == i && r == rate => Some((a, i + 1, r)),
                other => {
                    if let Some((a, b, r)) = other {
                        if r.is_positive() {
                            triples.push(Triple {
                                path: path.clone(),
                                rate: r,
                                a,
                                b,
                            });
                        }
                    }
                    Some((i, i + 1, rate))
                }
            };
        }
        if let Some((a, b, r)) = run {
            if r.is_positive() {
                triples.push(Triple {
                    path: path.clone(),
                    rate: r,
                    a,
                    b,
                });
            }
        }
    }
    Ok(GeneralSolveResult {
        solution: TripleSolution::new(triples),
        robust_value: opt.objective,
    })
}
