//! Structural parameters controlling the optimality gap of temporally
//! repeated flows: the T-bounded path length property, the coverability
//! number `k`, the window-cut ratio `eta`, the exact optimality gap, and
//! the asymptotic gap bound for finite delays.

use crate::model::{
    rat_u, scenario_count, subsets_up_to, Capacity, Delay, Instance, Path, Rational, Scenario,
};
use crate::paths::{enumerate_paths, PathMetrics};
use crate::solvers::{solve_general, solve_tr_exact};
use crate::{Caps, Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Outcome of the T-bounded path length check.
#[derive(Debug, Clone)]
pub struct TBoundedCheck {
    pub bounded: bool,
    /// A path and scenario whose joint travel time exceeds the horizon.
    pub witness: Option<(Path, Scenario)>,
}

/// Checks `max_{P, z} (tau(P) + Delta_z(P)) <= T` by enumerating all simple
/// s-d paths and delaying the worst `gamma` edges on each (deciding this is
/// NP-hard in general; brute force is fine at desk scale).
pub fn check_t_bounded(inst: &Instance, caps: &Caps) -> Result<TBoundedCheck> {
    let horizon = inst.horizon();
    for path in enumerate_paths(inst, None, caps)? {
        let tau = path.travel_time(inst);
        if tau > horizon {
            return Ok(TBoundedCheck {
                bounded: false,
                witness: Some((path, Scenario::empty())),
            });
        }
        if inst.budget() == 0 {
            continue;
        }
        if let Some(&e) = path
            .edges()
            .iter()
            .find(|&&e| inst.edge(e).delay.is_infinite())
        {
            return Ok(TBoundedCheck {
                bounded: false,
                witness: Some((path.clone(), Scenario::new(vec![e]))),
            });
        }
        let mut delays: Vec<(u64, usize)> = path
            .edges()
            .iter()
            .map(|&e| (inst.edge(e).delay.finite().expect("checked finite"), e))
            .collect();
        delays.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        delays.truncate(inst.budget());
        let total: u64 = delays.iter().map(|(d, _)| d).sum();
        if tau + total > horizon {
            let z = Scenario::new(delays.into_iter().map(|(_, e)| e).collect());
            return Ok(TBoundedCheck {
                bounded: false,
                witness: Some((path, z)),
            });
        }
    }
    Ok(TBoundedCheck {
        bounded: true,
        witness: None,
    })
}

/// Per-edge coverability data: the maximum number of pairwise disjoint
/// visit windows `I_{e,P}` and the greedy's covering time points.
#[derive(Debug, Clone)]
pub struct EdgeCoverage {
    pub edge: usize,
    pub k_e: usize,
    /// Witness times, ascending.
    pub witnesses: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct KReport {
    pub k: usize,
    pub per_edge: Vec<EdgeCoverage>,
}

/// Maximum stable set of a closed-interval family by the right-to-left
/// greedy sweep: repeatedly select the interval with the rightmost left
/// endpoint and discard everything intersecting it (endpoint touching
/// counts as intersecting). Returns the chosen left endpoints.
fn greedy_stable_set(mut intervals: Vec<(u64, u64)>) -> Vec<u64> {
    let mut witnesses = Vec::new();
    while !intervals.is_empty() {
        let &(lo, _) = intervals
            .iter()
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .expect("non-empty");
        witnesses.push(lo);
        intervals.retain(|&(_, hi)| hi < lo);
    }
    witnesses
}

/// Computes the coverability number `k = max_e k_e`, where `k_e` is the
/// maximum stable set of the intervals `I_{e,P} = [tau^{<e}(P), T - tau^{>=e}(P)]`
/// over simple s-d paths with `tau(P) <= T`. An instance whose paths all
/// miss the horizon has no intervals at all and is trivially 1-coverable.
pub fn compute_k(inst: &Instance, caps: &Caps) -> Result<KReport> {
    let horizon = inst.horizon();
    let paths = enumerate_paths(inst, Some(horizon), caps)?;
    let mut per_edge_intervals: Vec<Vec<(u64, u64)>> = vec![Vec::new(); inst.edges().len()];
    for path in &paths {
        let metrics = PathMetrics::new(inst, path);
        for (pos, &e) in path.edges().iter().enumerate() {
            let lo = metrics.prefix_tau(pos);
            let hi = horizon - metrics.suffix_tau(pos);
            // tau(P) = T yields a degenerate point interval, which is kept
            per_edge_intervals[e].push((lo, hi));
        }
    }
    let mut per_edge = Vec::with_capacity(inst.edges().len());
    let mut k = 0usize;
    for (e, intervals) in per_edge_intervals.into_iter().enumerate() {
        let mut witnesses = greedy_stable_set(intervals);
        witnesses.sort_unstable();
        let k_e = witnesses.len();
        k = k.max(k_e);
        per_edge.push(EdgeCoverage {
            edge: e,
            k_e,
            witnesses,
        });
    }
    Ok(KReport {
        k: k.max(1),
        per_edge,
    })
}

/// The worst ratio between a path's full dispatch window and what survives
/// a non-annihilating scenario, with the witnessing pair when above one.
#[derive(Debug, Clone)]
pub struct EtaReport {
    pub eta: Rational,
    pub witness: Option<(Path, Scenario)>,
}

/// Computes `eta = max (T - tau(P)) / (T - tau(P) - barDelta_z(P))` over
/// paths with `tau(P) < T` and on-path scenarios that cut strictly less
/// than the full window; 1 if no such pair exists. Scenarios never gain
/// from off-path edges, so only subsets of each path's finitely delayable
/// edges (sizes up to `gamma`) are enumerated.
pub fn compute_eta(inst: &Instance, caps: &Caps) -> Result<EtaReport> {
    let horizon = inst.horizon();
    let mut eta = Rational::one();
    let mut witness = None;
    for path in enumerate_paths(inst, Some(horizon - 1), caps)? {
        let window = horizon - path.travel_time(inst);
        let delayable: Vec<usize> = path
            .edges()
            .iter()
            .copied()
            .filter(|&e| matches!(inst.edge(e).delay, Delay::Finite(d) if d > 0))
            .collect();
        let g = inst.budget().min(delayable.len());
        if scenario_count(delayable.len(), g) > BigUint::from(caps.max_scenarios) {
            return Err(Error::CapExceeded {
                what: "on-path scenario",
                actual: 0,
                cap: caps.max_scenarios as u128,
            });
        }
        for subset in subsets_up_to(delayable.len(), g) {
            let cut: u64 = subset
                .iter()
                .map(|&i| inst.edge(delayable[i]).delay.finite().expect("filtered"))
                .sum();
            if cut == 0 || cut >= window {
                continue;
            }
            let ratio = rat_u(window) / rat_u(window - cut);
            if ratio > eta {
                let z = Scenario::new(subset.iter().map(|&i| delayable[i]).collect());
                eta = ratio;
                witness = Some((path.clone(), z));
            }
        }
    }
    Ok(EtaReport { eta, witness })
}

/// Exact optimality gap `f_general / f_tr`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gap {
    Finite(Rational),
    /// The temporally repeated optimum is zero while a general solution
    /// achieves positive value.
    Infinite,
}

impl Gap {
    pub fn display(&self) -> String {
        match self {
            Gap::Finite(g) => crate::model::fmt_rat(g),
            Gap::Infinite => "inf".to_string(),
        }
    }
}

/// Ratio of the optimal general robust value to the optimal temporally
/// repeated robust value. Both zero counts as gap 1 by convention.
pub fn optimality_gap(inst: &Instance, caps: &Caps) -> Result<Gap> {
    let tr = solve_tr_exact(inst, caps)?;
    let general = solve_general(inst, caps)?;
    if tr.robust_value.is_zero() {
        if general.robust_value.is_zero() {
            return Ok(Gap::Finite(Rational::one()));
        }
        return Ok(Gap::Infinite);
    }
    Ok(Gap::Finite(general.robust_value / tr.robust_value))
}

/// Upper bound on the gap from the asymptotic argument: any scenario
/// destroys at most `lambda* = gamma * max_e delta_e u_e` worth of flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AsymptoticBound {
    Bound(Rational),
    /// `F*(T) <= lambda*`: the bound carries no information.
    Undefined {
        nominal: Rational,
        lambda_star: Rational,
    },
}

impl AsymptoticBound {
    pub fn display(&self) -> String {
        match self {
            AsymptoticBound::Bound(b) => crate::model::fmt_rat(b),
            AsymptoticBound::Undefined { .. } => "na".to_string(),
        }
    }
}

/// Computes `F*(T) / (F*(T) - lambda*)` where `F*(T)` is the nominal
/// optimum (the budget-0 general solve). Requires all delays and
/// capacities finite.
pub fn asymptotic_bound(inst: &Instance, caps: &Caps) -> Result<AsymptoticBound> {
    let mut lambda_star = Rational::zero();
    for e in inst.edges() {
        let Delay::Finite(delta) = e.delay else {
            return Err(Error::Precondition(format!(
                "asymptotic bound requires finite delays, edge `{}` has delta=inf",
                e.id
            )));
        };
        let Capacity::Finite(u) = &e.capacity else {
            return Err(Error::Precondition(format!(
                "asymptotic bound requires finite capacities, edge `{}` has u=inf",
                e.id
            )));
        };
        let product = rat_u(delta) * u;
        if product > lambda_star {
            lambda_star = product;
        }
    }
    lambda_star *= rat_u(inst.budget() as u64);
    let nominal = solve_general(&inst.with_budget(0), caps)?.robust_value;
    if nominal > lambda_star {
        Ok(AsymptoticBound::Bound(&nominal / (&nominal - &lambda_star)))
    } else {
        Ok(AsymptoticBound::Undefined {
            nominal,
            lambda_star,
        })
    }
}

/// Aggregated structural report.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub t_bounded: TBoundedCheck,
    pub coverage: KReport,
    pub eta: EtaReport,
    /// Present when gap computation was requested.
    pub gap: Option<Gap>,
    /// Present when gap computation was requested and all data is finite.
    pub bound: Option<AsymptoticBound>,
}

impl AnalysisReport {
    /// The single-line external record.
    pub fn display(&self) -> String {
        format!(
            "report t_bounded={} k={} eta={} gap={} bound={}",
            self.t_bounded.bounded,
            self.coverage.k,
            crate::model::fmt_rat(&self.eta.eta),
            self.gap.as_ref().map_or("na".to_string(), Gap::display),
            self.bound
                .as_ref()
                .map_or("na".to_string(), AsymptoticBound::display),
        )
    }
}

/// Runs all structural analyses; the optimality gap and asymptotic bound
/// (which require full solves) only when `with_gap` is set.
pub fn analyze(inst: &Instance, with_gap: bool, caps: &Caps) -> Result<AnalysisReport> {
    let t_bounded = check_t_bounded(inst, caps)?;
    let coverage = compute_k(inst, caps)?;
    let eta = compute_eta(inst, caps)?;
    let (gap, bound) = if with_gap {
        let gap = optimality_gap(inst, caps)?;
        let all_finite = inst
            .edges()
            .iter()
            .all(|e| !e.delay.is_infinite() && !e.capacity.is_infinite());
        let bound = if all_finite {
            Some(asymptotic_bound(inst, caps)?)
        } else {
            None
        };
        (Some(gap), bound)
    } else {
        (None, None)
    };
    Ok(AnalysisReport {
        t_bounded,
        coverage,
        eta,
        gap,
        bound,
    })
}
