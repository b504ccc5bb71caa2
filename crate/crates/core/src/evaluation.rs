//! Scenario-wise evaluation: robust values, worst-case adversaries,
//! capacity verification of candidate solutions, unit-interval averaging.

use crate::analysis;
use crate::model::{
    enumerate_scenarios, rat_u, scenario_count, subsets_up_to, Instance, Path, Rational, Scenario,
    TemporallyRepeatedFlow, Triple, TripleSolution,
};
use crate::paths::{capped_delay, prefix_delay, scenario_delay, PathMetrics};
use crate::{Caps, Error, Result};
use num_bigint::BigUint;
use num_traits::{Signed, Zero};

/// Result of a worst-case evaluation.
#[derive(Debug, Clone)]
pub struct AdversaryReport {
    pub worst_scenario: Scenario,
    pub robust_value: Rational,
    /// Full scenario-to-value table when requested via [`scenario_table`].
    pub per_scenario: Option<Vec<(Scenario, Rational)>>,
}

/// Number of time units of the dispatch window `[0, T - tau(P))` that
/// survive scenario `z` for flow entering path `P`: `max(0, T - tau - Delta_z)`.
fn surviving_cutoff(inst: &Instance, path: &Path, z: &Scenario) -> u64 {
    let tau = path.travel_time(inst);
    match scenario_delay(inst, path, z) {
        crate::model::Delay::Infinite => 0,
        crate::model::Delay::Finite(d) => {
            let horizon = inst.horizon() as i128;
            let cut = horizon - tau as i128 - d as i128;
            if cut <= 0 {
                0
            } else {
                cut as u64
            }
        }
    }
}

/// Amount of flow of `sol` reaching the sink by the horizon under scenario
/// `z`: each triple contributes its rate times `|[a, b) ∩ [0, cutoff)|`.
pub fn value_under_scenario(inst: &Instance, sol: &TripleSolution, z: &Scenario) -> Rational {
    let mut total = Rational::zero();
    for t in &sol.triples {
        let cutoff = surviving_cutoff(inst, &t.path, z);
        let hi = t.b.min(cutoff);
        if hi > t.a {
            total += &t.rate * rat_u(hi - t.a);
        }
    }
    total
}

/// Value of a temporally repeated flow under a single scenario, via the
/// capped window cut: `sum x_P (T - tau(P)) - sum x_P barDelta_z(P)`.
pub fn tr_value_under_scenario(
    inst: &Instance,
    flow: &TemporallyRepeatedFlow,
    z: &Scenario,
) -> Rational {
    let mut total = Rational::zero();
    for (p, x) in &flow.rates {
        let window = inst.horizon() - p.travel_time(inst);
        let cut = capped_delay(inst, p, z);
        total += x * rat_u(window - cut);
    }
    total
}

fn minimize_over_scenarios<F>(inst: &Instance, caps: &Caps, mut eval: F) -> Result<AdversaryReport>
where
    F: FnMut(&Scenario) -> Rational,
{
    let mut best: Option<(Scenario, Rational)> = None;
    for z in enumerate_scenarios(inst, caps)? {
        let v = eval(&z);
        let take = match &best {
            None => true,
            // exact minimum; ties go to the lexicographically smallest scenario
            Some((bz, bv)) => v < *bv || (v == *bv && z.delayed() < bz.delayed()),
        };
        if take {
            best = Some((z, v));
        }
    }
    let (worst_scenario, robust_value) = best.expect("scenario enumeration is never empty");
    Ok(AdversaryReport {
        worst_scenario,
        robust_value,
        per_scenario: None,
    })
}

/// Exact robust value of a triple solution: the minimum over all scenarios.
pub fn robust_value(inst: &Instance, sol: &TripleSolution, caps: &Caps) -> Result<AdversaryReport> {
    minimize_over_scenarios(inst, caps, |z| value_under_scenario(inst, sol, z))
}

/// Exact robust value of a temporally repeated flow.
pub fn robust_value_tr(
    inst: &Instance,
    flow: &TemporallyRepeatedFlow,
    caps: &Caps,
) -> Result<AdversaryReport> {
    minimize_over_scenarios(inst, caps, |z| tr_value_under_scenario(inst, flow, z))
}

/// Per-scenario value table for a triple solution.
pub fn scenario_table(
    inst: &Instance,
    sol: &TripleSolution,
    caps: &Caps,
) -> Result<Vec<(Scenario, Rational)>> {
    Ok(enumerate_scenarios(inst, caps)?
        .map(|z| {
            let v = value_under_scenario(inst, sol, &z);
            (z, v)
        })
        .collect())
}

/// Greedy adversary for temporally repeated flows on T-bounded instances
/// with finite delays: delays the (at most) `gamma` edges with the largest
/// product `delta_e * x_e`, ties by the smallest edge index. Exact there
/// because the inner adversary problem is an LP with a totally unimodular
/// constraint system, so the greedy vertex is optimal.
pub fn greedy_adversary_tr(
    inst: &Instance,
    flow: &TemporallyRepeatedFlow,
    caps: &Caps,
) -> Result<Scenario> {
    for e in inst.edges() {
        if e.delay.is_infinite() {
            return Err(Error::Precondition(format!(
                "greedy adversary requires finite delays, edge `{}` has delta=inf",
                e.id
            )));
        }
    }
    let check = analysis::check_t_bounded(inst, caps)?;
    if let Some((p, z)) = check.witness {
        return Err(Error::Precondition(format!(
            "greedy adversary requires a T-bounded instance; path {} under scenario {{{}}} exceeds the horizon",
            p.display(inst),
            z.display(inst)
        )));
    }

    let mut weighted: Vec<(usize, Rational)> = (0..inst.edges().len())
        .map(|e| {
            let delta = inst.edge(e).delay.finite().expect("checked finite");
            (e, flow.edge_load(e) * rat_u(delta))
        })
        .filter(|(_, w)| w.is_positive())
        .collect();
    weighted.sort_by(|(ea, wa), (eb, wb)| wb.cmp(wa).then(ea.cmp(eb)));
    weighted.truncate(inst.budget());
    Ok(Scenario::new(
        weighted.into_iter().map(|(e, _)| e).collect(),
    ))
}

/// A capacity violation witness: `load` flow enters `edge` at integer time
/// `time` under `scenario`.
#[derive(Debug, Clone)]
pub struct CapacityViolation {
    pub edge: usize,
    pub time: u64,
    pub scenario: Scenario,
    pub load: Rational,
}

impl CapacityViolation {
    /// The single-line external record format.
    pub fn display(&self, inst: &Instance) -> String {
        format!(
            "violation e={} t={} z={} load={} u={}",
            inst.edge(self.edge).id,
            self.time,
            self.scenario.display(inst),
            crate::model::fmt_rat(&self.load),
            inst.edge(self.edge).capacity
        )
    }
}

#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible,
    Violated(CapacityViolation),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Verifies that a triple solution obeys every capacity at every integer
/// time `t < T` under every scenario (deciding this is NP-hard in general;
/// this is the desk-scale brute force).
///
/// Two exact reductions keep the enumeration small: only delays on edges
/// that lie on a solution path affect loads, so scenarios are enumerated
/// over that subset; and only finite-capacity edges on solution paths can
/// be violated. Within an (edge, scenario) pair the integer time axis is
/// swept through the arrival intervals instead of point by point.
/// Violations are reported in (scenario, edge, time) order; capacity
/// overruns at `t >= T` are permitted by the model.
pub fn verify_feasibility(
    inst: &Instance,
    sol: &TripleSolution,
    caps: &Caps,
) -> Result<Feasibility> {
    sol.validate(inst)
        .map_err(|e| Error::Precondition(format!("solution fails encoding invariants: {e}")))?;

    let m = inst.edges().len();
    let mut on_path = vec![false; m];
    for t in &sol.triples {
        for &e in t.path.edges() {
            on_path[e] = true;
        }
    }
    let check_edges: Vec<usize> = (0..m)
        .filter(|&e| on_path[e] && !inst.edge(e).capacity.is_infinite())
        .collect();
    let effective: Vec<usize> = (0..m)
        .filter(|&e| {
            on_path[e]
                && match inst.edge(e).delay {
                    crate::model::Delay::Finite(d) => d > 0,
                    crate::model::Delay::Infinite => true,
                }
        })
        .collect();
    let gamma = inst.budget().min(effective.len());

    let count = scenario_count(effective.len(), gamma);
    let work = count * BigUint::from(check_edges.len().max(1));
    if work > BigUint::from(caps.max_scenarios) {
        return Err(Error::CapExceeded {
            what: "verifier scenario x edge",
            actual: u128::try_from(&work).unwrap_or(u128::MAX),
            cap: caps.max_scenarios as u128,
        });
    }

    let horizon = inst.horizon() as i128;
    let metrics: Vec<PathMetrics> = sol
        .triples
        .iter()
        .map(|t| PathMetrics::new(inst, &t.path))
        .collect();

    for subset in subsets_up_to(effective.len(), gamma) {
        let z = Scenario::new(subset.into_iter().map(|i| effective[i]).collect());
        for &e in &check_edges {
            if let Some(violation) = sweep_edge(inst, sol, &metrics, e, &z, horizon)? {
                return Ok(Feasibility::Violated(violation));
            }
        }
    }
    Ok(Feasibility::Feasible)
}

/// Sweeps the arrival intervals of all triples crossing `e` under `z` and
/// reports the earliest integer time `t < T` where the load exceeds the
/// capacity.
fn sweep_edge(
    inst: &Instance,
    sol: &TripleSolution,
    metrics: &[PathMetrics],
    e: usize,
    z: &Scenario,
    horizon: i128,
) -> Result<Option<CapacityViolation>> {
    let u = inst
        .edge(e)
        .capacity
        .finite()
        .expect("only finite-capacity edges are swept");

    let mut events: Vec<(i128, Rational)> = Vec::new();
    for (t, metric) in sol.triples.iter().zip(metrics) {
        let Some(pos) = t.path.position(e) else {
            continue;
        };
        let delay = match prefix_delay(inst, &t.path, e, z)? {
            crate::model::Delay::Finite(d) => d,
            // the particle never reaches e within any horizon
            crate::model::Delay::Infinite => continue,
        };
        let shift = metric.prefix_tau(pos) as i128 + delay as i128;
        events.push((t.a as i128 + shift, t.rate.clone()));
        events.push((t.b as i128 + shift, -&t.rate));
    }
    events.sort_by_key(|(t, _)| *t);

    let mut load = Rational::zero();
    let mut idx = 0;
    while idx < events.len() {
        let t0 = events[idx].0;
        while idx < events.len() && events[idx].0 == t0 {
            load += &events[idx].1;
            idx += 1;
        }
        if idx == events.len() {
            break; // all rates closed; load is zero from here on
        }
        if &load > u {
            let lo = t0.max(0);
            let hi = events[idx].0.min(horizon);
            if lo < hi {
                return Ok(Some(CapacityViolation {
                    edge: e,
                    time: lo as u64,
                    scenario: z.clone(),
                    load: load.clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// A piecewise constant path inflow: rate `segments[k].rate` holds on
/// `[segments[k].start, segments[k+1].start)`, the last segment extending to
/// the horizon. Support lies in `[0, T)`; breakpoints may be rational.
#[derive(Debug, Clone)]
pub struct PwSegment {
    pub start: Rational,
    pub rate: Rational,
}

#[derive(Debug, Clone)]
pub struct PiecewiseConstantFlow {
    flows: Vec<(Path, Vec<PwSegment>)>,
}

impl PiecewiseConstantFlow {
    /// Validates breakpoint ordering, nonnegative rates and support.
    pub fn new(
        inst: &Instance,
        flows: Vec<(Path, Vec<PwSegment>)>,
    ) -> Result<PiecewiseConstantFlow> {
        let horizon = rat_u(inst.horizon());
        for (path, segs) in &flows {
            Path::new(inst, path.edges().to_vec())?;
            for (k, seg) in segs.iter().enumerate() {
                if seg.rate.is_negative() {
                    return Err(Error::InvalidSolution("negative piecewise rate".into()));
                }
                if seg.start.is_negative() || seg.start >= horizon {
                    return Err(Error::InvalidSolution(
                        "piecewise breakpoint outside [0, T)".into(),
                    ));
                }
                if k > 0 && segs[k - 1].start >= seg.start {
                    return Err(Error::InvalidSolution(
                        "piecewise breakpoints must strictly increase".into(),
                    ));
                }
            }
        }
        Ok(PiecewiseConstantFlow { flows })
    }

    pub fn flows(&self) -> &[(Path, Vec<PwSegment>)] {
        &self.flows
    }

    /// Integral of one path's inflow over `[lo, hi)`.
    fn integral(segs: &[PwSegment], lo: &Rational, hi: &Rational, horizon: &Rational) -> Rational {
        let mut total = Rational::zero();
        for (k, seg) in segs.iter().enumerate() {
            if seg.rate.is_zero() {
                continue;
            }
            let end = segs.get(k + 1).map(|s| &s.start).unwrap_or(horizon);
            let a = if &seg.start > lo { &seg.start } else { lo };
            let b = if end < hi { end } else { hi };
            if b > a {
                total += &seg.rate * (b - a);
            }
        }
        total
    }
}

/// Amount of flow of a piecewise constant solution reaching the sink under
/// scenario `z`, by direct integration up to each path's cutoff.
pub fn value_under_scenario_pw(
    inst: &Instance,
    flow: &PiecewiseConstantFlow,
    z: &Scenario,
) -> Rational {
    let horizon = rat_u(inst.horizon());
    let zero = Rational::zero();
    let mut total = Rational::zero();
    for (path, segs) in &flow.flows {
        let cutoff = rat_u(surviving_cutoff(inst, path, z));
        total += PiecewiseConstantFlow::integral(segs, &zero, &cutoff, &horizon);
    }
    total
}

/// Exact robust value of a piecewise constant solution.
pub fn robust_value_pw(
    inst: &Instance,
    flow: &PiecewiseConstantFlow,
    caps: &Caps,
) -> Result<AdversaryReport> {
    minimize_over_scenarios(inst, caps, |z| value_under_scenario_pw(inst, flow, z))
}

/// Averages a piecewise constant flow over the unit intervals `[a, a+1)`,
/// producing an equivalent triple solution: per path, the output rate on
/// each unit interval is the integral of the input over it. Zero-rate
/// intervals are omitted and adjacent equal-rate intervals merged.
pub fn discretize(inst: &Instance, flow: &PiecewiseConstantFlow) -> TripleSolution {
    let horizon = rat_u(inst.horizon());
    let mut triples = Vec::new();
    for (path, segs) in &flow.flows {
        let mut run: Option<(u64, u64, Rational)> = None;
        for a in 0..inst.horizon() {
            let avg = PiecewiseConstantFlow::integral(segs, &rat_u(a), &rat_u(a + 1), &horizon);
            run = match run {
                Some((ra, rb, rate)) if rb == a && rate == avg => Some((ra, a + 1, rate)),
                other => {
                    if let Some((ra, rb, rate)) = other {
                        if rate.is_positive() {
                            triples.push(Triple {
                                path: path.clone(),
                                rate,
                                a: ra,
                                b: rb,
                            });
                        }
                    }
                    Some((a, a + 1, avg))
                }
            };
        }
        if let Some((ra, rb, rate)) = run {
            if rate.is_positive() {
                triples.push(Triple {
                    path: path.clone(),
                    rate,
                    a: ra,
                    b: rb,
                });
            }
        }
    }
    TripleSolution::new(triples)
}
