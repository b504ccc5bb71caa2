//! Core instance and solution data types.
//!
//! An [`Instance`] is a directed multigraph with rational capacities,
//! integral travel times and delays, a source, a sink, a time horizon `T`
//! and a delay budget `gamma`. Solutions are either families of dispatch
//! triples ([`TripleSolution`]) or temporally repeated flows
//! ([`TemporallyRepeatedFlow`]).

pub mod text;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::{Caps, Error, Result};

/// Exact rational number used for all flow rates, capacities and LP data.
///
/// Backed by `num_rational::BigRational`, which keeps values in lowest terms
/// with a positive denominator.
pub type Rational = num_rational::BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair. Panics on zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an unsigned time value.
pub fn rat_u(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rat(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `-p` or `p/q` into a rational.
pub fn parse_rat(tok: &str) -> std::result::Result<Rational, String> {
    let mk = |s: &str| -> std::result::Result<BigInt, String> {
        s.parse::<BigInt>()
            .map_err(|_| format!("invalid integer `{s}`"))
    };
    match tok.split_once('/') {
        None => Ok(Rational::from_integer(mk(tok)?)),
        Some((p, q)) => {
            let den = mk(q)?;
            if den.is_zero() {
                return Err(format!("zero denominator in `{tok}`"));
            }
            Ok(Rational::new(mk(p)?, den))
        }
    }
}

/// Edge capacity: a rational flow-rate bound or unlimited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacity {
    Finite(Rational),
    Infinite,
}

impl Capacity {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Capacity::Finite(u) => Some(u),
            Capacity::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Capacity::Infinite)
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(u) => write!(f, "{}", fmt_rat(u)),
            Capacity::Infinite => write!(f, "inf"),
        }
    }
}

/// Edge delay: the amount the travel time grows when the adversary delays
/// the edge. `Infinite` means a delayed particle never arrives within any
/// horizon; arithmetic on it must go through the explicit capping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delay {
    Finite(u64),
    Infinite,
}

impl Delay {
    pub fn finite(&self) -> Option<u64> {
        match self {
            Delay::Finite(d) => Some(*d),
            Delay::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Delay::Infinite)
    }

    /// Sum of two delays, infinite-absorbing.
    pub fn plus(self, other: Delay) -> Delay {
        match (self, other) {
            (Delay::Finite(a), Delay::Finite(b)) => Delay::Finite(a + b),
            _ => Delay::Infinite,
        }
    }
}

impl fmt::Display for Delay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delay::Finite(d) => write!(f, "{d}"),
            Delay::Infinite => write!(f, "inf"),
        }
    }
}

/// A directed edge of the multigraph. Identity is by `id`, not by endpoints;
/// parallel edges are permitted and used by several constructions.
#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    /// Index of the tail vertex.
    pub tail: usize,
    /// Index of the head vertex.
    pub head: usize,
    pub capacity: Capacity,
    pub travel_time: u64,
    pub delay: Delay,
}

/// A robust maximum flow over time instance.
#[derive(Debug, Clone)]
pub struct Instance {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    horizon: u64,
    budget: usize,
}

/// Desk-scale bound on individual time values; keeps all path-length sums
/// comfortably inside 64-bit arithmetic.
pub const MAX_TIME_VALUE: u64 = 1 << 50;

impl Instance {
    /// Builds an instance from named vertices and edges. Unknown endpoint or
    /// duplicate names are rejected here; semantic invariants are checked
    /// separately by [`validate_instance`].
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Capacity, u64, Delay)>,
        source: &str,
        sink: &str,
        horizon: u64,
        budget: usize,
    ) -> Result<Instance> {
        let mut index = HashMap::new();
        for (i, name) in vertices.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidInstance(format!("duplicate vertex `{name}`")));
            }
        }
        let lookup = |name: &str| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidInstance(format!("unknown vertex `{name}`")))
        };
        let mut resolved = Vec::with_capacity(edges.len());
        for (id, tail, head, capacity, travel_time, delay) in edges {
            resolved.push(Edge {
                id,
                tail: lookup(&tail)?,
                head: lookup(&head)?,
                capacity,
                travel_time,
                delay,
            });
        }
        Ok(Instance {
            vertex_names: vertices,
            edges: resolved,
            source: lookup(source)?,
            sink: lookup(sink)?,
            horizon,
            budget,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertex_names[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Same instance with a different delay budget.
    pub fn with_budget(&self, budget: usize) -> Instance {
        let mut inst = self.clone();
        inst.budget = budget;
        inst
    }

    /// Same instance with a different time horizon.
    pub fn with_horizon(&self, horizon: u64) -> Instance {
        let mut inst = self.clone();
        inst.horizon = horizon;
        inst
    }
}

/// A violated instance invariant, reported as data by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SourceEqualsSink,
    HorizonTooSmall,
    SinkHasOutgoingEdge { edge: String },
    NonPositiveCapacity { edge: String },
    DuplicateEdgeId { edge: String },
    TimeValueTooLarge { what: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SourceEqualsSink => write!(f, "source and sink must differ"),
            Violation::HorizonTooSmall => write!(f, "horizon must be >= 1"),
            Violation::SinkHasOutgoingEdge { edge } => {
                write!(f, "sink has outgoing edge `{edge}`")
            }
            Violation::NonPositiveCapacity { edge } => {
                write!(f, "edge `{edge}` has non-positive capacity")
            }
            Violation::DuplicateEdgeId { edge } => write!(f, "duplicate edge id `{edge}`"),
            Violation::TimeValueTooLarge { what } => {
                write!(f, "{what} exceeds the desk-scale time bound 2^50")
            }
        }
    }
}

/// Checks every instance invariant and returns all violations found.
///
/// Structural problems (dangling endpoints, non-integral times) cannot be
/// represented by [`Instance`] at all; they are rejected with hard errors at
/// construction or parse time instead.
pub fn validate_instance(inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    if inst.source == inst.sink {
        out.push(Violation::SourceEqualsSink);
    }
    if inst.horizon < 1 {
        out.push(Violation::HorizonTooSmall);
    }
    if inst.horizon > MAX_TIME_VALUE {
        out.push(Violation::TimeValueTooLarge {
            what: "horizon".into(),
        });
    }
    let mut seen = HashSet::new();
    for e in &inst.edges {
        if e.tail == inst.sink {
            out.push(Violation::SinkHasOutgoingEdge { edge: e.id.clone() });
        }
        if let Capacity::Finite(u) = &e.capacity {
            if !u.is_positive() {
                out.push(Violation::NonPositiveCapacity { edge: e.id.clone() });
            }
        }
        if !seen.insert(e.id.clone()) {
            out.push(Violation::DuplicateEdgeId { edge: e.id.clone() });
        }
        if e.travel_time > MAX_TIME_VALUE {
            out.push(Violation::TimeValueTooLarge {
                what: format!("travel time of edge `{}`", e.id),
            });
        }
        if let Delay::Finite(d) = e.delay {
            if d > MAX_TIME_VALUE {
                out.push(Violation::TimeValueTooLarge {
                    what: format!("delay of edge `{}`", e.id),
                });
            }
        }
    }
    out
}

/// A simple s-d path, stored as edge indices chaining head-to-tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    edges: Vec<usize>,
}

impl Path {
    /// Validates that `edges` forms a simple s-d path in `inst`.
    pub fn new(inst: &Instance, edges: Vec<usize>) -> Result<Path> {
        if edges.is_empty() {
            return Err(Error::InvalidSolution("empty path".into()));
        }
        let mut visited = HashSet::new();
        let mut at = inst.source();
        visited.insert(at);
        for &e in &edges {
            let edge = inst
                .edges
                .get(e)
                .ok_or_else(|| Error::InvalidSolution(format!("edge index {e} out of range")))?;
            if edge.tail != at {
                return Err(Error::InvalidSolution(format!(
                    "edge `{}` does not continue the path at `{}`",
                    edge.id,
                    inst.vertex_name(at)
                )));
            }
            at = edge.head;
            if !visited.insert(at) {
                return Err(Error::InvalidSolution(format!(
                    "path revisits vertex `{}`",
                    inst.vertex_name(at)
                )));
            }
        }
        if at != inst.sink() {
            return Err(Error::InvalidSolution(format!(
                "path ends at `{}`, not at the sink",
                inst.vertex_name(at)
            )));
        }
        Ok(Path { edges })
    }

    /// Builds a path from edge ids.
    pub fn from_edge_ids(inst: &Instance, ids: &[&str]) -> Result<Path> {
        let mut edges = Vec::with_capacity(ids.len());
        for id in ids {
            edges.push(
                inst.edge_index(id)
                    .ok_or_else(|| Error::InvalidSolution(format!("unknown edge id `{id}`")))?,
            );
        }
        Path::new(inst, edges)
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.contains(&edge)
    }

    /// Position of `edge` on the path, if present.
    pub fn position(&self, edge: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == edge)
    }

    /// Total travel time along the path.
    pub fn travel_time(&self, inst: &Instance) -> u64 {
        self.edges.iter().map(|&e| inst.edge(e).travel_time).sum()
    }

    /// Comma-separated edge ids, the external path syntax.
    pub fn display(&self, inst: &Instance) -> String {
        self.edges
            .iter()
            .map(|&e| inst.edge(e).id.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A delay scenario: the set of edges the adversary delays, `|z| <= gamma`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    delayed: Vec<usize>,
}

impl Scenario {
    pub fn empty() -> Scenario {
        Scenario {
            delayed: Vec::new(),
        }
    }

    /// Builds a scenario from edge indices; sorts and deduplicates.
    pub fn new(mut delayed: Vec<usize>) -> Scenario {
        delayed.sort_unstable();
        delayed.dedup();
        Scenario { delayed }
    }

    pub fn delayed(&self) -> &[usize] {
        &self.delayed
    }

    pub fn len(&self) -> usize {
        self.delayed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delayed.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.delayed.binary_search(&edge).is_ok()
    }

    pub fn display(&self, inst: &Instance) -> String {
        self.delayed
            .iter()
            .map(|&e| inst.edge(e).id.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One dispatch triple: rate `rate` is sent into `path` during `[a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub path: Path,
    pub rate: Rational,
    pub a: u64,
    pub b: u64,
}

/// A general solution: a family of dispatch triples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleSolution {
    pub triples: Vec<Triple>,
}

impl TripleSolution {
    pub fn new(triples: Vec<Triple>) -> TripleSolution {
        TripleSolution { triples }
    }

    /// Checks the solution-encoding invariants: positive rates, integral
    /// dispatch intervals `0 <= a < b <= T`, and valid simple paths.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        for (i, t) in self.triples.iter().enumerate() {
            if !t.rate.is_positive() {
                return Err(Error::InvalidSolution(format!(
                    "triple {i} has non-positive rate"
                )));
            }
            if t.a >= t.b || t.b > inst.horizon() {
                return Err(Error::InvalidSolution(format!(
                    "triple {i} has dispatch interval [{}, {}) outside 0 <= a < b <= {}",
                    t.a,
                    t.b,
                    inst.horizon()
                )));
            }
            Path::new(inst, t.path.edges().to_vec())?;
        }
        Ok(())
    }

    /// Nominal amount of flow dispatched.
    pub fn total_dispatched(&self) -> Rational {
        self.triples
            .iter()
            .map(|t| &t.rate * rat_u(t.b - t.a))
            .sum()
    }
}

/// A temporally repeated flow: constant rate `x_P` into each path over the
/// implied dispatch interval `[0, T - tau(P))`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TemporallyRepeatedFlow {
    /// Path-to-rate assignment; paths are unique and rates positive.
    pub rates: Vec<(Path, Rational)>,
}

impl TemporallyRepeatedFlow {
    pub fn new(rates: Vec<(Path, Rational)>) -> TemporallyRepeatedFlow {
        TemporallyRepeatedFlow { rates }
    }

    /// Static edge load `x_e`: the sum of rates over paths containing `e`.
    pub fn edge_load(&self, edge: usize) -> Rational {
        self.rates
            .iter()
            .filter(|(p, _)| p.contains(edge))
            .map(|(_, x)| x.clone())
            .sum()
    }

    /// Checks the encoding invariants: positive rates on valid paths with a
    /// non-empty dispatch window, unique paths.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let mut seen = HashSet::new();
        for (p, x) in &self.rates {
            if !x.is_positive() {
                return Err(Error::InvalidSolution(
                    "temporally repeated rate must be positive".into(),
                ));
            }
            Path::new(inst, p.edges().to_vec())?;
            if p.travel_time(inst) >= inst.horizon() {
                return Err(Error::InvalidSolution(format!(
                    "path {} has empty dispatch window (travel time >= horizon)",
                    p.display(inst)
                )));
            }
            if !seen.insert(p.clone()) {
                return Err(Error::InvalidSolution(format!(
                    "duplicate path {} in temporally repeated flow",
                    p.display(inst)
                )));
            }
        }
        Ok(())
    }

    /// First statically overloaded edge, if any. A temporally repeated flow
    /// is feasible (under every scenario) exactly when there is none.
    pub fn first_overload(&self, inst: &Instance) -> Option<(usize, Rational)> {
        for (e, edge) in inst.edges().iter().enumerate() {
            if let Capacity::Finite(u) = &edge.capacity {
                let load = self.edge_load(e);
                if &load > u {
                    return Some((e, load));
                }
            }
        }
        None
    }

    /// Expands into dispatch triples `(P, x_P, [0, T - tau(P)))`.
    pub fn to_triples(&self, inst: &Instance) -> TripleSolution {
        let triples = self
            .rates
            .iter()
            .map(|(p, x)| Triple {
                path: p.clone(),
                rate: x.clone(),
                a: 0,
                b: inst.horizon() - p.travel_time(inst),
            })
            .collect();
        TripleSolution { triples }
    }
}

/// Number of scenarios `sum_{j=0}^{gamma} C(m, j)` for `m` edges.
pub fn scenario_count(edge_count: usize, gamma: usize) -> BigUint {
    let m = edge_count;
    let mut total = BigUint::one();
    let mut binom = BigUint::one();
    for j in 1..=gamma.min(m) {
        binom = binom * BigUint::from(m - j + 1) / BigUint::from(j);
        total += &binom;
    }
    total
}

/// Enumerates every scenario exactly once: subsets of edges of size
/// `0..=gamma`, ordered by size and lexicographically within a size.
///
/// Refuses with [`Error::CapExceeded`] when the scenario count exceeds
/// `caps.max_scenarios`.
pub fn enumerate_scenarios(inst: &Instance, caps: &Caps) -> Result<impl Iterator<Item = Scenario>> {
    let count = scenario_count(inst.edges().len(), inst.budget());
    if count > BigUint::from(caps.max_scenarios) {
        return Err(Error::CapExceeded {
            what: "scenario",
            actual: u128::try_from(&count).unwrap_or(u128::MAX),
            cap: caps.max_scenarios as u128,
        });
    }
    Ok(subsets_up_to(inst.edges().len(), inst.budget()).map(Scenario::new))
}

/// Subsets of `0..m` of size at most `k`, by size then lexicographic.
pub(crate) fn subsets_up_to(m: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    use itertools::Itertools;
    (0..=k.min(m)).flat_map(move |size| (0..m).combinations(size))
}
