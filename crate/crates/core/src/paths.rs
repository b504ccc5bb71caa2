//! Simple-path enumeration and per-path/per-scenario delay arithmetic.

use crate::model::{Delay, Instance, Path, Scenario};
use crate::{Caps, Error, Result};

/// Travel-time breakdown of a path: the total, plus for every position the
/// time needed to reach that edge and the time from that edge (inclusive)
/// to the sink. `prefix + suffix == total` at every position.
#[derive(Debug, Clone)]
pub struct PathMetrics {
    pub total_tau: u64,
    prefix: Vec<u64>,
    suffix: Vec<u64>,
}

impl PathMetrics {
    pub fn new(inst: &Instance, path: &Path) -> PathMetrics {
        let taus: Vec<u64> = path
            .edges()
            .iter()
            .map(|&e| inst.edge(e).travel_time)
            .collect();
        let total_tau: u64 = taus.iter().sum();
        let mut prefix = Vec::with_capacity(taus.len());
        let mut acc = 0u64;
        for &t in &taus {
            prefix.push(acc);
            acc += t;
        }
        let suffix = prefix.iter().map(|&p| total_tau - p).collect();
        PathMetrics {
            total_tau,
            prefix,
            suffix,
        }
    }

    /// Travel time accumulated strictly before the edge at `pos`.
    pub fn prefix_tau(&self, pos: usize) -> u64 {
        self.prefix[pos]
    }

    /// Travel time from the edge at `pos` (inclusive) to the sink.
    pub fn suffix_tau(&self, pos: usize) -> u64 {
        self.suffix[pos]
    }
}

/// Enumerates all simple s-d paths, optionally only those with total travel
/// time at most `max_tau`. The order is deterministic: depth-first by edge
/// declaration order, which sorts paths lexicographically by their edge
/// index sequences.
///
/// Refuses with [`Error::CapExceeded`] beyond `caps.max_paths`.
pub fn enumerate_paths(inst: &Instance, max_tau: Option<u64>, caps: &Caps) -> Result<Vec<Path>> {
    if inst.source() == inst.sink() {
        return Ok(Vec::new());
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); inst.vertex_count()];
    for (i, e) in inst.edges().iter().enumerate() {
        adjacency[e.tail].push(i);
    }

    // explicit stack so deep chains cannot overflow the call stack
    struct Frame {
        vertex: usize,
        next: usize,
        tau: u64,
    }
    let mut on_path = vec![false; inst.vertex_count()];
    on_path[inst.source()] = true;
    let mut frames = vec![Frame {
        vertex: inst.source(),
        next: 0,
        tau: 0,
    }];
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut out: Vec<Path> = Vec::new();

    while let Some(top) = frames.last_mut() {
        if top.vertex == inst.sink() {
            if out.len() as u64 >= caps.max_paths {
                return Err(Error::CapExceeded {
                    what: "path",
                    actual: caps.max_paths as u128 + 1,
                    cap: caps.max_paths as u128,
                });
            }
            out.push(Path::new(inst, edge_stack.clone()).expect("DFS builds valid paths"));
            on_path[top.vertex] = false;
            frames.pop();
            edge_stack.pop();
            continue;
        }
        let mut descended = false;
        while top.next < adjacency[top.vertex].len() {
            let e = adjacency[top.vertex][top.next];
            top.next += 1;
            let edge = inst.edge(e);
            if on_path[edge.head] {
                continue;
            }
            let next_tau = top.tau + edge.travel_time;
            if let Some(bound) = max_tau {
                if next_tau > bound {
                    continue;
                }
            }
            on_path[edge.head] = true;
            edge_stack.push(e);
            frames.push(Frame {
                vertex: edge.head,
                next: 0,
                tau: next_tau,
            });
            descended = true;
            break;
        }
        if !descended {
            let finished = frames.pop().expect("frame exists");
            on_path[finished.vertex] = false;
            edge_stack.pop();
        }
    }
    Ok(out)
}

/// Total delay `Delta_z(P)` the scenario adds on the path: the sum of
/// delays over delayed on-path edges, infinite if any of them is.
pub fn scenario_delay(inst: &Instance, path: &Path, z: &Scenario) -> Delay {
    let mut total = Delay::Finite(0);
    for &e in path.edges() {
        if z.contains(e) {
            total = total.plus(inst.edge(e).delay);
        }
    }
    total
}

/// Effective flow-window cut `min(Delta_z(P), T - tau(P))`: the amount of
/// the dispatch window `[0, T - tau(P))` the scenario destroys. Requires
/// `tau(P) <= T`; infinite delays are capped to the full window.
pub fn capped_delay(inst: &Instance, path: &Path, z: &Scenario) -> u64 {
    let window = inst
        .horizon()
        .checked_sub(path.travel_time(inst))
        .expect("capped_delay requires tau(P) <= T");
    match scenario_delay(inst, path, z) {
        Delay::Finite(d) => d.min(window),
        Delay::Infinite => window,
    }
}

/// Delay accumulated strictly before `edge` on the path under scenario `z`.
pub fn prefix_delay(inst: &Instance, path: &Path, edge: usize, z: &Scenario) -> Result<Delay> {
    let pos = path.position(edge).ok_or_else(|| Error::EdgeNotOnPath {
        edge: inst.edge(edge).id.clone(),
    })?;
    let mut total = Delay::Finite(0);
    for &e in &path.edges()[..pos] {
        if z.contains(e) {
            total = total.plus(inst.edge(e).delay);
        }
    }
    Ok(total)
}
