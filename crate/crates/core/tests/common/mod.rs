//! Shared random-instance generators for the integration suites.
//! All randomness is seeded; the suites are fully deterministic.
#![allow(dead_code)] // each test target compiles its own copy

use rand::prelude::*;
use rfot::model::{ratio, Capacity, Delay, Instance, Rational};
use rfot::paths::enumerate_paths;
use rfot::Caps;

pub fn harmonic(r: u64) -> Rational {
    (1..=r).map(|i| ratio(1, i as i64)).sum()
}

fn random_capacity(rng: &mut impl Rng) -> Capacity {
    if rng.gen_bool(0.5) {
        Capacity::Finite(ratio(rng.gen_range(1..=3), 1))
    } else {
        Capacity::Finite(ratio(rng.gen_range(1..=4), rng.gen_range(1..=3)))
    }
}

fn random_delay(rng: &mut impl Rng, allow_infinite: bool) -> Delay {
    if allow_infinite && rng.gen_bool(0.15) {
        Delay::Infinite
    } else {
        Delay::Finite(rng.gen_range(0..=2))
    }
}

type EdgeSpec = (String, String, String, Capacity, u64, Delay);

/// Random multigraph with a guaranteed s-d path: a chain through a few
/// intermediate vertices first, then arbitrary extra edges (the sink never
/// gains outgoing edges).
fn random_edges(
    rng: &mut impl Rng,
    vertex_count: usize,
    edge_count: usize,
    max_tau: u64,
    allow_infinite: bool,
) -> (Vec<String>, Vec<EdgeSpec>) {
    let vertices: Vec<String> = (0..vertex_count).map(|i| format!("n{i}")).collect();
    let sink = vertex_count - 1;
    let mut edges = Vec::new();

    let hops = rng.gen_range(1..=3.min(vertex_count - 1));
    let mut chain = vec![0usize];
    for _ in 1..hops {
        chain.push(rng.gen_range(1..vertex_count.saturating_sub(1).max(1)));
    }
    chain.push(sink);
    chain.dedup();
    for w in chain.windows(2) {
        if w[0] == sink {
            continue;
        }
        edges.push((
            format!("e{}", edges.len()),
            vertices[w[0]].clone(),
            vertices[w[1]].clone(),
            random_capacity(rng),
            rng.gen_range(0..=max_tau),
            random_delay(rng, allow_infinite),
        ));
    }
    while edges.len() < edge_count {
        let tail = loop {
            let t = rng.gen_range(0..vertex_count);
            if t != sink {
                break t;
            }
        };
        let head = loop {
            let h = rng.gen_range(0..vertex_count);
            if h != tail {
                break h;
            }
        };
        edges.push((
            format!("e{}", edges.len()),
            vertices[tail].clone(),
            vertices[head].clone(),
            random_capacity(rng),
            rng.gen_range(0..=max_tau),
            random_delay(rng, allow_infinite),
        ));
    }
    (vertices, edges)
}

/// Random instance with an arbitrary horizon (not necessarily T-bounded).
pub fn random_instance(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
    t_max: u64,
    gamma_max: usize,
    allow_infinite_delay: bool,
) -> Instance {
    let vertex_count = rng.gen_range(2..=max_vertices);
    let edge_count = rng.gen_range(1..=max_edges);
    let (vertices, edges) = random_edges(rng, vertex_count, edge_count, 2, allow_infinite_delay);
    let sink = vertices.last().unwrap().clone();
    Instance::new(
        vertices,
        edges,
        "n0",
        &sink,
        rng.gen_range(1..=t_max),
        rng.gen_range(0..=gamma_max),
    )
    .expect("random construction is well-formed")
}

/// Random finite-delay instance whose horizon is set to the worst path
/// length under the worst budget-limited scenario, making it T-bounded by
/// construction.
pub fn random_t_bounded_instance(
    rng: &mut impl Rng,
    max_vertices: usize,
    max_edges: usize,
    gamma_max: usize,
) -> Instance {
    let vertex_count = rng.gen_range(2..=max_vertices);
    let edge_count = rng.gen_range(1..=max_edges);
    let (vertices, edges) = random_edges(rng, vertex_count, edge_count, 2, false);
    let sink = vertices.last().unwrap().clone();
    let gamma = rng.gen_range(0..=gamma_max);
    let draft = Instance::new(vertices, edges, "n0", &sink, 1, gamma)
        .expect("random construction is well-formed");

    let mut worst: u64 = 1;
    for path in enumerate_paths(&draft, None, &Caps::default()).unwrap() {
        let tau = path.travel_time(&draft);
        let mut delays: Vec<u64> = path
            .edges()
            .iter()
            .map(|&e| draft.edge(e).delay.finite().unwrap())
            .collect();
        delays.sort_unstable_by(|a, b| b.cmp(a));
        let cut: u64 = delays.iter().take(gamma).sum();
        worst = worst.max(tau + cut);
    }
    draft.with_horizon(worst)
}

/// Random DAG instance (edges only go from lower to higher vertex index)
/// whose horizon covers the longest path.
pub fn random_dag_instance(rng: &mut impl Rng, max_vertices: usize, max_edges: usize) -> Instance {
    let vertex_count = rng.gen_range(2..=max_vertices);
    let vertices: Vec<String> = (0..vertex_count).map(|i| format!("n{i}")).collect();
    let sink = vertex_count - 1;
    let mut edges: Vec<EdgeSpec> = Vec::new();
    edges.push((
        "e0".into(),
        "n0".into(),
        vertices[sink].clone(),
        random_capacity(rng),
        rng.gen_range(0..=2),
        random_delay(rng, false),
    ));
    let edge_count = rng.gen_range(1..=max_edges);
    while edges.len() < edge_count {
        let tail = rng.gen_range(0..vertex_count - 1);
        let head = rng.gen_range(tail + 1..vertex_count);
        edges.push((
            format!("e{}", edges.len()),
            vertices[tail].clone(),
            vertices[head].clone(),
            random_capacity(rng),
            rng.gen_range(0..=2),
            random_delay(rng, false),
        ));
    }
    let draft = Instance::new(
        vertices.clone(),
        edges,
        "n0",
        &vertices[sink],
        1,
        rng.gen_range(0..=2),
    )
    .expect("random construction is well-formed");

    let mut longest: u64 = 1;
    for path in enumerate_paths(&draft, None, &Caps::default()).unwrap() {
        longest = longest.max(path.travel_time(&draft));
    }
    draft.with_horizon(longest)
}
