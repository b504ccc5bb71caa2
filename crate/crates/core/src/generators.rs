//! Instance families: the gap constructions, the feasibility-hardness
//! reduction from clique, the integral-flow reduction from two disjoint
//! paths, and the static-flow embedding.

use crate::model::{rat, Capacity, Delay, Instance, Path, Triple, TripleSolution};
use crate::{Error, Result};

/// Undirected simple graph with vertices numbered `1..=n`.
#[derive(Debug, Clone)]
pub struct UndirectedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<UndirectedGraph> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::Precondition(format!(
                    "edge ({u},{v}) uses a vertex outside 1..={n}"
                )));
            }
            if u == v {
                return Err(Error::Precondition(format!("self loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Precondition(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(UndirectedGraph { n, edges })
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> UndirectedGraph {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                edges.push((i, j));
            }
        }
        UndirectedGraph { n, edges }
    }

    /// Cycle C_n.
    pub fn cycle(n: usize) -> UndirectedGraph {
        let edges = (1..=n).map(|i| (i, i % n + 1)).collect();
        UndirectedGraph { n, edges }
    }

    /// Brute-force check for a clique of size `r`.
    pub fn has_clique(&self, r: usize) -> bool {
        let mut adj = vec![vec![false; self.n + 1]; self.n + 1];
        for &(u, v) in &self.edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let mut chosen = Vec::new();
        fn extend(
            adj: &[Vec<bool>],
            n: usize,
            r: usize,
            start: usize,
            chosen: &mut Vec<usize>,
        ) -> bool {
            if chosen.len() == r {
                return true;
            }
            for v in start..=n {
                if chosen.iter().all(|&u| adj[u][v]) {
                    chosen.push(v);
                    if extend(adj, n, r, v + 1, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        extend(&adj, self.n, r, 1, &mut chosen)
    }
}

/// Directed graph with vertices numbered `1..=n`, input to the
/// disjoint-paths reduction.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Static robust flow data (no travel times, no horizon): the input to the
/// embedding of the static problem.
#[derive(Debug, Clone)]
pub struct StaticInstance {
    pub vertices: Vec<String>,
    /// (id, tail name, head name, capacity)
    pub edges: Vec<(String, String, String, Capacity)>,
    pub source: String,
    pub sink: String,
    pub budget: usize,
}

fn unit() -> Capacity {
    Capacity::Finite(rat(1))
}

/// Log-gap family: `r` parallel source edges with complementary travel
/// times and delays (`tau = i`, `delta = r - i`), one zero-length collector
/// edge `e*`, horizon `T = r`, budget `r - 1`, all capacities one. The
/// certificate dispatches one unit into every path over `[0, 1)` and always
/// retains robust value 1, while the best temporally repeated flow achieves
/// only `1/H_r`.
pub fn gen_log_gap(r: u64) -> (Instance, TripleSolution) {
    assert!(r >= 2, "log-gap family needs r >= 2");
    let mut edges = Vec::new();
    for i in 0..r {
        edges.push((
            format!("e{i}"),
            "s".to_string(),
            "v".to_string(),
            unit(),
            i,
            Delay::Finite(r - i),
        ));
    }
    edges.push((
        "e*".to_string(),
        "v".to_string(),
        "d".to_string(),
        unit(),
        0,
        Delay::Finite(0),
    ));
    let inst = Instance::new(
        vec!["s".into(), "v".into(), "d".into()],
        edges,
        "s",
        "d",
        r,
        (r - 1) as usize,
    )
    .expect("construction is well-formed");

    let estar = inst.edge_index("e*").unwrap();
    let triples = (0..r)
        .map(|i| {
            let e = inst.edge_index(&format!("e{i}")).unwrap();
            Triple {
                path: Path::new(&inst, vec![e, estar]).unwrap(),
                rate: rat(1),
                a: 0,
                b: 1,
            }
        })
        .collect();
    (inst, TripleSolution::new(triples))
}

/// Linear-gap family: `r` parallel entry and exit edges with infinite
/// delays, horizon `T = r`, budget `r - 1`. The certificate sends one unit
/// over each antidiagonal path (`tau = r - 1`) in `[0, 1)` for robust value
/// 1; temporally repeated flows achieve only `1/r`.
pub fn gen_linear_gap(r: u64) -> (Instance, TripleSolution) {
    assert!(r >= 2, "linear-gap family needs r >= 2");
    let mut edges = Vec::new();
    for i in 0..r {
        edges.push((
            format!("a{i}"),
            "s".to_string(),
            "v1".to_string(),
            unit(),
            i,
            Delay::Infinite,
        ));
    }
    edges.push((
        "e*".to_string(),
        "v1".to_string(),
        "v2".to_string(),
        unit(),
        0,
        Delay::Finite(0),
    ));
    for i in 0..r {
        edges.push((
            format!("b{i}"),
            "v2".to_string(),
            "d".to_string(),
            unit(),
            i,
            Delay::Infinite,
        ));
    }
    let inst = Instance::new(
        vec!["s".into(), "v1".into(), "v2".into(), "d".into()],
        edges,
        "s",
        "d",
        r,
        (r - 1) as usize,
    )
    .expect("construction is well-formed");

    let estar = inst.edge_index("e*").unwrap();
    let triples = (0..r)
        .map(|i| {
            let a = inst.edge_index(&format!("a{i}")).unwrap();
            let b = inst.edge_index(&format!("b{}", r - i - 1)).unwrap();
            Triple {
                path: Path::new(&inst, vec![a, estar, b]).unwrap(),
                rate: rat(1),
                a: 0,
                b: 1,
            }
        })
        .collect();
    (inst, TripleSolution::new(triples))
}

/// Reduction from the clique decision problem to solution-feasibility.
///
/// For an undirected simple graph on vertices `1..=n` with `m` edges and a
/// target clique size `r`, builds the gadget instance with `T = 2^(m+1) + 1`
/// and `gamma = r`, plus the unit-rate candidate solution with one triple
/// per graph edge. The candidate violates the bottleneck capacity
/// `binom(r,2) - 1` at time exactly `2^(m+1)` if and only if the graph has
/// an `r`-clique; for `r >= 4` no earlier violation is possible, so
/// infeasibility itself is equivalent to clique existence. (At `r = 3` a
/// vertex of degree >= 3 lets three once-delayed paths collide before
/// `2^(m+1)`, since 3 = binom(3,2); see the verifier tests.) Unspecified
/// edge attributes default to `u = inf`, `tau = 0`, `delta = 0`; per-vertex
/// delays are `2^i` and source-edge travel times `2^(m+1) - 2^i - 2^j`, so
/// simultaneous double delays collide exactly at `2^(m+1)`.
pub fn gen_clique_reduction(
    graph: &UndirectedGraph,
    r: usize,
) -> Result<(Instance, TripleSolution)> {
    if graph.edges.len() < graph.n {
        return Err(Error::Precondition(
            "clique reduction requires |edges| >= |vertices|".into(),
        ));
    }
    if r < 3 {
        return Err(Error::Precondition(
            "clique reduction requires r >= 3".into(),
        ));
    }
    let m = graph.edges.len();
    if m > 40 {
        return Err(Error::Precondition(
            "clique reduction limited to 40 graph edges (time values overflow beyond that)".into(),
        ));
    }

    let mut vertices = vec!["s".to_string(), "d0".to_string(), "d1".to_string()];
    for i in 1..=graph.n {
        vertices.push(format!("vl{i}"));
        vertices.push(format!("vr{i}"));
    }

    let inf = Capacity::Infinite;
    let mut edges = Vec::new();
    // gate edges (v_i^l -> v_i^r), the only delayable ones
    for i in 1..=graph.n {
        edges.push((
            format!("gate{i}"),
            format!("vl{i}"),
            format!("vr{i}"),
            inf.clone(),
            0,
            Delay::Finite(1u64 << i),
        ));
    }
    for i in 1..=graph.n {
        edges.push((
            format!("out{i}"),
            format!("vr{i}"),
            "d0".to_string(),
            inf.clone(),
            0,
            Delay::Finite(0),
        ));
    }
    for i in 1..=graph.n {
        for j in 1..=graph.n {
            if i != j {
                edges.push((
                    format!("back{i}_{j}"),
                    format!("vr{i}"),
                    format!("vl{j}"),
                    inf.clone(),
                    0,
                    Delay::Finite(0),
                ));
            }
        }
    }
    let bottleneck_u = (r * (r - 1)) / 2 - 1;
    edges.push((
        "bottleneck".to_string(),
        "d0".to_string(),
        "d1".to_string(),
        Capacity::Finite(rat(bottleneck_u as i64)),
        0,
        Delay::Finite(0),
    ));
    let horizon_base: u64 = 1u64 << (m + 1);
    for &(u, v) in &graph.edges {
        let (i, j) = (u.min(v), u.max(v));
        let tau = horizon_base - (1u64 << i) - (1u64 << j);
        for a in [i, j] {
            edges.push((
                format!("src{i}_{j}_{a}"),
                "s".to_string(),
                format!("vl{a}"),
                inf.clone(),
                tau,
                Delay::Finite(0),
            ));
        }
    }

    let inst = Instance::new(vertices, edges, "s", "d1", horizon_base + 1, r)
        .expect("construction is well-formed");
    let index: std::collections::HashMap<&str, usize> = inst
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();

    // one unit-rate triple per graph edge; rate 1 is the minimal choice
    // that makes binom(r,2) coincident arrivals exceed the bottleneck
    // capacity binom(r,2) - 1
    let mut triples = Vec::new();
    for &(u, v) in &graph.edges {
        let (i, j) = (u.min(v), u.max(v));
        let ids = [
            format!("src{i}_{j}_{i}"),
            format!("gate{i}"),
            format!("back{i}_{j}"),
            format!("gate{j}"),
            format!("out{j}"),
            "bottleneck".to_string(),
        ];
        let idx: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
        triples.push(Triple {
            path: Path::new(&inst, idx).unwrap(),
            rate: rat(1),
            a: 0,
            b: 1,
        });
    }
    Ok((inst, TripleSolution::new(triples)))
}

/// Reduction from two edge-disjoint paths to integral robust flow over
/// time: auxiliary terminals `s`, `d`, unit capacities, `delta = 2`
/// everywhere, horizon 2 and budget 1. The input instance is a YES-instance
/// iff the robust flow value is positive.
pub fn gen_disjoint_paths_reduction(
    graph: &DirectedGraph,
    s1: usize,
    s2: usize,
    d1: usize,
    d2: usize,
) -> Result<Instance> {
    let terminals = [s1, s2, d1, d2];
    for &t in &terminals {
        if t == 0 || t > graph.n {
            return Err(Error::Precondition(format!(
                "terminal {t} outside 1..={}",
                graph.n
            )));
        }
    }
    for a in 0..4 {
        for b in (a + 1)..4 {
            if terminals[a] == terminals[b] {
                return Err(Error::Precondition(
                    "terminals s1, s2, d1, d2 must be pairwise distinct".into(),
                ));
            }
        }
    }
    let mut vertices: Vec<String> = (1..=graph.n).map(|i| format!("v{i}")).collect();
    vertices.push("s".into());
    vertices.push("d".into());

    let delta = Delay::Finite(2);
    let mut edges = Vec::new();
    for (k, &(u, v)) in graph.edges.iter().enumerate() {
        if u == 0 || v == 0 || u > graph.n || v > graph.n {
            return Err(Error::Precondition(format!(
                "edge ({u},{v}) uses a vertex outside 1..={}",
                graph.n
            )));
        }
        edges.push((
            format!("g{k}"),
            format!("v{u}"),
            format!("v{v}"),
            unit(),
            0,
            delta,
        ));
    }
    edges.push(("s1".into(), "s".into(), format!("v{s1}"), unit(), 0, delta));
    edges.push(("s2".into(), "s".into(), format!("v{s2}"), unit(), 1, delta));
    edges.push(("t1".into(), format!("v{d1}"), "d".into(), unit(), 1, delta));
    edges.push(("t2".into(), format!("v{d2}"), "d".into(), unit(), 0, delta));

    Instance::new(vertices, edges, "s", "d", 2, 1)
}

/// Embeds a static robust flow instance: horizon 1, zero travel times,
/// infinite delays. Delaying an edge then destroys every path through it,
/// exactly like a static edge failure.
pub fn gen_static_embedding(data: &StaticInstance) -> Result<Instance> {
    let edges = data
        .edges
        .iter()
        .map(|(id, tail, head, u)| {
            (
                id.clone(),
                tail.clone(),
                head.clone(),
                u.clone(),
                0u64,
                Delay::Infinite,
            )
        })
        .collect();
    Instance::new(
        data.vertices.clone(),
        edges,
        &data.source,
        &data.sink,
        1,
        data.budget,
    )
}

/// Convenience: strips the time data off an existing instance, keeping the
/// graph, capacities and budget.
pub fn static_data_of(inst: &Instance) -> StaticInstance {
    StaticInstance {
        vertices: inst.vertex_names().to_vec(),
        edges: inst
            .edges()
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    inst.vertex_name(e.tail).to_string(),
                    inst.vertex_name(e.head).to_string(),
                    e.capacity.clone(),
                )
            })
            .collect(),
        source: inst.vertex_name(inst.source()).to_string(),
        sink: inst.vertex_name(inst.sink()).to_string(),
        budget: inst.budget(),
    }
}

pub use crate::model::validate_instance;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;

    #[test]
    fn log_gap_matches_figure() {
        let (inst, cert) = gen_log_gap(3);
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 3);
        assert_eq!(inst.budget(), 2);
        // labels (tau, delta): (0,3), (1,2), (2,1) on the parallel edges, (0,0) on e*
        let labels: Vec<(u64, Delay)> = inst
            .edges()
            .iter()
            .map(|e| (e.travel_time, e.delay))
            .collect();
        assert_eq!(
            labels,
            vec![
                (0, Delay::Finite(3)),
                (1, Delay::Finite(2)),
                (2, Delay::Finite(1)),
                (0, Delay::Finite(0)),
            ]
        );
        assert_eq!(cert.triples.len(), 3);
        assert!(cert.validate(&inst).is_ok());
    }

    #[test]
    fn linear_gap_matches_figure() {
        let (inst, cert) = gen_linear_gap(3);
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 3);
        assert_eq!(inst.budget(), 2);
        assert_eq!(inst.edges().len(), 7);
        assert!(
            inst.edges()
                .iter()
                .filter(|e| e.delay.is_infinite())
                .count()
                == 6
        );
        assert!(cert.validate(&inst).is_ok());
        // antidiagonal paths all have travel time r - 1 = 2
        for t in &cert.triples {
            assert_eq!(t.path.travel_time(&inst), 2);
        }
    }

    #[test]
    fn clique_reduction_matches_figure() {
        // K_3: m = 3, T = 2^4 + 1 = 17, bottleneck capacity 2
        let (inst, cand) = gen_clique_reduction(&UndirectedGraph::complete(3), 3).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 17);
        assert_eq!(inst.budget(), 3);
        let b = inst.edge(inst.edge_index("bottleneck").unwrap());
        assert_eq!(b.capacity, Capacity::Finite(rat(2)));
        // source-edge travel times 10, 6, 4 for edges {1,2}, {1,3}, {2,3}
        for (pair, tau) in [((1, 2), 10), ((1, 3), 6), ((2, 3), 4)] {
            let id = format!("src{}_{}_{}", pair.0, pair.1, pair.0);
            let e = inst.edge(inst.edge_index(&id).unwrap());
            assert_eq!(e.travel_time, tau);
        }
        // gate delays 2, 4, 8
        for i in 1..=3u64 {
            let e = inst.edge(inst.edge_index(&format!("gate{i}")).unwrap());
            assert_eq!(e.delay, Delay::Finite(1 << i));
        }
        assert_eq!(cand.triples.len(), 3);
        assert!(cand.validate(&inst).is_ok());
    }

    #[test]
    fn clique_reduction_preconditions() {
        // |edges| < |vertices|
        let sparse = UndirectedGraph::new(4, vec![(1, 2), (2, 3)]).unwrap();
        assert!(gen_clique_reduction(&sparse, 3).is_err());
        assert!(gen_clique_reduction(&UndirectedGraph::complete(3), 2).is_err());
    }

    #[test]
    fn clique_finder_brute_force() {
        assert!(UndirectedGraph::complete(3).has_clique(3));
        assert!(!UndirectedGraph::cycle(4).has_clique(3));
        assert!(UndirectedGraph::complete(4).has_clique(4));
    }

    #[test]
    fn disjoint_paths_reduction_shape() {
        // two disjoint 2-vertex pairs connected directly
        let g = DirectedGraph {
            n: 4,
            edges: vec![(1, 3), (2, 4)],
        };
        let inst = gen_disjoint_paths_reduction(&g, 1, 2, 3, 4).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 2);
        assert_eq!(inst.budget(), 1);
        assert!(gen_disjoint_paths_reduction(&g, 1, 1, 3, 4).is_err());
    }

    #[test]
    fn static_embedding_overrides_time_data() {
        let (base, _) = gen_log_gap(3);
        let inst = gen_static_embedding(&static_data_of(&base)).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.horizon(), 1);
        for e in inst.edges() {
            assert_eq!(e.travel_time, 0);
            assert!(e.delay.is_infinite());
        }
    }
}
