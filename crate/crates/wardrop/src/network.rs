//! Directed multigraph with commodities, simple-path enumeration, topological
//! ordering, and flow/load bookkeeping.
//!
//! Vertices, edges, and commodities are interned in declaration order; all
//! tie-breaking ("smallest id first") refers to that order, which keeps every
//! downstream computation deterministic.

use crate::cost::CostFn;
use std::collections::BinaryHeap;
use std::cmp::Reverse;
use thiserror::Error;

pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommodityId(pub usize);

#[derive(Debug, Clone)]
pub struct Edge {
    pub name: String,
    pub tail: VertexId,
    pub head: VertexId,
    pub cost: CostFn,
}

#[derive(Debug, Clone)]
pub struct Commodity {
    pub name: String,
    pub origin: VertexId,
    pub destination: VertexId,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown commodity `{0}`")]
    UnknownCommodity(String),
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("commodity `{0}` has identical origin and destination")]
    SameOriginDestination(String),
    #[error("commodities `{0}` and `{1}` share the same origin-destination pair")]
    DuplicateOdPair(String, String),
    #[error("invalid cost on edge `{edge}`: {reason}")]
    InvalidCost { edge: String, reason: String },
    #[error("beta must be non-negative, got {0}")]
    InvalidBeta(f64),
    #[error("no path from origin to destination for commodity `{0}`")]
    NoPath(String),
    #[error("commodity `{commodity}` has more than {cap} simple paths")]
    PathExplosion { commodity: String, cap: usize },
    #[error("graph contains a directed cycle")]
    CyclicGraph,
}

/// A routing game: directed multigraph, per-edge costs sharing the BPR
/// degree `beta`, and origin-destination commodities.
///
/// Immutable after construction; safe to share across concurrent solves.
#[derive(Debug, Clone)]
pub struct Network {
    beta: f64,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    commodities: Vec<Commodity>,
    /// Outgoing edge ids per vertex, ascending.
    out_edges: Vec<Vec<EdgeId>>,
}

pub struct NetworkBuilder {
    beta: f64,
    vertices: Vec<String>,
    edges: Vec<(String, String, String, CostFn)>,
    commodities: Vec<(String, String, String)>,
}

impl NetworkBuilder {
    pub fn vertex(mut self, name: &str) -> Self {
        self.vertices.push(name.to_owned());
        self
    }

    pub fn edge(mut self, name: &str, tail: &str, head: &str, cost: CostFn) -> Self {
        self.edges
            .push((name.to_owned(), tail.to_owned(), head.to_owned(), cost));
        self
    }

    pub fn commodity(mut self, name: &str, origin: &str, destination: &str) -> Self {
        self.commodities
            .push((name.to_owned(), origin.to_owned(), destination.to_owned()));
        self
    }

    pub fn build(self) -> Result<Network, NetworkError> {
        if !(self.beta >= 0.0) {
            return Err(NetworkError::InvalidBeta(self.beta));
        }
        let mut vertices = Vec::new();
        for name in &self.vertices {
            if vertices.contains(name) {
                return Err(NetworkError::DuplicateId {
                    kind: "vertex",
                    id: name.clone(),
                });
            }
            vertices.push(name.clone());
        }
        let lookup = |name: &str| -> Result<VertexId, NetworkError> {
            vertices
                .iter()
                .position(|v| v == name)
                .map(VertexId)
                .ok_or_else(|| NetworkError::UnknownVertex(name.to_owned()))
        };

        let mut edges = Vec::new();
        for (name, tail, head, cost) in self.edges {
            if edges.iter().any(|e: &Edge| e.name == name) {
                return Err(NetworkError::DuplicateId {
                    kind: "edge",
                    id: name,
                });
            }
            let tail = lookup(&tail)?;
            let head = lookup(&head)?;
            if tail == head {
                return Err(NetworkError::SelfLoop(name));
            }
            cost.validate()
                .map_err(|reason| NetworkError::InvalidCost {
                    edge: name.clone(),
                    reason,
                })?;
            edges.push(Edge {
                name,
                tail,
                head,
                cost,
            });
        }

        let mut commodities: Vec<Commodity> = Vec::new();
        for (name, origin, destination) in self.commodities {
            if commodities.iter().any(|c| c.name == name) {
                return Err(NetworkError::DuplicateId {
                    kind: "commodity",
                    id: name,
                });
            }
            let origin = lookup(&origin)?;
            let destination = lookup(&destination)?;
            if origin == destination {
                return Err(NetworkError::SameOriginDestination(name));
            }
            if let Some(other) = commodities
                .iter()
                .find(|c| c.origin == origin && c.destination == destination)
            {
                return Err(NetworkError::DuplicateOdPair(other.name.clone(), name));
            }
            commodities.push(Commodity {
                name,
                origin,
                destination,
            });
        }

        let mut out_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.tail.0].push(EdgeId(i));
        }

        let network = Network {
            beta: self.beta,
            vertices,
            edges,
            commodities,
            out_edges,
        };
        // every commodity must be able to route its demand somewhere
        for c in &network.commodities {
            if !network.reachable(c.origin, c.destination) {
                return Err(NetworkError::NoPath(c.name.clone()));
            }
        }
        Ok(network)
    }
}

impl Network {
    pub fn builder(beta: f64) -> NetworkBuilder {
        NetworkBuilder {
            beta,
            vertices: Vec::new(),
            edges: Vec::new(),
            commodities: Vec::new(),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn commodity_count(&self) -> usize {
        self.commodities.len()
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn commodity(&self, c: CommodityId) -> &Commodity {
        &self.commodities[c.0]
    }

    pub fn edge_by_name(&self, name: &str) -> Result<EdgeId, NetworkError> {
        self.edges
            .iter()
            .position(|e| e.name == name)
            .map(EdgeId)
            .ok_or_else(|| NetworkError::UnknownEdge(name.to_owned()))
    }

    pub fn commodity_by_name(&self, name: &str) -> Result<CommodityId, NetworkError> {
        self.commodities
            .iter()
            .position(|c| c.name == name)
            .map(CommodityId)
            .ok_or_else(|| NetworkError::UnknownCommodity(name.to_owned()))
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    fn reachable(&self, from: VertexId, to: VertexId) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![from];
        seen[from.0] = true;
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for &e in self.out_edges(v) {
                let h = self.edge(e).head;
                if !seen[h.0] {
                    seen[h.0] = true;
                    stack.push(h);
                }
            }
        }
        false
    }

    /// All edge costs are BPR-typed for this network's degree; extracted
    /// `(t, a)` pairs in edge order, or `None` if some edge is not.
    pub fn bpr_params_all(&self) -> Option<Vec<crate::cost::BprParams>> {
        self.edges
            .iter()
            .map(|e| e.cost.bpr_params(self.beta))
            .collect()
    }

    /// The same network with every cost replaced by its marginal-cost
    /// function, so that equilibria of the result are optima of `self`.
    pub fn to_marginal_network(&self) -> Network {
        let mut n = self.clone();
        for e in &mut n.edges {
            e.cost = e.cost.to_marginal_fn(self.beta);
        }
        n
    }

    /// Kahn's algorithm; ties broken by smallest vertex id. Errors when the
    /// multigraph has a directed cycle.
    pub fn topological_sort(&self) -> Result<Vec<VertexId>, NetworkError> {
        let mut indegree = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            indegree[e.head.0] += 1;
        }
        let mut heap: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == 0)
            .map(|(v, _)| Reverse(v))
            .collect();
        let mut order = Vec::with_capacity(self.vertices.len());
        while let Some(Reverse(v)) = heap.pop() {
            order.push(VertexId(v));
            for &e in self.out_edges(VertexId(v)) {
                let h = self.edge(e).head.0;
                indegree[h] -= 1;
                if indegree[h] == 0 {
                    heap.push(Reverse(h));
                }
            }
        }
        if order.len() != self.vertices.len() {
            return Err(NetworkError::CyclicGraph);
        }
        Ok(order)
    }
}

/// A simple origin-destination path: edge ids chained head-to-tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub commodity: CommodityId,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn contains(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }
}

/// Enumerates all simple paths of one commodity in lexicographic order by
/// edge-id sequence. Errors if there is none or more than `cap`.
pub fn enumerate_paths(
    network: &Network,
    commodity: CommodityId,
    cap: usize,
) -> Result<Vec<Path>, NetworkError> {
    let com = network.commodity(commodity);
    let mut paths = Vec::new();
    let mut on_path = vec![false; network.vertex_count()];
    let mut edge_stack: Vec<EdgeId> = Vec::new();
    // iterative DFS; out-edge lists are ascending, so paths come out in
    // lexicographic order by edge-id sequence
    struct Frame {
        vertex: VertexId,
        next: usize,
    }
    on_path[com.origin.0] = true;
    let mut stack = vec![Frame {
        vertex: com.origin,
        next: 0,
    }];
    while let Some(frame) = stack.last_mut() {
        let v = frame.vertex;
        let out = network.out_edges(v);
        if frame.next >= out.len() {
            on_path[v.0] = false;
            stack.pop();
            edge_stack.pop();
            continue;
        }
        let e = out[frame.next];
        frame.next += 1;
        let head = network.edge(e).head;
        if head == com.destination {
            let mut edges = edge_stack.clone();
            edges.push(e);
            paths.push(Path { commodity, edges });
            if paths.len() > cap {
                return Err(NetworkError::PathExplosion {
                    commodity: com.name.clone(),
                    cap,
                });
            }
            continue;
        }
        if !on_path[head.0] {
            on_path[head.0] = true;
            edge_stack.push(e);
            stack.push(Frame {
                vertex: head,
                next: 0,
            });
        }
    }
    if paths.is_empty() {
        return Err(NetworkError::NoPath(com.name.clone()));
    }
    Ok(paths)
}

/// The enumerated paths of every commodity, commodity-major, each block in
/// lexicographic order. Path flows are indexed by this global order.
#[derive(Debug, Clone)]
pub struct PathSet {
    paths: Vec<Path>,
    ranges: Vec<std::ops::Range<usize>>,
}

impl PathSet {
    pub fn enumerate(network: &Network, cap: usize) -> Result<PathSet, NetworkError> {
        let mut paths = Vec::new();
        let mut ranges = Vec::new();
        for i in 0..network.commodity_count() {
            let start = paths.len();
            paths.extend(enumerate_paths(network, CommodityId(i), cap)?);
            ranges.push(start..paths.len());
        }
        Ok(PathSet { paths, ranges })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> &Path {
        &self.paths[i]
    }

    /// Global path-index range of one commodity's block.
    pub fn commodity_range(&self, c: CommodityId) -> std::ops::Range<usize> {
        self.ranges[c.0].clone()
    }

    pub fn commodity_count(&self) -> usize {
        self.ranges.len()
    }
}

/// Per-path flow, indexed by a `PathSet`'s global order.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFlow(pub Vec<f64>);

impl PathFlow {
    pub fn zeros(n: usize) -> Self {
        PathFlow(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for PathFlow {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-edge load, indexed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile(pub Vec<f64>);

impl LoadProfile {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for LoadProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-commodity demand, indexed by commodity id. All entries non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandVector(pub Vec<f64>);

impl DemandVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn validate(&self, network: &Network) -> Result<(), String> {
        if self.0.len() != network.commodity_count() {
            return Err(format!(
                "demand vector has {} entries for {} commodities",
                self.0.len(),
                network.commodity_count()
            ));
        }
        for (i, &d) in self.0.iter().enumerate() {
            if !(d >= 0.0) {
                return Err(format!(
                    "demand for commodity `{}` is {d}, must be >= 0",
                    network.commodities()[i].name
                ));
            }
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for DemandVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Aggregates path flows into edge loads: `x_e` is the sum of flows of all
/// paths containing `e`.
pub fn loads_from_flow(network: &Network, paths: &PathSet, flow: &PathFlow) -> LoadProfile {
    let mut loads = vec![0.0; network.edge_count()];
    for (p, &f) in paths.paths().iter().zip(flow.0.iter()) {
        if f != 0.0 {
            for &e in &p.edges {
                loads[e.0] += f;
            }
        }
    }
    LoadProfile(loads)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowViolation {
    NegativeFlow { path: usize, value: f64 },
    Conservation { commodity: CommodityId, residual: f64 },
}

pub const CONSERVATION_TOL: f64 = 1e-9;

/// Checks non-negativity and per-commodity conservation within an absolute
/// tolerance of `1e-9`. Returns all violations instead of failing fast.
pub fn validate_flow(
    network: &Network,
    paths: &PathSet,
    flow: &PathFlow,
    demand: &DemandVector,
) -> Vec<FlowViolation> {
    let mut violations = Vec::new();
    for (i, &f) in flow.0.iter().enumerate() {
        if f < 0.0 {
            violations.push(FlowViolation::NegativeFlow { path: i, value: f });
        }
    }
    for c in 0..network.commodity_count() {
        let total: f64 = paths.commodity_range(CommodityId(c)).map(|p| flow[p]).sum();
        let residual = total - demand[c];
        if residual.abs() > CONSERVATION_TOL {
            violations.push(FlowViolation::Conservation {
                commodity: CommodityId(c),
                residual,
            });
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn enumerate_pigou_and_braess() {
        let pigou = fixtures::pigou();
        let paths = enumerate_paths(&pigou, CommodityId(0), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 2);

        let braess = fixtures::braess();
        let paths = enumerate_paths(&braess, CommodityId(0), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 3);
        // lexicographic by edge-id sequence: upper, zig-zag, lower
        assert_eq!(paths[0].edges, vec![EdgeId(0), EdgeId(1)]);
        assert_eq!(paths[1].edges, vec![EdgeId(0), EdgeId(4), EdgeId(3)]);
        assert_eq!(paths[2].edges, vec![EdgeId(2), EdgeId(3)]);
    }

    #[test]
    fn enumerate_cyclic_has_four_paths() {
        let net = fixtures::cyclic();
        let paths = enumerate_paths(&net, CommodityId(0), DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 4);
        for p in &paths {
            // chained head-to-tail, simple, origin to destination
            let com = net.commodity(p.commodity);
            assert_eq!(net.edge(p.edges[0]).tail, com.origin);
            assert_eq!(net.edge(*p.edges.last().unwrap()).head, com.destination);
            let mut seen = vec![com.origin];
            for w in p.edges.windows(2) {
                assert_eq!(net.edge(w[0]).head, net.edge(w[1]).tail);
            }
            for &e in &p.edges {
                let h = net.edge(e).head;
                assert!(!seen.contains(&h), "vertex repeated on {:?}", p.edges);
                seen.push(h);
            }
        }
    }

    #[test]
    fn path_cap_enforced() {
        let net = fixtures::braess();
        match enumerate_paths(&net, CommodityId(0), 2) {
            Err(NetworkError::PathExplosion { cap: 2, .. }) => {}
            other => panic!("expected PathExplosion, got {other:?}"),
        }
    }

    #[test]
    fn topological_sort_examples() {
        let braess = fixtures::braess();
        let order = braess.topological_sort().unwrap();
        assert_eq!(order, vec![VertexId(0), VertexId(1), VertexId(2), VertexId(3)]);

        let pigou = fixtures::pigou();
        assert_eq!(pigou.topological_sort().unwrap(), vec![VertexId(0), VertexId(1)]);

        let cyclic = fixtures::cyclic();
        assert_eq!(cyclic.topological_sort(), Err(NetworkError::CyclicGraph));
    }

    #[test]
    fn topological_order_respects_edges() {
        let net = fixtures::braess();
        let order = net.topological_sort().unwrap();
        let pos: Vec<usize> = (0..net.vertex_count())
            .map(|v| order.iter().position(|&o| o.0 == v).unwrap())
            .collect();
        for e in net.edges() {
            assert!(pos[e.head.0] > pos[e.tail.0]);
        }
    }

    #[test]
    fn loads_examples() {
        let pigou = fixtures::pigou();
        let paths = PathSet::enumerate(&pigou, DEFAULT_PATH_CAP).unwrap();
        let loads = loads_from_flow(&pigou, &paths, &PathFlow(vec![0.0, 1.0]));
        assert_eq!(loads.0, vec![0.0, 1.0]);

        let braess = fixtures::braess();
        let paths = PathSet::enumerate(&braess, DEFAULT_PATH_CAP).unwrap();
        // all demand 1 on the zig-zag (path index 1)
        let loads = loads_from_flow(&braess, &paths, &PathFlow(vec![0.0, 1.0, 0.0]));
        assert_eq!(loads.0, vec![1.0, 0.0, 0.0, 1.0, 1.0]);
        // half upper, half lower
        let loads = loads_from_flow(&braess, &paths, &PathFlow(vec![0.5, 0.0, 0.5]));
        assert_eq!(loads.0, vec![0.5, 0.5, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn validate_flow_examples() {
        let pigou = fixtures::pigou();
        let paths = PathSet::enumerate(&pigou, DEFAULT_PATH_CAP).unwrap();
        let demand = DemandVector(vec![1.0]);
        assert!(validate_flow(&pigou, &paths, &PathFlow(vec![0.25, 0.75]), &demand).is_empty());

        let v = validate_flow(&pigou, &paths, &PathFlow(vec![0.25, 0.5]), &demand);
        assert_eq!(v.len(), 1);
        match &v[0] {
            FlowViolation::Conservation { residual, .. } => {
                assert!((residual + 0.25).abs() < 1e-15)
            }
            other => panic!("unexpected violation {other:?}"),
        }

        let v = validate_flow(&pigou, &paths, &PathFlow(vec![-0.1, 1.1]), &demand);
        assert!(v
            .iter()
            .any(|x| matches!(x, FlowViolation::NegativeFlow { path: 0, .. })));
    }

    #[test]
    fn self_loop_rejected() {
        let err = Network::builder(1.0)
            .vertex("o")
            .vertex("d")
            .edge("loop", "o", "o", CostFn::bpr(1.0, 0.0))
            .edge("e", "o", "d", CostFn::bpr(1.0, 0.0))
            .commodity("c1", "o", "d")
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop("loop".into()));
    }

    #[test]
    fn duplicate_od_pair_rejected() {
        let err = Network::builder(1.0)
            .vertex("o")
            .vertex("d")
            .edge("e1", "o", "d", CostFn::bpr(1.0, 0.0))
            .commodity("c1", "o", "d")
            .commodity("c2", "o", "d")
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::DuplicateOdPair("c1".into(), "c2".into()));
    }

    #[test]
    fn unreachable_commodity_rejected() {
        let err = Network::builder(1.0)
            .vertex("o")
            .vertex("d")
            .vertex("w")
            .edge("e1", "o", "d", CostFn::bpr(1.0, 0.0))
            .commodity("c1", "o", "w")
            .build()
            .unwrap_err();
        assert_eq!(err, NetworkError::NoPath("c1".into()));
    }

    #[test]
    fn loads_are_linear() {
        let net = fixtures::braess();
        let paths = PathSet::enumerate(&net, DEFAULT_PATH_CAP).unwrap();
        let f = PathFlow(vec![0.2, 0.5, 0.3]);
        let g = PathFlow(vec![1.0, 0.0, 2.0]);
        let (alpha, beta) = (0.7, 1.3);
        let combo = PathFlow(
            f.0.iter()
                .zip(&g.0)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        );
        let lf = loads_from_flow(&net, &paths, &f);
        let lg = loads_from_flow(&net, &paths, &g);
        let lc = loads_from_flow(&net, &paths, &combo);
        for e in 0..net.edge_count() {
            assert!((lc[e] - (alpha * lf[e] + beta * lg[e])).abs() < 1e-12);
        }
    }

    #[test]
    fn position_gaps_are_path_invariant() {
        // in a topological order, the sum of (head index - tail index) along
        // a path telescopes to the same value for every path of a commodity
        let net = fixtures::braess();
        let order = net.topological_sort().unwrap();
        let mut pos = vec![0usize; net.vertex_count()];
        for (i, v) in order.iter().enumerate() {
            pos[v.0] = i;
        }
        let paths = PathSet::enumerate(&net, DEFAULT_PATH_CAP).unwrap();
        for c in 0..net.commodity_count() {
            let sums: Vec<i64> = paths
                .commodity_range(CommodityId(c))
                .map(|p| {
                    paths
                        .path(p)
                        .edges
                        .iter()
                        .map(|&e| pos[net.edge(e).head.0] as i64 - pos[net.edge(e).tail.0] as i64)
                        .sum()
                })
                .collect();
            assert!(sums.windows(2).all(|w| w[0] == w[1]), "sums {sums:?}");
        }
    }
}
