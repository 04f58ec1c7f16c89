//! Pure graph algorithms over directed networks, undirected similarity
//! graphs, and similarity hypergraphs.
//!
//! Everything here is deterministic: node iteration follows `BTree` order
//! and every tie is broken lexicographically by name, so repeated runs (and
//! golden-file tests) see bit-identical results.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::model::BeliefNetwork;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("input graph contains a directed cycle")]
    CyclicInput,
    #[error("node sets overlap: `{0}` appears in more than one of X, Y, Z")]
    OverlappingSets(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// A directed graph over named nodes. Node identity is by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiGraph {
    pub nodes: BTreeSet<String>,
    pub arcs: BTreeSet<(String, String)>,
}

impl DiGraph {
    pub fn new() -> Self {
        DiGraph::default()
    }

    pub fn add_node(&mut self, node: impl Into<String>) {
        self.nodes.insert(node.into());
    }

    pub fn add_arc(&mut self, parent: impl Into<String>, child: impl Into<String>) {
        let (p, c) = (parent.into(), child.into());
        self.nodes.insert(p.clone());
        self.nodes.insert(c.clone());
        self.arcs.insert((p, c));
    }
}

impl From<&BeliefNetwork> for DiGraph {
    fn from(bn: &BeliefNetwork) -> Self {
        DiGraph {
            nodes: bn.variables.keys().cloned().collect(),
            arcs: bn.arcs.clone(),
        }
    }
}

/// An undirected graph over fault-instance labels; an edge licenses a local
/// belief network discriminating that pair. Edges are stored as sorted pairs
/// so duplicates collapse regardless of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimilarityGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl SimilarityGraph {
    pub fn new() -> Self {
        SimilarityGraph::default()
    }

    pub fn add_node(&mut self, node: impl Into<String>) {
        self.nodes.insert(node.into());
    }

    /// Self-loops are meaningless here; callers must not create them.
    pub fn add_edge(&mut self, a: impl Into<String>, b: impl Into<String>) {
        let (a, b) = (a.into(), b.into());
        assert_ne!(a, b, "similarity edges join distinct faults");
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        let edge = if a <= b { (a, b) } else { (b, a) };
        self.edges.insert(edge);
    }
}

/// Hypergraph extension: hyperedges connect fault sets of arbitrary size
/// (>= 2), each licensing one local belief network.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimilarityHypergraph {
    pub nodes: BTreeSet<String>,
    pub hyperedges: BTreeSet<BTreeSet<String>>,
}

impl SimilarityHypergraph {
    pub fn new() -> Self {
        SimilarityHypergraph::default()
    }

    pub fn add_node(&mut self, node: impl Into<String>) {
        self.nodes.insert(node.into());
    }

    pub fn add_hyperedge(&mut self, members: impl IntoIterator<Item = impl Into<String>>) {
        let edge: BTreeSet<String> = members.into_iter().map(Into::into).collect();
        assert!(edge.len() >= 2, "hyperedges span at least two faults");
        self.nodes.extend(edge.iter().cloned());
        self.hyperedges.insert(edge);
    }
}

/// Either similarity structure, viewed uniformly as a set of fault subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimilarityStructure {
    Graph(SimilarityGraph),
    Hypergraph(SimilarityHypergraph),
}

impl SimilarityStructure {
    pub fn nodes(&self) -> &BTreeSet<String> {
        match self {
            SimilarityStructure::Graph(g) => &g.nodes,
            SimilarityStructure::Hypergraph(h) => &h.nodes,
        }
    }

    /// Every (hyper)edge as a fault set, in deterministic order.
    pub fn edge_sets(&self) -> Vec<BTreeSet<String>> {
        match self {
            SimilarityStructure::Graph(g) => g
                .edges
                .iter()
                .map(|(a, b)| BTreeSet::from([a.clone(), b.clone()]))
                .collect(),
            SimilarityStructure::Hypergraph(h) => h.hyperedges.iter().cloned().collect(),
        }
    }

    pub fn is_connected(&self) -> bool {
        is_connected_over(self.nodes(), &self.edge_sets())
    }
}

/// True iff the directed arc set over `nodes` contains no cycle.
///
/// Kahn's algorithm; the independent check used by tests is a depth-first
/// back-edge search, kept in test code.
pub fn is_acyclic(nodes: &BTreeSet<String>, arcs: &BTreeSet<(String, String)>) -> bool {
    let mut indegree: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (p, c) in arcs {
        // Dangling endpoints are tolerated; they are a validation concern.
        if !indegree.contains_key(p.as_str()) || !indegree.contains_key(c.as_str()) {
            continue;
        }
        *indegree.get_mut(c.as_str()).unwrap() += 1;
        children.entry(p.as_str()).or_default().push(c.as_str());
    }
    let mut queue: VecDeque<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut removed = 0usize;
    while let Some(n) = queue.pop_front() {
        removed += 1;
        for &c in children.get(n).into_iter().flatten() {
            let d = indegree.get_mut(c).unwrap();
            *d -= 1;
            if *d == 0 {
                queue.push_back(c);
            }
        }
    }
    removed == nodes.len()
}

/// Connectivity over a node set joined by fault subsets: a hyperedge
/// connects all its members pairwise (clique reading), which makes the
/// pairwise graph a special case. Single-node and empty structures count as
/// connected.
fn is_connected_over(nodes: &BTreeSet<String>, edge_sets: &[BTreeSet<String>]) -> bool {
    if nodes.len() <= 1 {
        return true;
    }
    let start = nodes.iter().next().unwrap().as_str();
    let mut seen: BTreeSet<&str> = BTreeSet::from([start]);
    let mut queue: VecDeque<&str> = VecDeque::from([start]);
    while let Some(n) = queue.pop_front() {
        for edge in edge_sets {
            if edge.iter().any(|m| m == n) {
                for m in edge {
                    if seen.insert(m.as_str()) {
                        queue.push_back(m.as_str());
                    }
                }
            }
        }
    }
    nodes.iter().all(|n| seen.contains(n.as_str()))
}

pub fn is_connected(structure: &SimilarityStructure) -> bool {
    structure.is_connected()
}

/// The graph union: node set = union of node sets, arc set = union of arc
/// sets. Nothing beyond set union — a cyclic result is legal here and is
/// rejected later by global-network construction.
pub fn graph_union<'a>(graphs: impl IntoIterator<Item = &'a DiGraph>) -> DiGraph {
    let mut out = DiGraph::new();
    for g in graphs {
        out.nodes.extend(g.nodes.iter().cloned());
        out.arcs.extend(g.arcs.iter().cloned());
    }
    out
}

/// True iff an undirected path joins `x` and `y` in the directed graph.
pub fn connected_to(x: &str, y: &str, g: &DiGraph) -> bool {
    if x == y {
        return true;
    }
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (p, c) in &g.arcs {
        adjacency.entry(p.as_str()).or_default().push(c.as_str());
        adjacency.entry(c.as_str()).or_default().push(p.as_str());
    }
    let mut seen: BTreeSet<&str> = BTreeSet::from([x]);
    let mut queue: VecDeque<&str> = VecDeque::from([x]);
    while let Some(n) = queue.pop_front() {
        for &m in adjacency.get(n).into_iter().flatten() {
            if m == y {
                return true;
            }
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    false
}

/// Topological order with deterministic lexicographic tie-breaking: among
/// all admissible linear extensions this returns the lexicographically
/// least.
pub fn topological_order(g: &DiGraph) -> Result<Vec<String>, GraphError> {
    let mut indegree: BTreeMap<&str, usize> = g.nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (p, c) in &g.arcs {
        *indegree
            .get_mut(c.as_str())
            .ok_or_else(|| GraphError::UnknownNode(c.clone()))? += 1;
        if !indegree.contains_key(p.as_str()) {
            return Err(GraphError::UnknownNode(p.clone()));
        }
        children.entry(p.as_str()).or_default().push(c.as_str());
    }
    // BTreeSet as a priority queue: pop_first is always the smallest name.
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut order = Vec::with_capacity(g.nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &c in children.get(n).into_iter().flatten() {
            let d = indegree.get_mut(c).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != g.nodes.len() {
        return Err(GraphError::CyclicInput);
    }
    Ok(order)
}

/// Ancestors of the seed set, including the seeds themselves.
fn ancestral_set<'a>(bn: &'a BeliefNetwork, seeds: &BTreeSet<&'a str>) -> BTreeSet<&'a str> {
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (p, c) in &bn.arcs {
        parents.entry(c.as_str()).or_default().push(p.as_str());
    }
    let mut seen: BTreeSet<&str> = seeds.clone();
    let mut queue: VecDeque<&str> = seeds.iter().copied().collect();
    while let Some(n) = queue.pop_front() {
        for &p in parents.get(n).into_iter().flatten() {
            if seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    seen
}

/// Standard d-separation over a belief network's DAG.
///
/// Uses the moralized-ancestral-graph criterion:
/// 1. restrict to the ancestral set of X ∪ Y ∪ Z,
/// 2. moralize (connect each node to its parents, marry co-parents),
/// 3. delete Z,
/// 4. X and Y are d-separated iff no undirected path survives.
pub fn d_separated(
    bn: &BeliefNetwork,
    x: &BTreeSet<String>,
    y: &BTreeSet<String>,
    z: &BTreeSet<String>,
) -> Result<bool, GraphError> {
    for (a, b) in [(x, y), (x, z), (y, z)] {
        if let Some(shared) = a.intersection(b).next() {
            return Err(GraphError::OverlappingSets(shared.clone()));
        }
    }
    for n in x.iter().chain(y).chain(z) {
        if !bn.variables.contains_key(n) {
            return Err(GraphError::UnknownNode(n.clone()));
        }
    }
    if x.is_empty() || y.is_empty() {
        return Ok(true);
    }

    let seeds: BTreeSet<&str> = x.iter().chain(y).chain(z).map(String::as_str).collect();
    let keep = ancestral_set(bn, &seeds);

    let mut moral: BTreeMap<&str, BTreeSet<&str>> =
        keep.iter().map(|&n| (n, BTreeSet::new())).collect();
    fn link<'a>(a: &'a str, b: &'a str, moral: &mut BTreeMap<&'a str, BTreeSet<&'a str>>) {
        // Both endpoints are in `keep` when called.
        moral.get_mut(a).unwrap().insert(b);
        moral.get_mut(b).unwrap().insert(a);
    }
    for &n in &keep {
        let parents: Vec<&str> = bn
            .arcs
            .iter()
            .filter(|(_, c)| c == n)
            .map(|(p, _)| p.as_str())
            .filter(|p| keep.contains(p))
            .collect();
        for &p in &parents {
            link(p, n, &mut moral);
        }
        for i in 0..parents.len() {
            for j in i + 1..parents.len() {
                link(parents[i], parents[j], &mut moral);
            }
        }
    }

    let blocked: BTreeSet<&str> = z.iter().map(String::as_str).collect();
    let targets: BTreeSet<&str> = y.iter().map(String::as_str).collect();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for s in x {
        let s = s.as_str();
        if keep.contains(s) && !blocked.contains(s) && seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(n) = queue.pop_front() {
        if targets.contains(n) {
            return Ok(false);
        }
        for &m in moral.get(n).into_iter().flatten() {
            if !blocked.contains(m) && seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    Ok(true)
}
