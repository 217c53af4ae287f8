//! Directed graphs with opaque string vertex ids, plus the combinatorial
//! algorithms the sum minimizers consume: strongly connected components,
//! condensation, final components, girth, automorphism checking.
//!
//! Vertices get dense indices in first-appearance order; all algorithms work
//! on indices and ids are kept only for I/O.

use std::collections::{HashMap, HashSet};

use serde::Deserialize;

use crate::error::{QcsError, Result};

/// A finite directed graph. No duplicate edges; self-loops only when the
/// builder explicitly allows them.
#[derive(Debug, Clone)]
pub struct Digraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn builder() -> DigraphBuilder {
        DigraphBuilder::new()
    }

    /// Builds a graph from `(from, to)` pairs, interning vertices in
    /// first-appearance order. Self-loops are rejected.
    pub fn from_edges<'a, I>(edges: I) -> Result<Digraph>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut b = DigraphBuilder::new();
        for (u, v) in edges {
            b.add_edge(u, v)?;
        }
        Ok(b.build())
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Out-neighborhood of `v`, in edge insertion order.
    pub fn out(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn min_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    /// In-neighborhood lists (computed on demand).
    pub fn in_neighborhoods(&self) -> Vec<Vec<usize>> {
        let mut inn = vec![Vec::new(); self.vertex_count()];
        for &(u, v) in &self.edges {
            inn[v].push(u);
        }
        inn
    }

    /// Subgraph induced by `verts` (deduplicated, sorted by parent index).
    /// Returns the subgraph together with the local-to-parent index map.
    pub fn induced(&self, verts: &[usize]) -> (Digraph, Vec<usize>) {
        let mut keep: Vec<usize> = verts.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut local = HashMap::new();
        for (i, &v) in keep.iter().enumerate() {
            local.insert(v, i);
        }
        let ids: Vec<String> = keep.iter().map(|&v| self.ids[v].clone()).collect();
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if let (Some(&lu), Some(&lv)) = (local.get(&u), local.get(&v)) {
                edges.push((lu, lv));
            }
        }
        (Digraph::from_indexed(ids, edges), keep)
    }

    /// Internal constructor from already-validated parts.
    fn from_indexed(ids: Vec<String>, edges: Vec<(usize, usize)>) -> Digraph {
        let mut index = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            index.insert(id.clone(), i);
        }
        let mut out = vec![Vec::new(); ids.len()];
        for &(u, v) in &edges {
            out[u].push(v);
        }
        Digraph {
            ids,
            index,
            edges,
            out,
        }
    }
}

/// Incremental construction with duplicate/self-loop policy.
#[derive(Debug, Default)]
pub struct DigraphBuilder {
    allow_self_loops: bool,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl DigraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn allow_self_loops(mut self, yes: bool) -> Self {
        self.allow_self_loops = yes;
        self
    }

    /// Interns a vertex id, returning its dense index.
    pub fn add_vertex(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn contains_vertex(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn add_edge(&mut self, from: &str, to: &str) -> Result<()> {
        let u = self.add_vertex(from);
        let v = self.add_vertex(to);
        if u == v && !self.allow_self_loops {
            return Err(QcsError::Validation(format!("self-loop on vertex '{from}'")));
        }
        if !self.seen.insert((u, v)) {
            return Err(QcsError::Validation(format!("duplicate edge {from} -> {to}")));
        }
        self.edges.push((u, v));
        Ok(())
    }

    pub fn build(self) -> Digraph {
        let mut out = vec![Vec::new(); self.ids.len()];
        for &(u, v) in &self.edges {
            out[u].push(v);
        }
        Digraph {
            ids: self.ids,
            index: self.index,
            edges: self.edges,
            out,
        }
    }
}

/// A digraph with a strictly positive weight per edge (parallel to
/// `base.edges()` order).
#[derive(Debug, Clone)]
pub struct WeightedDigraph {
    base: Digraph,
    weights: Vec<f64>,
}

impl WeightedDigraph {
    pub fn new(base: Digraph, weights: Vec<f64>) -> Result<WeightedDigraph> {
        if weights.len() != base.edge_count() {
            return Err(QcsError::Validation(format!(
                "{} weights for {} edges",
                weights.len(),
                base.edge_count()
            )));
        }
        for (&w, &(u, v)) in weights.iter().zip(base.edges()) {
            if !w.is_finite() || w <= 0.0 {
                return Err(QcsError::Validation(format!(
                    "nonpositive weight {w} on edge {} -> {}",
                    base.id(u),
                    base.id(v)
                )));
            }
        }
        Ok(WeightedDigraph { base, weights })
    }

    /// All weights set to 1.
    pub fn unit(base: Digraph) -> WeightedDigraph {
        let weights = vec![1.0; base.edge_count()];
        WeightedDigraph { base, weights }
    }

    /// Builds from `(from, to, weight)` triples, interning vertices in
    /// first-appearance order.
    pub fn from_weighted_edges<'a, I>(edges: I) -> Result<WeightedDigraph>
    where
        I: IntoIterator<Item = (&'a str, &'a str, f64)>,
    {
        let mut b = DigraphBuilder::new();
        let mut ws = Vec::new();
        for (u, v, w) in edges {
            b.add_edge(u, v)?;
            ws.push(w);
        }
        WeightedDigraph::new(b.build(), ws)
    }

    pub fn base(&self) -> &Digraph {
        &self.base
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    /// Weighted subgraph induced by `verts`; edge order follows the parent.
    pub fn induced(&self, verts: &[usize]) -> (WeightedDigraph, Vec<usize>) {
        let (sub, map) = self.base.induced(verts);
        let mut member = vec![false; self.base.vertex_count()];
        for &v in &map {
            member[v] = true;
        }
        let weights: Vec<f64> = self
            .base
            .edges()
            .iter()
            .zip(&self.weights)
            .filter(|(&(u, v), _)| member[u] && member[v])
            .map(|(_, &w)| w)
            .collect();
        debug_assert_eq!(weights.len(), sub.edge_count());
        (WeightedDigraph { base: sub, weights }, map)
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Json,
}

/// Result of parsing: weighted only when some weight was given explicitly.
#[derive(Debug, Clone)]
pub enum ParsedGraph {
    Unweighted(Digraph),
    Weighted(WeightedDigraph),
}

impl ParsedGraph {
    pub fn digraph(&self) -> &Digraph {
        match self {
            ParsedGraph::Unweighted(g) => g,
            ParsedGraph::Weighted(w) => w.base(),
        }
    }

    /// Coerces to a weighted graph, defaulting absent weights to 1.
    pub fn into_weighted(self) -> WeightedDigraph {
        match self {
            ParsedGraph::Unweighted(g) => WeightedDigraph::unit(g),
            ParsedGraph::Weighted(w) => w,
        }
    }
}

/// Parses a graph from text.
///
/// Edge-list format: one `FROM TO [WEIGHT]` per line, whitespace-separated,
/// `#` starts a comment. JSON format:
/// `{"vertices": [...], "edges": [{"from": .., "to": .., "weight": ..}]}`
/// with `weight` optional (default 1).
///
/// Self-loops are accepted here; constructors of graphic sums reject them.
pub fn parse_graph(input: &str, format: GraphFormat) -> Result<ParsedGraph> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(input),
        GraphFormat::Json => parse_json(input),
    }
}

pub fn parse_edge_list(input: &str) -> Result<ParsedGraph> {
    let mut b = DigraphBuilder::new().allow_self_loops(true);
    let mut weights: Vec<Option<f64>> = Vec::new();
    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let text = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let fields: Vec<&str> = text.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [from, to] => {
                b.add_edge(from, to).map_err(|e| at_line(line, e))?;
                weights.push(None);
            }
            [from, to, w] => {
                let w: f64 = w.parse().map_err(|_| QcsError::Parse {
                    line,
                    message: format!("bad weight '{w}'"),
                })?;
                if !w.is_finite() || w <= 0.0 {
                    return Err(QcsError::Validation(format!(
                        "line {line}: nonpositive weight {w}"
                    )));
                }
                b.add_edge(from, to).map_err(|e| at_line(line, e))?;
                weights.push(Some(w));
            }
            _ => {
                return Err(QcsError::Parse {
                    line,
                    message: format!("expected 'FROM TO [WEIGHT]', got {} fields", fields.len()),
                })
            }
        }
    }
    let g = b.build();
    if weights.iter().any(Option::is_some) {
        let ws = weights.into_iter().map(|w| w.unwrap_or(1.0)).collect();
        Ok(ParsedGraph::Weighted(WeightedDigraph::new(g, ws)?))
    } else {
        Ok(ParsedGraph::Unweighted(g))
    }
}

fn at_line(line: usize, e: QcsError) -> QcsError {
    match e {
        QcsError::Validation(message) => QcsError::Parse { line, message },
        other => other,
    }
}

#[derive(Deserialize)]
struct JsonGraph {
    vertices: Vec<String>,
    edges: Vec<JsonEdge>,
}

#[derive(Deserialize)]
struct JsonEdge {
    from: String,
    to: String,
    #[serde(default)]
    weight: Option<f64>,
}

pub fn parse_json(input: &str) -> Result<ParsedGraph> {
    let jg: JsonGraph = serde_json::from_str(input).map_err(|e| QcsError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let mut b = DigraphBuilder::new().allow_self_loops(true);
    for v in &jg.vertices {
        b.add_vertex(v);
    }
    let mut weights = Vec::new();
    for e in &jg.edges {
        for end in [&e.from, &e.to] {
            if !b.contains_vertex(end) {
                return Err(QcsError::Validation(format!(
                    "edge endpoint '{end}' not in vertex list"
                )));
            }
        }
        if let Some(w) = e.weight {
            if !w.is_finite() || w <= 0.0 {
                return Err(QcsError::Validation(format!(
                    "nonpositive weight {w} on edge {} -> {}",
                    e.from, e.to
                )));
            }
        }
        b.add_edge(&e.from, &e.to)?;
        weights.push(e.weight);
    }
    let g = b.build();
    if weights.iter().any(Option::is_some) {
        let ws = weights.into_iter().map(|w| w.unwrap_or(1.0)).collect();
        Ok(ParsedGraph::Weighted(WeightedDigraph::new(g, ws)?))
    } else {
        Ok(ParsedGraph::Unweighted(g))
    }
}

// ---------------------------------------------------------------------------
// Strongly connected components
// ---------------------------------------------------------------------------

/// SCC decomposition with condensation and final-component flags.
///
/// Components are numbered in a topological order of the condensation
/// (sources first); vertex lists are sorted ascending. A component is final
/// iff it has no outgoing condensation edge.
#[derive(Debug, Clone)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub condensation: Digraph,
    pub final_flags: Vec<bool>,
}

impl SccDecomposition {
    pub fn count(&self) -> usize {
        self.components.len()
    }

    pub fn final_components(&self) -> Vec<Vec<usize>> {
        self.components
            .iter()
            .zip(&self.final_flags)
            .filter(|(_, &f)| f)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

struct TarjanState<'a> {
    g: &'a Digraph,
    counter: usize,
    index: Vec<Option<usize>>,
    low: Vec<usize>,
    stack: Vec<usize>,
    on_stack: Vec<bool>,
    comp_of: Vec<usize>,
    comps: Vec<Vec<usize>>,
}

impl TarjanState<'_> {
    fn connect(&mut self, v: usize) {
        self.index[v] = Some(self.counter);
        self.low[v] = self.counter;
        self.counter += 1;
        self.stack.push(v);
        self.on_stack[v] = true;
        for i in 0..self.g.out(v).len() {
            let w = self.g.out(v)[i];
            if self.index[w].is_none() {
                self.connect(w);
                self.low[v] = self.low[v].min(self.low[w]);
            } else if self.on_stack[w] {
                self.low[v] = self.low[v].min(self.index[w].unwrap());
            }
        }
        if self.low[v] == self.index[v].unwrap() {
            let cid = self.comps.len();
            let mut comp = Vec::new();
            loop {
                let w = self.stack.pop().expect("tarjan stack underflow");
                self.on_stack[w] = false;
                self.comp_of[w] = cid;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            self.comps.push(comp);
        }
    }
}

/// Tarjan strongly-connected-component decomposition.
pub fn scc(g: &Digraph) -> SccDecomposition {
    let n = g.vertex_count();
    let mut st = TarjanState {
        g,
        counter: 0,
        index: vec![None; n],
        low: vec![0; n],
        stack: Vec::new(),
        on_stack: vec![false; n],
        comp_of: vec![usize::MAX; n],
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            st.connect(v);
        }
    }
    // Tarjan emits a component only after every distinct component reachable
    // from it; reversing the emission order therefore yields a topological
    // order of the condensation.
    let m = st.comps.len();
    let new_id: Vec<usize> = (0..m).map(|old| m - 1 - old).collect();

    let mut components = vec![Vec::new(); m];
    for (old, comp) in st.comps.into_iter().enumerate() {
        components[new_id[old]] = comp;
    }
    let component_of: Vec<usize> = st.comp_of.iter().map(|&c| new_id[c]).collect();

    let mut cedges: Vec<(usize, usize)> = Vec::new();
    let mut seen = HashSet::new();
    for &(u, v) in g.edges() {
        let (cu, cv) = (component_of[u], component_of[v]);
        if cu != cv && seen.insert((cu, cv)) {
            cedges.push((cu, cv));
        }
    }
    let ids: Vec<String> = (0..m).map(|i| i.to_string()).collect();
    let condensation = Digraph::from_indexed(ids, cedges);
    let final_flags: Vec<bool> = (0..m).map(|c| condensation.out(c).is_empty()).collect();

    SccDecomposition {
        components,
        component_of,
        condensation,
        final_flags,
    }
}

/// The components with no outgoing condensation edge ("black holes": every
/// walk eventually stays inside one of them).
pub fn final_strong_components(g: &Digraph) -> Vec<Vec<usize>> {
    scc(g).final_components()
}

pub fn is_strongly_connected(g: &Digraph) -> bool {
    g.vertex_count() > 0 && scc(g).count() == 1
}

// ---------------------------------------------------------------------------
// Girth
// ---------------------------------------------------------------------------

/// Length of the shortest directed cycle, or `None` for acyclic graphs.
///
/// One BFS per start vertex: the shortest cycle through `s` is the shortest
/// path that returns to `s`.
pub fn girth(g: &Digraph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        dist.fill(usize::MAX);
        queue.clear();
        dist[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if let Some(b) = best {
                if dist[u] + 1 >= b {
                    continue;
                }
            }
            for &w in g.out(u) {
                if w == s {
                    let cand = dist[u] + 1;
                    if best.is_none_or(|b| cand < b) {
                        best = Some(cand);
                    }
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    best
}

/// A shortest directed cycle as a vertex sequence, deterministic: among all
/// shortest cycles, the one whose index sequence is lexicographically
/// smallest. `None` for acyclic graphs.
pub fn shortest_cycle(g: &Digraph) -> Option<Vec<usize>> {
    let target = girth(g)?;
    let n = g.vertex_count();
    let inn = g.in_neighborhoods();
    for s in 0..n {
        // dist_to[v]: length of a shortest path v -> s.
        let mut dist_to = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist_to[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in &inn[u] {
                if dist_to[w] == usize::MAX {
                    dist_to[w] = dist_to[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        let reachable = g
            .out(s)
            .iter()
            .any(|&w| (w == s && target == 1) || dist_to[w].saturating_add(1) == target);
        if !reachable {
            continue;
        }
        if target == 1 {
            return Some(vec![s]);
        }
        // Greedy lexicographically-smallest walk of exact length `target`.
        // Any such walk is a simple cycle, otherwise a shorter cycle than the
        // girth would exist.
        let mut cycle = vec![s];
        let mut cur = s;
        for step in 1..target {
            let need = target - step;
            let next = g
                .out(cur)
                .iter()
                .copied()
                .filter(|&w| w != s && dist_to[w] == need)
                .min()
                .expect("walk reconstruction failed");
            cycle.push(next);
            cur = next;
        }
        debug_assert!(g.out(cur).contains(&s));
        return Some(cycle);
    }
    None
}

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

/// Checks whether `perm` (a map of vertex ids) is a weight-preserving
/// automorphism: it must be a bijection on V mapping every edge to an edge of
/// exactly equal weight.
pub fn check_automorphism(g: &WeightedDigraph, perm: &HashMap<String, String>) -> Result<bool> {
    let base = g.base();
    let n = base.vertex_count();
    let mut image = vec![usize::MAX; n];
    let mut hit = vec![false; n];
    if perm.len() != n {
        return Err(QcsError::Validation(format!(
            "permutation has {} entries for {} vertices",
            perm.len(),
            n
        )));
    }
    for (from, to) in perm {
        let (u, v) = match (base.index_of(from), base.index_of(to)) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                return Err(QcsError::Validation(format!(
                    "permutation entry {from} -> {to} mentions unknown vertex"
                )))
            }
        };
        if hit[v] {
            return Err(QcsError::Validation(format!(
                "permutation not injective at '{to}'"
            )));
        }
        hit[v] = true;
        image[u] = v;
    }
    let mut weight_of = HashMap::new();
    for (i, &(u, v)) in base.edges().iter().enumerate() {
        weight_of.insert((u, v), g.weight(i));
    }
    for (i, &(u, v)) in base.edges().iter().enumerate() {
        match weight_of.get(&(image[u], image[v])) {
            Some(&w) if w == g.weight(i) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Applies a vertex bijection to produce the relabeled graph (ids permuted,
/// edge set mapped). Used to check invariance properties.
pub fn relabel(g: &Digraph, image: &[usize]) -> Result<Digraph> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    for &v in image {
        if v >= n || seen[v] {
            return Err(QcsError::Validation("relabel map is not a bijection".into()));
        }
        seen[v] = true;
    }
    let mut ids = vec![String::new(); n];
    for v in 0..n {
        ids[image[v]] = g.id(v).to_string();
    }
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(u, v)| (image[u], image[v])).collect();
    Ok(Digraph::from_indexed(ids, edges))
}
