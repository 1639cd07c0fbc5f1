//! Dynamic call graphs: parsing, PageRank, context-block selection and
//! dummy-method synthesis for framework blocks.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::{tokenize, Origin, TokenSequence};

pub type NodeId = u64;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge {caller} -> {callee} references unknown node {missing}")]
    DanglingEdge {
        caller: NodeId,
        callee: NodeId,
        missing: NodeId,
    },
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("damping factor must lie in (0, 1), got {0}")]
    BadDamping(f64),
    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("cannot build a dummy method from block label {0:?}")]
    BadLabel(String),
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    App,
    Framework,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub source_ref: Option<String>,
}

#[derive(Debug, Deserialize, Serialize)]
struct GraphFile {
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
}

/// Validated call graph. Edges are deduplicated and self-loops are kept
/// apart in `recursive` rather than as edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallGraph {
    nodes: Vec<Node>,
    index: BTreeMap<NodeId, usize>,
    successors: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    recursive: BTreeSet<NodeId>,
}

impl CallGraph {
    pub fn new(nodes: Vec<Node>, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self, GraphError> {
        let mut index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(GraphError::DuplicateNode(node.id));
            }
        }
        let n = nodes.len();
        let mut successors = vec![Vec::new(); n];
        let mut predecessors = vec![Vec::new(); n];
        let mut recursive = BTreeSet::new();
        let mut seen = HashSet::new();
        for (caller, callee) in edges {
            let lookup = |id| {
                index.get(&id).copied().ok_or(GraphError::DanglingEdge {
                    caller,
                    callee,
                    missing: id,
                })
            };
            let (from, to) = (lookup(caller)?, lookup(callee)?);
            if from == to {
                recursive.insert(caller);
                continue;
            }
            if seen.insert((from, to)) {
                successors[from].push(to);
                predecessors[to].push(from);
            }
        }
        Ok(Self {
            nodes,
            index,
            successors,
            predecessors,
            recursive,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::new(file.nodes, file.edges)
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            nodes: self.nodes.clone(),
            edges: self.edges().collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serializes")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(move |(from, tos)| tos.iter().map(move |&to| (self.nodes[from].id, self.nodes[to].id)))
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    fn position(&self, id: NodeId) -> Result<usize, GraphError> {
        self.index.get(&id).copied().ok_or(GraphError::UnknownNode(id))
    }

    pub fn out_degree(&self, id: NodeId) -> Result<usize, GraphError> {
        Ok(self.successors[self.position(id)?].len())
    }

    /// Nodes with an edge into `id`, in edge-insertion order.
    pub fn predecessors(&self, id: NodeId) -> Result<Vec<NodeId>, GraphError> {
        Ok(self.predecessors[self.position(id)?].iter().map(|&i| self.nodes[i].id).collect())
    }

    /// Nodes whose recursive self-call was observed.
    pub fn recursive_nodes(&self) -> &BTreeSet<NodeId> {
        &self.recursive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    /// Ranks as produced by the fixed-point iteration, each at least `1 - d`.
    pub raw: BTreeMap<NodeId, f64>,
    /// `raw` scaled to sum to one.
    pub normalized: BTreeMap<NodeId, f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl RankVector {
    pub fn get(&self, id: NodeId) -> Option<f64> {
        self.normalized.get(&id).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Iterates `r_i = (1 - d) + d * sum_{j -> i} r_j / outdeg(j)` from `r = 1`.
/// Nodes without outgoing edges pass nothing on, so raw ranks need not sum to `n`.
pub fn pagerank(graph: &CallGraph, config: &PageRankConfig) -> Result<RankVector, GraphError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let d = config.damping;
    if !(d > 0.0 && d < 1.0) {
        return Err(GraphError::BadDamping(d));
    }
    let mut ranks = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        for (i, preds) in graph.predecessors.iter().enumerate() {
            let inflow: f64 = preds.iter().map(|&j| ranks[j] / graph.successors[j].len() as f64).sum();
            next[i] = (1.0 - d) + d * inflow;
        }
        residual = ranks.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut ranks, &mut next);
        if residual <= config.tolerance {
            break;
        }
    }
    if residual > config.tolerance {
        return Err(GraphError::NotConverged { iterations, residual });
    }
    let total: f64 = ranks.iter().sum();
    let ids = graph.nodes.iter().map(|node| node.id);
    Ok(RankVector {
        raw: ids.clone().zip(ranks.iter().copied()).collect(),
        normalized: ids.zip(ranks.iter().map(|r| r / total)).collect(),
        iterations,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    LowestId,
    SeededRandom,
}

/// Picks the highest-ranked predecessor of `target`.
///
/// `rng` is only consulted under [`TieRule::SeededRandom`] when several
/// predecessors share the top rank. `min_rank`, when set, discards
/// predecessors whose normalized rank falls below it.
pub fn select_context_block<R: Rng + ?Sized>(
    graph: &CallGraph,
    ranks: &RankVector,
    target: NodeId,
    tie_rule: TieRule,
    min_rank: Option<f64>,
    rng: &mut R,
) -> Result<Option<NodeId>, GraphError> {
    let rank_of = |id: NodeId| ranks.get(id).ok_or(GraphError::UnknownNode(id));
    let mut scored = Vec::new();
    for pred in graph.predecessors(target)? {
        let rank = rank_of(pred)?;
        if min_rank.is_none_or(|m| rank >= m) {
            scored.push((pred, rank));
        }
    }
    let Some(best) = scored.iter().map(|&(_, r)| r).reduce(f64::max) else {
        return Ok(None);
    };
    let mut tied: Vec<NodeId> = scored.into_iter().filter(|&(_, r)| r == best).map(|(id, _)| id).collect();
    tied.sort_unstable();
    Ok(match tie_rule {
        TieRule::LowestId => tied.first().copied(),
        TieRule::SeededRandom => tied.choose(rng).copied(),
    })
}

/// Wraps a framework callback label such as `onClick(View view)` into
/// `public void onClick ( View view ) { }` and tokenizes it.
pub fn synthesize_dummy(block_label: &str) -> Result<TokenSequence, GraphError> {
    let bad = || GraphError::BadLabel(block_label.to_string());
    let label = block_label.trim();
    let open = label.find('(').ok_or_else(bad)?;
    let close = label.rfind(')').ok_or_else(bad)?;
    if close < open || !label[close + 1..].trim().is_empty() {
        return Err(bad());
    }
    // Qualified names such as `android.view.View.OnClickListener.onClick`
    // keep only the method name.
    let name = label[..open].trim().rsplit(['.', '$', ' ']).next().unwrap_or("");
    let valid_ident = |s: &str| {
        s.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
            && s.chars().all(|c| c.is_alphanumeric() || c == '_')
    };
    if !valid_ident(name) {
        return Err(bad());
    }
    let params = label[open + 1..close].trim();
    if params.contains(['(', ')']) {
        return Err(bad());
    }
    let source = format!("public void {name}({params}) {{}}");
    Ok(tokenize(&source, Origin::Code))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn node(id: NodeId, kind: NodeKind) -> Node {
        Node {
            id,
            label: format!("m{id}()"),
            kind,
            source_ref: None,
        }
    }

    fn graph(n: u64, edges: &[(NodeId, NodeId)]) -> CallGraph {
        CallGraph::new((1..=n).map(|i| node(i, NodeKind::App)).collect(), edges.iter().copied()).unwrap()
    }

    #[test]
    fn parse_small_graph() {
        let g = CallGraph::from_json(
            r#"{"nodes":[{"id":1,"label":"a()","kind":"app","source_ref":"p1"},
                         {"id":2,"label":"b()","kind":"framework","source_ref":null}],
                "edges":[[1,2],[1,2]]}"#,
        )
        .unwrap();
        assert_eq!(g.out_degree(1).unwrap(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.node(1).unwrap().source_ref.as_deref(), Some("p1"));
        assert_eq!(g.node(2).unwrap().kind, NodeKind::Framework);
    }

    #[test]
    fn parse_errors() {
        let err = CallGraph::from_json(r#"{"nodes":[{"id":1,"label":"a()","kind":"app"}],"edges":[[1,99]]}"#).unwrap_err();
        assert!(matches!(err, GraphError::DanglingEdge { missing: 99, .. }));
        assert!(err.to_string().contains("1 -> 99"));
        let err = CallGraph::from_json(
            r#"{"nodes":[{"id":1,"label":"a()","kind":"app"},{"id":1,"label":"b()","kind":"app"}],"edges":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::DuplicateNode(1)));
    }

    #[test]
    fn self_loops_become_metadata() {
        let g = graph(2, &[(1, 1), (1, 2)]);
        assert_eq!(g.edge_count(), 1);
        assert!(g.recursive_nodes().contains(&1));
        assert_eq!(g.predecessors(1).unwrap(), Vec::<NodeId>::new());
    }

    #[test]
    fn pagerank_single_and_pair() {
        let r = pagerank(&graph(1, &[]), &PageRankConfig::default()).unwrap();
        assert_eq!(r.normalized[&1], 1.0);
        let r = pagerank(&graph(2, &[(1, 2)]), &PageRankConfig::default()).unwrap();
        assert!((r.raw[&1] - 0.15).abs() < 1e-12);
        assert!((r.raw[&2] - 0.2775).abs() < 1e-12);
    }

    #[test]
    fn pagerank_errors() {
        assert!(matches!(
            pagerank(&graph(0, &[]), &PageRankConfig::default()),
            Err(GraphError::EmptyGraph)
        ));
        let cfg = PageRankConfig { damping: 1.0, ..Default::default() };
        assert!(matches!(pagerank(&graph(1, &[]), &cfg), Err(GraphError::BadDamping(_))));
        let cfg = PageRankConfig { max_iter: 2, ..Default::default() };
        let err = pagerank(&graph(3, &[(1, 2), (2, 3)]), &cfg).unwrap_err();
        assert!(matches!(err, GraphError::NotConverged { iterations: 2, .. }));
    }

    #[test]
    fn selection_rules() {
        // 1 -> 3, 2 -> 3: symmetric predecessors tie on rank.
        let g = graph(4, &[(1, 3), (2, 3)]);
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_context_block(&g, &r, 3, TieRule::LowestId, None, &mut rng).unwrap(), Some(1));
        assert_eq!(select_context_block(&g, &r, 1, TieRule::LowestId, None, &mut rng).unwrap(), None);
        assert!(matches!(
            select_context_block(&g, &r, 42, TieRule::LowestId, None, &mut rng),
            Err(GraphError::UnknownNode(42))
        ));
        let pick = |seed| {
            select_context_block(&g, &r, 3, TieRule::SeededRandom, None, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        assert_eq!(pick(5), pick(5));
        let picks: HashSet<_> = (0..32).map(pick).collect();
        assert_eq!(picks, HashSet::from([Some(1), Some(2)]));
        let high = select_context_block(&g, &r, 3, TieRule::LowestId, Some(0.9), &mut rng).unwrap();
        assert_eq!(high, None);
    }

    #[test]
    fn higher_rank_wins() {
        // 4 is fed by 1, so it outranks 2 as a predecessor of 3.
        let g = graph(4, &[(1, 4), (4, 3), (2, 3)]);
        let r = pagerank(&g, &PageRankConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_context_block(&g, &r, 3, TieRule::LowestId, None, &mut rng).unwrap(), Some(4));
    }

    #[test]
    fn dummy_methods() {
        assert_eq!(
            synthesize_dummy("onClick(View view)").unwrap().tokens,
            ["public", "void", "on", "click", "(", "view", "view", ")", "{", "}"]
        );
        assert_eq!(synthesize_dummy("run()").unwrap().tokens, ["public", "void", "run", "(", ")", "{", "}"]);
        assert_eq!(
            synthesize_dummy("android.view.View$OnClickListener.onClick(View v)").unwrap().joined(),
            "public void on click ( view v ) { }"
        );
        for bad in ["onClick", "(View v)", "on-click()", "f(a))", "f(a) trailing"] {
            assert!(matches!(synthesize_dummy(bad), Err(GraphError::BadLabel(_))), "{bad}");
        }
    }
}
