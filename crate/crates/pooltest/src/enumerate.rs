//! Enumeration of the copies H_1..H_m of a pattern inside a host graph,
//! the overlap parameter r_G(H), and the pair-case classification used by
//! the probability bounds.
//!
//! A copy is a distinct edge set: two embeddings with the same edge image
//! are indistinguishable by edge-detecting tests, so they collapse to one
//! occurrence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

pub const DEFAULT_OCCURRENCE_CAP: usize = 1_000_000;

/// One copy of the pattern inside the host, identified by its edge set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    edges: Vec<(u32, u32)>,
    vertices: VertexSet,
}

impl Occurrence {
    fn from_edges(host_n: usize, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let vertices =
            VertexSet::from_iter(host_n, edges.iter().flat_map(|&(u, v)| [u, v]));
        Occurrence { edges, vertices }
    }

    /// Sorted canonical edge list.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Maximum degree of the copy itself (equals the pattern's, by isomorphism).
    pub fn max_degree(&self) -> usize {
        let mut deg = std::collections::HashMap::new();
        for &(u, v) in &self.edges {
            *deg.entry(u).or_insert(0usize) += 1;
            *deg.entry(v).or_insert(0usize) += 1;
        }
        deg.values().copied().max().unwrap_or(0)
    }

    /// True iff some edge of this copy has both endpoints in `pool`.
    pub fn has_edge_in(&self, pool: &VertexSet) -> bool {
        self.edges
            .iter()
            .any(|&(u, v)| pool.contains(u) && pool.contains(v))
    }
}

/// Serialized form used by the occurrence-list JSON document.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct OccurrenceRecord {
    pub vertices: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

impl From<&Occurrence> for OccurrenceRecord {
    fn from(occ: &Occurrence) -> Self {
        OccurrenceRecord {
            vertices: occ.vertices.iter().collect(),
            edges: occ.edges.clone(),
        }
    }
}

impl OccurrenceRecord {
    pub fn to_occurrence(&self, host_n: usize) -> Occurrence {
        Occurrence::from_edges(host_n, self.edges.clone())
    }
}

/// Which of the three proof-case predicates an ordered pair satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag", content = "witness")]
pub enum PairCase {
    /// Same vertex sets, exactly one edge in E(H_i) \ E(H_j); witness is that edge.
    SameVerticesOneEdgeDiff((u32, u32)),
    /// At least one vertex in V(H_i) \ V(H_j); witness is one such vertex.
    VertexDiff(u32),
    /// The host subgraph induced on V(H_i) \ V(H_j) has an edge; witness is one.
    EdgeInDifference((u32, u32)),
    /// None of the three predicates holds (e.g. same vertices, >= 2 edges apart).
    Other,
}

/// Enumerates every copy of `pattern` in `host`, in canonical edge-set order.
pub fn enumerate_occurrences(
    host: &Graph,
    pattern: &Graph,
    cap: usize,
) -> Result<Vec<Occurrence>> {
    if pattern.edge_count() == 0 {
        return Err(Error::InvalidPattern("pattern has no edges".into()));
    }
    if pattern.has_isolated_vertex() {
        return Err(Error::InvalidPattern(
            "pattern has an isolated vertex; only edges are testable".into(),
        ));
    }

    let order = search_order(pattern);
    let mut seen: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
    let mut mapping: Vec<Option<u32>> = vec![None; pattern.vertex_count()];
    let mut used = VertexSet::empty(host.vertex_count());
    backtrack(
        host,
        pattern,
        &order,
        0,
        &mut mapping,
        &mut used,
        &mut seen,
        cap,
    )?;

    Ok(seen
        .into_iter()
        .map(|edges| Occurrence::from_edges(host.vertex_count(), edges))
        .collect())
}

/// Pattern vertices ordered so each one (after the first of its component)
/// has an already-placed neighbor; ties broken by descending degree.
fn search_order(pattern: &Graph) -> Vec<u32> {
    let n = pattern.vertex_count();
    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let next = (0..n as u32)
            .filter(|&v| !placed[v as usize])
            .max_by_key(|&v| {
                let attached = pattern
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| placed[u as usize])
                    .count();
                (attached, pattern.degree(v))
            })
            .unwrap();
        placed[next as usize] = true;
        order.push(next);
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    host: &Graph,
    pattern: &Graph,
    order: &[u32],
    depth: usize,
    mapping: &mut Vec<Option<u32>>,
    used: &mut VertexSet,
    seen: &mut BTreeSet<Vec<(u32, u32)>>,
    cap: usize,
) -> Result<()> {
    if depth == order.len() {
        let mut edges: Vec<(u32, u32)> = pattern
            .edges()
            .iter()
            .map(|&(a, b)| {
                let u = mapping[a as usize].unwrap();
                let v = mapping[b as usize].unwrap();
                (u.min(v), u.max(v))
            })
            .collect();
        edges.sort_unstable();
        if seen.insert(edges) && seen.len() > cap {
            return Err(Error::OccurrenceCap { cap });
        }
        return Ok(());
    }

    let pv = order[depth];
    let placed_neighbor = pattern
        .neighbors(pv)
        .iter()
        .find(|&&u| mapping[u as usize].is_some())
        .map(|&u| mapping[u as usize].unwrap());

    // Candidates come from a mapped neighbor's adjacency when one exists;
    // otherwise (new component) every host vertex is a candidate.
    let candidates: Vec<u32> = match placed_neighbor {
        Some(h) => host.neighbors(h).to_vec(),
        None => (0..host.vertex_count() as u32).collect(),
    };

    'cand: for hv in candidates {
        if used.contains(hv) {
            continue;
        }
        for &pu in pattern.neighbors(pv) {
            if let Some(hu) = mapping[pu as usize] {
                if !host.has_edge(hv, hu) {
                    continue 'cand;
                }
            }
        }
        mapping[pv as usize] = Some(hv);
        used.insert(hv);
        backtrack(host, pattern, order, depth + 1, mapping, used, seen, cap)?;
        mapping[pv as usize] = None;
        used.remove(hv);
    }
    Ok(())
}

/// r_G(H, H_i): how many other copies share at least one vertex with copy `i`.
pub fn overlap_count(occurrences: &[Occurrence], i: usize) -> Result<usize> {
    if i >= occurrences.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: occurrences.len(),
        });
    }
    Ok(occurrences
        .iter()
        .enumerate()
        .filter(|&(j, occ)| j != i && occ.vertices.intersects(&occurrences[i].vertices))
        .count())
}

/// r_G(H): maximum overlap count over all copies.
pub fn r_g(occurrences: &[Occurrence]) -> Result<usize> {
    if occurrences.is_empty() {
        return Err(Error::EmptyOccurrenceList);
    }
    (0..occurrences.len())
        .map(|i| overlap_count(occurrences, i))
        .try_fold(0, |acc, c| Ok(acc.max(c?)))
}

/// Classifies the ordered pair (H_i, H_j) against the three proof-case
/// predicates; returns every case that applies, or `[Other]` if none does.
pub fn classify_pair(hi: &Occurrence, hj: &Occurrence, host: &Graph) -> Result<Vec<PairCase>> {
    if hi.edges == hj.edges {
        return Err(Error::IdenticalOccurrences);
    }
    let mut cases = Vec::new();

    if hi.vertices == hj.vertices {
        let diff: Vec<(u32, u32)> = hi
            .edges
            .iter()
            .copied()
            .filter(|e| !hj.edges.contains(e))
            .collect();
        if diff.len() == 1 {
            cases.push(PairCase::SameVerticesOneEdgeDiff(diff[0]));
        }
    }

    let vertex_diff = hi.vertices.difference(&hj.vertices);
    if let Some(witness) = vertex_diff.iter().next() {
        cases.push(PairCase::VertexDiff(witness));
    }
    if let Some(&edge) = host.induced_edges(&vertex_diff).first() {
        cases.push(PairCase::EdgeInDifference(edge));
    }

    if cases.is_empty() {
        cases.push(PairCase::Other);
    }
    Ok(cases)
}
