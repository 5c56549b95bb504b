//! Undirected simple graphs with dense integer vertex ids and bit-vector
//! vertex sets. Everything downstream (enumeration, pooling, oracles) works
//! on these two types.

use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Subset of `[0, n)` stored as packed 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet {
            n,
            words: vec![0; n.div_ceil(WORD_BITS)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for v in 0..n {
            s.insert(v as u32);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = u32>>(n: usize, vertices: I) -> Self {
        let mut s = Self::empty(n);
        for v in vertices {
            s.insert(v);
        }
        s
    }

    /// Universe size, not the member count.
    pub fn capacity(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, v: u32) {
        debug_assert!((v as usize) < self.n);
        self.words[v as usize / WORD_BITS] |= 1u64 << (v as usize % WORD_BITS);
    }

    pub fn remove(&mut self, v: u32) {
        debug_assert!((v as usize) < self.n);
        self.words[v as usize / WORD_BITS] &= !(1u64 << (v as usize % WORD_BITS));
    }

    pub fn contains(&self, v: u32) -> bool {
        let i = v as usize;
        i < self.n && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n as u32).filter(move |&v| self.contains(v))
    }

    fn zip_with(&self, other: &VertexSet, f: impl Fn(u64, u64) -> u64) -> VertexSet {
        debug_assert_eq!(self.n, other.n);
        VertexSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Undirected simple graph. Edges are stored canonically (min endpoint
/// first, sorted, deduplicated), so graph equality is `(n, edges)` equality.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
    adj: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph from an edge list; `n` must cover every endpoint.
    pub fn new(n: usize, edge_list: &[(u32, u32)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(edge_list.len());
        for &(u, v) in edge_list {
            if u == v {
                return Err(Error::SelfLoop { line: 0, vertex: u });
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("edge ({u}, {v}) exceeds vertex count {n}"),
                });
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_isolated_vertex(&self) -> bool {
        self.adj.iter().any(Vec::is_empty)
    }

    /// Edges of the subgraph induced by `s`: both endpoints must be members.
    pub fn induced_edges(&self, s: &VertexSet) -> Vec<(u32, u32)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(u, v)| s.contains(u) && s.contains(v))
            .collect()
    }

    pub fn has_induced_edge(&self, s: &VertexSet) -> bool {
        self.edges.iter().any(|&(u, v)| s.contains(u) && s.contains(v))
    }

    /// Serializes back to the edge-list text format accepted by
    /// [`parse_edge_list`]. The header is always emitted so isolated
    /// vertices survive the round trip.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

/// Parses the edge-list text format:
///
/// ```text
/// # comment
/// n 5        (optional header; otherwise n = 1 + max vertex id)
/// 0 1
/// 1 2
/// ```
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut declared_n: Option<usize> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut max_vertex: Option<u32> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap();
        if first == "n" {
            if declared_n.is_some() || !edges.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "header must appear once, before any edge".into(),
                });
            }
            let count = tokens.next().ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "header missing vertex count".into(),
            })?;
            if tokens.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "trailing tokens after header".into(),
                });
            }
            declared_n = Some(count.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad vertex count {count:?}"),
            })?);
            continue;
        }
        let u = first.parse::<u32>().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad vertex id {first:?}"),
        })?;
        let second = tokens.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: "edge line needs two endpoints".into(),
        })?;
        let v = second.parse::<u32>().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("bad vertex id {second:?}"),
        })?;
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "trailing tokens after edge".into(),
            });
        }
        if u == v {
            return Err(Error::SelfLoop {
                line: line_no,
                vertex: u,
            });
        }
        max_vertex = Some(max_vertex.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v));
    }

    let implied_n = max_vertex.map_or(0, |m| m as usize + 1);
    let n = match declared_n {
        Some(d) => {
            if d < implied_n {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("header n {d} smaller than max vertex id {}", implied_n - 1),
                });
            }
            d
        }
        None => implied_n,
    };
    Graph::new(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_path() {
        let g = parse_edge_list("0 1\n1 2\n2 3").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn parse_dedups_reversed_edge() {
        let g = parse_edge_list("0 1\n1 0").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn parse_rejects_self_loop() {
        match parse_edge_list("0 0") {
            Err(Error::SelfLoop { line: 1, vertex: 0 }) => {}
            other => panic!("expected self-loop error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        match parse_edge_list("0 1\nfoo bar") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn parse_header_and_comments() {
        let g = parse_edge_list("# a comment\nn 5\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert!(g.has_isolated_vertex());
    }

    #[test]
    fn parse_empty_text() {
        let g = parse_edge_list("").unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert!(!g.has_isolated_vertex());
    }

    #[test]
    fn max_degree_examples() {
        let k2 = parse_edge_list("0 1").unwrap();
        assert_eq!(k2.max_degree(), 1);
        let star = parse_edge_list("0 1\n0 2\n0 3").unwrap();
        assert_eq!(star.max_degree(), 3);
        let c5 = parse_edge_list("0 1\n1 2\n2 3\n3 4\n4 0").unwrap();
        assert_eq!(c5.max_degree(), 2);
    }

    #[test]
    fn isolated_vertex_detection() {
        let g = parse_edge_list("n 3\n0 1").unwrap();
        assert!(g.has_isolated_vertex());
        let k2 = parse_edge_list("0 1").unwrap();
        assert!(!k2.has_isolated_vertex());
    }

    #[test]
    fn induced_edges_examples() {
        let k3 = parse_edge_list("0 1\n0 2\n1 2").unwrap();
        let s = VertexSet::from_iter(3, [0, 1]);
        assert_eq!(k3.induced_edges(&s), vec![(0, 1)]);

        let p4 = parse_edge_list("0 1\n1 2\n2 3").unwrap();
        let sparse = VertexSet::from_iter(4, [0, 2]);
        assert!(p4.induced_edges(&sparse).is_empty());
        let full = VertexSet::full(4);
        assert_eq!(p4.induced_edges(&full).len(), 3);
        assert!(p4.induced_edges(&VertexSet::empty(4)).is_empty());
    }

    #[test]
    fn round_trip() {
        let g = parse_edge_list("n 6\n0 1\n2 3\n4 5\n1 2").unwrap();
        let again = parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn vertex_set_ops() {
        let a = VertexSet::from_iter(70, [0, 3, 65]);
        let b = VertexSet::from_iter(70, [3, 64]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![3]);
        assert_eq!(a.union(&b).len(), 4);
        assert_eq!(a.difference(&b).iter().collect::<Vec<_>>(), vec![0, 65]);
        assert!(a.intersects(&b));
        assert!(!a.is_subset(&b));
        assert!(a.intersection(&b).is_subset(&a));
    }
}
