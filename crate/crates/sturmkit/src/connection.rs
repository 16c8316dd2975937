//! The heteroclinic connection graph. A heteroclinic from source to target
//! exists exactly when the two equilibria are adjacent (no equilibrium between
//! them at x = 0 carries the equal zero-number pattern) and the Morse index
//! drops. The graph is built twice: directly from the adjacency criterion,
//! and as the transitive closure of unblocked index-difference-one edges;
//! the two constructions must coincide, which serves as an end-to-end
//! checksum of the zero-number data.
//!
//! This module sees only boundary values, Morse indices and the zero-number
//! matrix, so synthetic data can be injected for property tests.

use crate::error::{Result, SturmError};
use crate::invariants::SturmData;

/// Strict betweenness of boundary values at x = 0.
pub fn is_between(star: f64, lo: f64, hi: f64) -> bool {
    (lo < star && star < hi) || (hi < star && star < lo)
}

/// Adjacency of e_j and e_k (1-based): no equilibrium strictly between them
/// at x = 0 realizes z(j,*) = z(j,k) = z(k,*).
pub fn adjacent(j: usize, k: usize, data: &SturmData, a: &[f64]) -> bool {
    let z_jk = data.zmat[j - 1][k - 1];
    for m in 1..=data.n {
        if m == j || m == k {
            continue;
        }
        if is_between(a[m - 1], a[j - 1], a[k - 1])
            && data.zmat[j - 1][m - 1] == z_jk
            && data.zmat[k - 1][m - 1] == z_jk
        {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingVerdict {
    None,
    Morse,
    ZeroNumber,
}

/// Blocking verdict for a candidate heteroclinic source -> target (1-based).
/// Morse blocking: z(source - target) != i(target). Zero-number blocking: an
/// equilibrium between them carries the equal zero-number pattern.
pub fn blocked(source: usize, target: usize, data: &SturmData, a: &[f64]) -> BlockingVerdict {
    if data.zmat[source - 1][target - 1] != data.morse[target - 1] as i64 {
        return BlockingVerdict::Morse;
    }
    if !adjacent(source, target, data, a) {
        return BlockingVerdict::ZeroNumber;
    }
    BlockingVerdict::None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// direct adjacency criterion with Morse index difference one
    Adjacency,
    /// realized through a cascade of index-difference-one heteroclinics
    Cascade,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Node {
    pub id: usize,
    pub morse: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConnectionGraph {
    pub nodes: Vec<Node>,
    /// unblocked pairs with Morse index difference exactly one
    pub hasse_edges: Vec<(usize, usize)>,
    /// every heteroclinic pair, tagged by how it was established
    pub edges: Vec<Edge>,
}

impl ConnectionGraph {
    pub fn has_edge(&self, source: usize, target: usize) -> bool {
        self.edges.iter().any(|e| e.source == source && e.target == target)
    }

    pub fn successors(&self, source: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.source == source).map(|e| e.target).collect()
    }

    /// Kahn topological sort; None if a cycle exists.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n + 1];
        for e in &self.edges {
            indeg[e.target] += 1;
        }
        let mut queue: Vec<usize> = (1..=n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop() {
            order.push(v);
            for e in self.edges.iter().filter(|e| e.source == v) {
                indeg[e.target] -= 1;
                if indeg[e.target] == 0 {
                    queue.push(e.target);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// DOT export: solid edges are the Hasse diagram, dashed the transitive
    /// connections.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph attractor {\n");
        for node in &self.nodes {
            out.push_str(&format!(
                "    \"e{}\" [label=\"e{} [i={}]\"];\n",
                node.id, node.id, node.morse
            ));
        }
        for e in &self.edges {
            let style = match e.provenance {
                Provenance::Adjacency => "solid",
                Provenance::Cascade => "dashed",
            };
            out.push_str(&format!(
                "    \"e{}\" -> \"e{}\" [style={}];\n",
                e.source, e.target, style
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Build the connection graph from Sturm data and boundary values a[i] of
/// e_{i+1}. Runs both constructions and insists they agree.
pub fn build_connection_graph(data: &SturmData, a: &[f64]) -> Result<ConnectionGraph> {
    let n = data.n;
    if a.len() != n {
        return Err(SturmError::InvalidParameter("boundary values do not match data".into()));
    }

    let mut hasse: Vec<(usize, usize)> = Vec::new();
    for s in 1..=n {
        for t in 1..=n {
            if s != t
                && data.morse[s - 1] == data.morse[t - 1] + 1
                && blocked(s, t, data, a) == BlockingVerdict::None
            {
                hasse.push((s, t));
            }
        }
    }

    // (a) direct: the adjacency criterion of the connection theorem
    let mut direct = vec![vec![false; n + 1]; n + 1];
    for s in 1..=n {
        for t in 1..=n {
            if s != t && data.morse[s - 1] > data.morse[t - 1] && adjacent(s, t, data, a) {
                direct[s][t] = true;
            }
        }
    }

    // (b) cascade: transitive closure of the Hasse edges
    let mut cascade = vec![vec![false; n + 1]; n + 1];
    for &(s, t) in &hasse {
        cascade[s][t] = true;
    }
    for mid in 1..=n {
        for s in 1..=n {
            if cascade[s][mid] {
                for t in 1..=n {
                    if cascade[mid][t] {
                        cascade[s][t] = true;
                    }
                }
            }
        }
    }

    for s in 1..=n {
        for t in 1..=n {
            if direct[s][t] != cascade[s][t] {
                return Err(SturmError::Inconsistency {
                    j: s,
                    k: t,
                    direct: direct[s][t],
                    cascade: cascade[s][t],
                    z: data.zmat[s - 1][t - 1],
                    ij: data.morse[s - 1],
                    ik: data.morse[t - 1],
                });
            }
        }
    }

    let hasse_set: std::collections::HashSet<(usize, usize)> = hasse.iter().copied().collect();
    let mut edges = Vec::new();
    for s in 1..=n {
        for t in 1..=n {
            if direct[s][t] {
                edges.push(Edge {
                    source: s,
                    target: t,
                    provenance: if hasse_set.contains(&(s, t)) {
                        Provenance::Adjacency
                    } else {
                        Provenance::Cascade
                    },
                });
            }
        }
    }

    let graph = ConnectionGraph {
        nodes: (1..=n).map(|id| Node { id, morse: data.morse[id - 1] }).collect(),
        hasse_edges: hasse,
        edges,
    };

    if graph.topological_order().is_none() {
        return Err(SturmError::Invariant("connection graph contains a cycle".into()));
    }
    // Morse-Smale transitivity: edges are closed under composition.
    for e1 in &graph.edges {
        for e2 in &graph.edges {
            if e1.target == e2.source && !graph.has_edge(e1.source, e2.target) {
                return Err(SturmError::Invariant(format!(
                    "edges e{}->e{} and e{}->e{} lack the composite",
                    e1.source, e1.target, e2.source, e2.target
                )));
            }
        }
    }
    Ok(graph)
}

/// Minimal DOT well-formedness check applied before any graph file is
/// written: a digraph header, one node or edge statement per line, balanced
/// braces.
pub fn validate_dot(text: &str) -> Result<()> {
    let bad = |msg: &str, line: &str| {
        Err(SturmError::Invariant(format!("DOT check failed: {msg}: {line:?}")))
    };
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let header_ok = header
        .strip_prefix("digraph ")
        .and_then(|rest| rest.strip_suffix(" {"))
        .map(|name| !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_'))
        .unwrap_or(false);
    if !header_ok {
        return bad("expected 'digraph <name> {'", header);
    }
    let mut closed = false;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if closed {
            return bad("content after closing brace", line);
        }
        if line == "}" {
            closed = true;
            continue;
        }
        if !line.ends_with(';') {
            return bad("statement must end with ';'", line);
        }
        let stmt = &line[..line.len() - 1];
        let quoted = |s: &str| s.len() >= 3 && s.starts_with('"') && s.ends_with('"');
        let attrs_ok =
            |s: &str| s.is_empty() || (s.starts_with('[') && s.ends_with(']') && s.contains('='));
        if let Some(idx) = stmt.find(" -> ") {
            let (from, rest) = stmt.split_at(idx);
            let rest = &rest[4..];
            let (to, attrs) = match rest.find(' ') {
                Some(i) => (&rest[..i], rest[i + 1..].trim()),
                None => (rest, ""),
            };
            if !quoted(from.trim()) || !quoted(to) || !attrs_ok(attrs) {
                return bad("malformed edge statement", line);
            }
        } else {
            let (node, attrs) = match stmt.find(' ') {
                Some(i) => (&stmt[..i], stmt[i + 1..].trim()),
                None => (stmt, ""),
            };
            if !quoted(node) || !attrs_ok(attrs) {
                return bad("malformed node statement", line);
            }
        }
    }
    if !closed {
        return bad("missing closing brace", "");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SturmData assembled directly from known tables (no shooting involved).
    fn synthetic(morse: Vec<usize>, pairs: &[(usize, usize, i64)]) -> SturmData {
        let n = morse.len();
        let mut zmat = vec![vec![-1i64; n]; n];
        for &(j, k, z) in pairs {
            zmat[j - 1][k - 1] = z;
            zmat[k - 1][j - 1] = z;
        }
        SturmData {
            n,
            sigma: (1..=n).collect(),
            morse,
            zmat,
            rcounts: vec![vec![0; n]; n],
            zmat_method: "synthetic".into(),
            cross_check: "none".into(),
            agreement: vec![vec![true; n]; n],
            warnings: vec![],
        }
    }

    /// The five-equilibrium regime of the cubic example, from its zero-number
    /// table: morse [0,1,2,1,0], z(e1-ej)=0, z(e2-e3)=z(e2-e4)=1,
    /// z(e2-e5)=0, z(e3-e4)=1, z(e3-e5)=0, z(e4-e5)=0.
    fn five_regime() -> (SturmData, Vec<f64>) {
        let data = synthetic(
            vec![0, 1, 2, 1, 0],
            &[
                (1, 2, 0),
                (1, 3, 0),
                (1, 4, 0),
                (1, 5, 0),
                (2, 3, 1),
                (2, 4, 1),
                (2, 5, 0),
                (3, 4, 1),
                (3, 5, 0),
                (4, 5, 0),
            ],
        );
        (data, vec![-1.0, -0.44, 0.0, 0.44, 1.0])
    }

    /// The seven-equilibrium regime: morse [0,1,2,3,2,1,0] and the full table.
    fn seven_regime() -> (SturmData, Vec<f64>) {
        let mut pairs = vec![];
        for j in 2..=7 {
            pairs.push((1, j, 0));
        }
        for j in 3..=6 {
            pairs.push((2, j, 1));
        }
        pairs.push((2, 7, 0));
        pairs.extend_from_slice(&[(3, 4, 2), (3, 5, 2), (3, 6, 1), (3, 7, 0)]);
        pairs.extend_from_slice(&[(4, 5, 2), (4, 6, 1), (4, 7, 0)]);
        pairs.extend_from_slice(&[(5, 6, 1), (5, 7, 0)]);
        pairs.push((6, 7, 0));
        let data = synthetic(vec![0, 1, 2, 3, 2, 1, 0], &pairs);
        (data, vec![-1.0, -0.8, -0.35, 0.0, 0.35, 0.8, 1.0])
    }

    #[test]
    fn betweenness_is_strict() {
        assert!(is_between(-0.44, -1.0, 0.0)); // e2 between e1 and e3
        assert!(!is_between(1.0, -1.0, 0.0)); // e5 not between e1 and e3
        assert!(!is_between(-1.0, -1.0, 0.0)); // star = lo
    }

    #[test]
    fn blocking_pattern_kills_adjacency() {
        // z(1,2) = z(1,3) = z(2,3) = 0 with a1 < a2 < a3: e2 blocks (1,3).
        let data = synthetic(vec![0, 1, 0], &[(1, 2, 0), (1, 3, 0), (2, 3, 0)]);
        let a = vec![-1.0, 0.0, 1.0];
        assert!(!adjacent(1, 3, &data, &a));
        assert!(adjacent(1, 2, &data, &a));
    }

    #[test]
    fn morse_blocking_verdict() {
        // source i=1, target i=0, z(source-target)=1 != 0
        let data = synthetic(vec![1, 0], &[(1, 2, 1)]);
        assert_eq!(blocked(1, 2, &data, &[0.0, 1.0]), BlockingVerdict::Morse);
    }

    #[test]
    fn five_regime_graph_matches_the_known_attractor() {
        let (data, a) = five_regime();
        // unblocked verdicts quoted in the example set
        assert_eq!(blocked(3, 2, &data, &a), BlockingVerdict::None);
        assert_eq!(blocked(2, 5, &data, &a), BlockingVerdict::None);
        assert!(adjacent(3, 1, &data, &a));

        let g = build_connection_graph(&data, &a).unwrap();
        let mut hasse = g.hasse_edges.clone();
        hasse.sort_unstable();
        assert_eq!(hasse, vec![(2, 1), (2, 5), (3, 2), (3, 4), (4, 1), (4, 5)]);
        let cascades: Vec<(usize, usize)> = g
            .edges
            .iter()
            .filter(|e| e.provenance == Provenance::Cascade)
            .map(|e| (e.source, e.target))
            .collect();
        assert_eq!(cascades, vec![(3, 1), (3, 5)]);
        assert_eq!(g.edges.len(), 8);
    }

    #[test]
    fn seven_regime_graph_matches_the_known_attractor() {
        let (data, a) = seven_regime();
        assert!(adjacent(3, 6, &data, &a)); // blocked by neither e4 nor e5
        assert!(adjacent(2, 7, &data, &a)); // z(2,7)=0 while z(2,m)=1 between

        let g = build_connection_graph(&data, &a).unwrap();
        let mut hasse = g.hasse_edges.clone();
        hasse.sort_unstable();
        assert_eq!(
            hasse,
            vec![
                (2, 1),
                (2, 7),
                (3, 2),
                (3, 6),
                (4, 3),
                (4, 5),
                (5, 2),
                (5, 6),
                (6, 1),
                (6, 7)
            ]
        );
        // closure: e4 reaches everything below it
        for t in [1, 2, 3, 5, 6, 7] {
            assert!(g.has_edge(4, t), "missing 4 -> {t}");
        }
        assert!(g.topological_order().is_some());
    }

    #[test]
    fn three_regime_has_two_edges() {
        let data = synthetic(vec![0, 1, 0], &[(1, 2, 0), (1, 3, 0), (2, 3, 0)]);
        let g = build_connection_graph(&data, &[-1.0, 0.0, 1.0]).unwrap();
        let mut edges: Vec<(usize, usize)> =
            g.edges.iter().map(|e| (e.source, e.target)).collect();
        edges.sort_unstable();
        assert_eq!(edges, vec![(2, 1), (2, 3)]);
    }

    #[test]
    fn inconsistent_data_is_rejected_with_context() {
        // Morse gap of two with no intermediate equilibrium: direct adjacency
        // claims an edge, but no cascade can realize it.
        let data = synthetic(vec![2, 0], &[(1, 2, 0)]);
        match build_connection_graph(&data, &[0.0, 1.0]) {
            Err(SturmError::Inconsistency { j, k, direct, cascade, .. }) => {
                assert_eq!((j, k), (1, 2));
                assert!(direct && !cascade);
            }
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn dot_export_is_valid_and_styled() {
        let (data, a) = five_regime();
        let g = build_connection_graph(&data, &a).unwrap();
        let dot = g.to_dot();
        validate_dot(&dot).unwrap();
        assert_eq!(dot.matches("[style=solid]").count(), 6);
        assert_eq!(dot.matches("[style=dashed]").count(), 2);
        assert_eq!(dot.matches("label=").count(), 5);
    }

    #[test]
    fn dot_validator_rejects_garbage() {
        assert!(validate_dot("graph g {\n}\n").is_err());
        assert!(validate_dot("digraph g {\n  e1 -> e2\n}\n").is_err());
        assert!(validate_dot("digraph g {\n  \"a\" -> \"b\" [style=solid];\n").is_err());
    }
}
