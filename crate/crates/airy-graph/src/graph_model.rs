//! Metric star graphs, their edges and the vertex trace spaces `G±`.
//!
//! A trace on one side is stored as three blocks `(u0 | u1 | u2)`: all values,
//! then all first derivatives, then all second derivatives, each block in the
//! graph's fixed edge order for that side. `G±` therefore has dimension
//! `3·|E±|`.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::{CVec, C64};

/// Parametrization of a half-line edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Parametrized by `(−∞, 0)`; the vertex is the right end.
    Incoming,
    /// Parametrized by `(0, ∞)`; the vertex is the left end.
    Outgoing,
}

/// Which boundary space a trace belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Traces `u(0−)` of incoming edges.
    Minus,
    /// Traces `u(0+)` of outgoing edges.
    Plus,
}

impl Side {
    pub fn orientation(self) -> Orientation {
        match self {
            Side::Minus => Orientation::Incoming,
            Side::Plus => Orientation::Outgoing,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Minus => write!(f, "minus"),
            Side::Plus => write!(f, "plus"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub orientation: Orientation,
    /// Dispersion coefficient, must be positive.
    pub alpha: f64,
    /// Transport coefficient.
    pub beta: f64,
}

impl Edge {
    pub fn incoming(id: impl Into<String>, alpha: f64, beta: f64) -> Self {
        Edge { id: id.into(), orientation: Orientation::Incoming, alpha, beta }
    }

    pub fn outgoing(id: impl Into<String>, alpha: f64, beta: f64) -> Self {
        Edge { id: id.into(), orientation: Orientation::Outgoing, alpha, beta }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge `{0}` has non-positive or non-finite alpha")]
    NonPositiveAlpha(String),
    #[error("edge `{0}` has a non-finite beta")]
    NonFiniteBeta(String),
    #[error("edge id `{0}` is used more than once")]
    DuplicateId(String),
    #[error("graph has no edges")]
    EmptyGraph,
}

/// A star graph: finitely many half-lines meeting at one vertex at coordinate 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StarGraph {
    edges: Vec<Edge>,
}

impl StarGraph {
    /// Wraps the edge list without checking it; see [`validate_graph`].
    pub fn new(edges: Vec<Edge>) -> Self {
        StarGraph { edges }
    }

    /// Builds a graph and validates it.
    pub fn validated(edges: Vec<Edge>) -> Result<Self, Vec<GraphError>> {
        let g = StarGraph { edges };
        validate_graph(&g)?;
        Ok(g)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Indices (into [`edges`](Self::edges)) of the edges on one side, in graph order.
    pub fn side_indices(&self, side: Side) -> Vec<usize> {
        let o = side.orientation();
        (0..self.edges.len()).filter(|&i| self.edges[i].orientation == o).collect()
    }

    pub fn e_minus(&self) -> Vec<&Edge> {
        self.side_edges(Side::Minus)
    }

    pub fn e_plus(&self) -> Vec<&Edge> {
        self.side_edges(Side::Plus)
    }

    pub fn side_edges(&self, side: Side) -> Vec<&Edge> {
        self.side_indices(side).into_iter().map(|i| &self.edges[i]).collect()
    }

    pub fn side_len(&self, side: Side) -> usize {
        self.side_indices(side).len()
    }

    pub fn alphas(&self, side: Side) -> Vec<f64> {
        self.side_edges(side).iter().map(|e| e.alpha).collect()
    }

    pub fn betas(&self, side: Side) -> Vec<f64> {
        self.side_edges(side).iter().map(|e| e.beta).collect()
    }

    /// `|E−| = |E+|`.
    pub fn is_balanced(&self) -> bool {
        self.side_len(Side::Minus) == self.side_len(Side::Plus)
    }

    /// Copy of the graph with every `β` replaced by `f(edge)`.
    pub fn map_betas(&self, f: impl Fn(&Edge) -> f64) -> StarGraph {
        let edges = self.edges.iter().map(|e| Edge { beta: f(e), ..e.clone() }).collect();
        StarGraph { edges }
    }
}

/// Checks every edge invariant and reports all violations at once.
pub fn validate_graph(g: &StarGraph) -> Result<(), Vec<GraphError>> {
    let mut errs = Vec::new();
    if g.edges.is_empty() {
        errs.push(GraphError::EmptyGraph);
    }
    let mut seen = HashSet::new();
    for e in &g.edges {
        if !(e.alpha > 0.0 && e.alpha.is_finite()) {
            errs.push(GraphError::NonPositiveAlpha(e.id.clone()));
        }
        if !e.beta.is_finite() {
            errs.push(GraphError::NonFiniteBeta(e.id.clone()));
        }
        if !seen.insert(e.id.as_str()) {
            errs.push(GraphError::DuplicateId(e.id.clone()));
        }
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

/// Vertex trace `(u, u', u'')` of all edges on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub side: Side,
    pub u0: Vec<C64>,
    pub u1: Vec<C64>,
    pub u2: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace blocks have lengths {0}, {1}, {2}")]
    RaggedBlocks(usize, usize, usize),
    #[error("flattened trace length {0} is not a multiple of 3")]
    BadLength(usize),
}

impl BoundaryTrace {
    pub fn zeros(side: Side, m: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); m];
        BoundaryTrace { side, u0: z.clone(), u1: z.clone(), u2: z }
    }

    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }
}

/// Flattens a trace to `(u0 | u1 | u2)`.
pub fn flatten_trace(t: &BoundaryTrace) -> Result<CVec, TraceError> {
    let m = t.u0.len();
    if t.u1.len() != m || t.u2.len() != m {
        return Err(TraceError::RaggedBlocks(m, t.u1.len(), t.u2.len()));
    }
    Ok(CVec::from_iterator(3 * m, t.u0.iter().chain(&t.u1).chain(&t.u2).copied()))
}

/// Inverse of [`flatten_trace`].
pub fn unflatten_trace(side: Side, v: &CVec) -> Result<BoundaryTrace, TraceError> {
    if !v.len().is_multiple_of(3) {
        return Err(TraceError::BadLength(v.len()));
    }
    let m = v.len() / 3;
    let block = |k: usize| v.rows(k * m, m).iter().copied().collect::<Vec<_>>();
    Ok(BoundaryTrace { side, u0: block(0), u1: block(1), u2: block(2) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn minimal_graph_is_valid() {
        let g = StarGraph::new(vec![Edge::incoming("a", 1.0, 0.0)]);
        assert!(validate_graph(&g).is_ok());
    }

    #[test]
    fn zero_alpha_is_rejected() {
        let g = StarGraph::new(vec![Edge::incoming("a", 0.0, 0.0)]);
        assert_eq!(validate_graph(&g).unwrap_err(), vec![GraphError::NonPositiveAlpha("a".into())]);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let g = StarGraph::new(vec![Edge::incoming("e1", 1.0, 0.0), Edge::outgoing("e1", 1.0, 0.0)]);
        assert_eq!(validate_graph(&g).unwrap_err(), vec![GraphError::DuplicateId("e1".into())]);
    }

    #[test]
    fn empty_graph_and_all_violations_are_listed() {
        assert_eq!(validate_graph(&StarGraph::new(vec![])).unwrap_err(), vec![GraphError::EmptyGraph]);
        let g = StarGraph::new(vec![Edge::incoming("x", -1.0, 0.0), Edge::outgoing("x", 2.0, f64::NAN)]);
        let errs = validate_graph(&g).unwrap_err();
        assert_eq!(errs.len(), 3);
    }

    #[test]
    fn sides_keep_graph_order() {
        let g = StarGraph::new(vec![
            Edge::outgoing("p1", 1.0, 0.0),
            Edge::incoming("m1", 2.0, 0.0),
            Edge::outgoing("p2", 3.0, 0.0),
        ]);
        assert_eq!(g.side_indices(Side::Plus), vec![0, 2]);
        assert_eq!(g.alphas(Side::Plus), vec![1.0, 3.0]);
        assert_eq!(g.alphas(Side::Minus), vec![2.0]);
        assert!(!g.is_balanced());
    }

    #[test]
    fn flatten_single_edge() {
        let t = BoundaryTrace { side: Side::Minus, u0: vec![c(1.0)], u1: vec![c(2.0)], u2: vec![c(3.0)] };
        let v = flatten_trace(&t).unwrap();
        assert_eq!(v.as_slice(), &[c(1.0), c(2.0), c(3.0)]);
    }

    #[test]
    fn flatten_two_edges_is_blockwise() {
        let t = BoundaryTrace {
            side: Side::Plus,
            u0: vec![c(1.0), c(2.0)],
            u1: vec![c(3.0), c(4.0)],
            u2: vec![c(5.0), c(6.0)],
        };
        let v = flatten_trace(&t).unwrap();
        let want: Vec<C64> = (1..=6).map(|k| c(k as f64)).collect();
        assert_eq!(v.as_slice(), want.as_slice());
        assert_eq!(unflatten_trace(Side::Plus, &v).unwrap(), t);
    }

    #[test]
    fn ragged_trace_is_an_error() {
        let t = BoundaryTrace { side: Side::Plus, u0: vec![c(1.0)], u1: vec![], u2: vec![c(0.0)] };
        assert!(flatten_trace(&t).is_err());
        assert!(unflatten_trace(Side::Plus, &CVec::zeros(4)).is_err());
    }
}
