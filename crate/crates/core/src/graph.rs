//! Net information flow graph and the degree-based predictor/response split.

use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::symbolic::SteMatrix;

/// Flows below this are treated as absent.
pub const NDI_FLOOR: f64 = 1e-15;

/// Normalized directionality index `(xy - yx) / (xy + yx)` in `[-1, 1]`.
///
/// `None` when both flows are below [`NDI_FLOOR`] or either is negative or NaN.
pub fn ndi(ste_xy: f64, ste_yx: f64) -> Option<f64> {
    if !(ste_xy >= 0.0 && ste_yx >= 0.0) || (ste_xy < NDI_FLOOR && ste_yx < NDI_FLOOR) {
        return None;
    }
    Some(((ste_xy - ste_yx) / (ste_xy + ste_yx)).clamp(-1.0, 1.0))
}

/// How edges were derived from the transfer entropy matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum EdgeRule {
    /// A pair gets one edge when at least one direction is significant; a
    /// non-significant direction counts as zero flow; the edge points along
    /// positive index and carries `|index|`; a zero index gives no edge.
    NetFlowAnySignificant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    /// In `(0, 1]`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DirectedFlowGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<FlowEdge>,
    pub rule: EdgeRule,
}

impl DirectedFlowGraph {
    pub fn in_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.to == node).count()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|e| e.from == node).count()
    }

    /// `(in, out)` for every node.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut d = alloc::vec![(0, 0); self.nodes.len()];
        for e in &self.edges {
            d[e.to].0 += 1;
            d[e.from].1 += 1;
        }
        d
    }
}

pub fn build_graph(ste: &SteMatrix) -> DirectedFlowGraph {
    let p = ste.dim();
    let flow = |a: usize, b: usize| if ste.significant(a, b) { ste.value(a, b) } else { 0.0 };
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if !(ste.significant(i, j) || ste.significant(j, i)) {
                continue;
            }
            match ndi(flow(i, j), flow(j, i)) {
                Some(d) if d > 0.0 => edges.push(FlowEdge { from: i, to: j, weight: d }),
                Some(d) if d < 0.0 => edges.push(FlowEdge { from: j, to: i, weight: -d }),
                _ => {}
            }
        }
    }
    DirectedFlowGraph { nodes: ste.names.clone(), edges, rule: EdgeRule::NetFlowAnySignificant }
}

/// Disjoint predictor/response index sets, both ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct VariablePartition {
    pub predictors: Vec<usize>,
    pub responses: Vec<usize>,
}

impl VariablePartition {
    pub fn sizes(&self) -> (usize, usize) {
        (self.predictors.len(), self.responses.len())
    }
}

/// A node is a response when it receives at least as many edges as it sends.
pub fn partition_by_degree(g: &DirectedFlowGraph) -> VariablePartition {
    let mut predictors = Vec::new();
    let mut responses = Vec::new();
    for (i, (inn, out)) in g.degrees().into_iter().enumerate() {
        if inn >= out {
            responses.push(i);
        } else {
            predictors.push(i);
        }
    }
    VariablePartition { predictors, responses }
}
