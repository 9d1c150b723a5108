use crate::model::{AnnotationGraph, NodeRef};

/// Compressed adjacency of a weighted directed graph over dense node
/// indices. Built fresh for each solve so iteration order is canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphView {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    out_weight: Vec<f64>,
}

impl GraphView {
    /// Builds the view over `graph` in canonical node order and returns the
    /// node for each index alongside it.
    pub fn from_graph(graph: &AnnotationGraph) -> (GraphView, Vec<NodeRef>) {
        let nodes: Vec<NodeRef> = graph.nodes().collect();
        let index = |n: NodeRef| {
            nodes
                .binary_search(&n)
                .expect("edge endpoints are graph nodes")
        };
        let edges = graph
            .edges()
            .map(|((s, t), w)| (index(s), index(t), f64::from(w)));
        (GraphView::from_weighted_edges(nodes.len(), edges), nodes)
    }

    /// Builds a view from `(source, target, weight)` triples. Parallel
    /// edges are merged by summing their weights.
    pub fn from_weighted_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> GraphView {
        let mut edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut offsets = vec![0; node_count + 1];
        let mut targets = Vec::with_capacity(edges.len());
        let mut weights: Vec<f64> = Vec::with_capacity(edges.len());
        let mut out_weight = vec![0.0; node_count];
        let mut last: Option<(usize, usize)> = None;
        for (s, t, w) in edges {
            assert!(s < node_count && t < node_count, "edge out of range");
            out_weight[s] += w;
            if last == Some((s, t)) {
                *weights.last_mut().expect("previous edge") += w;
                continue;
            }
            last = Some((s, t));
            offsets[s + 1] += 1;
            targets.push(t);
            weights.push(w);
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        GraphView {
            offsets,
            targets,
            weights,
            out_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.out_weight.len()
    }

    /// `(target, weight)` pairs leaving `node`.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn out_weight(&self, node: usize) -> f64 {
        self.out_weight[node]
    }
}
