//! Undirected connected graphs with a canonical edge orientation.
//!
//! Every undirected edge `{a, b}` is stored once as `(a, b)` with `a < b`.
//! Lifted edge variables are attached to that orientation.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// An undirected edge stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

/// One entry of a node's adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    /// `true` when the node is the first (smaller) endpoint of the edge.
    pub first: bool,
}

/// How the graph was built. Grids remember their shape so that image
/// operations can recover pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Chain,
    Grid { height: usize, width: usize },
    General,
}

#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
    topology: Topology,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges are canonicalized
    /// to `a < b`; self-loops, duplicates and disconnected graphs are rejected.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::build(node_count, edges, Topology::General)
    }

    fn build(node_count: usize, raw: &[(usize, usize)], topology: Topology) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::InvalidSize(format!(
                "graph needs at least 2 nodes, got {node_count}"
            )));
        }
        let mut seen = HashSet::with_capacity(raw.len());
        let mut edges = Vec::with_capacity(raw.len());
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in raw {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange { node, node_count });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let e = Edge {
                a: u.min(v),
                b: u.max(v),
            };
            if !seen.insert(e) {
                return Err(Error::DuplicateEdge(e.a, e.b));
            }
            let id = edges.len();
            adjacency[e.a].push(Incidence {
                edge: id,
                first: true,
            });
            adjacency[e.b].push(Incidence {
                edge: id,
                first: false,
            });
            edges.push(e);
        }
        let g = Graph {
            node_count,
            edges,
            adjacency,
            topology,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.node_count];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(n) = stack.pop() {
            for inc in &self.adjacency[n] {
                let m = self.other_end(inc.edge, n);
                if !visited[m] {
                    visited[m] = true;
                    count += 1;
                    stack.push(m);
                }
            }
        }
        count == self.node_count
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// Incident edges of `node`, in insertion order.
    pub fn incidences(&self, node: usize) -> &[Incidence] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn other_end(&self, edge: usize, node: usize) -> usize {
        let e = self.edges[edge];
        if e.a == node {
            e.b
        } else {
            e.a
        }
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// `(height, width)` when the graph is a grid.
    pub fn grid_shape(&self) -> Option<(usize, usize)> {
        match self.topology {
            Topology::Grid { height, width } => Some((height, width)),
            _ => None,
        }
    }

    /// A connected graph is a tree iff it has exactly `|V| - 1` edges.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }
}

/// Chain `0 - 1 - ... - (n-1)`.
pub fn build_chain(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("chain needs N >= 2, got {n}")));
    }
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::build(n, &edges, Topology::Chain)
}

/// 4-connected `height x width` grid with nodes in row-major order.
pub fn build_grid(height: usize, width: usize) -> Result<Graph> {
    if height == 0 || width == 0 || height * width < 2 {
        return Err(Error::InvalidSize(format!(
            "grid {height}x{width} has fewer than 2 pixels"
        )));
    }
    let mut edges = Vec::with_capacity(height * (width - 1) + (height - 1) * width);
    for i in 0..height {
        for j in 0..width {
            let n = i * width + j;
            if j + 1 < width {
                edges.push((n, n + 1));
            }
            if i + 1 < height {
                edges.push((n, n + width));
            }
        }
    }
    Graph::build(height * width, &edges, Topology::Grid { height, width })
}
