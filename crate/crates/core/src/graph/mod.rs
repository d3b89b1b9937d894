//! Immutable directed graph in CSR form, edge-list ingestion, partitioning
//! and the superstep engine the applications run on.

mod engine;
mod io;
mod partition;

use std::sync::OnceLock;

pub use engine::{
    run_supersteps, Context, Engine, EngineConfig, EngineTotals, RunOutcome, VertexProgram,
};
pub use io::{load_edge_list, parse_edge_list, write_edge_list, LoadReport};
pub use partition::{partition_graph, PartitionAssignment};

use crate::error::{Error, Result};

/// Dense internal vertex index, contiguous in `0..vertex_count`.
pub type VertexId = u32;

/// Compressed sparse rows: `targets[offsets[v]..offsets[v + 1]]` are the
/// neighbors of `v`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Csr {
    /// Builds from `(row, col)` pairs that are already sorted and unique.
    fn from_sorted(vertex_count: usize, pairs: &[(VertexId, VertexId)]) -> Self {
        let mut offsets = vec![0usize; vertex_count + 1];
        for &(r, _) in pairs {
            offsets[r as usize + 1] += 1;
        }
        for i in 0..vertex_count {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.iter().map(|&(_, c)| c).collect();
        Csr { offsets, targets }
    }

    fn row(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

#[derive(Debug)]
pub struct Graph {
    external_ids: Vec<u64>,
    out: Csr,
    inc: Csr,
    undirected: OnceLock<Csr>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.external_ids == other.external_ids && self.out == other.out
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph whose external ids equal the internal ones. Duplicate
    /// edges and self-loops are dropped and counted.
    pub fn from_edges(vertex_count: usize, edges: &[(VertexId, VertexId)]) -> Result<(Self, LoadReport)> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        if let Some(&(s, d)) = edges
            .iter()
            .find(|&&(s, d)| s as usize >= vertex_count || d as usize >= vertex_count)
        {
            return Err(Error::invalid(format!(
                "edge ({s}, {d}) out of range for {vertex_count} vertices"
            )));
        }
        let ids = (0..vertex_count as u64).collect();
        Ok(Self::assemble(ids, edges.to_vec()))
    }

    /// Builds from external 64-bit ids. Every id that appears in `edges` or
    /// `extra_vertices` becomes a vertex; ids are remapped to `0..V` in
    /// ascending external order.
    pub fn from_external_edges(edges: &[(u64, u64)], extra_vertices: &[u64]) -> Result<(Self, LoadReport)> {
        let mut ids: Vec<u64> = edges
            .iter()
            .flat_map(|&(s, d)| [s, d])
            .chain(extra_vertices.iter().copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let lookup = |x: u64| ids.binary_search(&x).expect("id collected above") as VertexId;
        let internal = edges.iter().map(|&(s, d)| (lookup(s), lookup(d))).collect();
        Ok(Self::assemble(ids, internal))
    }

    fn assemble(external_ids: Vec<u64>, mut edges: Vec<(VertexId, VertexId)>) -> (Self, LoadReport) {
        let n = external_ids.len();
        let before = edges.len();
        edges.retain(|&(s, d)| s != d);
        let dropped_self_loops = before - edges.len();
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        let dropped_duplicates = before - edges.len();

        let out = Csr::from_sorted(n, &edges);
        let mut reversed: Vec<_> = edges.iter().map(|&(s, d)| (d, s)).collect();
        reversed.sort_unstable();
        let inc = Csr::from_sorted(n, &reversed);

        let graph = Graph {
            external_ids,
            out,
            inc,
            undirected: OnceLock::new(),
        };
        let report = LoadReport {
            dropped_duplicates,
            dropped_self_loops,
        };
        (graph, report)
    }

    pub fn vertex_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.targets.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count() as VertexId
    }

    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.out.row(v)
    }

    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        self.inc.row(v)
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_neighbors(v).len()
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_neighbors(v).len()
    }

    /// Neighbors in the symmetrized (undirected) view, sorted ascending.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.undirected().row(v)
    }

    /// Degree in the symmetrized view.
    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    /// Whether `a` and `b` are adjacent in the symmetrized view.
    pub fn is_adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    fn undirected(&self) -> &Csr {
        self.undirected.get_or_init(|| {
            let mut pairs = Vec::with_capacity(self.edge_count() * 2);
            for v in self.vertices() {
                for &w in self.out_neighbors(v) {
                    pairs.push((v, w));
                    pairs.push((w, v));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            Csr::from_sorted(self.vertex_count(), &pairs)
        })
    }

    /// Directed edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices()
            .flat_map(move |v| self.out_neighbors(v).iter().map(move |&w| (v, w)))
    }

    /// Number of undirected edges after symmetrization.
    pub fn undirected_edge_count(&self) -> usize {
        self.undirected().targets.len() / 2
    }

    pub fn external_id(&self, v: VertexId) -> u64 {
        self.external_ids[v as usize]
    }

    pub fn internal_id(&self, external: u64) -> Option<VertexId> {
        self.external_ids
            .binary_search(&external)
            .ok()
            .map(|i| i as VertexId)
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::NotFound(v as u64))
        }
    }
}
