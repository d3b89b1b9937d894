use super::{Graph, VertexId};
use crate::error::{Error, Result};

/// Hash partitioning of vertices: vertex `v` lives in partition `v mod n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    partition_count: usize,
    vertex_to_partition: Vec<usize>,
}

impl PartitionAssignment {
    pub fn partition_count(&self) -> usize {
        self.partition_count
    }

    pub fn partition_of(&self, v: VertexId) -> usize {
        self.vertex_to_partition[v as usize]
    }

    pub fn vertex_to_partition(&self) -> &[usize] {
        &self.vertex_to_partition
    }

    /// Vertices of partition `p` in ascending order.
    pub fn members(&self, p: usize) -> impl Iterator<Item = VertexId> + '_ {
        let n = self.vertex_to_partition.len();
        (p..n).step_by(self.partition_count).map(|v| v as VertexId)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.partition_count];
        for &p in &self.vertex_to_partition {
            sizes[p] += 1;
        }
        sizes
    }
}

pub fn partition_graph(graph: &Graph, n: usize) -> Result<PartitionAssignment> {
    partition_vertices(graph.vertex_count(), n)
}

pub(crate) fn partition_vertices(vertex_count: usize, n: usize) -> Result<PartitionAssignment> {
    if n == 0 {
        return Err(Error::invalid("partition count must be at least 1"));
    }
    Ok(PartitionAssignment {
        partition_count: n,
        vertex_to_partition: (0..vertex_count).map(|v| v % n).collect(),
    })
}
