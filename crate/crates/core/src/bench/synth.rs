use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphKind {
    #[default]
    ErdosRenyi,
    /// Targets drawn with probability proportional to in-degree plus one.
    Preferential,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::ErdosRenyi => "erdos_renyi",
            GraphKind::Preferential => "preferential",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "erdos_renyi" | "er" => Ok(GraphKind::ErdosRenyi),
            "preferential" | "ba" => Ok(GraphKind::Preferential),
            other => Err(Error::invalid(format!("unknown graph kind {other:?}"))),
        }
    }
}

fn key(u: VertexId, v: VertexId) -> u64 {
    (u64::from(u) << 32) | u64::from(v)
}

/// Random directed graph with exactly `edges` distinct edges and no self
/// loops on `vertices` vertices.
pub fn generate_synthetic_graph(vertices: usize, edges: usize, kind: GraphKind, seed: u64) -> Result<Graph> {
    if vertices == 0 {
        return Err(Error::EmptyGraph);
    }
    if vertices > VertexId::MAX as usize {
        return Err(Error::invalid(format!("{vertices} vertices exceed the id range")));
    }
    let feasible = vertices as u128 * (vertices as u128 - 1);
    if edges as u128 > feasible {
        return Err(Error::invalid(format!(
            "{edges} edges do not fit {vertices} vertices (at most {feasible})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = vertices as VertexId;
    let list = match kind {
        GraphKind::ErdosRenyi if edges as u128 * 2 > feasible => {
            // Dense request: draw the edges to leave out instead.
            let skip = uniform_edges(&mut rng, n, (feasible - edges as u128) as usize);
            let skip: HashSet<u64> = skip.into_iter().map(|(u, v)| key(u, v)).collect();
            (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && !skip.contains(&key(u, v)))
                .collect()
        }
        GraphKind::ErdosRenyi => uniform_edges(&mut rng, n, edges),
        GraphKind::Preferential => preferential_edges(&mut rng, n, edges),
    };
    Ok(Graph::from_edges(vertices, &list)?.0)
}

fn uniform_edges(rng: &mut ChaCha8Rng, n: VertexId, count: usize) -> Vec<(VertexId, VertexId)> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && seen.insert(key(u, v)) {
            out.push((u, v));
        }
    }
    out
}

fn preferential_edges(rng: &mut ChaCha8Rng, n: VertexId, count: usize) -> Vec<(VertexId, VertexId)> {
    // Every vertex once, plus one entry per received edge.
    let mut pool: Vec<VertexId> = (0..n).collect();
    pool.reserve(count);
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = pool[rng.gen_range(0..pool.len())];
        if u != v && seen.insert(key(u, v)) {
            out.push((u, v));
            pool.push(v);
        }
    }
    out
}
