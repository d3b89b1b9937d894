use std::collections::BTreeMap;

use crate::graph::{Context, Engine, Graph, VertexId, VertexProgram};
use crate::{Error, Real, Result};

pub type Label = u32;

/// Weighted multi-label membership per vertex. Each list is sorted by label
/// and its weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityMembership<T = f64> {
    pub memberships: Vec<Vec<(Label, T)>>,
    pub threshold: T,
}

impl<T: Real> CommunityMembership<T> {
    pub fn is_overlapping(&self, v: VertexId) -> bool {
        self.memberships[v as usize].len() >= 2
    }

    pub fn overlapping_count(&self) -> usize {
        (0..self.memberships.len() as VertexId)
            .filter(|&v| self.is_overlapping(v))
            .count()
    }

    /// Members of each community, ascending by label then vertex.
    pub fn communities(&self) -> BTreeMap<Label, Vec<VertexId>> {
        let mut out: BTreeMap<Label, Vec<VertexId>> = BTreeMap::new();
        for (v, labels) in self.memberships.iter().enumerate() {
            for &(l, _) in labels {
                out.entry(l).or_default().push(v as VertexId);
            }
        }
        out
    }
}

/// Initial labelling: vertex `v` gets label `v mod n` with weight one.
///
/// `seed` is accepted for interface stability; propagation breaks ties by
/// lowest label and needs no randomness.
pub fn affiliate_communities<T: Real>(graph: &Graph, n: usize, _seed: u64) -> Result<CommunityMembership<T>> {
    if n == 0 {
        return Err(Error::invalid("community count must be at least 1"));
    }
    Ok(CommunityMembership {
        memberships: graph
            .vertices()
            .map(|v| vec![((v as usize % n) as Label, T::one())])
            .collect(),
        threshold: T::one() / T::from_count(n),
    })
}

fn merge_add<T: Real>(acc: &mut Vec<(Label, T)>, other: &[(Label, T)]) {
    let mut merged = Vec::with_capacity(acc.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < acc.len() && j < other.len() {
        match acc[i].0.cmp(&other[j].0) {
            std::cmp::Ordering::Less => {
                merged.push(acc[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                merged.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                merged.push((acc[i].0, acc[i].1 + other[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    merged.extend_from_slice(&acc[i..]);
    merged.extend_from_slice(&other[j..]);
    *acc = merged;
}

/// Drops labels below `threshold` (keeping the heaviest, lowest label on
/// ties, if none survive) and rescales the rest to sum to one.
pub(crate) fn prune_and_normalize<T: Real>(weights: &[(Label, T)], threshold: T) -> Vec<(Label, T)> {
    let mut kept: Vec<(Label, T)> = weights.iter().copied().filter(|&(_, w)| w >= threshold).collect();
    if kept.is_empty() {
        let mut best = weights[0];
        for &(l, w) in &weights[1..] {
            if w > best.1 || (w == best.1 && l < best.0) {
                best = (l, w);
            }
        }
        kept.push(best);
    }
    let total = kept.iter().fold(T::zero(), |acc, &(_, w)| acc + w);
    for (_, w) in &mut kept {
        *w /= total;
    }
    kept
}

struct Copra<'a, T> {
    init: &'a [Vec<(Label, T)>],
    iterations: usize,
    threshold: T,
}

impl<T: Real> VertexProgram for Copra<'_, T> {
    type State = Vec<(Label, T)>;
    type Message = Vec<(Label, T)>;
    type Aggregate = ();

    fn init(&self, _: &Graph, v: VertexId) -> Self::State {
        let mut labels = self.init[v as usize].clone();
        labels.sort_by_key(|&(l, _)| l);
        labels
    }

    fn compute(&self, ctx: &mut Context<'_, Self::Message, ()>, state: &mut Self::State, incoming: Option<Self::Message>) {
        let g = ctx.graph();
        let neighbors = g.neighbors(ctx.vertex());
        if neighbors.is_empty() {
            ctx.vote_to_halt();
            return;
        }
        if let Some(sum) = incoming {
            let degree = T::from_count(neighbors.len());
            let mean: Vec<(Label, T)> = sum.into_iter().map(|(l, w)| (l, w / degree)).collect();
            *state = prune_and_normalize(&mean, self.threshold);
        }
        if ctx.superstep() < self.iterations {
            for &w in neighbors {
                ctx.send(w, state.clone());
            }
        }
    }

    fn combine(&self, acc: &mut Self::Message, next: Self::Message) {
        merge_add(acc, &next);
    }

    fn zero_aggregate(&self) {}

    fn is_finite(&self, state: &Self::State) -> bool {
        state.iter().all(|(_, w)| w.is_finite())
    }

    fn state_bytes(&self, state: &Self::State) -> usize {
        std::mem::size_of::<Self::State>() + state.capacity() * std::mem::size_of::<(Label, T)>()
    }

    fn message_bytes(&self, m: &Self::Message) -> usize {
        std::mem::size_of::<Self::Message>() + m.capacity() * std::mem::size_of::<(Label, T)>()
    }
}

/// Runs exactly `m` rounds of weighted label propagation: every vertex takes
/// the mean of its neighbors' label weights, then prunes and renormalizes.
pub fn detect_overlapping_communities<T: Real>(
    engine: &Engine,
    graph: &Graph,
    init: &CommunityMembership<T>,
    m: usize,
    threshold: T,
) -> Result<CommunityMembership<T>> {
    if !(threshold > T::zero() && threshold <= T::one()) {
        return Err(Error::invalid("threshold must lie in (0, 1]"));
    }
    if init.memberships.len() != graph.vertex_count() {
        return Err(Error::invalid("initial membership does not match graph"));
    }
    if init.memberships.iter().any(Vec::is_empty) {
        return Err(Error::invalid("every vertex needs an initial label"));
    }
    let program = Copra {
        init: &init.memberships,
        iterations: m,
        threshold,
    };
    let supersteps = if m == 0 { 0 } else { m + 1 };
    let run = engine.run(graph, &program, supersteps)?;
    Ok(CommunityMembership {
        memberships: run.states,
        threshold,
    })
}
