use crate::graph::{Context, Engine, Graph, VertexId, VertexProgram};
use crate::{Error, Real, Result};

/// PageRank scores normalized to mean 1 (they sum to the vertex count).
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector<T = f64> {
    pub scores: Vec<T>,
    pub damping: T,
    pub iterations_run: usize,
    pub converged: bool,
    /// Score sum after each iteration, the initial vector first.
    pub sum_trace: Vec<T>,
    /// L1 change of each iteration.
    pub residuals: Vec<T>,
}

impl<T: Real> RankVector<T> {
    /// Vertices by descending score, ties by ascending id.
    pub fn ordering(&self) -> Vec<VertexId> {
        let mut order: Vec<VertexId> = (0..self.scores.len() as VertexId).collect();
        order.sort_by(|&a, &b| {
            self.scores[b as usize]
                .partial_cmp(&self.scores[a as usize])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RankAggregate<T> {
    dangling: T,
    delta: T,
    total: T,
}

struct PageRankProgram<T> {
    damping: T,
    tol: T,
    vertex_count: T,
}

impl<T: Real> VertexProgram for PageRankProgram<T> {
    type State = T;
    type Message = T;
    type Aggregate = RankAggregate<T>;

    fn init(&self, _: &Graph, _: VertexId) -> T {
        T::one()
    }

    fn compute(&self, ctx: &mut Context<'_, T, RankAggregate<T>>, rank: &mut T, incoming: Option<T>) {
        let mut delta = T::zero();
        if ctx.superstep() > 0 {
            let prev = ctx.previous_aggregate();
            let inflow = incoming.unwrap_or_else(T::zero) + prev.dangling / self.vertex_count;
            let next = (T::one() - self.damping) + self.damping * inflow;
            delta = (next - *rank).abs();
            *rank = next;
        }
        let g = ctx.graph();
        let out = g.out_neighbors(ctx.vertex());
        let dangling = if out.is_empty() {
            *rank
        } else {
            let share = *rank / T::from_count(out.len());
            for &w in out {
                ctx.send(w, share);
            }
            T::zero()
        };
        ctx.aggregate(RankAggregate {
            dangling,
            delta,
            total: *rank,
        });
    }

    fn combine(&self, acc: &mut T, next: T) {
        *acc += next;
    }

    fn zero_aggregate(&self) -> RankAggregate<T> {
        RankAggregate::default()
    }

    fn merge_aggregate(&self, acc: &mut RankAggregate<T>, next: &RankAggregate<T>) {
        acc.dangling += next.dangling;
        acc.delta += next.delta;
        acc.total += next.total;
    }

    fn halt_after(&self, superstep: usize, agg: &RankAggregate<T>) -> bool {
        superstep > 0 && agg.delta < self.tol
    }

    fn is_finite(&self, rank: &T) -> bool {
        rank.is_finite()
    }
}

/// Power iteration on the directed graph; the mass of dangling vertices is
/// spread uniformly. Stops when the L1 change drops below `tol` or after
/// `max_iter` iterations, whichever comes first.
pub fn pagerank<T: Real>(
    engine: &Engine,
    graph: &Graph,
    damping: T,
    max_iter: usize,
    tol: T,
) -> Result<RankVector<T>> {
    if !(damping > T::zero() && damping < T::one()) {
        return Err(Error::invalid("damping must lie in (0, 1)"));
    }
    if !(tol > T::zero()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let program = PageRankProgram {
        damping,
        tol,
        vertex_count: T::from_count(graph.vertex_count()),
    };
    let run = engine.run(graph, &program, max_iter + 1)?;
    let iterations_run = run.supersteps.saturating_sub(1);
    let residuals: Vec<T> = run.aggregates.iter().skip(1).map(|a| a.delta).collect();
    let converged = residuals.last().is_some_and(|&r| r < tol);
    Ok(RankVector {
        scores: run.states,
        damping,
        iterations_run,
        converged,
        sum_trace: run.aggregates.iter().map(|a| a.total).collect(),
        residuals,
    })
}
