//! Power iteration clustering over a sparse affinity matrix.
//!
//! The iterate `v <- W v / |W v|_1` with `W = D^-1 A` runs on the superstep
//! engine. L1 normalization needs the global norm of the previous iterate,
//! which is only known after the barrier, so each superstep applies the
//! pending normalization before propagating. The resulting 1-D embedding is
//! clustered with k-means.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::similarity::Affinity;
use crate::graph::{Context, Engine, Graph, VertexId, VertexProgram};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub k: usize,
    pub vertex_to_cluster: Vec<usize>,
}

impl ClusterAssignment {
    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.k];
        for &c in &self.vertex_to_cluster {
            seen[c] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PicParams<T = f64> {
    pub max_iter: usize,
    /// Stop once every vertex's change-of-change drops below this.
    pub tolerance: T,
    pub seed: u64,
    pub kmeans_rounds: usize,
}

impl<T: Real> Default for PicParams<T> {
    fn default() -> Self {
        PicParams {
            max_iter: 100,
            tolerance: T::lit(1e-6),
            seed: 42,
            kmeans_rounds: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicOutcome<T = f64> {
    pub assignment: ClusterAssignment,
    pub embedding: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct PicState<T> {
    x: T,
    prev_v: T,
    prev_delta: T,
    seen: u8,
}

#[derive(Debug, Clone, Copy, Default)]
struct PicAggregate<T> {
    norm: T,
    accel: T,
    ready: bool,
}

struct PicProgram<'a, T> {
    affinity: &'a Affinity<T>,
    degrees: Vec<T>,
    start: Vec<T>,
    tolerance: T,
}

impl<T: Real> PicProgram<'_, T> {
    fn propagate(&self, ctx: &mut Context<'_, T, PicAggregate<T>>, x: T) {
        for &(w, a) in &self.affinity.rows[ctx.vertex() as usize] {
            if a > T::zero() {
                ctx.send(w, a * x);
            }
        }
    }
}

impl<T: Real> VertexProgram for PicProgram<'_, T> {
    type State = PicState<T>;
    type Message = T;
    type Aggregate = PicAggregate<T>;

    fn init(&self, _: &Graph, v: VertexId) -> PicState<T> {
        PicState {
            x: self.start[v as usize],
            ..Default::default()
        }
    }

    fn compute(&self, ctx: &mut Context<'_, T, PicAggregate<T>>, st: &mut PicState<T>, incoming: Option<T>) {
        let mut agg = PicAggregate::default();
        if ctx.superstep() > 0 {
            let norm = ctx.previous_aggregate().norm;
            let current = st.x / norm;
            let degree = self.degrees[ctx.vertex() as usize];
            let next = if degree > T::zero() {
                incoming.unwrap_or_else(T::zero) / degree / norm
            } else {
                current
            };
            if st.seen >= 1 {
                let delta = (current - st.prev_v).abs();
                if st.seen >= 2 {
                    agg.accel = (delta - st.prev_delta).abs();
                    agg.ready = true;
                }
                st.prev_delta = delta;
            }
            st.prev_v = current;
            st.seen = st.seen.saturating_add(1);
            st.x = next;
        }
        agg.norm = st.x.abs();
        self.propagate(ctx, st.x);
        ctx.aggregate(agg);
    }

    fn combine(&self, acc: &mut T, next: T) {
        *acc += next;
    }

    fn zero_aggregate(&self) -> PicAggregate<T> {
        PicAggregate::default()
    }

    fn merge_aggregate(&self, acc: &mut PicAggregate<T>, next: &PicAggregate<T>) {
        acc.norm += next.norm;
        acc.accel = acc.accel.max(next.accel);
        acc.ready |= next.ready;
    }

    fn halt_after(&self, _: usize, agg: &PicAggregate<T>) -> bool {
        agg.ready && agg.accel < self.tolerance
    }

    fn is_finite(&self, st: &PicState<T>) -> bool {
        st.x.is_finite()
    }
}

/// Clusters vertices into at most `k` groups from the power-iteration
/// embedding of `affinity`.
pub fn power_iteration_clustering<T: Real>(
    engine: &Engine,
    graph: &Graph,
    affinity: &Affinity<T>,
    k: usize,
    params: &PicParams<T>,
) -> Result<PicOutcome<T>> {
    let n = graph.vertex_count();
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds vertex count {n}")));
    }
    if affinity.vertex_count() != n {
        return Err(Error::invalid("affinity does not match graph"));
    }
    if affinity.is_zero() {
        return Err(Error::DegenerateAffinity);
    }

    let degrees: Vec<T> = graph.vertices().map(|v| affinity.row_sum(v)).collect();
    // Degree-weighted start with a seeded jitter: a pure degree start is
    // already a fixed point whenever components have equal degrees.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut start: Vec<T> = degrees
        .iter()
        .map(|&d| d * T::lit(0.5 + rng.gen::<f64>()))
        .collect();
    let total = start.iter().fold(T::zero(), |acc, &x| acc + x);
    for x in &mut start {
        *x /= total;
    }

    let program = PicProgram {
        affinity,
        degrees,
        start,
        tolerance: params.tolerance,
    };
    let run = engine.run(graph, &program, params.max_iter + 1)?;
    let norm = run.aggregates.last().map(|a| a.norm).unwrap_or_else(T::one);
    let embedding: Vec<T> = run.states.iter().map(|s| s.x / norm).collect();
    let converged = run
        .aggregates
        .last()
        .is_some_and(|a| a.ready && a.accel < params.tolerance);

    let labels = kmeans_1d(&embedding, k, params.seed, params.kmeans_rounds);
    Ok(PicOutcome {
        assignment: ClusterAssignment {
            k,
            vertex_to_cluster: labels,
        },
        embedding,
        iterations: run.supersteps.saturating_sub(1),
        converged,
    })
}

/// Lloyd's k-means on scalars with k-means++ seeding. Labels are ranks of
/// the final centroids, so cluster 0 holds the smallest values.
pub fn kmeans_1d<T: Real>(values: &[T], k: usize, seed: u64, max_rounds: usize) -> Vec<usize> {
    let n = values.len();
    if n == 0 || k <= 1 {
        return vec![0; n];
    }
    let xs: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = Vec::with_capacity(k);
    centroids.push(xs[rng.gen_range(0..n)]);
    let mut dist: Vec<f64> = xs.iter().map(|&x| (x - centroids[0]).powi(2)).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = xs[pick];
        centroids.push(c);
        for (d, &x) in dist.iter_mut().zip(&xs) {
            *d = d.min((x - c).powi(2));
        }
    }

    let nearest = |x: f64, centroids: &[f64]| {
        let mut best = 0;
        for (j, &c) in centroids.iter().enumerate().skip(1) {
            if (x - c).abs() < (x - centroids[best]).abs() {
                best = j;
            }
        }
        best
    };

    let mut labels: Vec<usize> = xs.iter().map(|&x| nearest(x, &centroids)).collect();
    for _ in 0..max_rounds {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&x, &l) in xs.iter().zip(&labels) {
            sums[l] += x;
            counts[l] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        let next: Vec<usize> = xs.iter().map(|&x| nearest(x, &centroids)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    let mut rank = vec![0; k];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    labels.into_iter().map(|l| rank[l]).collect()
}
