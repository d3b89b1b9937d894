//! Bulk-synchronous superstep engine.
//!
//! Vertices are hash-partitioned (`v mod partitions`) and each partition is
//! computed by one task on a fixed-size worker pool. Messages sent during a
//! superstep are delivered at the barrier: every receiver folds its incoming
//! messages with the program's combiner in ascending source-vertex order,
//! and aggregate contributions are folded in ascending vertex order. Both
//! orders are independent of the worker and partition counts, so results
//! are bitwise identical for any configuration.

use std::mem::size_of;
use std::sync::Mutex;

use rayon::prelude::*;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

pub trait VertexProgram: Sync {
    type State: Send + Sync;
    type Message: Send + Sync;
    type Aggregate: Clone + Send + Sync;

    fn init(&self, graph: &Graph, v: VertexId) -> Self::State;

    /// One vertex update. `message` is the combined inbox of this superstep.
    fn compute(
        &self,
        ctx: &mut Context<'_, Self::Message, Self::Aggregate>,
        state: &mut Self::State,
        message: Option<Self::Message>,
    );

    /// Must be commutative and associative.
    fn combine(&self, acc: &mut Self::Message, next: Self::Message);

    fn zero_aggregate(&self) -> Self::Aggregate;

    fn merge_aggregate(&self, _acc: &mut Self::Aggregate, _next: &Self::Aggregate) {}

    /// Master check after the barrier of `superstep`; returning true stops the run.
    fn halt_after(&self, _superstep: usize, _aggregate: &Self::Aggregate) -> bool {
        false
    }

    fn is_finite(&self, _state: &Self::State) -> bool {
        true
    }

    fn state_bytes(&self, _state: &Self::State) -> usize {
        size_of::<Self::State>()
    }

    fn message_bytes(&self, _message: &Self::Message) -> usize {
        size_of::<Self::Message>()
    }
}

/// Per-vertex view handed to [`VertexProgram::compute`].
pub struct Context<'a, M, A> {
    graph: &'a Graph,
    vertex: VertexId,
    superstep: usize,
    previous: &'a A,
    outbox: &'a mut Vec<(VertexId, VertexId, M)>,
    contribution: Option<A>,
    halted: bool,
}

impl<'a, M, A> Context<'a, M, A> {
    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    pub fn superstep(&self) -> usize {
        self.superstep
    }

    /// Aggregate folded at the end of the previous superstep (the zero
    /// aggregate during superstep 0).
    pub fn previous_aggregate(&self) -> &'a A {
        self.previous
    }

    pub fn send(&mut self, to: VertexId, message: M) {
        self.outbox.push((to, self.vertex, message));
    }

    pub fn aggregate(&mut self, value: A) {
        self.contribution = Some(value);
    }

    /// Deactivates the vertex until a message arrives.
    pub fn vote_to_halt(&mut self) {
        self.halted = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub workers: usize,
    pub partitions: usize,
    /// Tracked state plus in-flight message bytes may not exceed 1.5x this.
    pub memory_budget_bytes: Option<usize>,
}

impl EngineConfig {
    pub fn new(workers: usize, partitions: usize) -> Self {
        EngineConfig {
            workers,
            partitions,
            memory_budget_bytes: None,
        }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::new(1, 1)
    }
}

/// Counters accumulated over every run on one engine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineTotals {
    pub runs: usize,
    pub supersteps: usize,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub peak_bytes: usize,
}

#[derive(Debug)]
pub struct RunOutcome<S, A> {
    pub states: Vec<S>,
    pub supersteps: usize,
    /// Folded aggregate of every executed superstep.
    pub aggregates: Vec<A>,
    pub messages_sent: u64,
    pub messages_delivered: u64,
    pub peak_bytes: usize,
}

pub struct Engine {
    config: EngineConfig,
    pool: rayon::ThreadPool,
    totals: Mutex<EngineTotals>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("config", &self.config).finish()
    }
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(EngineConfig::default()).expect("single worker pool")
    }
}

struct Shard<S, M> {
    index: usize,
    states: Vec<S>,
    active: Vec<bool>,
    inbox: Vec<Option<M>>,
}

struct ShardOutput<M, A> {
    outgoing: Vec<Vec<(VertexId, VertexId, M)>>,
    contributions: Vec<(VertexId, A)>,
    sent: u64,
    message_bytes: usize,
    state_bytes: usize,
    non_finite: bool,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        if config.workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        if config.partitions == 0 {
            return Err(Error::invalid("partition count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("superstep-worker-{i}"))
            .build()
            .map_err(|e| Error::invalid(format!("cannot build worker pool: {e}")))?;
        Ok(Engine {
            config,
            pool,
            totals: Mutex::new(EngineTotals::default()),
        })
    }

    /// `workers` threads, one partition per worker.
    pub fn with_workers(workers: usize) -> Result<Self> {
        Engine::new(EngineConfig::new(workers, workers))
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn totals(&self) -> EngineTotals {
        *self.totals.lock().expect("totals lock")
    }

    /// Runs at most `max_iter` supersteps. Stops early once every vertex has
    /// voted to halt with no messages in flight, or when the program's
    /// master check says so.
    pub fn run<P: VertexProgram>(
        &self,
        graph: &Graph,
        program: &P,
        max_iter: usize,
    ) -> Result<RunOutcome<P::State, P::Aggregate>> {
        let n = self.config.partitions;
        let v_count = graph.vertex_count();
        let mut shards: Vec<Shard<P::State, P::Message>> = (0..n)
            .map(|p| {
                let states: Vec<_> = (p..v_count)
                    .step_by(n)
                    .map(|v| program.init(graph, v as VertexId))
                    .collect();
                let len = states.len();
                Shard {
                    index: p,
                    states,
                    active: vec![true; len],
                    inbox: (0..len).map(|_| None).collect(),
                }
            })
            .collect();

        let mut previous = program.zero_aggregate();
        let mut aggregates = Vec::new();
        let mut sent_total = 0u64;
        let mut delivered_total = 0u64;
        let mut peak_bytes = 0usize;
        let mut supersteps = 0;

        for superstep in 0..max_iter {
            let pending = shards
                .iter()
                .any(|s| s.active.iter().any(|&a| a) || s.inbox.iter().any(Option::is_some));
            if !pending {
                break;
            }

            let prev = &previous;
            let outputs: Vec<ShardOutput<P::Message, P::Aggregate>> = self.pool.install(|| {
                shards
                    .par_iter_mut()
                    .map(|shard| compute_shard(graph, program, shard, n, superstep, prev))
                    .collect()
            });
            supersteps = superstep + 1;

            if outputs.iter().any(|o| o.non_finite) {
                return Err(Error::NonFinite { superstep });
            }

            // Aggregates in ascending vertex order.
            let mut contributions: Vec<(VertexId, P::Aggregate)> = Vec::new();
            let mut buckets: Vec<Vec<Vec<(VertexId, VertexId, P::Message)>>> =
                (0..n).map(|_| Vec::with_capacity(n)).collect();
            let mut bytes = 0usize;
            for out in outputs {
                sent_total += out.sent;
                bytes += out.message_bytes + out.state_bytes;
                contributions.extend(out.contributions);
                for (q, batch) in out.outgoing.into_iter().enumerate() {
                    buckets[q].push(batch);
                }
            }
            contributions.sort_by_key(|(v, _)| *v);
            let mut folded = program.zero_aggregate();
            for (_, a) in &contributions {
                program.merge_aggregate(&mut folded, a);
            }

            peak_bytes = peak_bytes.max(bytes);
            if let Some(budget) = self.config.memory_budget_bytes {
                if peak_bytes as f64 > budget as f64 * 1.5 {
                    return Err(Error::InsufficientMemory(format!(
                        "tracked peak {peak_bytes} bytes exceeds 1.5x budget of {budget} bytes in superstep {superstep}"
                    )));
                }
            }

            let delivered: u64 = self.pool.install(|| {
                shards
                    .par_iter_mut()
                    .zip(buckets.into_par_iter())
                    .map(|(shard, batches)| deliver(program, shard, n, batches))
                    .sum()
            });
            delivered_total += delivered;

            let halt = program.halt_after(superstep, &folded);
            aggregates.push(folded.clone());
            previous = folded;
            if halt {
                break;
            }
        }

        let states = interleave(shards, v_count);
        let mut totals = self.totals.lock().expect("totals lock");
        totals.runs += 1;
        totals.supersteps += supersteps;
        totals.messages_sent += sent_total;
        totals.messages_delivered += delivered_total;
        totals.peak_bytes = totals.peak_bytes.max(peak_bytes);

        Ok(RunOutcome {
            states,
            supersteps,
            aggregates,
            messages_sent: sent_total,
            messages_delivered: delivered_total,
            peak_bytes,
        })
    }
}

fn compute_shard<P: VertexProgram>(
    graph: &Graph,
    program: &P,
    shard: &mut Shard<P::State, P::Message>,
    n: usize,
    superstep: usize,
    previous: &P::Aggregate,
) -> ShardOutput<P::Message, P::Aggregate> {
    let mut outbox = Vec::new();
    let mut contributions = Vec::new();
    let mut non_finite = false;
    let mut state_bytes = 0usize;

    for i in 0..shard.states.len() {
        let message = shard.inbox[i].take();
        if shard.active[i] || message.is_some() {
            let vertex = (shard.index + i * n) as VertexId;
            let mut ctx = Context {
                graph,
                vertex,
                superstep,
                previous,
                outbox: &mut outbox,
                contribution: None,
                halted: false,
            };
            program.compute(&mut ctx, &mut shard.states[i], message);
            let (halted, contribution) = (ctx.halted, ctx.contribution);
            shard.active[i] = !halted;
            if let Some(a) = contribution {
                contributions.push((vertex, a));
            }
            if !program.is_finite(&shard.states[i]) {
                non_finite = true;
            }
        }
        state_bytes += program.state_bytes(&shard.states[i]);
    }

    let sent = outbox.len() as u64;
    let message_bytes = outbox.iter().map(|(_, _, m)| program.message_bytes(m)).sum();
    let mut outgoing: Vec<Vec<_>> = (0..n).map(|_| Vec::new()).collect();
    for envelope in outbox {
        outgoing[envelope.0 as usize % n].push(envelope);
    }
    ShardOutput {
        outgoing,
        contributions,
        sent,
        message_bytes,
        state_bytes,
        non_finite,
    }
}

fn deliver<P: VertexProgram>(
    program: &P,
    shard: &mut Shard<P::State, P::Message>,
    n: usize,
    batches: Vec<Vec<(VertexId, VertexId, P::Message)>>,
) -> u64 {
    let mut incoming: Vec<_> = batches.into_iter().flatten().collect();
    // Stable: messages from one source keep their send order.
    incoming.sort_by_key(|&(dst, src, _)| (dst, src));
    let count = incoming.len() as u64;
    for (dst, _, message) in incoming {
        let slot = &mut shard.inbox[dst as usize / n];
        match slot {
            Some(acc) => program.combine(acc, message),
            None => *slot = Some(message),
        }
    }
    count
}

fn interleave<S, M>(shards: Vec<Shard<S, M>>, v_count: usize) -> Vec<S> {
    let n = shards.len();
    let mut iters: Vec<_> = shards.into_iter().map(|s| s.states.into_iter()).collect();
    (0..v_count)
        .map(|v| iters[v % n].next().expect("partition holds vertex"))
        .collect()
}

/// Runs `program` with `workers` threads and as many partitions.
pub fn run_supersteps<P: VertexProgram>(
    graph: &Graph,
    program: &P,
    max_iter: usize,
    workers: usize,
) -> Result<RunOutcome<P::State, P::Aggregate>> {
    Engine::with_workers(workers)?.run(graph, program, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every vertex adopts the largest id seen among its in-neighbors.
    struct MaxId;

    impl VertexProgram for MaxId {
        type State = u32;
        type Message = u32;
        type Aggregate = ();

        fn init(&self, _: &Graph, v: VertexId) -> u32 {
            v
        }

        fn compute(&self, ctx: &mut Context<'_, u32, ()>, state: &mut u32, message: Option<u32>) {
            let changed = match message {
                Some(m) if m > *state => {
                    *state = m;
                    true
                }
                _ => ctx.superstep() == 0,
            };
            if changed {
                let g = ctx.graph();
                for &w in g.out_neighbors(ctx.vertex()) {
                    ctx.send(w, *state);
                }
            }
            ctx.vote_to_halt();
        }

        fn combine(&self, acc: &mut u32, next: u32) {
            *acc = (*acc).max(next);
        }

        fn zero_aggregate(&self) {}
    }

    /// Float sums whose result depends on fold order unless the engine fixes it.
    struct OrderSensitive;

    impl VertexProgram for OrderSensitive {
        type State = f64;
        type Message = f64;
        type Aggregate = f64;

        fn init(&self, _: &Graph, v: VertexId) -> f64 {
            1.0 / (v as f64 + 3.0)
        }

        fn compute(&self, ctx: &mut Context<'_, f64, f64>, state: &mut f64, message: Option<f64>) {
            if let Some(m) = message {
                *state = (*state + m).sin() * 1e3 + ctx.previous_aggregate() * 1e-7;
            }
            let g = ctx.graph();
            for &w in g.neighbors(ctx.vertex()) {
                ctx.send(w, *state / (w as f64 + 1.1));
            }
            ctx.aggregate(*state);
        }

        fn combine(&self, acc: &mut f64, next: f64) {
            *acc += next;
        }

        fn zero_aggregate(&self) -> f64 {
            0.0
        }

        fn merge_aggregate(&self, acc: &mut f64, next: &f64) {
            *acc += *next;
        }

        fn is_finite(&self, s: &f64) -> bool {
            s.is_finite()
        }
    }

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap().0
    }

    #[test]
    fn max_propagates_along_path() {
        // Reverse path 2 -> 1 -> 0 so the max must travel.
        let g = Graph::from_edges(3, &[(2, 1), (1, 0)]).unwrap().0;
        let out = run_supersteps(&g, &MaxId, 3, 1).unwrap();
        assert_eq!(out.states, vec![2, 2, 2]);

        let out = run_supersteps(&path3(), &MaxId, 3, 2).unwrap();
        assert_eq!(out.states, vec![0, 1, 2]);
    }

    #[test]
    fn zero_iterations_returns_initial_states() {
        let out = run_supersteps(&path3(), &MaxId, 0, 4).unwrap();
        assert_eq!(out.states, vec![0, 1, 2]);
        assert_eq!(out.supersteps, 0);
    }

    #[test]
    fn halts_when_quiescent() {
        let out = run_supersteps(&path3(), &MaxId, 100, 1).unwrap();
        assert!(out.supersteps < 5);
        assert_eq!(out.messages_sent, out.messages_delivered);
    }

    #[test]
    fn bitwise_identical_across_workers_and_partitions() {
        let edges: Vec<_> = (0..60u32)
            .flat_map(|v| [(v, (v * 7 + 3) % 60), (v, (v * 13 + 5) % 60)])
            .collect();
        let g = Graph::from_edges(60, &edges).unwrap().0;
        let reference = Engine::new(EngineConfig::new(1, 1))
            .unwrap()
            .run(&g, &OrderSensitive, 6)
            .unwrap();
        for (workers, partitions) in [(2, 2), (4, 4), (8, 8), (3, 7), (1, 16)] {
            let out = Engine::new(EngineConfig::new(workers, partitions))
                .unwrap()
                .run(&g, &OrderSensitive, 6)
                .unwrap();
            let a: Vec<u64> = reference.states.iter().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = out.states.iter().map(|x| x.to_bits()).collect();
            assert_eq!(a, b, "workers={workers} partitions={partitions}");
            let a: Vec<u64> = reference.aggregates.iter().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = out.aggregates.iter().map(|x| x.to_bits()).collect();
            assert_eq!(a, b);
        }
    }

    struct Explode;

    impl VertexProgram for Explode {
        type State = f64;
        type Message = ();
        type Aggregate = ();

        fn init(&self, _: &Graph, _: VertexId) -> f64 {
            1.0
        }

        fn compute(&self, ctx: &mut Context<'_, (), ()>, state: &mut f64, _: Option<()>) {
            if ctx.superstep() == 2 {
                *state = f64::NAN;
            }
        }

        fn combine(&self, _: &mut (), _: ()) {}

        fn zero_aggregate(&self) {}

        fn is_finite(&self, s: &f64) -> bool {
            s.is_finite()
        }
    }

    #[test]
    fn non_finite_state_names_superstep() {
        match run_supersteps(&path3(), &Explode, 10, 2) {
            Err(Error::NonFinite { superstep }) => assert_eq!(superstep, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn memory_budget_enforced() {
        let mut cfg = EngineConfig::new(1, 1);
        cfg.memory_budget_bytes = Some(8);
        let engine = Engine::new(cfg).unwrap();
        let err = engine.run(&path3(), &OrderSensitive, 3).unwrap_err();
        assert_eq!(err.name(), "InsufficientMemory");
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(Engine::new(EngineConfig::new(0, 1)).is_err());
        assert!(Engine::new(EngineConfig::new(1, 0)).is_err());
    }

    #[test]
    fn totals_accumulate() {
        let engine = Engine::default();
        engine.run(&path3(), &MaxId, 5).unwrap();
        engine.run(&path3(), &MaxId, 5).unwrap();
        let t = engine.totals();
        assert_eq!(t.runs, 2);
        assert_eq!(t.messages_sent, t.messages_delivered);
        assert!(t.peak_bytes > 0);
    }
}
