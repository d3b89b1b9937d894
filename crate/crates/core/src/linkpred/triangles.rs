use crate::graph::{Context, Engine, Graph, VertexId, VertexProgram};
use crate::Result;

/// Vertices of a triangle in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle(pub [VertexId; 3]);

impl Triangle {
    pub fn new(a: VertexId, b: VertexId, c: VertexId) -> Self {
        let mut t = [a, b, c];
        t.sort_unstable();
        Triangle(t)
    }
}

/// Stage counters of the detection pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TriangleReport {
    /// Neighbor pairs emitted around every vertex.
    pub triads: u64,
    /// Closed triads, each triangle once per corner.
    pub with_duplicates: u64,
    pub duplicates_detected: u64,
    pub unique: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleDetection {
    /// Sorted, duplicate free.
    pub triangles: Vec<Triangle>,
    pub report: TriangleReport,
}

#[derive(Debug, Default)]
struct TriadState {
    triads: u64,
    closed: u64,
    received: u64,
    owned: Vec<Triangle>,
}

struct Triads;

impl VertexProgram for Triads {
    type State = TriadState;
    type Message = Vec<Triangle>;
    type Aggregate = ();

    fn init(&self, _: &Graph, _: VertexId) -> TriadState {
        TriadState::default()
    }

    fn compute(&self, ctx: &mut Context<'_, Vec<Triangle>, ()>, st: &mut TriadState, incoming: Option<Vec<Triangle>>) {
        match incoming {
            None if ctx.superstep() == 0 => {
                // Pair up the neighbors of this vertex and keep the closed pairs.
                let g = ctx.graph();
                let v = ctx.vertex();
                let nbrs = g.neighbors(v);
                for (i, &a) in nbrs.iter().enumerate() {
                    for &b in &nbrs[i + 1..] {
                        st.triads += 1;
                        if g.is_adjacent(a, b) {
                            st.closed += 1;
                            let t = Triangle::new(v, a, b);
                            ctx.send(t.0[0], vec![t]);
                        }
                    }
                }
            }
            None => {}
            Some(mut found) => {
                st.received = found.len() as u64;
                found.sort_unstable();
                found.dedup();
                st.owned = found;
            }
        }
        ctx.vote_to_halt();
    }

    fn combine(&self, acc: &mut Vec<Triangle>, next: Vec<Triangle>) {
        acc.extend(next);
    }

    fn zero_aggregate(&self) {}

    fn state_bytes(&self, st: &TriadState) -> usize {
        std::mem::size_of::<TriadState>() + st.owned.capacity() * std::mem::size_of::<Triangle>()
    }

    fn message_bytes(&self, m: &Vec<Triangle>) -> usize {
        std::mem::size_of::<Vec<Triangle>>() + m.capacity() * std::mem::size_of::<Triangle>()
    }
}

/// Enumerates all triangles of the symmetrized graph in three stages: pair
/// the neighbors of each vertex, keep pairs closed by an edge (every
/// triangle is found from each of its corners), then route each canonical
/// triple to its smallest vertex, which drops the duplicates.
pub fn detect_triangles(engine: &Engine, graph: &Graph) -> Result<TriangleDetection> {
    let run = engine.run(graph, &Triads, 2)?;
    let mut report = TriangleReport::default();
    let mut triangles = Vec::new();
    for st in run.states {
        report.triads += st.triads;
        report.with_duplicates += st.closed;
        report.duplicates_detected += st.received - st.owned.len() as u64;
        triangles.extend(st.owned);
    }
    report.unique = triangles.len() as u64;
    Ok(TriangleDetection { triangles, report })
}
