use crate::graph::{Context, Engine, Graph, VertexId, VertexProgram};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityScore<T = f64> {
    pub pair: (VertexId, VertexId),
    pub value: T,
}

/// Sum of `1 / ln(deg z)` over common neighbors `z`, in ascending `z`
/// order, which makes the score exactly symmetric.
fn score<T: Real>(graph: &Graph, u: VertexId, v: VertexId) -> T {
    let (a, b) = (graph.neighbors(u), graph.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut total = T::zero();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                // A common neighbor of two distinct vertices has degree >= 2.
                let deg = T::from_count(graph.degree(a[i]));
                total += T::one() / deg.ln();
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Adamic-Adar index of `u` and `v` on the symmetrized graph.
pub fn adamic_adar<T: Real>(graph: &Graph, u: VertexId, v: VertexId) -> Result<SimilarityScore<T>> {
    graph.check_vertex(u)?;
    graph.check_vertex(v)?;
    if u == v {
        return Err(Error::invalid("Adamic-Adar needs two distinct vertices"));
    }
    Ok(SimilarityScore {
        pair: (u, v),
        value: score(graph, u, v),
    })
}

/// Sparse symmetric affinity: for each vertex, `(neighbor, weight)` over its
/// symmetrized neighbors in ascending neighbor order.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinity<T = f64> {
    pub rows: Vec<Vec<(VertexId, T)>>,
}

impl<T: Real> Affinity<T> {
    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row_sum(&self, v: VertexId) -> T {
        self.rows[v as usize]
            .iter()
            .fold(T::zero(), |acc, &(_, w)| acc + w)
    }

    pub fn get(&self, u: VertexId, v: VertexId) -> T {
        let row = &self.rows[u as usize];
        row.binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| row[i].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|&(_, w)| w == T::zero())
    }
}

struct EdgeScoresOf<T>(std::marker::PhantomData<T>);

impl<T: Real> VertexProgram for EdgeScoresOf<T> {
    type State = Vec<(VertexId, T)>;
    type Message = ();
    type Aggregate = ();

    fn init(&self, _: &Graph, _: VertexId) -> Self::State {
        Vec::new()
    }

    fn compute(&self, ctx: &mut Context<'_, (), ()>, state: &mut Self::State, _: Option<()>) {
        let g = ctx.graph();
        let u = ctx.vertex();
        *state = g.neighbors(u).iter().map(|&w| (w, score(g, u, w))).collect();
        ctx.vote_to_halt();
    }

    fn combine(&self, _: &mut (), _: ()) {}

    fn zero_aggregate(&self) {}

    fn is_finite(&self, state: &Self::State) -> bool {
        state.iter().all(|(_, w)| w.is_finite())
    }

    fn state_bytes(&self, state: &Self::State) -> usize {
        std::mem::size_of::<Self::State>() + state.capacity() * std::mem::size_of::<(VertexId, T)>()
    }
}

/// Adamic-Adar scores for every symmetrized edge, computed in one superstep.
pub fn edge_affinity<T: Real>(engine: &Engine, graph: &Graph) -> Result<Affinity<T>> {
    let run = engine.run(graph, &EdgeScoresOf::<T>(std::marker::PhantomData), 1)?;
    Ok(Affinity { rows: run.states })
}
