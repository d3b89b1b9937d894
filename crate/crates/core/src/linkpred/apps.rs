use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::communities::{affiliate_communities, detect_overlapping_communities, CommunityMembership};
use super::pagerank::{pagerank, RankVector};
use super::pic::{power_iteration_clustering, ClusterAssignment, PicParams};
use super::similarity::edge_affinity;
use super::triangles::{detect_triangles, TriangleDetection};
use crate::graph::{Engine, Graph};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AppKind {
    /// Graph clustering: PageRank, Adamic-Adar affinity, power iteration clustering.
    Gc,
    /// Overlapping community detection.
    Ocd,
    /// Redundant graph detection: unique triangles.
    Rgd,
}

impl AppKind {
    pub const ALL: [AppKind; 3] = [AppKind::Gc, AppKind::Ocd, AppKind::Rgd];

    pub fn name(self) -> &'static str {
        match self {
            AppKind::Gc => "gc",
            AppKind::Ocd => "ocd",
            AppKind::Rgd => "rgd",
        }
    }
}

impl fmt::Display for AppKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AppKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gc" => Ok(AppKind::Gc),
            "ocd" => Ok(AppKind::Ocd),
            "rgd" => Ok(AppKind::Rgd),
            other => Err(Error::invalid(format!("unknown application {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AppParams<T = f64> {
    pub clusters: usize,
    pub damping: T,
    pub pagerank_max_iter: usize,
    pub pagerank_tol: T,
    pub pic: PicParams<T>,
    pub communities: usize,
    pub ocd_iterations: usize,
    /// Defaults to `1 / communities`.
    pub ocd_threshold: Option<T>,
    pub seed: u64,
}

impl<T: Real> Default for AppParams<T> {
    fn default() -> Self {
        AppParams {
            clusters: 2,
            damping: T::lit(0.85),
            pagerank_max_iter: 100,
            pagerank_tol: T::lit(1e-9),
            pic: PicParams::default(),
            communities: 8,
            ocd_iterations: 5,
            ocd_threshold: None,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcOutput<T = f64> {
    pub assignment: ClusterAssignment,
    pub pagerank: RankVector<T>,
    pub pic_iterations: usize,
    pub pic_converged: bool,
}

/// PageRank is computed and reported, and only orders the listing; the
/// clusters come from power iteration over Adamic-Adar edge affinities.
pub fn gc_app<T: Real>(engine: &Engine, graph: &Graph, params: &AppParams<T>) -> Result<GcOutput<T>> {
    let pagerank = pagerank(engine, graph, params.damping, params.pagerank_max_iter, params.pagerank_tol)?;
    let affinity = edge_affinity(engine, graph)?;
    let pic = power_iteration_clustering(engine, graph, &affinity, params.clusters, &params.pic)?;
    Ok(GcOutput {
        assignment: pic.assignment,
        pagerank,
        pic_iterations: pic.iterations,
        pic_converged: pic.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcdOutput<T = f64> {
    pub membership: CommunityMembership<T>,
    pub iterations: usize,
}

pub fn ocd_app<T: Real>(engine: &Engine, graph: &Graph, params: &AppParams<T>) -> Result<OcdOutput<T>> {
    let init = affiliate_communities(graph, params.communities, params.seed)?;
    let threshold = params.ocd_threshold.unwrap_or(init.threshold);
    let membership = detect_overlapping_communities(engine, graph, &init, params.ocd_iterations, threshold)?;
    Ok(OcdOutput {
        membership,
        iterations: params.ocd_iterations,
    })
}

pub fn rgd_app(engine: &Engine, graph: &Graph) -> Result<TriangleDetection> {
    detect_triangles(engine, graph)
}

#[derive(Debug, Clone, PartialEq)]
pub enum AppOutput<T = f64> {
    Gc(GcOutput<T>),
    Ocd(OcdOutput<T>),
    Rgd(TriangleDetection),
}

pub fn run_app<T: Real>(engine: &Engine, graph: &Graph, kind: AppKind, params: &AppParams<T>) -> Result<AppOutput<T>> {
    Ok(match kind {
        AppKind::Gc => AppOutput::Gc(gc_app(engine, graph, params)?),
        AppKind::Ocd => AppOutput::Ocd(ocd_app(engine, graph, params)?),
        AppKind::Rgd => AppOutput::Rgd(rgd_app(engine, graph)?),
    })
}

impl<T: Real> AppOutput<T> {
    pub fn kind(&self) -> AppKind {
        match self {
            AppOutput::Gc(_) => AppKind::Gc,
            AppOutput::Ocd(_) => AppKind::Ocd,
            AppOutput::Rgd(_) => AppKind::Rgd,
        }
    }

    /// Result listing with external vertex ids:
    /// `vertex_id,cluster` for GC (highest PageRank first),
    /// `vertex_id,label:weight[;label:weight...]` for OCD and `a,b,c` for RGD.
    pub fn listing(&self, graph: &Graph) -> String {
        let mut out = String::new();
        match self {
            AppOutput::Gc(gc) => {
                for v in gc.pagerank.ordering() {
                    let cluster = gc.assignment.vertex_to_cluster[v as usize];
                    let _ = writeln!(out, "{},{}", graph.external_id(v), cluster);
                }
            }
            AppOutput::Ocd(ocd) => {
                for (v, labels) in ocd.membership.memberships.iter().enumerate() {
                    let _ = write!(out, "{},", graph.external_id(v as u32));
                    for (i, (l, w)) in labels.iter().enumerate() {
                        if i > 0 {
                            out.push(';');
                        }
                        let _ = write!(out, "{l}:{w}");
                    }
                    out.push('\n');
                }
            }
            AppOutput::Rgd(rgd) => {
                for t in &rgd.triangles {
                    let [a, b, c] = t.0.map(|v| graph.external_id(v));
                    let _ = writeln!(out, "{a},{b},{c}");
                }
            }
        }
        out
    }

    /// Run report as `key=value` lines.
    pub fn report(&self) -> String {
        let mut pairs: Vec<(&str, String)> = vec![("app", self.kind().to_string())];
        match self {
            AppOutput::Gc(gc) => {
                pairs.push(("iterations", gc.pic_iterations.to_string()));
                pairs.push(("converged", gc.pic_converged.to_string()));
                pairs.push(("clusters", gc.assignment.distinct_labels().to_string()));
                pairs.push(("pagerank_iterations", gc.pagerank.iterations_run.to_string()));
                pairs.push(("pagerank_converged", gc.pagerank.converged.to_string()));
            }
            AppOutput::Ocd(ocd) => {
                pairs.push(("iterations", ocd.iterations.to_string()));
                pairs.push(("communities", ocd.membership.communities().len().to_string()));
                pairs.push(("overlapping_vertices", ocd.membership.overlapping_count().to_string()));
            }
            AppOutput::Rgd(rgd) => {
                pairs.push(("triads", rgd.report.triads.to_string()));
                pairs.push(("triangles_with_duplicates", rgd.report.with_duplicates.to_string()));
                pairs.push(("duplicates_detected", rgd.report.duplicates_detected.to_string()));
                pairs.push(("unique_triangles", rgd.report.unique.to_string()));
            }
        }
        pairs.into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
