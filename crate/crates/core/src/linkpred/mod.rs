//! Link-prediction workloads on the superstep engine: PageRank, Adamic-Adar
//! similarity, power iteration clustering, overlapping community detection
//! and triangle enumeration, plus the three application pipelines built
//! from them.

pub mod apps;
pub mod communities;
pub mod pagerank;
pub mod pic;
pub mod similarity;
pub mod triangles;

pub use apps::{gc_app, ocd_app, rgd_app, run_app, AppKind, AppOutput, AppParams, GcOutput, OcdOutput};
pub use communities::{affiliate_communities, detect_overlapping_communities, CommunityMembership, Label};
pub use pagerank::{pagerank, RankVector};
pub use pic::{kmeans_1d, power_iteration_clustering, ClusterAssignment, PicOutcome, PicParams};
pub use similarity::{adamic_adar, edge_affinity, Affinity, SimilarityScore};
pub use triangles::{detect_triangles, Triangle, TriangleDetection, TriangleReport};
