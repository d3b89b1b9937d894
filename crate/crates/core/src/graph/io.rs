use std::io::Write;
use std::path::Path;

use super::Graph;
use crate::error::{Error, Result};

/// Counts of lines discarded during ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub dropped_duplicates: usize,
    pub dropped_self_loops: usize,
}

/// Reads a whitespace-separated `src dst` edge list. `#` lines and blank
/// lines are skipped.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, LoadReport)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text)
}

pub fn parse_edge_list(text: &str) -> Result<(Graph, LoadReport)> {
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let mut tokens = line.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: lineno,
                message: format!("missing {what} vertex"),
            })?;
            tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid vertex id {tok:?}"),
            })
        };
        let src = next("source")?;
        let dst = next("target")?;
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "expected exactly two tokens".into(),
            });
        }
        edges.push((src, dst));
    }
    Graph::from_external_edges(&edges, &[])
}

/// Canonical writer: one `src dst` line per edge, external ids, edges in
/// ascending internal order.
///
/// Isolated vertices are not representable in the format and are lost.
pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> std::io::Result<()> {
    for (s, d) in graph.edges() {
        writeln!(out, "{} {}", graph.external_id(s), graph.external_id(d))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_edges_dropped() {
        let (g, r) = parse_edge_list("0 1\n1 2\n0 1\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        assert_eq!(r.dropped_duplicates, 1);
    }

    #[test]
    fn self_loops_dropped() {
        let (g, r) = parse_edge_list("0 0\n0 1\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert_eq!(r.dropped_self_loops, 1);
    }

    #[test]
    fn comments_skipped_and_ids_remapped() {
        let (g, _) = parse_edge_list("# c\n5 9\n9 5\n").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 2));
        assert_eq!(g.external_id(0), 5);
        assert_eq!(g.external_id(1), 9);
        assert_eq!(g.out_neighbors(0), &[1]);
    }

    #[test]
    fn malformed_line_reports_number() {
        match parse_edge_list("0 1\n\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_edge_list("0 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("7\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("-1 2\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_edge_list("# nothing\n\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_edge_list("/nonexistent/edges.txt").unwrap_err();
        assert_eq!(err.name(), "IoError");
        assert!(err.to_string().contains("/nonexistent/edges.txt"));
    }

    #[test]
    fn large_external_ids() {
        let (g, _) = parse_edge_list("18446744073709551615 3\n").unwrap();
        assert_eq!(g.external_id(1), u64::MAX);
    }
}
