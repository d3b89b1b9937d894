use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::GraphKind;
use crate::kv::KeyValues;
use crate::linkpred::AppKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Default,
    Scf,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Default => "default",
            Mode::Scf => "scf",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => Ok(Mode::Default),
            "scf" => Ok(Mode::Scf),
            other => Err(Error::invalid(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchScenario {
    pub app: AppKind,
    pub edge_counts: Vec<usize>,
    /// Worker memory per node for this scenario, MB.
    pub memory_budget_mb: u64,
    pub modes: Vec<Mode>,
    pub repetitions: usize,
    pub kind: GraphKind,
    /// Vertex count is `edges / avg_degree` unless `vertices` is set.
    pub avg_degree: usize,
    pub vertices: Option<usize>,
    pub seed: u64,
}

pub const MIN_REPETITIONS: usize = 3;

const KEYS: [&str; 9] = [
    "app",
    "edge_counts",
    "memory_budget_mb",
    "modes",
    "repetitions",
    "kind",
    "avg_degree",
    "vertices",
    "seed",
];

/// `200000`, `200k` or `1m`.
fn parse_count(s: &str) -> Result<usize> {
    let s = s.trim().to_ascii_lowercase();
    let (digits, scale) = match s.strip_suffix('k') {
        Some(d) => (d, 1_000),
        None => match s.strip_suffix('m') {
            Some(d) => (d, 1_000_000),
            None => (s.as_str(), 1),
        },
    };
    digits
        .trim()
        .parse::<usize>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| Error::invalid(format!("bad count {s:?}")))
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(item).collect()
}

impl BenchScenario {
    pub fn new(app: AppKind, edge_counts: Vec<usize>, memory_budget_mb: u64) -> Self {
        BenchScenario {
            app,
            edge_counts,
            memory_budget_mb,
            modes: vec![Mode::Default, Mode::Scf],
            repetitions: MIN_REPETITIONS,
            kind: GraphKind::ErdosRenyi,
            avg_degree: 10,
            vertices: None,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions < MIN_REPETITIONS {
            return Err(Error::invalid(format!(
                "repetitions must be at least {MIN_REPETITIONS}, got {}",
                self.repetitions
            )));
        }
        if self.edge_counts.is_empty() || self.modes.is_empty() {
            return Err(Error::invalid("scenario needs edge counts and modes"));
        }
        if self.avg_degree == 0 || self.vertices == Some(0) {
            return Err(Error::invalid("vertex count must be positive"));
        }
        if self.memory_budget_mb < crate::scf::MIN_WORKER_MEMORY_MB {
            return Err(Error::invalid("memory budget below the worker memory floor"));
        }
        Ok(())
    }

    pub fn vertices_for(&self, edges: usize) -> usize {
        self.vertices.unwrap_or((edges / self.avg_degree).max(2))
    }

    /// Requires `app`, `edge_counts` and `memory_budget_mb`; the rest
    /// default to both modes, 3 repetitions, Erdős–Rényi graphs of average
    /// degree 10 and seed 42.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(&KEYS)?;
        let app: AppKind = kv.require::<String>("app")?.parse()?;
        let edge_counts = parse_list(&kv.require::<String>("edge_counts")?, parse_count)?;
        let mut s = BenchScenario::new(app, edge_counts, kv.require("memory_budget_mb")?);
        if let Some(m) = kv.raw("modes") {
            s.modes = parse_list(m, str::parse)?;
        }
        if let Some(r) = kv.get("repetitions")? {
            s.repetitions = r;
        }
        if let Some(k) = kv.raw("kind") {
            s.kind = k.parse()?;
        }
        if let Some(d) = kv.get("avg_degree")? {
            s.avg_degree = d;
        }
        if let Some(v) = kv.raw("vertices") {
            s.vertices = Some(parse_count(v)?);
        }
        if let Some(seed) = kv.get("seed")? {
            s.seed = seed;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }
}
