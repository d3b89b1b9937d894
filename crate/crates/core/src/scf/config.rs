use std::fmt::Write as _;
use std::path::Path;

use super::{ClusterSpec, Manager};
use crate::gbdt::{Classifier, FeatureVector};
use crate::graph::EngineConfig;
use crate::kv::KeyValues;
use crate::{Error, Result};

pub const BOUNDS_ENV: &str = "SCF_BOUNDS";

/// Smallest executor heap, in MB, that a recalculated configuration may use.
pub const MIN_EXECUTOR_MEMORY_MB: u64 = 512;

/// Limits applied when sizing executors and the driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBounds {
    /// Minimum memory overhead, MB.
    pub moc: u64,
    /// Executor memory cap, MB. `None` means 90% of the node's memory.
    pub em: Option<u64>,
    /// Cores per executor cap.
    pub ec: u64,
    /// Driver overhead ratio.
    pub orc: f64,
    /// Executor overhead ratio.
    pub orm: f64,
    /// Partitions per executor core.
    pub ppc: u64,
}

impl Default for UpperBounds {
    fn default() -> Self {
        UpperBounds {
            moc: 384,
            em: None,
            ec: 5,
            orc: 0.10,
            orm: 0.10,
            ppc: 2,
        }
    }
}

const BOUND_KEYS: [&str; 6] = ["MOC", "EM", "EC", "ORC", "ORM", "PPC"];

impl UpperBounds {
    pub fn validate(&self) -> Result<()> {
        if self.ec < 1 || self.ppc < 1 {
            return Err(Error::invalid("EC and PPC must be at least 1"));
        }
        if self.em == Some(0) {
            return Err(Error::invalid("EM must be at least 1"));
        }
        for (name, r) in [("ORC", self.orc), ("ORM", self.orm)] {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {r}")));
            }
        }
        Ok(())
    }

    pub fn executor_memory_cap(&self, wmn: u64) -> u64 {
        self.em.unwrap_or(wmn * 9 / 10)
    }

    /// Defaults overridden by whichever of `MOC, EM, EC, ORC, ORM, PPC` are set.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(&BOUND_KEYS)?;
        let d = Self::default();
        let b = UpperBounds {
            moc: kv.get("MOC")?.unwrap_or(d.moc),
            em: kv.get("EM")?.or(d.em),
            ec: kv.get("EC")?.unwrap_or(d.ec),
            orc: kv.get("ORC")?.unwrap_or(d.orc),
            orm: kv.get("ORM")?.unwrap_or(d.orm),
            ppc: kv.get("PPC")?.unwrap_or(d.ppc),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }

    /// The file named by `SCF_BOUNDS`, or the defaults when it is unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(BOUNDS_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }
}

/// Execution properties. Memory in MB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExecConfig {
    pub dc: u64,
    pub odm: u64,
    pub dm: u64,
    pub ti: u64,
    pub ompe: u64,
    pub mpe: u64,
    pub ec: u64,
    pub parallelism: u64,
    pub epn: u64,
}

impl ExecConfig {
    /// Every violated invariant, described; empty when the configuration
    /// fits the cluster and the bounds.
    pub fn violations(&self, cluster: &ClusterSpec, bounds: &UpperBounds) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        for (name, x) in [
            ("dc", self.dc),
            ("dm", self.dm),
            ("ti", self.ti),
            ("mpe", self.mpe),
            ("ec", self.ec),
            ("parallelism", self.parallelism),
            ("epn", self.epn),
        ] {
            check(x >= 1, format!("{name} = {x} < 1"));
        }
        check(
            self.epn * (self.mpe + self.ompe) <= cluster.wmn,
            format!("epn * (mpe + ompe) = {} > wmn = {}", self.epn * (self.mpe + self.ompe), cluster.wmn),
        );
        check(
            self.epn * self.ec <= cluster.wcn,
            format!("epn * ec = {} > wcn = {}", self.epn * self.ec, cluster.wcn),
        );
        check(self.ti == self.epn * cluster.wn, format!("ti = {} != epn * wn", self.ti));
        check(self.ec <= bounds.ec, format!("ec = {} > EC = {}", self.ec, bounds.ec));
        let em = bounds.executor_memory_cap(cluster.wmn);
        check(self.mpe <= em, format!("mpe = {} > EM = {em}", self.mpe));
        check(
            self.dm + self.odm <= cluster.mm,
            format!("dm + odm = {} > mm = {}", self.dm + self.odm, cluster.mm),
        );
        check(self.dc <= cluster.mc, format!("dc = {} > mc = {}", self.dc, cluster.mc));
        v
    }

    pub fn check_invariants(&self, cluster: &ClusterSpec, bounds: &UpperBounds) -> Result<()> {
        let v = self.violations(cluster, bounds);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(v.join("; ")))
        }
    }
}

fn overhead(floor: u64, ratio: f64, raw: u64) -> u64 {
    floor.max((ratio * raw as f64).round() as u64)
}

/// Sizes executors and the driver for `epn` executors per node.
///
/// Each executor gets `wmn / epn` of its node, minus an overhead of
/// `max(MOC, ORM * share)`, capped at EM; cores are split evenly up to EC.
/// The driver takes half of the master's memory minus its own overhead.
/// `epn` above the node's core count is clamped.
pub fn recalculate_config(epn: u64, cluster: &ClusterSpec, bounds: &UpperBounds) -> Result<ExecConfig> {
    if epn == 0 {
        return Err(Error::invalid("epn must be at least 1"));
    }
    cluster.validate()?;
    bounds.validate()?;
    let epn = if epn > cluster.wcn {
        log::warn!("epn {epn} exceeds {} cores per node, clamping", cluster.wcn);
        cluster.wcn
    } else {
        epn
    };

    let ec = (cluster.wcn / epn).min(bounds.ec).max(1);

    let raw_mem = cluster.wmn / epn;
    let ompe = overhead(bounds.moc, bounds.orm, raw_mem);
    let mpe = raw_mem.saturating_sub(ompe).min(bounds.executor_memory_cap(cluster.wmn));
    if mpe < MIN_EXECUTOR_MEMORY_MB {
        return Err(Error::InsufficientMemory(format!(
            "{epn} executors per node leave {mpe} MB heap each on a {} MB node (minimum {MIN_EXECUTOR_MEMORY_MB})",
            cluster.wmn
        )));
    }

    let raw_dm = cluster.mm / 2;
    let odm = overhead(bounds.moc, bounds.orc, raw_dm);
    let dm = raw_dm.saturating_sub(odm);
    if dm < 1 {
        return Err(Error::InsufficientMemory(format!(
            "master memory {} MB cannot cover a {odm} MB driver overhead",
            cluster.mm
        )));
    }

    let ti = epn * cluster.wn;
    Ok(ExecConfig {
        dc: cluster.mc.min(bounds.ec),
        odm,
        dm,
        ti,
        ompe,
        mpe,
        ec,
        parallelism: ti * ec * bounds.ppc,
        epn,
    })
}

/// Executors per node from the classifier: class 0 gives one, class 1 two.
pub fn epn_for_class(class: usize) -> u64 {
    class as u64 + 1
}

pub fn decide<C: Classifier + ?Sized>(
    features: &FeatureVector,
    model: &C,
    bounds: &UpperBounds,
    cluster: &ClusterSpec,
) -> Result<ExecConfig> {
    recalculate_config(epn_for_class(model.predict_class(features)), cluster, bounds)
}

/// Ordered `key=value` properties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Properties(pub Vec<(&'static str, String)>);

impl Properties {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// How the local engine is sized for a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuntimeSettings {
    pub workers: usize,
    pub partitions: usize,
}

impl RuntimeSettings {
    pub fn for_config(cfg: &ExecConfig, host_cores: usize) -> Self {
        let slots = usize::try_from(cfg.ti * cfg.ec).unwrap_or(usize::MAX);
        RuntimeSettings {
            workers: host_cores.min(slots).max(1),
            partitions: usize::try_from(cfg.parallelism).unwrap_or(usize::MAX).max(1),
        }
    }

    pub fn engine_config(&self, memory_budget_bytes: Option<usize>) -> EngineConfig {
        EngineConfig {
            memory_budget_bytes,
            ..EngineConfig::new(self.workers, self.partitions)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub properties: Properties,
    pub runtime: RuntimeSettings,
}

pub fn host_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Renders `cfg` as execution properties and derives the engine sizing for
/// this host. A local manager only gets the driver core count and the
/// parallelism.
pub fn update(cfg: &ExecConfig, cluster: &ClusterSpec) -> Update {
    let parallelism = ("spark.default.parallelism", cfg.parallelism.to_string());
    let properties = if cluster.manager == Manager::Local {
        vec![("spark.driver.core", "2".to_string()), parallelism]
    } else {
        vec![
            ("spark.driver.core", cfg.dc.to_string()),
            ("spark.driver.memoryOverhead", format!("{}m", cfg.odm)),
            ("spark.driver.memory", format!("{}m", cfg.dm)),
            ("spark.executor.instances", cfg.ti.to_string()),
            ("spark.executor.memoryOverhead", format!("{}m", cfg.ompe)),
            ("spark.executor.memory", format!("{}m", cfg.mpe)),
            ("spark.executor.cores", cfg.ec.to_string()),
            parallelism,
        ]
    };
    Update {
        properties: Properties(properties),
        runtime: RuntimeSettings::for_config(cfg, host_cores()),
    }
}
