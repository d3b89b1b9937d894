use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::kv::KeyValues;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Manager {
    Local,
    #[default]
    Standalone,
    Yarn,
    Mesos,
    Kubernetes,
}

impl Manager {
    pub fn name(self) -> &'static str {
        match self {
            Manager::Local => "local",
            Manager::Standalone => "standalone",
            Manager::Yarn => "yarn",
            Manager::Mesos => "mesos",
            Manager::Kubernetes => "kubernetes",
        }
    }
}

impl fmt::Display for Manager {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Manager {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "local" => Manager::Local,
            "standalone" => Manager::Standalone,
            "yarn" => Manager::Yarn,
            "mesos" => Manager::Mesos,
            "kubernetes" | "k8s" => Manager::Kubernetes,
            other => return Err(Error::invalid(format!("unknown cluster manager {other:?}"))),
        })
    }
}

/// Memory sizes in MB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClusterSpec {
    pub mm: u64,
    pub mc: u64,
    pub wn: u64,
    pub wmn: u64,
    pub wcn: u64,
    pub manager: Manager,
}

pub const MIN_WORKER_MEMORY_MB: u64 = 1024;

const KEYS: [&str; 6] = ["mm", "mc", "wn", "wmn", "wcn", "manager"];

impl ClusterSpec {
    pub fn new(mm: u64, mc: u64, wn: u64, wmn: u64, wcn: u64, manager: Manager) -> Result<Self> {
        let spec = ClusterSpec {
            mm,
            mc,
            wn,
            wmn,
            wcn,
            manager,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mm", self.mm), ("mc", self.mc), ("wn", self.wn), ("wcn", self.wcn)] {
            if v < 1 {
                return Err(Error::invalid(format!("{name} must be at least 1")));
            }
        }
        if self.wmn < MIN_WORKER_MEMORY_MB {
            return Err(Error::invalid(format!(
                "wmn = {} below the {MIN_WORKER_MEMORY_MB} MB floor",
                self.wmn
            )));
        }
        Ok(())
    }

    /// Total worker memory, `wn * wmn`.
    pub fn mec(&self) -> u64 {
        self.wn * self.wmn
    }

    /// Reads `mm, mc, wn, wmn, wcn` and an optional `manager` (standalone
    /// when absent).
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(&KEYS)?;
        let manager = match kv.raw("manager") {
            Some(m) => m.parse()?,
            None => Manager::default(),
        };
        Self::new(
            kv.require("mm")?,
            kv.require("mc")?,
            kv.require("wn")?,
            kv.require("wmn")?,
            kv.require("wcn")?,
            manager,
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_key_values(&KeyValues::load(path)?)
    }

    pub fn to_key_values(&self) -> String {
        format!(
            "mm={}\nmc={}\nwn={}\nwmn={}\nwcn={}\nmanager={}\n",
            self.mm, self.mc, self.wn, self.wmn, self.wcn, self.manager
        )
    }

    /// Single local node with this host's cores and physical memory.
    pub fn auto() -> Result<Self> {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
        let mem = host_memory_mb().unwrap_or(MIN_WORKER_MEMORY_MB).max(MIN_WORKER_MEMORY_MB);
        Self::new(mem, cores, 1, mem, cores, Manager::Local)
    }
}

fn host_memory_mb() -> Option<u64> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemTotal:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024)
}
