use std::path::Path;

use super::ClusterSpec;
use crate::gbdt::FeatureVector;
use crate::linkpred::AppKind;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AppMetadata {
    pub data_size_mb: f64,
    pub main_class_lines: u64,
    /// 1 to 3; becomes the `ac` feature.
    pub workload_level: u8,
    pub app_name: String,
}

/// Built-in applications have fixed levels; anything else is graded by the
/// length of its main source file.
pub fn workload_level(app_name: &str, main_class_lines: u64) -> u8 {
    match app_name.parse::<AppKind>() {
        Ok(AppKind::Gc) => 2,
        Ok(AppKind::Ocd) => 3,
        Ok(AppKind::Rgd) => 1,
        Err(_) => match main_class_lines {
            0..=99 => 1,
            100..=499 => 2,
            _ => 3,
        },
    }
}

const MB: f64 = (1u64 << 20) as f64;

fn assemble(app_name: String, main_class_lines: u64, data_bytes: u64, cluster: &ClusterSpec) -> Result<(AppMetadata, FeatureVector)> {
    if data_bytes == 0 {
        return Err(Error::invalid("input data is empty"));
    }
    let meta = AppMetadata {
        data_size_mb: data_bytes as f64 / MB,
        main_class_lines,
        workload_level: workload_level(&app_name, main_class_lines),
        app_name,
    };
    let features = FeatureVector::new(
        cluster.mm as f64,
        cluster.mc as f64,
        cluster.wn as f64,
        cluster.wmn as f64,
        cluster.wcn as f64,
        meta.data_size_mb,
        f64::from(meta.workload_level),
    )?;
    Ok((meta, features))
}

fn data_bytes(path: &Path) -> Result<u64> {
    Ok(std::fs::metadata(path).map_err(|e| Error::io(path, e))?.len())
}

/// Gathers the classifier inputs for an application given by its source
/// file. The application name is the file stem.
pub fn collect(app_source: &Path, data: &Path, cluster: &ClusterSpec) -> Result<(AppMetadata, FeatureVector)> {
    let source = std::fs::read(app_source).map_err(|e| Error::io(app_source, e))?;
    let lines = source.iter().filter(|&&b| b == b'\n').count() as u64;
    let name = app_source
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    assemble(name, lines, data_bytes(data)?, cluster)
}

/// Source of the central algorithm of each built-in application, used as
/// its main class.
fn builtin_source(kind: AppKind) -> &'static str {
    match kind {
        AppKind::Gc => include_str!("../linkpred/pic.rs"),
        AppKind::Ocd => include_str!("../linkpred/communities.rs"),
        AppKind::Rgd => include_str!("../linkpred/triangles.rs"),
    }
}

/// [`collect`] for one of the bundled applications.
pub fn collect_builtin(kind: AppKind, data: &Path, cluster: &ClusterSpec) -> Result<(AppMetadata, FeatureVector)> {
    collect_builtin_sized(kind, data_bytes(data)?, cluster)
}

/// [`collect_builtin`] for input that is already in memory, `data_bytes` long.
pub fn collect_builtin_sized(kind: AppKind, data_bytes: u64, cluster: &ClusterSpec) -> Result<(AppMetadata, FeatureVector)> {
    let lines = builtin_source(kind).bytes().filter(|&b| b == b'\n').count() as u64;
    assemble(kind.name().to_string(), lines, data_bytes, cluster)
}
