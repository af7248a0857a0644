//! Datasets on disk and the ways training sets are carved out of them.

mod outliers;
mod subset;
mod synthetic;
mod ucr;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub use outliers::{
    partition_by_deviation, remove_outliers, OutlierRemoval, OutlierReport, OutlierRule,
    OutlierSpec,
};
pub use subset::{build_subset, SubsetSpec};
pub use synthetic::generate_synthetic;
pub use ucr::{parse_ucr, read_ucr, write_ucr, Delimiter};

/// Writes `bytes` to a temporary file beside `path` and renames it over
/// `path`, so readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
