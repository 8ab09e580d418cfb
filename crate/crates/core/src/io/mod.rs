//! File formats: catalogs and per-slot profiles as CSV, tariff configs as flat
//! TOML, reports as JSON.

pub mod catalog;
pub mod dataset;
pub mod profile_csv;
pub mod report;
pub mod tariff_config;

pub use catalog::{catalog_to_csv, load_catalog, parse_catalog, save_catalog, CatalogRow};
pub use dataset::{bundled_catalog, reference_placements, reference_schedule};
pub use profile_csv::{export_profile, profiles_to_csv};
pub use report::{read_report, report_to_string, write_report, AssignedRun, ReportDocument};
pub use tariff_config::{
    load_tariff_config, parse_tariff_config, tariff_config_to_string, write_tariff_config,
};

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed write never leaves a partial file behind.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
