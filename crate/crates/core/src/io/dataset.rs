//! The bundled 26-appliance household catalog and its reference placements.

use crate::error::{Error, Result};
use crate::io::catalog::parse_catalog;
use crate::model::{Appliance, Schedule, Slot, TimeGrid};

pub const HOUSEHOLD_CATALOG_CSV: &str = include_str!("../../data/household_catalog.csv");
pub const HOUSEHOLD_REFERENCE_CSV: &str = include_str!("../../data/household_reference.csv");

/// Two-rate tariff at the rates implied by the reference bills.
pub const TOU_IMPLIED_TOML: &str = include_str!("../../data/tou_implied.toml");
pub const TOU_PUBLISHED_TOML: &str = include_str!("../../data/tou_published.toml");
pub const ACLPS_DEFAULT_TOML: &str = include_str!("../../data/aclps_default.toml");
pub const QUADRATIC_EXAMPLE_TOML: &str = include_str!("../../data/quadratic_example.toml");
pub const STEP_EXAMPLE_TOML: &str = include_str!("../../data/step_example.toml");

pub fn bundled_catalog(grid: &TimeGrid) -> Vec<Appliance> {
    parse_catalog(HOUSEHOLD_CATALOG_CSV, grid).expect("bundled catalog is valid")
}

/// Reference `(id, start, end)` placements for the shiftable rows.
pub fn reference_placements() -> Result<Vec<(String, Slot, Slot)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(HOUSEHOLD_REFERENCE_CSV.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let slot = |i: usize| {
            rec[i].parse::<Slot>().map_err(|e| Error::Parse {
                line: rec.position().map(|p| p.line()).unwrap_or(0),
                msg: e.to_string(),
            })
        };
        out.push((rec[0].to_string(), slot(1)?, slot(2)?));
    }
    Ok(out)
}

/// Baseline schedule with the reference placements applied.
pub fn reference_schedule(appliances: &[Appliance]) -> Result<Schedule> {
    let mut s = Schedule::baseline(appliances);
    for (id, start, _) in reference_placements()? {
        if s.starts(&id).is_none() {
            return Err(Error::Row {
                id,
                msg: "not in catalog".into(),
            });
        }
        s.set(&id, 0, start);
    }
    Ok(s)
}
