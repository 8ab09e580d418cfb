use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{LoadProfile, TimeGrid};

/// Per-slot demand table: `slot,clock,<name>...`, one kW column per profile,
/// clock labelled by slot end time.
pub fn profiles_to_csv(profiles: &[(&str, &LoadProfile)], grid: &TimeGrid) -> Result<String> {
    for (name, p) in profiles {
        if p.len() != grid.slot_count() {
            return Err(Error::Report(format!(
                "profile `{name}` has {} slots, expected {}",
                p.len(),
                grid.slot_count()
            )));
        }
        if name.contains([',', '"', '\n']) {
            return Err(Error::Report(format!(
                "profile name `{name}` is not a plain column name"
            )));
        }
    }
    let mut out = String::from("slot,clock");
    for (name, _) in profiles {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for t in grid.slots() {
        write!(out, "{t},{}", grid.end_clock(t)).unwrap();
        for (_, p) in profiles {
            write!(out, ",{:.4}", p.at(t)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn export_profile(
    profiles: &[(&str, &LoadProfile)],
    grid: &TimeGrid,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = profiles_to_csv(profiles, grid)?;
    super::write_atomic(path.as_ref(), text.as_bytes())
}
