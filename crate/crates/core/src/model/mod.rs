//! The slotted day, appliance catalog, schedules and aggregate load.

mod appliance;
mod profile;
mod timegrid;

pub use appliance::{validate, Appliance, LoadClass, RunSpec, Schedule, Violation};
pub use profile::{build_load_profile, peak_load, period_energy, total_energy_kwh, LoadProfile};
pub use timegrid::{Clock, PeriodCalendar, Slot, SlotRange, TimeGrid};
