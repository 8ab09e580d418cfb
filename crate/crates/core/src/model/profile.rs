use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::appliance::{validate, Appliance, Schedule};
use crate::model::timegrid::{PeriodCalendar, Slot, TimeGrid};

/// Aggregate demand in kW for each slot of the day. Index 0 is slot 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    demand: Vec<f64>,
}

impl LoadProfile {
    pub fn zeros(grid: &TimeGrid) -> Self {
        LoadProfile {
            demand: vec![0.0; grid.slot_count()],
        }
    }

    pub fn from_kw(demand: Vec<f64>) -> Result<Self> {
        if let Some(bad) = demand.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::NegativeEnergy(*bad));
        }
        Ok(LoadProfile { demand })
    }

    pub fn constant(grid: &TimeGrid, kw: f64) -> Self {
        LoadProfile {
            demand: vec![kw; grid.slot_count()],
        }
    }

    pub fn demand(&self) -> &[f64] {
        &self.demand
    }

    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }

    /// Demand at one-based `slot`.
    pub fn at(&self, slot: Slot) -> f64 {
        self.demand[slot - 1]
    }

    /// Adds `kw` to slots `start..start+duration` (one-based).
    pub(crate) fn add_block(&mut self, start: Slot, duration: usize, kw: f64) {
        for d in &mut self.demand[start - 1..start - 1 + duration] {
            *d += kw;
        }
    }

    pub fn mean_kw(&self) -> f64 {
        if self.demand.is_empty() {
            0.0
        } else {
            self.demand.iter().sum::<f64>() / self.demand.len() as f64
        }
    }
}

/// Aggregate load of every appliance run at its assigned start.
pub fn build_load_profile(
    appliances: &[Appliance],
    schedule: &Schedule,
    grid: &TimeGrid,
) -> Result<LoadProfile> {
    let violations = validate(grid, appliances, schedule);
    if !violations.is_empty() {
        return Err(Error::InvalidSchedule(violations));
    }
    let mut profile = LoadProfile::zeros(grid);
    for a in appliances {
        let starts = schedule.starts(&a.id).unwrap_or(&[]);
        for (run, &start) in a.runs.iter().zip(starts) {
            profile.add_block(start, run.duration_slots, a.power_kw());
        }
    }
    Ok(profile)
}

pub fn total_energy_kwh(profile: &LoadProfile, grid: &TimeGrid) -> f64 {
    profile.demand.iter().sum::<f64>() * grid.slot_hours()
}

/// Maximum demand and the earliest slot that reaches it.
pub fn peak_load(profile: &LoadProfile) -> (f64, Slot) {
    let mut best = (0.0, 1);
    for (i, &d) in profile.demand.iter().enumerate() {
        if d > best.0 {
            best = (d, i + 1);
        }
    }
    best
}

/// Energy split into (peak kWh, normal kWh).
pub fn period_energy(
    profile: &LoadProfile,
    calendar: &PeriodCalendar,
    grid: &TimeGrid,
) -> (f64, f64) {
    let (mut peak, mut normal) = (0.0, 0.0);
    for (i, &d) in profile.demand.iter().enumerate() {
        if calendar.is_peak(i + 1) {
            peak += d;
        } else {
            normal += d;
        }
    }
    (peak * grid.slot_hours(), normal * grid.slot_hours())
}
