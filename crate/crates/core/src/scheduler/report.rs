use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LoadProfile, Slot, TimeGrid};

/// Cost, energy and peak metrics of one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub total_cost: f64,
    pub total_energy_kwh: f64,
    pub peak_kw: f64,
    pub peak_slot: Slot,
    pub peak_period_kwh: f64,
    pub normal_period_kwh: f64,
    /// Cost of the consumption that stays within the allowance.
    pub desired_cost: f64,
    /// Billed cost; equals `desired_cost * extension_factor`.
    pub actual_cost: f64,
    pub extended_energy_kwh: f64,
    pub extension_factor: f64,
    pub pib_events: usize,
}

impl ScheduleReport {
    pub fn zero() -> Self {
        ScheduleReport {
            total_cost: 0.0,
            total_energy_kwh: 0.0,
            peak_kw: 0.0,
            peak_slot: 1,
            peak_period_kwh: 0.0,
            normal_period_kwh: 0.0,
            desired_cost: 0.0,
            actual_cost: 0.0,
            extended_energy_kwh: 0.0,
            extension_factor: 1.0,
            pib_events: 0,
        }
    }
}

/// Split of energy against the per-slot allowance `level + ca`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedConsumption {
    pub desired_kwh: f64,
    pub extended_kwh: f64,
    /// `1 + extended / desired`.
    pub extension_factor: f64,
}

pub fn extended_consumption(
    profile: &LoadProfile,
    levels: &[f64],
    ca: f64,
    grid: &TimeGrid,
) -> Result<ExtendedConsumption> {
    if levels.len() != profile.len() || profile.len() != grid.slot_count() {
        return Err(Error::DegenerateRatio(format!(
            "level trace has {} slots, profile {} and grid {}",
            levels.len(),
            profile.len(),
            grid.slot_count()
        )));
    }
    let mut acc = ExtendedAccumulator::default();
    for (&d, &l) in profile.demand().iter().zip(levels) {
        acc.push(d, l + ca);
    }
    acc.finish(grid)
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ExtendedAccumulator {
    desired_kw: f64,
    extended_kw: f64,
}

impl ExtendedAccumulator {
    #[inline]
    pub(crate) fn push(&mut self, demand: f64, allowance: f64) {
        let ex = (demand - allowance).max(0.0);
        self.extended_kw += ex;
        self.desired_kw += demand - ex;
    }

    pub(crate) fn finish(self, grid: &TimeGrid) -> Result<ExtendedConsumption> {
        if self.desired_kw <= 0.0 && self.extended_kw > 0.0 {
            return Err(Error::DegenerateRatio(
                "all consumption is extended; no desired consumption".into(),
            ));
        }
        let factor = if self.extended_kw == 0.0 {
            1.0
        } else {
            1.0 + self.extended_kw / self.desired_kw
        };
        Ok(ExtendedConsumption {
            desired_kwh: self.desired_kw * grid.slot_hours(),
            extended_kwh: self.extended_kw * grid.slot_hours(),
            extension_factor: factor,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reductions {
    pub cost_reduction_pct: f64,
    pub peak_reduction_pct: f64,
}

/// Percentage reduction `100 * (1 - after / before)`.
pub fn reduction_pct(before: f64, after: f64) -> Result<f64> {
    if !(before > 0.0) {
        return Err(Error::DegenerateRatio(format!(
            "baseline value must be positive, got {before}"
        )));
    }
    Ok(100.0 * (1.0 - after / before))
}

pub fn compare(baseline: &ScheduleReport, optimized: &ScheduleReport) -> Result<Reductions> {
    Ok(Reductions {
        cost_reduction_pct: reduction_pct(baseline.total_cost, optimized.total_cost)?,
        peak_reduction_pct: reduction_pct(baseline.peak_kw, optimized.peak_kw)?,
    })
}

/// Whole-percent figure for display; fractions are dropped, not rounded.
pub fn display_pct(pct: f64) -> i64 {
    pct.trunc() as i64
}
