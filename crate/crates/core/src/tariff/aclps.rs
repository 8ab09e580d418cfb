//! Consumption-level pricing.
//!
//! The quadratic coefficients of a slot's cost scale with the customer's
//! current consumption level `L`: `(r1*L)*e^2 + (r2*L)*e + r3*L`. The level
//! moves only when consumption leaves the price-invariant band around it:
//!
//! * normal slots hold the rate while `|consumption - L| <= ca_plus`;
//! * peak slots hold the rate while `consumption <= L - ca_minus`.
//!
//! Leaving the band snaps `L` to the ladder level of the new consumption. A
//! move down is reported as an incentive, a move up as a rate increase.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PeriodCalendar, Slot};
use crate::tariff::ladder::LevelLadder;

const BAND_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialLevel {
    /// Snap of the mean demand of the billed profile. Shifting load never
    /// changes the mean, so this equals the snap of the baseline mean.
    SnapOfMean,
    /// A fixed starting level in kW, snapped onto the ladder.
    Explicit(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AclpsConfig {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub ladder: LevelLadder,
    pub ca_plus: f64,
    pub ca_minus: f64,
    pub calendar: PeriodCalendar,
    pub initial_level: InitialLevel,
}

impl AclpsConfig {
    /// Defaults: `r = (1, 0, 0)`, default ladder, both allowances one
    /// ladder step.
    pub fn with_calendar(calendar: PeriodCalendar) -> Self {
        let ladder = LevelLadder::default();
        AclpsConfig {
            r1: 1.0,
            r2: 0.0,
            r3: 0.0,
            ladder,
            ca_plus: ladder.step,
            ca_minus: ladder.step,
            calendar,
            initial_level: InitialLevel::SnapOfMean,
        }
    }

    pub fn check(&self) -> Result<()> {
        let fin = [self.r1, self.r2, self.r3, self.ca_plus, self.ca_minus]
            .iter()
            .all(|x| x.is_finite());
        if !fin || !(self.r1 > 0.0) || self.r2 < 0.0 || self.r3 < 0.0 {
            return Err(Error::Tariff(format!(
                "consumption-level rates need r1 > 0, r2 >= 0, r3 >= 0; got ({}, {}, {})",
                self.r1, self.r2, self.r3
            )));
        }
        if !(self.ca_plus > 0.0) || self.ca_minus < 0.0 {
            return Err(Error::Tariff(format!(
                "allowances need ca_plus > 0 and ca_minus >= 0; got {} and {}",
                self.ca_plus, self.ca_minus
            )));
        }
        LevelLadder::new(self.ladder.base, self.ladder.step, self.ladder.max_level)?;
        if let InitialLevel::Explicit(kw) = self.initial_level {
            if !(kw.is_finite() && kw >= 0.0) {
                return Err(Error::Tariff(format!(
                    "initial level must be >= 0, got {kw}"
                )));
            }
        }
        Ok(())
    }

    /// Coefficients `(A, B, C)` at `level`.
    pub fn price_params(&self, level: f64) -> (f64, f64, f64) {
        (self.r1 * level, self.r2 * level, self.r3 * level)
    }

    /// The same config with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        AclpsConfig {
            r1: self.r1 * factor,
            r2: self.r2 * factor,
            r3: self.r3 * factor,
            ..self.clone()
        }
    }

    pub(crate) fn initial_index(&self, mean_demand_kw: f64) -> usize {
        match self.initial_level {
            InitialLevel::SnapOfMean => self.ladder.snap_index(mean_demand_kw),
            InitialLevel::Explicit(kw) => self.ladder.snap_index(kw),
        }
    }
}

/// Cost of `energy` kWh billed at consumption `level` kW.
pub fn aclps_slot_cost(config: &AclpsConfig, level: f64, energy: f64) -> Result<f64> {
    if config.ladder.index_of(level).is_none() {
        return Err(Error::NotALadderLevel(level));
    }
    if !(energy >= 0.0) {
        return Err(Error::NegativeEnergy(energy));
    }
    Ok(slot_cost_unchecked(config, level, energy))
}

#[inline]
pub(crate) fn slot_cost_unchecked(config: &AclpsConfig, level: f64, energy: f64) -> f64 {
    let (a, b, c) = config.price_params(level);
    a * energy * energy + b * energy + c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PibEventKind {
    RateUp,
    RateDownIncentive,
}

/// A change of consumption level, as would be notified to the customer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PibEvent {
    pub slot: Slot,
    pub kind: PibEventKind,
    pub old_level: f64,
    pub new_level: f64,
}

/// Hysteresis state of the consumption level.
#[derive(Debug, Clone, PartialEq)]
pub struct PibState {
    level_index: usize,
    level: f64,
    price_params: (f64, f64, f64),
    events: Vec<PibEvent>,
    last_slot: Option<Slot>,
}

impl PibState {
    pub fn new(config: &AclpsConfig, level_index: usize) -> Self {
        let level_index = level_index.min(config.ladder.top_index());
        let level = config.ladder.level(level_index);
        PibState {
            level_index,
            level,
            price_params: config.price_params(level),
            events: Vec::new(),
            last_slot: None,
        }
    }

    /// Starts at the ladder level for `kw`.
    pub fn at_consumption(config: &AclpsConfig, kw: f64) -> Self {
        Self::new(config, config.ladder.snap_index(kw))
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn level_index(&self) -> usize {
        self.level_index
    }

    pub fn price_params(&self) -> (f64, f64, f64) {
        self.price_params
    }

    pub fn events(&self) -> &[PibEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<PibEvent> {
        self.events
    }

    pub fn in_band(config: &AclpsConfig, level: f64, peak: bool, consumption: f64) -> bool {
        if peak {
            consumption <= level - config.ca_minus + BAND_EPS
        } else {
            (consumption - level).abs() <= config.ca_plus + BAND_EPS
        }
    }

    /// Observes `consumption` kW in `slot`. Slots must strictly increase
    /// between calls. A band exit that snaps back to the current level changes
    /// nothing and emits no event.
    pub fn step(
        &mut self,
        config: &AclpsConfig,
        slot: Slot,
        consumption: f64,
    ) -> Result<Option<PibEvent>> {
        if let Some(last) = self.last_slot {
            if slot <= last {
                return Err(Error::Sequencing { last, got: slot });
            }
        }
        self.last_slot = Some(slot);
        Ok(self.advance(config, slot, consumption))
    }

    #[inline]
    pub(crate) fn advance(
        &mut self,
        config: &AclpsConfig,
        slot: Slot,
        consumption: f64,
    ) -> Option<PibEvent> {
        if Self::in_band(
            config,
            self.level,
            config.calendar.is_peak(slot),
            consumption,
        ) {
            return None;
        }
        let new_index = config.ladder.snap_index(consumption);
        if new_index == self.level_index {
            return None;
        }
        let (old_index, old_level) = (self.level_index, self.level);
        self.level_index = new_index;
        self.level = config.ladder.level(new_index);
        self.price_params = config.price_params(self.level);
        let event = PibEvent {
            slot,
            kind: if new_index < old_index {
                PibEventKind::RateDownIncentive
            } else {
                PibEventKind::RateUp
            },
            old_level,
            new_level: self.level,
        };
        self.events.push(event);
        Some(event)
    }
}

/// Functional form of [`PibState::step`].
pub fn pib_step(
    state: &PibState,
    config: &AclpsConfig,
    slot: Slot,
    consumption: f64,
) -> Result<(PibState, Option<PibEvent>)> {
    let mut next = state.clone();
    let ev = next.step(config, slot, consumption)?;
    Ok((next, ev))
}
