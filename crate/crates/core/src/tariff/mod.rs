//! Slot cost functions, consumption-level hysteresis and daily billing.
//!
//! Every tariff bills per-slot energy in kWh, i.e. demand kW times the slot
//! length in hours.

mod aclps;
mod ladder;

pub use aclps::{
    aclps_slot_cost, pib_step, AclpsConfig, InitialLevel, PibEvent, PibEventKind, PibState,
};
pub use ladder::{snap_level, LevelLadder};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LoadProfile, PeriodCalendar, Slot, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = QuadraticParams { a, b, c };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.a.is_finite() && self.b.is_finite() && self.c.is_finite();
        if !ok || !(self.a > 0.0) || self.b < 0.0 || self.c < 0.0 {
            return Err(Error::Tariff(format!(
                "quadratic needs a > 0, b >= 0, c >= 0; got ({}, {}, {})",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

pub fn quad_slot_cost(params: &QuadraticParams, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(Error::NegativeEnergy(energy));
    }
    Ok(params.a * energy * energy + params.b * energy + params.c)
}

/// Quadratic cost with day-constant or per-slot coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTariff {
    params: Vec<QuadraticParams>,
}

impl QuadraticTariff {
    pub fn constant(params: QuadraticParams) -> Result<Self> {
        params.check()?;
        Ok(QuadraticTariff {
            params: vec![params],
        })
    }

    pub fn per_slot(grid: &TimeGrid, params: Vec<QuadraticParams>) -> Result<Self> {
        if params.len() != grid.slot_count() {
            return Err(Error::Tariff(format!(
                "{} per-slot coefficient sets for {} slots",
                params.len(),
                grid.slot_count()
            )));
        }
        params.iter().try_for_each(QuadraticParams::check)?;
        Ok(QuadraticTariff { params })
    }

    pub fn params_at(&self, slot: Slot) -> &QuadraticParams {
        if self.params.len() == 1 {
            &self.params[0]
        } else {
            &self.params[slot - 1]
        }
    }

    pub fn is_day_constant(&self) -> bool {
        self.params.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToUTariff {
    pub normal_rate: f64,
    pub peak_rate: f64,
    pub calendar: PeriodCalendar,
}

impl ToUTariff {
    pub fn new(normal_rate: f64, peak_rate: f64, calendar: PeriodCalendar) -> Result<Self> {
        let t = ToUTariff {
            normal_rate,
            peak_rate,
            calendar,
        };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.normal_rate.is_finite() && self.peak_rate.is_finite();
        if !ok || !(self.normal_rate > 0.0) || !(self.peak_rate >= self.normal_rate) {
            return Err(Error::Tariff(format!(
                "time-of-use needs 0 < normal_rate <= peak_rate; got {} and {}",
                self.normal_rate, self.peak_rate
            )));
        }
        Ok(())
    }

    pub fn rate_at(&self, slot: Slot) -> f64 {
        if self.calendar.is_peak(slot) {
            self.peak_rate
        } else {
            self.normal_rate
        }
    }
}

pub fn tou_slot_cost(tariff: &ToUTariff, slot: Slot, energy: f64) -> Result<f64> {
    if slot == 0 || slot > tariff.calendar.slot_count() {
        return Err(Error::SlotOutOfRange {
            slot,
            slot_count: tariff.calendar.slot_count(),
        });
    }
    if !(energy >= 0.0) {
        return Err(Error::NegativeEnergy(energy));
    }
    Ok(tariff.rate_at(slot) * energy)
}

/// Two-step inclining block rate on per-slot energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTariff {
    pub threshold: f64,
    pub low_rate: f64,
    pub high_rate: f64,
}

impl StepTariff {
    pub fn new(threshold: f64, low_rate: f64, high_rate: f64) -> Result<Self> {
        let t = StepTariff {
            threshold,
            low_rate,
            high_rate,
        };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let ok =
            self.threshold.is_finite() && self.low_rate.is_finite() && self.high_rate.is_finite();
        if !ok
            || !(self.threshold > 0.0)
            || !(self.low_rate > 0.0)
            || !(self.high_rate >= self.low_rate)
        {
            return Err(Error::Tariff(format!(
                "step tariff needs threshold > 0 and 0 < low_rate <= high_rate; got {}, {}, {}",
                self.threshold, self.low_rate, self.high_rate
            )));
        }
        Ok(())
    }
}

pub fn step_slot_cost(tariff: &StepTariff, energy: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(Error::NegativeEnergy(energy));
    }
    Ok(step_cost_unchecked(tariff, energy))
}

#[inline]
fn step_cost_unchecked(t: &StepTariff, energy: f64) -> f64 {
    if energy <= t.threshold {
        t.low_rate * energy
    } else {
        t.low_rate * t.threshold + t.high_rate * (energy - t.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tariff {
    Quadratic(QuadraticTariff),
    Step(StepTariff),
    TimeOfUse(ToUTariff),
    Aclps(AclpsConfig),
}

impl Tariff {
    pub fn check(&self) -> Result<()> {
        match self {
            Tariff::Quadratic(q) => q.params.iter().try_for_each(QuadraticParams::check),
            Tariff::Step(s) => s.check(),
            Tariff::TimeOfUse(t) => t.check(),
            Tariff::Aclps(c) => c.check(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Tariff::Quadratic(_) => "quadratic",
            Tariff::Step(_) => "step",
            Tariff::TimeOfUse(_) => "tou",
            Tariff::Aclps(_) => "aclps",
        }
    }

    pub fn as_aclps(&self) -> Option<&AclpsConfig> {
        match self {
            Tariff::Aclps(c) => Some(c),
            _ => None,
        }
    }

    /// Runs the billing pass, handing `(slot, cost, level)` to `sink` for
    /// every slot in order. `level` is `Some` only for consumption-level
    /// pricing. Returns the final hysteresis state when there is one.
    pub(crate) fn bill_pass<F>(
        &self,
        profile: &LoadProfile,
        grid: &TimeGrid,
        mut sink: F,
    ) -> Option<PibState>
    where
        F: FnMut(Slot, f64, Option<f64>),
    {
        let h = grid.slot_hours();
        let demand = profile.demand();
        match self {
            Tariff::Quadratic(q) => {
                for (i, &d) in demand.iter().enumerate() {
                    let p = q.params_at(i + 1);
                    let e = d * h;
                    sink(i + 1, p.a * e * e + p.b * e + p.c, None);
                }
                None
            }
            Tariff::Step(s) => {
                for (i, &d) in demand.iter().enumerate() {
                    sink(i + 1, step_cost_unchecked(s, d * h), None);
                }
                None
            }
            Tariff::TimeOfUse(t) => {
                for (i, &d) in demand.iter().enumerate() {
                    sink(i + 1, t.rate_at(i + 1) * d * h, None);
                }
                None
            }
            Tariff::Aclps(c) => {
                let mut state = PibState::new(c, c.initial_index(profile.mean_kw()));
                for (i, &d) in demand.iter().enumerate() {
                    let level = state.level();
                    sink(
                        i + 1,
                        aclps::slot_cost_unchecked(c, level, d * h),
                        Some(level),
                    );
                    state.advance(c, i + 1, d);
                }
                Some(state)
            }
        }
    }

    /// Total daily cost without building the per-slot breakdown.
    pub fn daily_cost(&self, profile: &LoadProfile, grid: &TimeGrid) -> f64 {
        let mut total = 0.0;
        self.bill_pass(profile, grid, |_, c, _| total += c);
        total
    }
}

impl fmt::Display for Tariff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tariff::Quadratic(q) if q.is_day_constant() => {
                let p = q.params[0];
                write!(f, "quadratic a={} b={} c={}", p.a, p.b, p.c)
            }
            Tariff::Quadratic(_) => write!(f, "quadratic (per-slot coefficients)"),
            Tariff::Step(s) => write!(
                f,
                "two-step threshold={} kWh low={} high={}",
                s.threshold, s.low_rate, s.high_rate
            ),
            Tariff::TimeOfUse(t) => write!(
                f,
                "time-of-use normal={} peak={} ({} peak slots)",
                t.normal_rate,
                t.peak_rate,
                t.calendar.peak_slot_count()
            ),
            Tariff::Aclps(c) => write!(
                f,
                "consumption-level r=({}, {}, {}) ladder={}..{} step {} ca+={} ca-={}",
                c.r1,
                c.r2,
                c.r3,
                c.ladder.base,
                c.ladder.max_level,
                c.ladder.step,
                c.ca_plus,
                c.ca_minus
            ),
        }
    }
}

/// Per-slot levels and notifications from a consumption-level billing pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PibTrace {
    /// Level in force when each slot was billed; index 0 is slot 1.
    pub levels: Vec<f64>,
    pub events: Vec<PibEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bill {
    pub total: f64,
    pub per_slot: Vec<f64>,
    pub pib: Option<PibTrace>,
}

/// Bills `profile` slot by slot. The total is exactly the sum of slot costs.
/// For consumption-level pricing each slot is billed at the level in force
/// before that slot's consumption is observed.
pub fn daily_bill(tariff: &Tariff, profile: &LoadProfile, grid: &TimeGrid) -> Bill {
    let mut per_slot = Vec::with_capacity(profile.len());
    let mut levels = Vec::new();
    let state = tariff.bill_pass(profile, grid, |_, c, l| {
        per_slot.push(c);
        if let Some(l) = l {
            levels.push(l);
        }
    });
    Bill {
        total: per_slot.iter().sum(),
        per_slot,
        pib: state.map(|s| PibTrace {
            levels,
            events: s.into_events(),
        }),
    }
}

/// Scales `(r1, r2, r3)` so that billing `baseline` yields `target`.
pub fn calibrate_revenue(
    config: &AclpsConfig,
    baseline: &LoadProfile,
    grid: &TimeGrid,
    target: f64,
) -> Result<AclpsConfig> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::Calibration(format!(
            "target must be positive, got {target}"
        )));
    }
    let current = Tariff::Aclps(config.clone()).daily_cost(baseline, grid);
    if !(current > 0.0) {
        return Err(Error::Calibration("baseline bill is zero".into()));
    }
    let kappa = target / current;
    Ok(config.scaled(kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::default()
    }

    #[test]
    fn quad_examples() {
        assert_eq!(
            quad_slot_cost(
                &QuadraticParams {
                    a: 1.0,
                    b: 0.0,
                    c: 0.0
                },
                2.0
            )
            .unwrap(),
            4.0
        );
        assert_eq!(
            quad_slot_cost(
                &QuadraticParams {
                    a: 2.0,
                    b: 1.0,
                    c: 1.0
                },
                0.0
            )
            .unwrap(),
            1.0
        );
        assert_eq!(
            quad_slot_cost(
                &QuadraticParams {
                    a: 0.5,
                    b: 1.0,
                    c: 0.0
                },
                3.0
            )
            .unwrap(),
            7.5
        );
        assert!(quad_slot_cost(
            &QuadraticParams {
                a: 0.5,
                b: 1.0,
                c: 0.0
            },
            -1.0
        )
        .is_err());
        assert!(QuadraticParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn tou_examples() {
        let t = ToUTariff::new(45.54, 144.52, PeriodCalendar::standard(&grid())).unwrap();
        assert_eq!(tou_slot_cost(&t, 10, 0.0).unwrap(), 0.0);
        assert!((tou_slot_cost(&t, 10, 1.2 / 12.0).unwrap() - 4.554).abs() < 1e-12);
        assert!((tou_slot_cost(&t, 220, 0.1).unwrap() - 14.452).abs() < 1e-12);
        assert!(matches!(
            tou_slot_cost(&t, 289, 0.1),
            Err(Error::SlotOutOfRange { .. })
        ));
        assert!(matches!(
            tou_slot_cost(&t, 0, 0.1),
            Err(Error::SlotOutOfRange { .. })
        ));
        assert!(ToUTariff::new(50.0, 40.0, PeriodCalendar::standard(&grid())).is_err());
    }

    #[test]
    fn step_examples() {
        let t = StepTariff::new(1.0, 10.0, 20.0).unwrap();
        assert_eq!(step_slot_cost(&t, 0.0).unwrap(), 0.0);
        assert_eq!(step_slot_cost(&t, 1.0).unwrap(), 10.0);
        assert_eq!(step_slot_cost(&t, 1.5).unwrap(), 20.0);
        assert!(StepTariff::new(1.0, 20.0, 10.0).is_err());
        assert!(StepTariff::new(0.0, 10.0, 20.0).is_err());
    }

    #[test]
    fn zero_profile_bills_zero() {
        let g = grid();
        let z = LoadProfile::zeros(&g);
        let tariffs = [
            Tariff::Quadratic(
                QuadraticTariff::constant(QuadraticParams {
                    a: 1.0,
                    b: 2.0,
                    c: 0.0,
                })
                .unwrap(),
            ),
            Tariff::Step(StepTariff::new(0.1, 1.0, 2.0).unwrap()),
            Tariff::TimeOfUse(ToUTariff::new(45.54, 144.52, PeriodCalendar::standard(&g)).unwrap()),
            Tariff::Aclps(AclpsConfig::with_calendar(PeriodCalendar::standard(&g))),
        ];
        for t in &tariffs {
            let b = daily_bill(t, &z, &g);
            assert_eq!(b.total, 0.0, "{t}");
            assert_eq!(b.per_slot.len(), 288);
        }
    }

    #[test]
    fn constant_profile_tou_bill() {
        let g = grid();
        let t =
            Tariff::TimeOfUse(ToUTariff::new(45.54, 144.52, PeriodCalendar::standard(&g)).unwrap());
        let b = daily_bill(&t, &LoadProfile::constant(&g, 1.2), &g);
        assert!((b.total - 2261.76).abs() < 1e-9, "{}", b.total);
        assert!(b.pib.is_none());
    }

    #[test]
    fn aclps_bill_exposes_trace() {
        let g = grid();
        let cfg = AclpsConfig::with_calendar(PeriodCalendar::standard(&g));
        let mut d = vec![0.3; 288];
        for x in &mut d[100..110] {
            *x = 3.0;
        }
        let p = LoadProfile::from_kw(d).unwrap();
        let b = daily_bill(&Tariff::Aclps(cfg.clone()), &p, &g);
        let trace = b.pib.unwrap();
        assert_eq!(trace.levels.len(), 288);
        // slot 101 billed at the level held before its consumption is seen
        assert_eq!(trace.levels[100], trace.levels[99]);
        assert!(trace.levels[101] > trace.levels[100]);
        assert!(trace.events.windows(2).all(|w| w[0].slot < w[1].slot));
        let sum: f64 = b.per_slot.iter().sum();
        assert_eq!(b.total, sum);
        for (t, &l) in trace.levels.iter().enumerate() {
            let e = p.at(t + 1) / 12.0;
            assert!((b.per_slot[t] - aclps_slot_cost(&cfg, l, e).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn calibration_scales_rates() {
        let g = grid();
        let cfg = AclpsConfig::with_calendar(PeriodCalendar::standard(&g));
        let p = LoadProfile::constant(&g, 1.2);
        let bill = Tariff::Aclps(cfg.clone()).daily_cost(&p, &g);
        let half = calibrate_revenue(&cfg, &p, &g, bill / 2.0).unwrap();
        assert!((half.r1 - 0.5).abs() < 1e-12);
        let same = calibrate_revenue(&cfg, &p, &g, bill).unwrap();
        assert!((same.r1 - 1.0).abs() < 1e-12);
        assert!(matches!(
            calibrate_revenue(&cfg, &LoadProfile::zeros(&g), &g, 1.0),
            Err(Error::Calibration(_))
        ));
        assert!(calibrate_revenue(&cfg, &p, &g, 0.0).is_err());
    }
}
