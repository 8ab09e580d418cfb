use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::timegrid::{Slot, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoadClass {
    CommonNonshiftable,
    SelectiveNonshiftable,
    CommonShiftable,
    SelectiveShiftable,
}

impl LoadClass {
    pub fn is_shiftable(self) -> bool {
        matches!(
            self,
            LoadClass::CommonShiftable | LoadClass::SelectiveShiftable
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LoadClass::CommonNonshiftable => "common-nonshiftable",
            LoadClass::SelectiveNonshiftable => "selective-nonshiftable",
            LoadClass::CommonShiftable => "common-shiftable",
            LoadClass::SelectiveShiftable => "selective-shiftable",
        }
    }
}

impl FromStr for LoadClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "common-nonshiftable" => Ok(LoadClass::CommonNonshiftable),
            "selective-nonshiftable" => Ok(LoadClass::SelectiveNonshiftable),
            "common-shiftable" => Ok(LoadClass::CommonShiftable),
            "selective-shiftable" => Ok(LoadClass::SelectiveShiftable),
            other => Err(format!("unknown load class `{other}`")),
        }
    }
}

impl fmt::Display for LoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One contiguous, non-preemptible run of an appliance.
///
/// `allowed_start_min..=allowed_start_max` bounds the start slot. Whether that
/// range actually admits a start that fits in the day is checked by
/// [`RunSpec::feasible_starts`], so that catalogs with unsatisfiable windows
/// can be loaded and reported as infeasible rather than malformed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub duration_slots: usize,
    pub baseline_start: Slot,
    pub allowed_start_min: Slot,
    pub allowed_start_max: Slot,
}

impl RunSpec {
    /// A run pinned to its baseline placement.
    pub fn fixed(duration_slots: usize, baseline_start: Slot) -> Self {
        RunSpec {
            duration_slots,
            baseline_start,
            allowed_start_min: baseline_start,
            allowed_start_max: baseline_start,
        }
    }

    /// A run that may start anywhere it fits in the day.
    pub fn full_day(grid: &TimeGrid, duration_slots: usize, baseline_start: Slot) -> Self {
        RunSpec {
            duration_slots,
            baseline_start,
            allowed_start_min: 1,
            allowed_start_max: (grid.slot_count() + 1)
                .saturating_sub(duration_slots)
                .max(1),
        }
    }

    /// A run that must lie entirely inside `[window_start, window_end]`.
    pub fn within_window(
        duration_slots: usize,
        baseline_start: Slot,
        window_start: Slot,
        window_end: Slot,
    ) -> Self {
        RunSpec {
            duration_slots,
            baseline_start,
            allowed_start_min: window_start,
            allowed_start_max: (window_end + 1).saturating_sub(duration_slots),
        }
    }

    pub fn baseline_end(&self) -> Slot {
        self.baseline_start + self.duration_slots - 1
    }

    pub fn end_for(&self, start: Slot) -> Slot {
        start + self.duration_slots - 1
    }

    pub fn is_fixed(&self) -> bool {
        self.allowed_start_min == self.allowed_start_max
    }

    /// Checks duration and baseline placement against the grid.
    pub fn check_shape(&self, grid: &TimeGrid) -> std::result::Result<(), String> {
        if self.duration_slots == 0 {
            return Err("duration must be at least one slot".into());
        }
        if self.baseline_start == 0 || self.baseline_end() > grid.slot_count() {
            return Err(format!(
                "baseline run {}-{} does not fit in 1..={}",
                self.baseline_start,
                self.baseline_end(),
                grid.slot_count()
            ));
        }
        Ok(())
    }

    /// The non-empty range of start slots that satisfy the allowed window and
    /// keep the run inside the day.
    pub fn feasible_starts(
        &self,
        grid: &TimeGrid,
    ) -> std::result::Result<std::ops::RangeInclusive<Slot>, String> {
        if self.duration_slots == 0 || self.duration_slots > grid.slot_count() {
            return Err(format!(
                "duration {} does not fit in a day",
                self.duration_slots
            ));
        }
        let lo = self.allowed_start_min.max(1);
        let hi = self
            .allowed_start_max
            .min(grid.slot_count() + 1 - self.duration_slots);
        if lo > hi {
            return Err(format!(
                "no start in {}..={} fits a {}-slot run",
                self.allowed_start_min, self.allowed_start_max, self.duration_slots
            ));
        }
        if !(lo..=hi).contains(&self.baseline_start) {
            return Err(format!(
                "baseline start {} outside feasible starts {lo}..={hi}",
                self.baseline_start
            ));
        }
        Ok(lo..=hi)
    }

    pub fn admits(&self, grid: &TimeGrid, start: Slot) -> bool {
        start >= self.allowed_start_min
            && start <= self.allowed_start_max
            && start >= 1
            && start + self.duration_slots - 1 <= grid.slot_count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appliance {
    pub id: String,
    pub name: String,
    pub power_rate_watts: f64,
    pub load_class: LoadClass,
    pub runs: Vec<RunSpec>,
}

impl Appliance {
    pub fn new(
        grid: &TimeGrid,
        id: impl Into<String>,
        name: impl Into<String>,
        power_rate_watts: f64,
        load_class: LoadClass,
        runs: Vec<RunSpec>,
    ) -> Result<Self> {
        let a = Appliance {
            id: id.into(),
            name: name.into(),
            power_rate_watts,
            load_class,
            runs,
        };
        a.check(grid)?;
        Ok(a)
    }

    pub fn check(&self, grid: &TimeGrid) -> Result<()> {
        let err = |msg: String| Error::Appliance {
            id: self.id.clone(),
            msg,
        };
        if self.id.trim().is_empty() {
            return Err(err("empty id".into()));
        }
        if !(self.power_rate_watts.is_finite() && self.power_rate_watts > 0.0) {
            return Err(err(format!(
                "power rate must be positive, got {}",
                self.power_rate_watts
            )));
        }
        if self.runs.is_empty() {
            return Err(err("needs at least one run".into()));
        }
        for (i, run) in self.runs.iter().enumerate() {
            run.check_shape(grid)
                .map_err(|m| err(format!("run {}: {m}", i + 1)))?;
            if !self.load_class.is_shiftable() && !run.is_fixed_at_baseline() {
                return Err(err(format!(
                    "run {}: {} load must keep its baseline window",
                    i + 1,
                    self.load_class
                )));
            }
        }
        Ok(())
    }

    pub fn power_kw(&self) -> f64 {
        self.power_rate_watts / 1000.0
    }

    pub fn is_shiftable(&self) -> bool {
        self.load_class.is_shiftable()
    }
}

impl RunSpec {
    fn is_fixed_at_baseline(&self) -> bool {
        self.allowed_start_min == self.baseline_start
            && self.allowed_start_max == self.baseline_start
    }
}

/// Start slots per appliance, positionally matched to its runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: BTreeMap<String, Vec<Slot>>,
}

impl Schedule {
    pub fn baseline(appliances: &[Appliance]) -> Self {
        Schedule {
            assignments: appliances
                .iter()
                .map(|a| {
                    (
                        a.id.clone(),
                        a.runs.iter().map(|r| r.baseline_start).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn starts(&self, id: &str) -> Option<&[Slot]> {
        self.assignments.get(id).map(Vec::as_slice)
    }

    pub fn set(&mut self, id: &str, run: usize, start: Slot) {
        if let Some(v) = self.assignments.get_mut(id) {
            v[run] = start;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    MissingRun {
        id: String,
        run: usize,
    },
    ExtraRun {
        id: String,
        run: usize,
    },
    OutOfWindow {
        id: String,
        run: usize,
        start: Slot,
        min: Slot,
        max: Slot,
    },
    PastEndOfDay {
        id: String,
        run: usize,
        end: Slot,
    },
    UnknownAppliance {
        id: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRun { id, run } => write!(f, "`{id}` run {run} has no start"),
            Violation::ExtraRun { id, run } => write!(f, "`{id}` has no run {run}"),
            Violation::OutOfWindow {
                id,
                run,
                start,
                min,
                max,
            } => write!(
                f,
                "`{id}` run {run} starts at {start}, outside {min}..={max}"
            ),
            Violation::PastEndOfDay { id, run, end } => {
                write!(
                    f,
                    "`{id}` run {run} ends at slot {end}, past the end of the day"
                )
            }
            Violation::UnknownAppliance { id } => write!(f, "`{id}` is not in the catalog"),
        }
    }
}

/// Every way `schedule` fails to match `appliances`. Run numbers are 1-based.
pub fn validate(grid: &TimeGrid, appliances: &[Appliance], schedule: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in appliances {
        let starts = schedule.starts(&a.id).unwrap_or(&[]);
        for (i, run) in a.runs.iter().enumerate() {
            let Some(&start) = starts.get(i) else {
                out.push(Violation::MissingRun {
                    id: a.id.clone(),
                    run: i + 1,
                });
                continue;
            };
            if start < run.allowed_start_min || start > run.allowed_start_max || start == 0 {
                out.push(Violation::OutOfWindow {
                    id: a.id.clone(),
                    run: i + 1,
                    start,
                    min: run.allowed_start_min,
                    max: run.allowed_start_max,
                });
            } else if run.end_for(start) > grid.slot_count() {
                out.push(Violation::PastEndOfDay {
                    id: a.id.clone(),
                    run: i + 1,
                    end: run.end_for(start),
                });
            }
        }
        for extra in a.runs.len()..starts.len() {
            out.push(Violation::ExtraRun {
                id: a.id.clone(),
                run: extra + 1,
            });
        }
    }
    for id in schedule.assignments.keys() {
        if !appliances.iter().any(|a| &a.id == id) {
            out.push(Violation::UnknownAppliance { id: id.clone() });
        }
    }
    out
}
