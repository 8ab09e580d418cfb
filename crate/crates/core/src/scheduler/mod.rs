//! Start-slot optimization over a catalog of appliance runs.
//!
//! [`optimize`] runs coordinate descent: every shiftable run in catalog order
//! is moved to the start that minimizes the whole-day objective with all other
//! runs held in place, and sweeps repeat until nothing moves. [`brute_force`]
//! enumerates every combination of starts and serves as the oracle for small
//! instances.

mod random;
mod report;

pub use random::random_problem;
pub use report::{
    compare, display_pct, extended_consumption, reduction_pct, ExtendedConsumption, Reductions,
    ScheduleReport,
};

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    build_load_profile, peak_load, period_energy, total_energy_kwh, Appliance, LoadProfile,
    PeriodCalendar, Schedule, Slot, TimeGrid,
};
use crate::tariff::{daily_bill, Tariff};
use report::ExtendedAccumulator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    TotalCost,
    /// Minimize the extension factor, then total cost.
    ExtendedConsumption,
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub appliances: Vec<Appliance>,
    pub tariff: Tariff,
    pub grid: TimeGrid,
    pub objective: Objective,
    pub max_sweeps: usize,
    /// Largest joint start space for which two runs are re-placed together
    /// once single-run sweeps stall. Zero disables pair moves.
    pub pair_block_limit: u64,
    /// Calendar used for the peak/normal energy split in reports.
    pub calendar: PeriodCalendar,
}

impl Problem {
    /// A total-cost problem. The reporting calendar is the tariff's own when
    /// it has one, otherwise the standard two-peak day.
    pub fn new(appliances: Vec<Appliance>, tariff: Tariff, grid: TimeGrid) -> Self {
        let calendar = match &tariff {
            Tariff::TimeOfUse(t) => t.calendar.clone(),
            Tariff::Aclps(c) => c.calendar.clone(),
            _ => PeriodCalendar::standard(&grid),
        };
        Problem {
            appliances,
            tariff,
            grid,
            objective: Objective::TotalCost,
            max_sweeps: 100,
            pair_block_limit: DEFAULT_PAIR_BLOCK_LIMIT,
            calendar,
        }
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }

    pub fn baseline(&self) -> Schedule {
        Schedule::baseline(&self.appliances)
    }

    /// Feasible starts for every run, in catalog order. Non-shiftable runs get
    /// their baseline start only.
    pub fn feasible_starts(&self) -> Result<Vec<RunVar>> {
        let mut out = Vec::new();
        for (ai, a) in self.appliances.iter().enumerate() {
            for (ri, run) in a.runs.iter().enumerate() {
                let range = run
                    .feasible_starts(&self.grid)
                    .map_err(|msg| Error::Infeasible {
                        id: a.id.clone(),
                        run: ri + 1,
                        msg,
                    })?;
                let range = if a.is_shiftable() {
                    range
                } else {
                    run.baseline_start..=run.baseline_start
                };
                out.push(RunVar {
                    appliance: ai,
                    run: ri,
                    kw: a.power_kw(),
                    duration: run.duration_slots,
                    starts: range,
                });
            }
        }
        Ok(out)
    }
}

/// One run as a decision variable.
#[derive(Debug, Clone, PartialEq)]
pub struct RunVar {
    pub appliance: usize,
    pub run: usize,
    pub kw: f64,
    pub duration: usize,
    pub starts: RangeInclusive<Slot>,
}

impl RunVar {
    fn movable(&self) -> bool {
        self.starts.start() != self.starts.end()
    }

    fn count(&self) -> usize {
        self.starts.end() - self.starts.start() + 1
    }
}

/// Objective value compared lexicographically on `(primary, secondary)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub primary: f64,
    pub secondary: f64,
}

const REL_TOL: f64 = 1e-12;

fn tol(x: f64) -> f64 {
    REL_TOL * x.abs().max(1.0)
}

impl ObjectiveValue {
    /// Strictly better beyond floating-point noise.
    pub fn better_than(&self, other: &ObjectiveValue) -> bool {
        match cmp_tol(self.primary, other.primary) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => cmp_tol(self.secondary, other.secondary) == Ordering::Less,
        }
    }
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if a < b - tol(b) {
        Ordering::Less
    } else if a > b + tol(b) {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

fn objective_value(problem: &Problem, profile: &LoadProfile) -> Result<ObjectiveValue> {
    match (problem.objective, &problem.tariff) {
        (Objective::ExtendedConsumption, Tariff::Aclps(cfg)) => {
            let mut cost = 0.0;
            let mut acc = ExtendedAccumulator::default();
            let demand = profile.demand();
            problem.tariff.bill_pass(profile, &problem.grid, |t, c, l| {
                cost += c;
                acc.push(demand[t - 1], l.unwrap_or(0.0) + cfg.ca_plus);
            });
            let ext = acc.finish(&problem.grid)?;
            Ok(ObjectiveValue {
                primary: ext.extension_factor,
                secondary: cost,
            })
        }
        _ => Ok(ObjectiveValue {
            primary: problem.tariff.daily_cost(profile, &problem.grid),
            secondary: 0.0,
        }),
    }
}

/// Assembles the report for `schedule`.
pub fn evaluate(problem: &Problem, schedule: &Schedule) -> Result<ScheduleReport> {
    let grid = &problem.grid;
    let profile = build_load_profile(&problem.appliances, schedule, grid)?;
    report_for_profile(problem, &profile)
}

pub fn report_for_profile(problem: &Problem, profile: &LoadProfile) -> Result<ScheduleReport> {
    let grid = &problem.grid;
    let bill = daily_bill(&problem.tariff, profile, grid);
    let (peak_kw, peak_slot) = peak_load(profile);
    let (peak_period_kwh, normal_period_kwh) = period_energy(profile, &problem.calendar, grid);
    let (ext, pib_events) = match (&bill.pib, &problem.tariff) {
        (Some(trace), Tariff::Aclps(cfg)) => (
            extended_consumption(profile, &trace.levels, cfg.ca_plus, grid)?,
            trace.events.len(),
        ),
        _ => (
            ExtendedConsumption {
                desired_kwh: total_energy_kwh(profile, grid),
                extended_kwh: 0.0,
                extension_factor: 1.0,
            },
            0,
        ),
    };
    Ok(ScheduleReport {
        total_cost: bill.total,
        total_energy_kwh: total_energy_kwh(profile, grid),
        peak_kw,
        peak_slot,
        peak_period_kwh,
        normal_period_kwh,
        desired_cost: bill.total / ext.extension_factor,
        actual_cost: bill.total,
        extended_energy_kwh: ext.extended_kwh,
        extension_factor: ext.extension_factor,
        pib_events,
    })
}

fn schedule_from(problem: &Problem, vars: &[RunVar], starts: &[Slot]) -> Schedule {
    let mut s = Schedule::baseline(&problem.appliances);
    for (v, &st) in vars.iter().zip(starts) {
        let id = &problem.appliances[v.appliance].id;
        s.set(id, v.run, st);
    }
    s
}

fn profile_from(
    grid: &TimeGrid,
    vars: &[RunVar],
    starts: &[Slot],
    skip: Option<usize>,
) -> LoadProfile {
    let mut p = LoadProfile::zeros(grid);
    for (i, (v, &st)) in vars.iter().zip(starts).enumerate() {
        if Some(i) != skip {
            p.add_block(st, v.duration, v.kw);
        }
    }
    p
}

/// Result of a search.
#[derive(Debug, Clone)]
pub struct Solution {
    pub schedule: Schedule,
    pub report: ScheduleReport,
    pub objective: ObjectiveValue,
    /// Full sweeps performed (coordinate descent only).
    pub sweeps: usize,
    /// Objective after each sweep, starting with the initial schedule.
    pub trace: Vec<ObjectiveValue>,
}

/// Coordinate descent from the baseline schedule.
///
/// Each movable run is placed at the start with the best objective, ties
/// going to the earliest slot. When a full sweep moves nothing, pairs of runs
/// whose joint start space is at most [`Problem::pair_block_limit`] are
/// re-placed jointly; any strict improvement there starts a new sweep. Stops
/// at a fixed point or after `max_sweeps` sweeps.
pub fn optimize(problem: &Problem) -> Result<Solution> {
    let vars = problem.feasible_starts()?;
    let grid = &problem.grid;
    let mut starts: Vec<Slot> = vars
        .iter()
        .map(|v| problem.appliances[v.appliance].runs[v.run].baseline_start)
        .collect();

    let mut current = objective_value(problem, &profile_from(grid, &vars, &starts, None))?;
    let mut trace = vec![current];
    let mut sweeps = 0;
    while sweeps < problem.max_sweeps {
        sweeps += 1;
        let mut moved = false;
        for (i, var) in vars.iter().enumerate() {
            if !var.movable() {
                continue;
            }
            let others = profile_from(grid, &vars, &starts, Some(i));
            let candidates: Vec<Slot> = var.starts.clone().collect();
            let scores: Vec<Result<ObjectiveValue>> = candidates
                .par_iter()
                .map(|&s| {
                    let mut p = others.clone();
                    p.add_block(s, var.duration, var.kw);
                    objective_value(problem, &p)
                })
                .collect();
            let (s, v) = pick_best(candidates.into_iter().zip(scores))?;
            if s != starts[i] {
                starts[i] = s;
                moved = true;
            }
            current = v;
        }
        if !moved {
            if let Some(v) = improve_pair(problem, &vars, &mut starts, &current)? {
                current = v;
                moved = true;
            }
        }
        trace.push(current);
        if !moved {
            break;
        }
    }

    let schedule = schedule_from(problem, &vars, &starts);
    let report = evaluate(problem, &schedule)?;
    Ok(Solution {
        schedule,
        report,
        objective: current,
        sweeps,
        trace,
    })
}

/// First candidate in iteration order among those with the best value.
fn pick_best<K>(
    candidates: impl IntoIterator<Item = (K, Result<ObjectiveValue>)>,
) -> Result<(K, ObjectiveValue)> {
    let mut best: Option<(K, ObjectiveValue)> = None;
    for (k, v) in candidates {
        let v = v?;
        if best.as_ref().is_none_or(|(_, b)| v.better_than(b)) {
            best = Some((k, v));
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Joint re-placement of the first pair of runs (in catalog order) that
/// strictly improves on `current`.
fn improve_pair(
    problem: &Problem,
    vars: &[RunVar],
    starts: &mut [Slot],
    current: &ObjectiveValue,
) -> Result<Option<ObjectiveValue>> {
    let grid = &problem.grid;
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let (vi, vj) = (&vars[i], &vars[j]);
            if !vi.movable()
                || !vj.movable()
                || (vi.count() * vj.count()) as u64 > problem.pair_block_limit
            {
                continue;
            }
            let mut base = LoadProfile::zeros(grid);
            for (k, (v, &s)) in vars.iter().zip(starts.iter()).enumerate() {
                if k != i && k != j {
                    base.add_block(s, v.duration, v.kw);
                }
            }
            let candidates: Vec<(Slot, Slot)> = vi
                .starts
                .clone()
                .flat_map(|a| vj.starts.clone().map(move |b| (a, b)))
                .collect();
            let scores: Vec<Result<ObjectiveValue>> = candidates
                .par_iter()
                .map(|&(a, b)| {
                    let mut p = base.clone();
                    p.add_block(a, vi.duration, vi.kw);
                    p.add_block(b, vj.duration, vj.kw);
                    objective_value(problem, &p)
                })
                .collect();
            let ((a, b), v) = pick_best(candidates.into_iter().zip(scores))?;
            if v.better_than(current) {
                starts[i] = a;
                starts[j] = b;
                return Ok(Some(v));
            }
        }
    }
    Ok(None)
}

pub const DEFAULT_PAIR_BLOCK_LIMIT: u64 = 4096;

pub const DEFAULT_SIZE_GUARD: u128 = 10_000_000;

/// Exhaustive search. Candidates are visited in lexicographic order of
/// (catalog run order, start slot) and only strictly better ones replace the
/// incumbent.
pub fn brute_force(problem: &Problem, size_guard: u128) -> Result<Solution> {
    let vars = problem.feasible_starts()?;
    let size = vars
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.count() as u128))
        .unwrap_or(u128::MAX);
    if size > size_guard {
        return Err(Error::SizeGuard {
            size,
            guard: size_guard,
        });
    }
    let grid = &problem.grid;
    let mut starts: Vec<Slot> = vars.iter().map(|v| *v.starts.start()).collect();
    let mut best: Option<(Vec<Slot>, ObjectiveValue)> = None;
    loop {
        // built from scratch so the oracle shares no incremental state with optimize
        let mut profile = LoadProfile::zeros(grid);
        for (v, &s) in vars.iter().zip(&starts) {
            profile.add_block(s, v.duration, v.kw);
        }
        let value = objective_value(problem, &profile)?;
        if best.as_ref().is_none_or(|(_, b)| value.better_than(b)) {
            best = Some((starts.clone(), value));
        }
        // odometer: the last run varies fastest
        let mut i = vars.len();
        loop {
            if i == 0 {
                let (starts, objective) = best.expect("at least one candidate");
                let schedule = schedule_from(problem, &vars, &starts);
                let report = evaluate(problem, &schedule)?;
                return Ok(Solution {
                    schedule,
                    report,
                    objective,
                    sweeps: 0,
                    trace: vec![objective],
                });
            }
            i -= 1;
            if starts[i] < *vars[i].starts.end() {
                starts[i] += 1;
                break;
            }
            starts[i] = *vars[i].starts.start();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LoadClass, RunSpec};
    use crate::tariff::{AclpsConfig, ToUTariff};

    fn grid() -> TimeGrid {
        TimeGrid::default()
    }

    fn tou() -> Tariff {
        Tariff::TimeOfUse(ToUTariff::new(45.54, 144.52, PeriodCalendar::standard(&grid())).unwrap())
    }

    fn app(id: &str, w: f64, class: LoadClass, run: RunSpec) -> Appliance {
        Appliance::new(&grid(), id, id, w, class, vec![run]).unwrap()
    }

    #[test]
    fn single_run_goes_to_earliest_cheap_block() {
        // window 80..=140 covers normal 80-84, peak 85-132, normal 133-140
        let a = app(
            "dw",
            1200.0,
            LoadClass::CommonShiftable,
            RunSpec {
                duration_slots: 4,
                baseline_start: 100,
                allowed_start_min: 80,
                allowed_start_max: 137,
            },
        );
        let p = Problem::new(vec![a], tou(), grid());
        let sol = optimize(&p).unwrap();
        // 80..=83 would poke into peak at 84? no: 80-83 all normal, start 80 is earliest
        assert_eq!(sol.schedule.starts("dw").unwrap(), &[80]);
        assert_eq!(sol.report.peak_period_kwh, 0.0);
    }

    #[test]
    fn single_run_avoids_straddling() {
        let a = app(
            "dw",
            1200.0,
            LoadClass::CommonShiftable,
            RunSpec {
                duration_slots: 6,
                baseline_start: 100,
                allowed_start_min: 82,
                allowed_start_max: 137,
            },
        );
        let p = Problem::new(vec![a], tou(), grid());
        let sol = optimize(&p).unwrap();
        assert_eq!(sol.schedule.starts("dw").unwrap(), &[133]);
    }

    #[test]
    fn zero_appliance_problem() {
        let p = Problem::new(vec![], tou(), grid());
        let r = evaluate(&p, &Schedule::default()).unwrap();
        assert_eq!(
            r,
            ScheduleReport {
                peak_slot: 1,
                ..ScheduleReport::zero()
            }
        );
        let sol = optimize(&p).unwrap();
        assert_eq!(sol.report.total_cost, 0.0);
    }

    #[test]
    fn non_shiftable_never_moves() {
        let tv = app(
            "tv",
            100.0,
            LoadClass::CommonNonshiftable,
            RunSpec::fixed(48, 217),
        );
        let p = Problem::new(vec![tv], tou(), grid());
        let sol = optimize(&p).unwrap();
        assert_eq!(sol.schedule, p.baseline());
    }

    #[test]
    fn infeasible_window_names_the_run() {
        let bad = Appliance {
            id: "dw".into(),
            name: "Dishwasher".into(),
            power_rate_watts: 1200.0,
            load_class: LoadClass::CommonShiftable,
            runs: vec![RunSpec {
                duration_slots: 31,
                baseline_start: 215,
                allowed_start_min: 270,
                allowed_start_max: 288,
            }],
        };
        let p = Problem::new(vec![bad], tou(), grid());
        match optimize(&p) {
            Err(Error::Infeasible { id, run, .. }) => {
                assert_eq!(id, "dw");
                assert_eq!(run, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn brute_force_single_candidate() {
        let a = app(
            "k",
            1800.0,
            LoadClass::CommonShiftable,
            RunSpec::fixed(2, 10),
        );
        let p = Problem::new(vec![a], tou(), grid());
        let sol = brute_force(&p, DEFAULT_SIZE_GUARD).unwrap();
        assert_eq!(sol.schedule.starts("k").unwrap(), &[10]);
    }

    #[test]
    fn brute_force_symmetric_pair() {
        let r = RunSpec {
            duration_slots: 2,
            baseline_start: 10,
            allowed_start_min: 10,
            allowed_start_max: 14,
        };
        let p = Problem::new(
            vec![
                app("a", 1000.0, LoadClass::CommonShiftable, r),
                app("b", 1000.0, LoadClass::CommonShiftable, r),
            ],
            Tariff::Aclps(AclpsConfig::with_calendar(
                PeriodCalendar::standard(&grid()),
            )),
            grid(),
        );
        let sol = brute_force(&p, DEFAULT_SIZE_GUARD).unwrap();
        let (sa, sb) = (
            sol.schedule.starts("a").unwrap()[0],
            sol.schedule.starts("b").unwrap()[0],
        );
        let mut swapped = sol.schedule.clone();
        swapped.set("a", 0, sb);
        swapped.set("b", 0, sa);
        let c_swapped = evaluate(&p, &swapped).unwrap().total_cost;
        assert!((c_swapped - sol.report.total_cost).abs() < 1e-12);
        // lexicographic winner: a is placed no later than b
        assert!(sa <= sb);
    }

    #[test]
    fn size_guard() {
        let r = RunSpec {
            duration_slots: 1,
            baseline_start: 1,
            allowed_start_min: 1,
            allowed_start_max: 288,
        };
        let apps: Vec<_> = (0..3)
            .map(|i| app(&format!("a{i}"), 100.0, LoadClass::CommonShiftable, r))
            .collect();
        let p = Problem::new(apps, tou(), grid());
        assert!(matches!(
            brute_force(&p, 1000),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn sweeps_are_monotone() {
        for seed in 0..20 {
            let p = random_problem(seed);
            let sol = optimize(&p).unwrap();
            for w in sol.trace.windows(2) {
                assert!(!w[0].better_than(&w[1]), "seed {seed}: {:?}", sol.trace);
            }
        }
    }

    #[test]
    fn objective_value_ordering() {
        let a = ObjectiveValue {
            primary: 1.0,
            secondary: 5.0,
        };
        let b = ObjectiveValue {
            primary: 1.0 + 1e-14,
            secondary: 4.0,
        };
        assert!(b.better_than(&a));
        assert!(!a.better_than(&a));
        let c = ObjectiveValue {
            primary: 0.9,
            secondary: 100.0,
        };
        assert!(c.better_than(&b));
    }
}
