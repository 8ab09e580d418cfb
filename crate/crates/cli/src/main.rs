use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loadsched::io::{
    bundled_catalog, export_profile, load_catalog, load_tariff_config, read_report,
    reference_schedule, write_report, write_tariff_config, ReportDocument,
};
use loadsched::model::{build_load_profile, validate, Appliance, Schedule, TimeGrid};
use loadsched::scheduler::{
    brute_force, compare, display_pct, evaluate, optimize, random_problem, Objective, Problem,
    DEFAULT_SIZE_GUARD,
};
use loadsched::tariff::{calibrate_revenue, Tariff};
use loadsched::Error;

const FORMATS: &str = "\
FILE FORMATS

Catalog (CSV, one run per row, header optional, `#` starts a comment line):
  id,name,power_rate_watts,load_class,duration_slots,baseline_start,baseline_end,allowed_start_min,allowed_start_max
  tv,TV,100,common-nonshiftable,48,217,264
  dishwasher,Dishwasher,1200,common-shiftable,31,215,245,1,258
  load_class is one of common-nonshiftable, selective-nonshiftable,
  common-shiftable, selective-shiftable. Slots are 1..=288, slot t covering
  the five minutes ending at t*5 minutes. The two allowed_* columns may be
  omitted or left as `-`: shiftable runs may then start anywhere they fit,
  non-shiftable runs stay at their baseline. Rows sharing an id are runs of
  one appliance, in file order. Without --catalog the bundled 26-appliance
  household is used.

Tariff (TOML, flat keys, `kind` selects the rest):
  kind = \"tou\"        normal_rate, peak_rate, peak
  kind = \"quadratic\"  a, b, c             (cost a*e^2 + b*e + c per slot, e in kWh)
  kind = \"step\"       threshold, low_rate, high_rate   (threshold in kWh per slot)
  kind = \"aclps\"      r1, r2, r3, ladder_base, ladder_step, ladder_max,
                      ca_plus, ca_minus, peak, initial_level
  peak is a list of clock ranges, default \"07:00-11:00,18:00-22:00\".
  aclps defaults: r = (1, 0, 0), ladder 0.02..11.0 step 0.07, ca_plus and
  ca_minus equal to the ladder step, initial level snapped from mean demand.

Report (JSON): scenario, tariff, baseline and optional optimized figures
  (total_cost, total_energy_kwh, peak_kw, peak_slot, peak_period_kwh,
  normal_period_kwh, desired_cost, actual_cost, extended_energy_kwh,
  extension_factor, pib_events), reductions (cost_reduction_pct,
  peak_reduction_pct) and runs (id, name, run, baseline_start, baseline_end,
  start, end).

Profile (CSV): slot,clock,<column>... with one kW column per profile and the
  clock label giving the slot end time (00:05 .. 24:00), four decimals.

EXIT STATUS
  0 success, 1 input or validation error, 2 a run has no feasible start.
  Outputs are written atomically and only on success.";

#[derive(Parser)]
#[command(name = "loadsched", version, about = "Household appliance load scheduling under dynamic tariffs", after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bill a schedule and write a report.
    Evaluate {
        #[command(flatten)]
        input: Input,
        /// Take run placements from the `runs` of this report instead of the baseline.
        #[arg(long, value_name = "REPORT", conflicts_with = "reference_placements")]
        placements: Option<PathBuf>,
        /// Use the bundled catalog's reference placements.
        #[arg(long)]
        reference_placements: bool,
        #[arg(long, default_value = "household")]
        scenario: String,
        /// Report file to write (JSON).
        #[arg(long, value_name = "REPORT")]
        out: PathBuf,
    },
    /// Reschedule shiftable runs to minimize the objective and write a report.
    Optimize {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        search: Search,
        #[arg(long, default_value = "household")]
        scenario: String,
        /// Report file to write (JSON).
        #[arg(long, value_name = "REPORT")]
        out: PathBuf,
    },
    /// Scale a consumption-level tariff so the baseline bill hits a target, writing a new config.
    Calibrate {
        #[arg(long, value_name = "CSV")]
        catalog: Option<PathBuf>,
        /// Consumption-level tariff to scale (TOML, kind = "aclps").
        #[arg(long, value_name = "TOML")]
        tariff: PathBuf,
        /// Target baseline bill.
        #[arg(
            long,
            required_unless_present = "match_tariff",
            conflicts_with = "match_tariff"
        )]
        target: Option<f64>,
        /// Take the target from the baseline bill under this tariff.
        #[arg(long, value_name = "TOML")]
        match_tariff: Option<PathBuf>,
        /// Tariff config to write (TOML).
        #[arg(long, value_name = "TOML")]
        out: PathBuf,
    },
    /// Reductions of a candidate report's final figures against a reference report's baseline.
    Compare {
        /// Report whose baseline is the reference.
        #[arg(long, value_name = "REPORT")]
        reference: PathBuf,
        /// Report whose optimized figures (or baseline, if none) are compared.
        #[arg(long, value_name = "REPORT")]
        candidate: PathBuf,
        #[arg(long, default_value = "comparison")]
        scenario: String,
        /// Optional combined report to write (JSON).
        #[arg(long, value_name = "REPORT")]
        out: Option<PathBuf>,
    },
    /// Write per-slot baseline demand, plus the optimized demand when a tariff is given.
    ExportProfile {
        #[arg(long, value_name = "CSV")]
        catalog: Option<PathBuf>,
        #[arg(long, value_name = "TOML")]
        tariff: Option<PathBuf>,
        #[command(flatten)]
        search: Search,
        /// Profile file to write (CSV).
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Check the optimizer against exhaustive search on seeded random instances.
    SelfTest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
    },
}

#[derive(Args)]
struct Input {
    /// Appliance catalog (CSV); defaults to the bundled household.
    #[arg(long, value_name = "CSV")]
    catalog: Option<PathBuf>,
    /// Tariff config (TOML).
    #[arg(long, value_name = "TOML")]
    tariff: PathBuf,
}

#[derive(Args)]
struct Search {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::TotalCost)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    max_sweeps: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    /// Daily bill.
    TotalCost,
    /// Extension factor, then daily bill.
    ExtendedConsumption,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::TotalCost => Objective::TotalCost,
            ObjectiveArg::ExtendedConsumption => Objective::ExtendedConsumption,
        }
    }
}

enum Failure {
    Input(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_infeasibility() {
            Failure::Infeasible(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn with_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::from(e).map(|m| format!("{}: {m}", path.display()))
}

impl Failure {
    fn map(self, f: impl FnOnce(String) -> String) -> Self {
        match self {
            Failure::Input(m) => Failure::Input(f(m)),
            Failure::Infeasible(m) => Failure::Infeasible(f(m)),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn catalog(path: &Option<PathBuf>, grid: &TimeGrid) -> Result<Vec<Appliance>, Failure> {
    match path {
        Some(p) => load_catalog(p, grid).map_err(with_path(p)),
        None => Ok(bundled_catalog(grid)),
    }
}

fn tariff(path: &Path, grid: &TimeGrid) -> Result<Tariff, Failure> {
    load_tariff_config(path, grid).map_err(with_path(path))
}

fn problem(input: &Input, grid: TimeGrid) -> Result<Problem, Failure> {
    let appliances = catalog(&input.catalog, &grid)?;
    let tariff = tariff(&input.tariff, &grid)?;
    Ok(Problem::new(appliances, tariff, grid))
}

fn placements_from(doc: &ReportDocument, appliances: &[Appliance]) -> Result<Schedule, Failure> {
    let mut s = Schedule::baseline(appliances);
    for r in &doc.runs {
        if r.run == 0 || s.starts(&r.id).is_none_or(|st| st.len() < r.run) {
            return Err(Failure::Input(format!(
                "report run {} of `{}` is not in the catalog",
                r.run, r.id
            )));
        }
        s.set(&r.id, r.run - 1, r.start);
    }
    Ok(s)
}

fn run(cli: Cli) -> Outcome {
    let grid = TimeGrid::default();
    match cli.command {
        Command::Evaluate {
            input,
            placements,
            reference_placements,
            scenario,
            out,
        } => {
            let p = problem(&input, grid)?;
            let schedule = if let Some(path) = &placements {
                placements_from(&read_report(path).map_err(with_path(path))?, &p.appliances)?
            } else if reference_placements {
                reference_schedule(&p.appliances)?
            } else {
                p.baseline()
            };
            let violations = validate(&p.grid, &p.appliances, &schedule);
            if !violations.is_empty() {
                return Err(Error::InvalidSchedule(violations).into());
            }
            let report = evaluate(&p, &schedule)?;
            let doc = ReportDocument::new(
                scenario,
                p.tariff.to_string(),
                &p.appliances,
                &schedule,
                report.clone(),
                None,
            )?;
            write_report(&doc, &out).map_err(with_path(&out))?;
            println!(
                "total_cost={:.4} total_energy_kwh={:.4} peak_kw={:.4} peak_period_kwh={:.4} normal_period_kwh={:.4}",
                report.total_cost,
                report.total_energy_kwh,
                report.peak_kw,
                report.peak_period_kwh,
                report.normal_period_kwh
            );
        }
        Command::Optimize {
            input,
            search,
            scenario,
            out,
        } => {
            let p = problem(&input, grid)?
                .with_objective(search.objective.into())
                .with_max_sweeps(search.max_sweeps as usize);
            let sol = optimize(&p)?;
            let baseline = evaluate(&p, &p.baseline())?;
            let doc = ReportDocument::new(
                scenario,
                p.tariff.to_string(),
                &p.appliances,
                &sol.schedule,
                baseline,
                Some(sol.report),
            )?;
            let red = doc.reductions.expect("optimized document has reductions");
            write_report(&doc, &out).map_err(with_path(&out))?;
            println!(
                "cost_reduction_pct={:.4} ({}%) peak_reduction_pct={:.4} ({}%) sweeps={}",
                red.cost_reduction_pct,
                display_pct(red.cost_reduction_pct),
                red.peak_reduction_pct,
                display_pct(red.peak_reduction_pct),
                sol.sweeps
            );
        }
        Command::Calibrate {
            catalog: cat,
            tariff: tariff_path,
            target,
            match_tariff,
            out,
        } => {
            let appliances = catalog(&cat, &grid)?;
            let t = tariff(&tariff_path, &grid)?;
            let Some(config) = t.as_aclps() else {
                return Err(Failure::Input(format!(
                    "{}: calibration needs a consumption-level tariff (kind = \"aclps\"), found `{}`",
                    tariff_path.display(),
                    t.kind()
                )));
            };
            let profile = build_load_profile(&appliances, &Schedule::baseline(&appliances), &grid)?;
            let target = match (target, &match_tariff) {
                (Some(v), _) => v,
                (None, Some(path)) => tariff(path, &grid)?.daily_cost(&profile, &grid),
                (None, None) => unreachable!("clap requires one of --target, --match-tariff"),
            };
            let before = t.daily_cost(&profile, &grid);
            let calibrated = Tariff::Aclps(calibrate_revenue(config, &profile, &grid, target)?);
            write_tariff_config(&calibrated, &grid, &out).map_err(with_path(&out))?;
            println!(
                "baseline_bill_before={before:.4} target={target:.4} scale={:.6}",
                target / before
            );
        }
        Command::Compare {
            reference,
            candidate,
            scenario,
            out,
        } => {
            let r = read_report(&reference).map_err(with_path(&reference))?;
            let c = read_report(&candidate).map_err(with_path(&candidate))?;
            let red = compare(&r.baseline, c.final_report())?;
            if let Some(out) = out {
                let doc = ReportDocument {
                    scenario,
                    tariff: c.tariff.clone(),
                    baseline: r.baseline.clone(),
                    optimized: Some(c.final_report().clone()),
                    reductions: Some(red),
                    runs: c.runs.clone(),
                };
                write_report(&doc, &out).map_err(with_path(&out))?;
            }
            println!(
                "cost_reduction_pct={:.4} ({}%) peak_reduction_pct={:.4} ({}%)",
                red.cost_reduction_pct,
                display_pct(red.cost_reduction_pct),
                red.peak_reduction_pct,
                display_pct(red.peak_reduction_pct)
            );
        }
        Command::ExportProfile {
            catalog: cat,
            tariff: tariff_path,
            search,
            out,
        } => {
            let appliances = catalog(&cat, &grid)?;
            let baseline =
                build_load_profile(&appliances, &Schedule::baseline(&appliances), &grid)?;
            let mut columns = vec![("baseline", baseline)];
            if let Some(path) = &tariff_path {
                let p = Problem::new(appliances, tariff(path, &grid)?, grid)
                    .with_objective(search.objective.into())
                    .with_max_sweeps(search.max_sweeps as usize);
                let sol = optimize(&p)?;
                columns.push((
                    "optimized",
                    build_load_profile(&p.appliances, &sol.schedule, &grid)?,
                ));
            }
            let named: Vec<(&str, &_)> = columns.iter().map(|(n, p)| (*n, p)).collect();
            export_profile(&named, &grid, &out).map_err(with_path(&out))?;
            println!(
                "wrote {} slots x {} profiles",
                grid.slot_count(),
                named.len()
            );
        }
        Command::SelfTest { seed, count } => {
            let mut mismatches = 0;
            for s in seed..seed.saturating_add(count) {
                let p = random_problem(s);
                let fast = optimize(&p)?;
                let exact = brute_force(&p, DEFAULT_SIZE_GUARD)?;
                let (a, b) = (fast.objective.primary, exact.objective.primary);
                if (a - b).abs() > 1e-9 * b.abs().max(1.0) {
                    mismatches += 1;
                    eprintln!(
                        "seed {s} ({}): optimize {a} exhaustive {b}",
                        p.tariff.kind()
                    );
                }
            }
            println!("instances={count} mismatches={mismatches}");
            if mismatches > 0 {
                return Err(Failure::Input(format!(
                    "{mismatches} of {count} instances missed the optimum"
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
