use loadsched::io::{bundled_catalog, catalog_to_csv, parse_catalog};
use loadsched::model::{
    build_load_profile, peak_load, period_energy, total_energy_kwh, validate, Appliance, LoadClass,
    LoadProfile, PeriodCalendar, RunSpec, Schedule, TimeGrid,
};
use loadsched::scheduler::{evaluate, optimize, random_problem, Problem};
use loadsched::tariff::{
    aclps_slot_cost, daily_bill, quad_slot_cost, step_slot_cost, tou_slot_cost, AclpsConfig,
    LevelLadder, QuadraticParams, StepTariff, Tariff, ToUTariff,
};
use proptest::prelude::*;

fn grid() -> TimeGrid {
    TimeGrid::default()
}

/// A valid schedule drawing each movable run's start from its window.
fn schedule_strategy(appliances: Vec<Appliance>) -> impl Strategy<Value = Schedule> {
    let g = grid();
    let ranges: Vec<(String, usize, std::ops::RangeInclusive<usize>)> = appliances
        .iter()
        .flat_map(|a| {
            let shift = a.is_shiftable();
            a.runs.iter().enumerate().map(move |(i, r)| {
                let rng = if shift {
                    r.feasible_starts(&g).unwrap()
                } else {
                    r.baseline_start..=r.baseline_start
                };
                (a.id.clone(), i, rng)
            })
        })
        .collect();
    let base = Schedule::baseline(&appliances);
    let picks: Vec<_> = ranges.iter().map(|(_, _, r)| r.clone()).collect();
    picks.prop_map(move |starts| {
        let mut s = base.clone();
        for ((id, run, _), start) in ranges.iter().zip(starts) {
            s.set(id, *run, start);
        }
        s
    })
}

fn demand_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..12.0f64], 288)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_valid_schedule_conserves_energy(s in schedule_strategy(bundled_catalog(&grid()))) {
        let g = grid();
        let cat = bundled_catalog(&g);
        prop_assert!(validate(&g, &cat, &s).is_empty());
        let base = total_energy_kwh(&build_load_profile(&cat, &Schedule::baseline(&cat), &g).unwrap(), &g);
        let moved = total_energy_kwh(&build_load_profile(&cat, &s, &g).unwrap(), &g);
        prop_assert!((base - moved).abs() < 1e-9);
    }

    #[test]
    fn profile_is_sum_of_appliances(s in schedule_strategy(bundled_catalog(&grid()))) {
        let g = grid();
        let cat = bundled_catalog(&g);
        let whole = build_load_profile(&cat, &s, &g).unwrap();
        let mut sum = vec![0.0; 288];
        for a in &cat {
            let mut own = Schedule::baseline(std::slice::from_ref(a));
            for (i, &start) in s.starts(&a.id).unwrap().iter().enumerate() {
                own.set(&a.id, i, start);
            }
            let one = build_load_profile(std::slice::from_ref(a), &own, &g).unwrap();
            for (x, y) in sum.iter_mut().zip(one.demand()) {
                *x += y;
            }
        }
        for (x, y) in whole.demand().iter().zip(&sum) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn periods_split_the_total(d in demand_strategy()) {
        let g = grid();
        let p = LoadProfile::from_kw(d).unwrap();
        let (peak, normal) = period_energy(&p, &PeriodCalendar::standard(&g), &g);
        prop_assert!((peak + normal - total_energy_kwh(&p, &g)).abs() < 1e-9);
    }

    #[test]
    fn peak_dominates_every_slot(d in demand_strategy()) {
        let p = LoadProfile::from_kw(d.clone()).unwrap();
        let (kw, slot) = peak_load(&p);
        prop_assert!(d.iter().all(|&x| x <= kw));
        prop_assert_eq!(d[slot - 1], kw);
        prop_assert!(d[..slot - 1].iter().all(|&x| x < kw));
    }

    #[test]
    fn snap_is_idempotent_and_below(c in 0.0..15.0f64) {
        let l = LevelLadder::default();
        let s = l.snap(c);
        prop_assert_eq!(l.snap(s), s);
        prop_assert!(l.index_of(s).is_some());
        if c >= l.base && c <= l.top_level() {
            prop_assert!(s <= c + 1e-9 && c < s + l.step + 1e-9);
        }
    }

    #[test]
    fn quadratic_monotone_convex(a in 1e-3..10.0f64, b in 0.0..5.0f64, c in 0.0..1.0f64, e in 0.0..5.0f64, h in 1e-3..1.0f64) {
        let q = QuadraticParams::new(a, b, c).unwrap();
        let f = |x: f64| quad_slot_cost(&q, x).unwrap();
        prop_assert!(f(e + h) >= f(e));
        prop_assert!(f(e + 2.0 * h) - 2.0 * f(e + h) + f(e) >= -1e-9);
    }

    #[test]
    fn step_monotone_and_continuous(t in 0.01..1.0f64, low in 0.01..1.0f64, k in 1.0..4.0f64, e in 0.0..3.0f64) {
        let s = StepTariff::new(t, low, low * k).unwrap();
        let f = |x: f64| step_slot_cost(&s, x).unwrap();
        prop_assert!(f(e + 0.01) >= f(e));
        prop_assert!((f(t) - f(t + 1e-13)).abs() < 1e-12);
    }

    #[test]
    fn consumption_level_cost_scales_linearly(k in 0.01..10.0f64, s in schedule_strategy(bundled_catalog(&grid()))) {
        let g = grid();
        let cat = bundled_catalog(&g);
        let prof = build_load_profile(&cat, &s, &g).unwrap();
        let base = AclpsConfig { r2: 0.3, r3: 0.01, ..AclpsConfig::with_calendar(PeriodCalendar::standard(&g)) };
        let one = daily_bill(&Tariff::Aclps(base.clone()), &prof, &g);
        let many = daily_bill(&Tariff::Aclps(base.scaled(k)), &prof, &g);
        prop_assert!((many.total - k * one.total).abs() <= 1e-9 * many.total.max(1.0));
        prop_assert_eq!(one.pib.unwrap().levels, many.pib.unwrap().levels);
    }

    #[test]
    fn tou_slot_cost_is_linear(n in 0.01..1.0f64, k in 1.0..4.0f64, slot in 1usize..=288, e in 0.0..3.0f64) {
        let g = grid();
        let t = ToUTariff::new(n, n * k, PeriodCalendar::standard(&g)).unwrap();
        let c = tou_slot_cost(&t, slot, e).unwrap();
        prop_assert!((c - t.rate_at(slot) * e).abs() < 1e-12);
    }

    #[test]
    fn ladder_costs_need_ladder_levels(level in 0.0..12.0f64, e in 0.0..2.0f64) {
        let g = grid();
        let cfg = AclpsConfig::with_calendar(PeriodCalendar::standard(&g));
        let on = cfg.ladder.index_of(level).is_some();
        prop_assert_eq!(aclps_slot_cost(&cfg, level, e).is_ok(), on);
    }
}

fn catalog_strategy() -> impl Strategy<Value = Vec<Appliance>> {
    let run = (
        1usize..=40,
        1usize..=248,
        any::<bool>(),
        0usize..=10,
        0usize..=10,
    );
    prop::collection::vec((run, 1u32..5000, 0usize..4), 1..8).prop_map(|rows| {
        let g = grid();
        rows.into_iter()
            .enumerate()
            .map(|(i, ((dur, base, windowed, lo, hi), w, class))| {
                let class = [
                    LoadClass::CommonNonshiftable,
                    LoadClass::SelectiveNonshiftable,
                    LoadClass::CommonShiftable,
                    LoadClass::SelectiveShiftable,
                ][class];
                let run = if !class.is_shiftable() {
                    RunSpec::fixed(dur, base)
                } else if windowed {
                    RunSpec::within_window(
                        dur,
                        base,
                        base.saturating_sub(lo).max(1),
                        (base + dur - 1 + hi).min(288),
                    )
                } else {
                    RunSpec::full_day(&g, dur, base)
                };
                Appliance::new(
                    &g,
                    format!("a{i}"),
                    format!("Appliance {i}"),
                    w as f64 * 0.5,
                    class,
                    vec![run],
                )
                .unwrap()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn catalog_round_trip(cat in catalog_strategy()) {
        let g = grid();
        let text = catalog_to_csv(&cat).unwrap();
        prop_assert_eq!(parse_catalog(&text, &g).unwrap(), cat);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimize_keeps_windows_energy_and_improves(seed in 0u64..10_000) {
        let p = random_problem(seed);
        let sol = optimize(&p).unwrap();
        prop_assert!(validate(&p.grid, &p.appliances, &sol.schedule).is_empty());
        let base = evaluate(&p, &p.baseline()).unwrap();
        prop_assert!((base.total_energy_kwh - sol.report.total_energy_kwh).abs() < 1e-9);
        prop_assert!(sol.report.total_cost <= base.total_cost * (1.0 + 1e-12));
        for a in p.appliances.iter().filter(|a| !a.is_shiftable()) {
            let want: Vec<_> = a.runs.iter().map(|r| r.baseline_start).collect();
            prop_assert_eq!(sol.schedule.starts(&a.id).unwrap(), &want[..]);
        }
        for w in sol.trace.windows(2) {
            prop_assert!(!w[0].better_than(&w[1]));
        }
        prop_assert!(sol.sweeps <= p.max_sweeps);
    }

    #[test]
    fn optimize_is_deterministic(seed in 0u64..10_000) {
        let p = random_problem(seed);
        let a = optimize(&p).unwrap();
        let b = optimize(&p).unwrap();
        prop_assert_eq!(a.schedule, b.schedule);
        prop_assert_eq!(a.report, b.report);
    }

    #[test]
    fn report_invariants(seed in 0u64..10_000) {
        let p = random_problem(seed);
        let r = optimize(&p).unwrap().report;
        prop_assert!(r.actual_cost >= r.desired_cost - 1e-12);
        prop_assert!(r.extension_factor >= 1.0);
        prop_assert_eq!(r.extension_factor == 1.0, r.extended_energy_kwh == 0.0);
    }
}

#[test]
fn sweep_order_does_not_change_determinism_across_thread_counts() {
    let p = Problem::new(
        bundled_catalog(&grid()),
        Tariff::TimeOfUse(ToUTariff::new(0.1, 0.3, PeriodCalendar::standard(&grid())).unwrap()),
        grid(),
    );
    let many = optimize(&p).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| optimize(&p).unwrap());
    assert_eq!(many.schedule, one.schedule);
}
