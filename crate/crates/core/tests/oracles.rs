//! Library results checked against values computed independently here.

use loadsched::io::{bundled_catalog, profiles_to_csv, reference_schedule};
use loadsched::model::{
    build_load_profile, peak_load, period_energy, total_energy_kwh, Appliance, LoadClass,
    PeriodCalendar, RunSpec, Schedule, TimeGrid,
};
use loadsched::scheduler::{brute_force, evaluate, optimize, Problem, DEFAULT_SIZE_GUARD};
use loadsched::tariff::{Tariff, ToUTariff};

// (watts, start, end, shiftable)
const HOUSEHOLD: [(f64, usize, usize, bool); 26] = [
    (100.0, 217, 264, false),
    (85.0, 1, 288, false),
    (35.0, 193, 264, false),
    (72.0, 1, 288, false),
    (6.0, 1, 288, false),
    (28.0, 217, 276, false),
    (42.0, 1, 288, false),
    (5.0, 205, 240, false),
    (80.0, 241, 252, false),
    (120.0, 221, 222, false),
    (40.0, 193, 204, false),
    (300.0, 217, 225, false),
    (1800.0, 199, 200, true),
    (800.0, 217, 218, true),
    (1200.0, 215, 245, true),
    (2600.0, 210, 220, true),
    (700.0, 72, 72, true),
    (995.0, 229, 264, true),
    (450.0, 240, 249, true),
    (1200.0, 66, 72, true),
    (700.0, 240, 243, true),
    (600.0, 230, 236, true),
    (1000.0, 181, 190, true),
    (700.0, 73, 75, true),
    (700.0, 229, 240, true),
    (450.0, 262, 264, true),
];

fn is_peak(slot: usize) -> bool {
    (85..=132).contains(&slot) || (217..=264).contains(&slot)
}

fn scan(rows: impl Iterator<Item = (f64, usize, usize)>) -> [f64; 288] {
    let mut w = [0.0; 288];
    for (watts, s, e) in rows {
        for x in &mut w[s - 1..e] {
            *x += watts;
        }
    }
    w
}

fn grid() -> TimeGrid {
    TimeGrid::default()
}

#[test]
fn household_hand_sum() {
    let watt_slots: f64 = HOUSEHOLD
        .iter()
        .map(|&(w, s, e, _)| w * (e - s + 1) as f64)
        .sum();
    assert_eq!(watt_slots, 221_870.0);

    let g = grid();
    let cat = bundled_catalog(&g);
    assert_eq!(cat.len(), 26);
    let p = build_load_profile(&cat, &Schedule::baseline(&cat), &g).unwrap();
    assert!((total_energy_kwh(&p, &g) - watt_slots / 1000.0 / 12.0).abs() < 1e-9);

    let w = scan(HOUSEHOLD.iter().map(|&(w, s, e, _)| (w, s, e)));
    let mut best = (0.0, 0);
    for (i, &x) in w.iter().enumerate() {
        if x > best.0 {
            best = (x, i + 1);
        }
    }
    let (kw, slot) = peak_load(&p);
    assert!((kw - best.0 / 1000.0).abs() < 1e-12);
    assert_eq!(slot, best.1);

    let peak_ws: f64 = (1..=288).filter(|&t| is_peak(t)).map(|t| w[t - 1]).sum();
    let (pk, nk) = period_energy(&p, &PeriodCalendar::standard(&g), &g);
    assert!((pk - peak_ws / 12_000.0).abs() < 1e-9);
    assert!((nk - (watt_slots - peak_ws) / 12_000.0).abs() < 1e-9);
}

#[test]
fn bundled_rows_match_the_table() {
    let cat = bundled_catalog(&grid());
    for (a, &(w, s, e, shift)) in cat.iter().zip(&HOUSEHOLD) {
        assert_eq!(a.power_rate_watts, w, "{}", a.id);
        assert_eq!(a.runs[0].baseline_start, s, "{}", a.id);
        assert_eq!(a.runs[0].baseline_end(), e, "{}", a.id);
        assert_eq!(a.is_shiftable(), shift, "{}", a.id);
    }
}

/// Rates `(p, n)` from `p*a1 + n*b1 = c1`, `p*a2 + n*b2 = c2` by Cramer's rule.
fn solve2(a1: f64, b1: f64, c1: f64, a2: f64, b2: f64, c2: f64) -> (f64, f64) {
    let det = a1 * b2 - a2 * b1;
    ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det)
}

#[test]
fn implied_rates() {
    let (p, n) = solve2(11.4636, 7.0721, 4.0125, 2.9653, 15.5705, 2.4202);
    assert!((p - 0.288).abs() < 5e-4 && (n - 0.1006).abs() < 5e-5);
    assert!((11.4636 * p + 7.0721 * n - 4.0125).abs() < 1e-12);
    let bundled =
        loadsched::io::parse_tariff_config(loadsched::io::dataset::TOU_IMPLIED_TOML, &grid())
            .unwrap();
    match bundled {
        Tariff::TimeOfUse(t) => {
            assert!((t.peak_rate - p).abs() < 1e-12);
            assert!((t.normal_rate - n).abs() < 1e-12);
        }
        other => panic!("{other}"),
    }
}

#[test]
fn tou_bill_is_rate_weighted_energy() {
    let g = grid();
    let cat = bundled_catalog(&g);
    let (p, n) = (0.3, 0.1);
    let prob = Problem::new(
        cat.clone(),
        Tariff::TimeOfUse(ToUTariff::new(n, p, PeriodCalendar::standard(&g)).unwrap()),
        g,
    );
    for s in [Schedule::baseline(&cat), reference_schedule(&cat).unwrap()] {
        let w = scan(cat.iter().map(|a| {
            let st = s.starts(&a.id).unwrap()[0];
            (a.power_rate_watts, st, a.runs[0].end_for(st))
        }));
        let want: f64 = (1..=288)
            .map(|t| w[t - 1] / 12_000.0 * if is_peak(t) { p } else { n })
            .sum();
        assert!((evaluate(&prob, &s).unwrap().total_cost - want).abs() < 1e-9);
    }
}

#[test]
fn two_runs_solved_by_hand() {
    // Two 1 kW, 2-slot runs with starts 81..=84; slot 85 opens the morning
    // peak. Any placement off the peak costs 4 * n / 12 since the rate is
    // linear, and the lexicographically first of those stacks both at 81.
    let g = grid();
    let mk = |id: &str| {
        Appliance::new(
            &g,
            id,
            id,
            1000.0,
            LoadClass::CommonShiftable,
            vec![RunSpec::within_window(2, 84, 81, 85)],
        )
        .unwrap()
    };
    let (n, p) = (0.1, 0.4);
    let prob = Problem::new(
        vec![mk("a"), mk("b")],
        Tariff::TimeOfUse(ToUTariff::new(n, p, PeriodCalendar::standard(&g)).unwrap()),
        g,
    );
    let want = 4.0 * n / 12.0;
    let exact = brute_force(&prob, DEFAULT_SIZE_GUARD).unwrap();
    assert!((exact.report.total_cost - want).abs() < 1e-12);
    assert_eq!(exact.schedule.starts("a"), Some(&[81][..]));
    assert_eq!(exact.schedule.starts("b"), Some(&[81][..]));
    let fast = optimize(&prob).unwrap();
    assert!((fast.report.total_cost - want).abs() < 1e-12);
}

#[test]
fn exported_columns_integrate_to_energy() {
    let g = grid();
    let cat = bundled_catalog(&g);
    let base = build_load_profile(&cat, &Schedule::baseline(&cat), &g).unwrap();
    let reference = build_load_profile(&cat, &reference_schedule(&cat).unwrap(), &g).unwrap();
    let text = profiles_to_csv(&[("baseline", &base), ("reference", &reference)], &g).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["slot", "clock", "baseline", "reference"]
    );
    let mut sums = [0.0; 2];
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        rows += 1;
        assert_eq!(rec[0].parse::<usize>().unwrap(), rows);
        for (k, s) in sums.iter_mut().enumerate() {
            *s += rec[2 + k].parse::<f64>().unwrap();
        }
    }
    assert_eq!(rows, 288);
    // values carry four decimals, so each row may be off by 5e-5 kW
    let tol = 288.0 * 5e-5 / 12.0;
    assert!((sums[0] / 12.0 - total_energy_kwh(&base, &g)).abs() <= tol);
    assert!((sums[1] / 12.0 - total_energy_kwh(&reference, &g)).abs() <= tol);
}
