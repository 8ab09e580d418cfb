use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Appliance, LoadClass, PeriodCalendar, RunSpec, TimeGrid};
use crate::scheduler::Problem;
use crate::tariff::{AclpsConfig, QuadraticParams, QuadraticTariff, StepTariff, Tariff, ToUTariff};

/// A small seeded instance: up to three shiftable single-run appliances with
/// at most 24 feasible starts each, a couple of fixed background loads, and a
/// tariff kind chosen by `seed % 4`.
pub fn random_problem(seed: u64) -> Problem {
    let grid = TimeGrid::default();
    let calendar = PeriodCalendar::standard(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let watts = |rng: &mut ChaCha8Rng| (rng.gen_range(20..300) * 10) as f64;

    let mut appliances = Vec::new();
    for i in 0..rng.gen_range(0..=2) {
        let duration = rng.gen_range(1..=60);
        let start = rng.gen_range(1..=grid.slot_count() + 1 - duration);
        let w = watts(&mut rng);
        appliances.push(
            Appliance::new(
                &grid,
                format!("fixed{i}"),
                format!("Fixed {i}"),
                w,
                LoadClass::CommonNonshiftable,
                vec![RunSpec::fixed(duration, start)],
            )
            .expect("generated fixed load is valid"),
        );
    }
    // windows cluster around one centre so runs interact
    let centre: usize = rng.gen_range(40..=240);
    for i in 0..rng.gen_range(1..=3) {
        let duration = rng.gen_range(1..=8);
        let span = rng.gen_range(1..=24);
        let lo = (centre + rng.gen_range(0..=40)).saturating_sub(20).max(1);
        let hi = (lo + span - 1).min(grid.slot_count() + 1 - duration);
        let lo = lo.min(hi);
        let baseline = rng.gen_range(lo..=hi);
        let w = watts(&mut rng);
        let class = if rng.gen_bool(0.5) {
            LoadClass::CommonShiftable
        } else {
            LoadClass::SelectiveShiftable
        };
        appliances.push(
            Appliance::new(
                &grid,
                format!("shift{i}"),
                format!("Shiftable {i}"),
                w,
                class,
                vec![RunSpec {
                    duration_slots: duration,
                    baseline_start: baseline,
                    allowed_start_min: lo,
                    allowed_start_max: hi,
                }],
            )
            .expect("generated shiftable load is valid"),
        );
    }

    let tariff = match seed % 4 {
        0 => {
            let normal = rng.gen_range(0.05..0.2);
            Tariff::TimeOfUse(
                ToUTariff::new(normal, normal * rng.gen_range(1.0..4.0), calendar).unwrap(),
            )
        }
        1 => Tariff::Quadratic(
            QuadraticTariff::constant(
                QuadraticParams::new(
                    rng.gen_range(0.5..5.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..0.01),
                )
                .unwrap(),
            )
            .unwrap(),
        ),
        2 => {
            let low = rng.gen_range(0.05..0.2);
            Tariff::Step(
                StepTariff::new(rng.gen_range(0.02..0.3), low, low * rng.gen_range(1.0..4.0))
                    .unwrap(),
            )
        }
        _ => Tariff::Aclps(AclpsConfig {
            r1: rng.gen_range(0.5..5.0),
            r2: rng.gen_range(0.0..1.0),
            r3: rng.gen_range(0.0..0.1),
            ..AclpsConfig::with_calendar(calendar)
        }),
    };
    Problem::new(appliances, tariff, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_small_and_seeded() {
        for seed in 0..200 {
            let p = random_problem(seed);
            let vars = p.feasible_starts().unwrap();
            let shiftable: Vec<_> = vars
                .iter()
                .filter(|v| {
                    v.starts.start() != v.starts.end() || p.appliances[v.appliance].is_shiftable()
                })
                .collect();
            assert!(!shiftable.is_empty() && shiftable.len() <= 3);
            assert!(shiftable
                .iter()
                .all(|v| v.starts.end() - v.starts.start() < 24));
            assert_eq!(
                p.tariff.kind(),
                ["tou", "quadratic", "step", "aclps"][(seed % 4) as usize]
            );
        }
        assert_eq!(random_problem(7).appliances, random_problem(7).appliances);
    }
}
