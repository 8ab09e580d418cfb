//! Tariff configuration: a flat TOML file with a `kind` key.
//!
//! ```toml
//! kind = "tou"            # tou | quadratic | step | aclps
//! peak = "07:00-11:00,18:00-22:00"
//! peak_rate = 144.52
//! normal_rate = 45.54
//! ```
//!
//! | kind        | keys                                                                  |
//! |-------------|-----------------------------------------------------------------------|
//! | `tou`       | `normal_rate`, `peak_rate`, `peak`                                    |
//! | `quadratic` | `a`, `b`, `c`                                                         |
//! | `step`      | `threshold` (kWh per slot), `low_rate`, `high_rate`                   |
//! | `aclps`     | `r1`, `r2`, `r3`, `ladder_base`, `ladder_step`, `ladder_max`,         |
//! |             | `ca_plus`, `ca_minus`, `peak`, `initial_level`                        |
//!
//! `peak` defaults to `07:00-11:00,18:00-22:00`. The consumption-level keys
//! default to `r = (1, 0, 0)`, ladder `0.02..11.0` step `0.07`, and both
//! allowances equal to the ladder step; without `initial_level` the level
//! starts at the snap of the mean demand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PeriodCalendar, TimeGrid};
use crate::tariff::{
    AclpsConfig, InitialLevel, LevelLadder, QuadraticParams, QuadraticTariff, StepTariff, Tariff,
    ToUTariff,
};

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TariffFile {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    peak_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    low_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    high_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder_step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ladder_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ca_plus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ca_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_level: Option<f64>,
}

impl TariffFile {
    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! check {
            ($($f:ident),*) => { $( if self.$f.is_some() { keys.push(stringify!($f)); } )* };
        }
        check!(
            peak,
            normal_rate,
            peak_rate,
            a,
            b,
            c,
            threshold,
            low_rate,
            high_rate,
            r1,
            r2,
            r3,
            ladder_base,
            ladder_step,
            ladder_max,
            ca_plus,
            ca_minus,
            initial_level
        );
        keys
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        if let Some(k) = self
            .present_keys()
            .into_iter()
            .find(|k| !allowed.contains(k))
        {
            return Err(Error::Config(format!(
                "key `{k}` does not apply to kind `{}`",
                self.kind
            )));
        }
        Ok(())
    }
}

fn required(v: Option<f64>, key: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

fn calendar(grid: &TimeGrid, peak: &Option<String>) -> Result<PeriodCalendar> {
    match peak {
        Some(s) => PeriodCalendar::from_clock_ranges(grid, s),
        None => Ok(PeriodCalendar::standard(grid)),
    }
}

pub fn parse_tariff_config(text: &str, grid: &TimeGrid) -> Result<Tariff> {
    let f: TariffFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let tariff = match f.kind.as_str() {
        "tou" => {
            f.only(&["peak", "normal_rate", "peak_rate"])?;
            Tariff::TimeOfUse(ToUTariff::new(
                required(f.normal_rate, "normal_rate")?,
                required(f.peak_rate, "peak_rate")?,
                calendar(grid, &f.peak)?,
            )?)
        }
        "quadratic" => {
            f.only(&["a", "b", "c"])?;
            Tariff::Quadratic(QuadraticTariff::constant(QuadraticParams::new(
                required(f.a, "a")?,
                f.b.unwrap_or(0.0),
                f.c.unwrap_or(0.0),
            )?)?)
        }
        "step" => {
            f.only(&["threshold", "low_rate", "high_rate"])?;
            Tariff::Step(StepTariff::new(
                required(f.threshold, "threshold")?,
                required(f.low_rate, "low_rate")?,
                required(f.high_rate, "high_rate")?,
            )?)
        }
        "aclps" => {
            f.only(&[
                "peak",
                "r1",
                "r2",
                "r3",
                "ladder_base",
                "ladder_step",
                "ladder_max",
                "ca_plus",
                "ca_minus",
                "initial_level",
            ])?;
            let d = LevelLadder::default();
            let ladder = LevelLadder::new(
                f.ladder_base.unwrap_or(d.base),
                f.ladder_step.unwrap_or(d.step),
                f.ladder_max.unwrap_or(d.max_level),
            )?;
            let cfg = AclpsConfig {
                r1: f.r1.unwrap_or(1.0),
                r2: f.r2.unwrap_or(0.0),
                r3: f.r3.unwrap_or(0.0),
                ladder,
                ca_plus: f.ca_plus.unwrap_or(ladder.step),
                ca_minus: f.ca_minus.unwrap_or(ladder.step),
                calendar: calendar(grid, &f.peak)?,
                initial_level: f
                    .initial_level
                    .map_or(InitialLevel::SnapOfMean, InitialLevel::Explicit),
            };
            cfg.check()?;
            Tariff::Aclps(cfg)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown tariff kind `{other}` (expected tou, quadratic, step or aclps)"
            )))
        }
    };
    Ok(tariff)
}

pub fn load_tariff_config(path: impl AsRef<Path>, grid: &TimeGrid) -> Result<Tariff> {
    parse_tariff_config(&std::fs::read_to_string(path)?, grid)
}

/// Inverse of [`parse_tariff_config`]. Every value is written explicitly.
pub fn tariff_config_to_string(tariff: &Tariff, grid: &TimeGrid) -> Result<String> {
    let f = match tariff {
        Tariff::TimeOfUse(t) => TariffFile {
            kind: "tou".into(),
            peak: Some(t.calendar.to_clock_ranges(grid)),
            normal_rate: Some(t.normal_rate),
            peak_rate: Some(t.peak_rate),
            ..Default::default()
        },
        Tariff::Quadratic(q) => {
            if !q.is_day_constant() {
                return Err(Error::Config(
                    "per-slot quadratic coefficients cannot be written".into(),
                ));
            }
            let p = q.params_at(1);
            TariffFile {
                kind: "quadratic".into(),
                a: Some(p.a),
                b: Some(p.b),
                c: Some(p.c),
                ..Default::default()
            }
        }
        Tariff::Step(s) => TariffFile {
            kind: "step".into(),
            threshold: Some(s.threshold),
            low_rate: Some(s.low_rate),
            high_rate: Some(s.high_rate),
            ..Default::default()
        },
        Tariff::Aclps(c) => TariffFile {
            kind: "aclps".into(),
            peak: Some(c.calendar.to_clock_ranges(grid)),
            r1: Some(c.r1),
            r2: Some(c.r2),
            r3: Some(c.r3),
            ladder_base: Some(c.ladder.base),
            ladder_step: Some(c.ladder.step),
            ladder_max: Some(c.ladder.max_level),
            ca_plus: Some(c.ca_plus),
            ca_minus: Some(c.ca_minus),
            initial_level: match c.initial_level {
                InitialLevel::SnapOfMean => None,
                InitialLevel::Explicit(kw) => Some(kw),
            },
            ..Default::default()
        },
    };
    toml::to_string(&f).map_err(|e| Error::Config(e.to_string()))
}

pub fn write_tariff_config(tariff: &Tariff, grid: &TimeGrid, path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(
        path.as_ref(),
        tariff_config_to_string(tariff, grid)?.as_bytes(),
    )
}
