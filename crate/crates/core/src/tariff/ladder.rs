use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EPS: f64 = 1e-9;

/// Evenly spaced consumption levels `base + k*step` up to `max_level`, kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelLadder {
    pub base: f64,
    pub step: f64,
    pub max_level: f64,
}

impl Default for LevelLadder {
    fn default() -> Self {
        LevelLadder {
            base: 0.02,
            step: 0.07,
            max_level: 11.0,
        }
    }
}

impl LevelLadder {
    pub fn new(base: f64, step: f64, max_level: f64) -> Result<Self> {
        let ok = base.is_finite()
            && step.is_finite()
            && max_level.is_finite()
            && base > 0.0
            && step > 0.0
            && max_level >= base;
        if !ok {
            return Err(Error::Tariff(format!(
                "ladder needs 0 < base <= max and step > 0, got base {base}, step {step}, max {max_level}"
            )));
        }
        Ok(LevelLadder {
            base,
            step,
            max_level,
        })
    }

    /// Index of the highest level.
    pub fn top_index(&self) -> usize {
        ((self.max_level - self.base) / self.step + EPS).floor() as usize
    }

    pub fn level(&self, k: usize) -> f64 {
        self.base + k as f64 * self.step
    }

    pub fn top_level(&self) -> f64 {
        self.level(self.top_index())
    }

    /// Index of the largest level not above `consumption`, clamped to the
    /// ladder at both ends.
    pub fn snap_index(&self, consumption: f64) -> usize {
        if !(consumption > self.base) {
            return 0;
        }
        let k = ((consumption - self.base) / self.step + EPS).floor() as usize;
        k.min(self.top_index())
    }

    pub fn snap(&self, consumption: f64) -> f64 {
        self.level(self.snap_index(consumption))
    }

    /// Index of `level` if it sits on the ladder.
    pub fn index_of(&self, level: f64) -> Option<usize> {
        if !level.is_finite() || level < self.base - EPS {
            return None;
        }
        let k = ((level - self.base) / self.step).round();
        let k = k as usize;
        (k <= self.top_index() && (self.level(k) - level).abs() <= EPS).then_some(k)
    }

    pub fn len(&self) -> usize {
        self.top_index() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Largest ladder level not above `consumption`.
pub fn snap_level(ladder: &LevelLadder, consumption: f64) -> f64 {
    ladder.snap(consumption)
}
