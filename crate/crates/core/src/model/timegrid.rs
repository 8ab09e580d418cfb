use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One-based slot index. Slot `t` covers `((t-1)*m, t*m]` minutes after
/// midnight and is labeled by its end time.
pub type Slot = usize;

/// Wall-clock time of day in whole minutes, `00:00..=24:00`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clock {
    minutes: u32,
}

impl Clock {
    pub const MIDNIGHT: Clock = Clock { minutes: 0 };
    pub const END_OF_DAY: Clock = Clock { minutes: 1440 };

    pub fn from_minutes(minutes: u32) -> Result<Self> {
        if minutes > 1440 {
            return Err(Error::BadClock(format!("{minutes} minutes")));
        }
        Ok(Clock { minutes })
    }

    pub fn hm(hours: u32, minutes: u32) -> Result<Self> {
        if minutes >= 60 {
            return Err(Error::BadClock(format!("{hours:02}:{minutes:02}")));
        }
        Self::from_minutes(hours * 60 + minutes)
    }

    pub fn minutes(self) -> u32 {
        self.minutes
    }
}

impl FromStr for Clock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadClock(s.to_string());
        let (h, m) = s.trim().split_once(':').ok_or_else(bad)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(bad());
        }
        let h: u32 = h.parse().map_err(|_| bad())?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        Clock::hm(h, m).map_err(|_| bad())
    }
}

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.minutes / 60, self.minutes % 60)
    }
}

/// The slotted day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    slot_count: usize,
    slot_minutes: u32,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            slot_count: 288,
            slot_minutes: 5,
        }
    }
}

impl TimeGrid {
    pub fn new(slot_count: usize, slot_minutes: u32) -> Result<Self> {
        if slot_count == 0 || slot_minutes == 0 || slot_count * slot_minutes as usize != 1440 {
            return Err(Error::Grid(format!(
                "{slot_count} slots x {slot_minutes} min does not cover 1440 minutes"
            )));
        }
        Ok(TimeGrid {
            slot_count,
            slot_minutes,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn slot_minutes(&self) -> u32 {
        self.slot_minutes
    }

    /// Hours covered by one slot; multiplies kW into kWh.
    pub fn slot_hours(&self) -> f64 {
        self.slot_minutes as f64 / 60.0
    }

    pub fn slots(&self) -> std::ops::RangeInclusive<Slot> {
        1..=self.slot_count
    }

    pub fn check_slot(&self, slot: Slot) -> Result<()> {
        if slot == 0 || slot > self.slot_count {
            return Err(Error::SlotOutOfRange {
                slot,
                slot_count: self.slot_count,
            });
        }
        Ok(())
    }

    fn aligned_slots(&self, clock: Clock) -> Result<usize> {
        if !clock.minutes().is_multiple_of(self.slot_minutes) {
            return Err(Error::BoundaryAlignment {
                clock: clock.to_string(),
                slot_minutes: self.slot_minutes,
            });
        }
        Ok((clock.minutes() / self.slot_minutes) as usize)
    }

    /// The slot whose interval ends exactly at `clock`. `24:00` is the last
    /// slot; no slot ends at `00:00`.
    pub fn slot_ending_at(&self, clock: Clock) -> Result<Slot> {
        match self.aligned_slots(clock)? {
            0 => Err(Error::BoundaryAlignment {
                clock: clock.to_string(),
                slot_minutes: self.slot_minutes,
            }),
            n => Ok(n),
        }
    }

    /// The slot whose interval begins at `clock`.
    pub fn slot_starting_at(&self, clock: Clock) -> Result<Slot> {
        let n = self.aligned_slots(clock)?;
        if n >= self.slot_count {
            return Err(Error::SlotOutOfRange {
                slot: n + 1,
                slot_count: self.slot_count,
            });
        }
        Ok(n + 1)
    }

    /// End-of-slot clock label, e.g. slot 60 -> `05:00`.
    pub fn end_clock(&self, slot: Slot) -> Clock {
        Clock {
            minutes: slot as u32 * self.slot_minutes,
        }
    }

    pub fn start_clock(&self, slot: Slot) -> Clock {
        Clock {
            minutes: (slot as u32 - 1) * self.slot_minutes,
        }
    }
}

/// Inclusive slot range `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotRange {
    pub start: Slot,
    pub end: Slot,
}

impl SlotRange {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, slot: Slot) -> bool {
        self.start <= slot && slot <= self.end
    }
}

/// Peak/normal partition of the day. Slots outside every peak interval are
/// normal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCalendar {
    peak_intervals: Vec<SlotRange>,
    slot_count: usize,
}

impl PeriodCalendar {
    pub fn new(grid: &TimeGrid, mut peak_intervals: Vec<SlotRange>) -> Result<Self> {
        peak_intervals.sort();
        for r in &peak_intervals {
            if r.start == 0 || r.start > r.end || r.end > grid.slot_count() {
                return Err(Error::Calendar(format!(
                    "interval {}-{} outside 1..={}",
                    r.start,
                    r.end,
                    grid.slot_count()
                )));
            }
        }
        for w in peak_intervals.windows(2) {
            if w[1].start <= w[0].end {
                return Err(Error::Calendar(format!(
                    "peak intervals {}-{} and {}-{} overlap",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        Ok(PeriodCalendar {
            peak_intervals,
            slot_count: grid.slot_count(),
        })
    }

    /// A calendar with no peak slots.
    pub fn all_normal(grid: &TimeGrid) -> Self {
        PeriodCalendar {
            peak_intervals: Vec::new(),
            slot_count: grid.slot_count(),
        }
    }

    /// Build from clock ranges such as `"07:00-11:00,18:00-22:00"`.
    pub fn from_clock_ranges(grid: &TimeGrid, spec: &str) -> Result<Self> {
        let mut ranges = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| Error::Calendar(format!("range `{part}` is not start-end")))?;
            let (a, b): (Clock, Clock) = (a.parse()?, b.parse()?);
            if a >= b {
                return Err(Error::Calendar(format!("range `{part}` is empty")));
            }
            ranges.push(SlotRange {
                start: grid.slot_starting_at(a)?,
                end: grid.slot_ending_at(b)?,
            });
        }
        Self::new(grid, ranges)
    }

    /// Peak 07:00-11:00 and 18:00-22:00, 16 normal hours.
    pub fn standard(grid: &TimeGrid) -> Self {
        Self::from_clock_ranges(grid, "07:00-11:00,18:00-22:00")
            .expect("standard calendar fits any valid grid")
    }

    pub fn peak_intervals(&self) -> &[SlotRange] {
        &self.peak_intervals
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn is_peak(&self, slot: Slot) -> bool {
        self.peak_intervals.iter().any(|r| r.contains(slot))
    }

    pub fn peak_slot_count(&self) -> usize {
        self.peak_intervals.iter().map(SlotRange::len).sum()
    }

    pub fn normal_slot_count(&self) -> usize {
        self.slot_count - self.peak_slot_count()
    }

    /// Inverse of [`PeriodCalendar::from_clock_ranges`].
    pub fn to_clock_ranges(&self, grid: &TimeGrid) -> String {
        self.peak_intervals
            .iter()
            .map(|r| format!("{}-{}", grid.start_clock(r.start), grid.end_clock(r.end)))
            .collect::<Vec<_>>()
            .join(",")
    }
}
