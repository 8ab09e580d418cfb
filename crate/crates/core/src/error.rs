use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid clock `{0}`: expected hh:mm")]
    BadClock(String),

    #[error("clock {clock} is not on a {slot_minutes}-minute slot boundary")]
    BoundaryAlignment { clock: String, slot_minutes: u32 },

    #[error("slot {slot} outside 1..={slot_count}")]
    SlotOutOfRange { slot: usize, slot_count: usize },

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("invalid period calendar: {0}")]
    Calendar(String),

    #[error("appliance `{id}`: {msg}")]
    Appliance { id: String, msg: String },

    #[error("energy must be non-negative, got {0}")]
    NegativeEnergy(f64),

    #[error("{0} kW is not a level on the consumption ladder")]
    NotALadderLevel(f64),

    #[error("invalid tariff: {0}")]
    Tariff(String),

    #[error("pib slots must be strictly increasing: got slot {got} after slot {last}")]
    Sequencing { last: usize, got: usize },

    #[error("cannot calibrate: {0}")]
    Calibration(String),

    #[error("schedule invalid: {}", join_violations(.0))]
    InvalidSchedule(Vec<Violation>),

    #[error("infeasible run {run} of appliance `{id}`: {msg}")]
    Infeasible { id: String, run: usize, msg: String },

    #[error("brute force search space {size} exceeds guard {guard}")]
    SizeGuard { size: u128, guard: u128 },

    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),

    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("row `{id}`: {msg}")]
    Row { id: String, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("report: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// True for errors that stem from an unsatisfiable scheduling window
    /// rather than malformed input.
    pub fn is_infeasibility(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
