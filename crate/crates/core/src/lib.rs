//! Residential appliance load scheduling over a slotted day.
//!
//! * [`model`] describes the day, the appliance catalog and aggregate load.
//! * [`tariff`] prices per-slot energy: quadratic, two-step, time-of-use and
//!   consumption-level pricing with a price-invariant band.
//! * [`scheduler`] moves shiftable runs to minimize the daily bill.
//! * [`io`] reads catalogs and tariff configs and writes reports and profiles.

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod model;
pub mod scheduler;
pub mod tariff;

pub use error::{Error, Result};
