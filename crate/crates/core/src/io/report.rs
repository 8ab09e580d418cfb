use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Appliance, Schedule, Slot};
use crate::scheduler::{compare, Reductions, ScheduleReport};

/// Placement of one appliance run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignedRun {
    pub id: String,
    pub name: String,
    pub run: usize,
    pub baseline_start: Slot,
    pub baseline_end: Slot,
    pub start: Slot,
    pub end: Slot,
}

/// A scenario's before/after figures, serialized as pretty-printed JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub scenario: String,
    pub tariff: String,
    pub baseline: ScheduleReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimized: Option<ScheduleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reductions: Option<Reductions>,
    pub runs: Vec<AssignedRun>,
}

impl ReportDocument {
    /// Builds a document; `placements` is the schedule behind the final
    /// figures and reductions are derived from the two reports.
    pub fn new(
        scenario: impl Into<String>,
        tariff: impl Into<String>,
        appliances: &[Appliance],
        placements: &Schedule,
        baseline: ScheduleReport,
        optimized: Option<ScheduleReport>,
    ) -> Result<Self> {
        let reductions = optimized
            .as_ref()
            .map(|o| compare(&baseline, o))
            .transpose()?;
        let mut runs = Vec::new();
        for a in appliances {
            for (i, r) in a.runs.iter().enumerate() {
                let start = placements
                    .starts(&a.id)
                    .and_then(|s| s.get(i).copied())
                    .unwrap_or(r.baseline_start);
                runs.push(AssignedRun {
                    id: a.id.clone(),
                    name: a.name.clone(),
                    run: i + 1,
                    baseline_start: r.baseline_start,
                    baseline_end: r.baseline_end(),
                    start,
                    end: r.end_for(start),
                });
            }
        }
        let doc = ReportDocument {
            scenario: scenario.into(),
            tariff: tariff.into(),
            baseline,
            optimized,
            reductions,
            runs,
        };
        doc.check()?;
        Ok(doc)
    }

    pub fn check(&self) -> Result<()> {
        if self.scenario.trim().is_empty() {
            return Err(Error::Report("scenario name must not be empty".into()));
        }
        match (&self.optimized, &self.reductions) {
            (Some(o), Some(r)) => {
                let want = compare(&self.baseline, o)?;
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
                if !close(want.cost_reduction_pct, r.cost_reduction_pct)
                    || !close(want.peak_reduction_pct, r.peak_reduction_pct)
                {
                    return Err(Error::Report(
                        "reductions do not match the embedded reports".into(),
                    ));
                }
            }
            (None, None) => {}
            _ => {
                return Err(Error::Report(
                    "reductions require an optimized report".into(),
                ))
            }
        }
        Ok(())
    }

    /// The figures after scheduling, or the baseline when none were computed.
    pub fn final_report(&self) -> &ScheduleReport {
        self.optimized.as_ref().unwrap_or(&self.baseline)
    }
}

pub fn report_to_string(doc: &ReportDocument) -> Result<String> {
    doc.check()?;
    let mut s = serde_json::to_string_pretty(doc).map_err(|e| Error::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_report(doc: &ReportDocument, path: impl AsRef<Path>) -> Result<()> {
    let text = report_to_string(doc)?;
    super::write_atomic(path.as_ref(), text.as_bytes())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument> {
    let text = std::fs::read_to_string(path)?;
    let doc: ReportDocument =
        serde_json::from_str(&text).map_err(|e| Error::Report(e.to_string()))?;
    doc.check()?;
    Ok(doc)
}
