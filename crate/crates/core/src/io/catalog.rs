//! Appliance catalogs as comma-separated rows, one run per row.
//!
//! ```text
//! id,name,power_rate_watts,load_class,duration_slots,baseline_start,baseline_end,allowed_start_min,allowed_start_max
//! tv,TV,100,common-nonshiftable,48,217,264
//! ```
//!
//! The header line is optional and `#` starts a comment line. The two allowed
//! start bounds may be omitted: shiftable runs then may start anywhere they
//! fit in the day, non-shiftable runs stay at their baseline. Rows that share
//! an id become runs of one appliance, in file order.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Appliance, LoadClass, RunSpec, TimeGrid};

pub const CATALOG_HEADER: [&str; 9] = [
    "id",
    "name",
    "power_rate_watts",
    "load_class",
    "duration_slots",
    "baseline_start",
    "baseline_end",
    "allowed_start_min",
    "allowed_start_max",
];

/// One parsed catalog line.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogRow {
    pub id: String,
    pub name: String,
    pub power_rate_watts: f64,
    pub load_class: LoadClass,
    pub duration_slots: usize,
    pub baseline_start: usize,
    pub baseline_end: usize,
    pub allowed_start_min: Option<usize>,
    pub allowed_start_max: Option<usize>,
}

impl CatalogRow {
    fn to_run(&self, grid: &TimeGrid) -> Result<RunSpec> {
        let err = |msg: String| Error::Row {
            id: self.id.clone(),
            msg,
        };
        if self.duration_slots == 0 {
            return Err(err("duration must be at least one slot".into()));
        }
        if self.baseline_end < self.baseline_start
            || self.baseline_end - self.baseline_start + 1 != self.duration_slots
        {
            return Err(err(format!(
                "baseline {}-{} spans {} slots but duration is {}",
                self.baseline_start,
                self.baseline_end,
                (self.baseline_end + 1).saturating_sub(self.baseline_start),
                self.duration_slots
            )));
        }
        let default = if self.load_class.is_shiftable() {
            RunSpec::full_day(grid, self.duration_slots, self.baseline_start)
        } else {
            RunSpec::fixed(self.duration_slots, self.baseline_start)
        };
        let run = RunSpec {
            allowed_start_min: self.allowed_start_min.unwrap_or(default.allowed_start_min),
            allowed_start_max: self.allowed_start_max.unwrap_or(default.allowed_start_max),
            ..default
        };
        run.check_shape(grid).map_err(err)?;
        if !self.load_class.is_shiftable()
            && (run.allowed_start_min != run.baseline_start
                || run.allowed_start_max != run.baseline_start)
        {
            return Err(err(format!(
                "{} load cannot have an allowed window other than its baseline",
                self.load_class
            )));
        }
        Ok(run)
    }
}

fn parse_rows<R: Read>(reader: R) -> Result<Vec<CatalogRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.get(0) == Some("id") {
            continue;
        }
        let perr = |msg: String| Error::Parse { line, msg };
        if rec.len() != 7 && rec.len() != 9 {
            return Err(perr(format!("expected 7 or 9 fields, found {}", rec.len())));
        }
        let int = |i: usize| -> Result<usize> {
            rec[i].parse::<usize>().map_err(|_| {
                perr(format!(
                    "{} `{}` is not a slot count",
                    CATALOG_HEADER[i], &rec[i]
                ))
            })
        };
        let opt = |i: usize| -> Result<Option<usize>> {
            match rec.get(i) {
                None | Some("") | Some("-") => Ok(None),
                Some(_) => int(i).map(Some),
            }
        };
        let power: f64 = rec[2]
            .parse()
            .map_err(|_| perr(format!("power_rate_watts `{}` is not a number", &rec[2])))?;
        rows.push(CatalogRow {
            id: rec[0].to_string(),
            name: rec[1].to_string(),
            power_rate_watts: power,
            load_class: rec[3].parse().map_err(perr)?,
            duration_slots: int(4)?,
            baseline_start: int(5)?,
            baseline_end: int(6)?,
            allowed_start_min: opt(7)?,
            allowed_start_max: opt(8)?,
        });
        if rows.last().is_some_and(|r| r.id.is_empty()) {
            return Err(perr("empty id".into()));
        }
    }
    Ok(rows)
}

/// Groups rows into appliances, preserving first-appearance order.
pub fn appliances_from_rows(rows: &[CatalogRow], grid: &TimeGrid) -> Result<Vec<Appliance>> {
    let mut out: Vec<Appliance> = Vec::new();
    for row in rows {
        let run = row.to_run(grid)?;
        match out.iter_mut().find(|a| a.id == row.id) {
            Some(a) => {
                if a.name != row.name
                    || a.power_rate_watts != row.power_rate_watts
                    || a.load_class != row.load_class
                {
                    return Err(Error::Row {
                        id: row.id.clone(),
                        msg: "repeated id must keep the same name, power rate and load class"
                            .into(),
                    });
                }
                a.runs.push(run);
            }
            None => out.push(Appliance {
                id: row.id.clone(),
                name: row.name.clone(),
                power_rate_watts: row.power_rate_watts,
                load_class: row.load_class,
                runs: vec![run],
            }),
        }
    }
    for a in &out {
        a.check(grid).map_err(|e| Error::Row {
            id: a.id.clone(),
            msg: e.to_string(),
        })?;
    }
    Ok(out)
}

pub fn parse_catalog(text: &str, grid: &TimeGrid) -> Result<Vec<Appliance>> {
    appliances_from_rows(&parse_rows(text.as_bytes())?, grid)
}

pub fn load_catalog(path: impl AsRef<Path>, grid: &TimeGrid) -> Result<Vec<Appliance>> {
    let text = std::fs::read_to_string(path)?;
    parse_catalog(&text, grid)
}

/// Serializes a catalog with explicit allowed bounds on every row.
pub fn catalog_to_csv(appliances: &[Appliance]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CATALOG_HEADER).map_err(io)?;
    for a in appliances {
        for r in &a.runs {
            w.write_record([
                a.id.clone(),
                a.name.clone(),
                a.power_rate_watts.to_string(),
                a.load_class.to_string(),
                r.duration_slots.to_string(),
                r.baseline_start.to_string(),
                r.baseline_end().to_string(),
                r.allowed_start_min.to_string(),
                r.allowed_start_max.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn save_catalog(appliances: &[Appliance], path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), catalog_to_csv(appliances)?.as_bytes())
}
