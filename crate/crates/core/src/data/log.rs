use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{GamaError, Result};

pub const CSV_HEADER: &str = "user_id,item_id,category_id,brand_id,event,timestamp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Event {
    Exposure,
    Click,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::Exposure => "exposure",
            Event::Click => "click",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Event {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exposure" => Ok(Event::Exposure),
            "click" => Ok(Event::Click),
            other => Err(GamaError::Parse(format!("unknown event `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRow {
    pub user_id: String,
    pub item_id: String,
    pub category_id: String,
    pub brand_id: String,
    pub event: Event,
    /// Seconds.
    pub timestamp: i64,
}

impl LogRow {
    fn parse(line: &str) -> Option<Self> {
        let mut fields = line.split(',');
        let mut next = || fields.next().map(str::trim);
        let row = LogRow {
            user_id: next()?.to_owned(),
            item_id: next()?.to_owned(),
            category_id: next()?.to_owned(),
            brand_id: next()?.to_owned(),
            event: next()?.parse().ok()?,
            timestamp: next()?.parse().ok()?,
        };
        if fields.next().is_some() || row.user_id.is_empty() || row.item_id.is_empty() {
            return None;
        }
        Some(row)
    }

    fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.user_id, self.item_id, self.category_id, self.brand_id, self.event, self.timestamp
        )
    }
}

/// Rows of a user/item interaction log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub rows: Vec<LogRow>,
}

impl InteractionLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(min, max)` timestamp, if any rows exist.
    pub fn time_range(&self) -> Option<(i64, i64)> {
        let min = self.rows.iter().map(|r| r.timestamp).min()?;
        let max = self.rows.iter().map(|r| r.timestamp).max()?;
        Some((min, max))
    }
}

/// Outcome of a CSV load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub parsed: usize,
    pub skipped: usize,
}

pub fn load_csv(path: &Path) -> Result<(InteractionLog, LoadReport)> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => String::new(),
    };
    let header = header.trim_start_matches('\u{feff}').trim_end();
    if header != CSV_HEADER {
        return Err(GamaError::Header {
            path: path.to_owned(),
            expected: CSV_HEADER.to_owned(),
            found: header.to_owned(),
        });
    }
    let mut log = InteractionLog::default();
    let mut report = LoadReport::default();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match LogRow::parse(&line) {
            Some(row) => {
                log.rows.push(row);
                report.parsed += 1;
            }
            None => report.skipped += 1,
        }
    }
    Ok((log, report))
}

pub fn write_csv(path: &Path, log: &InteractionLog) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for row in &log.rows {
        row.write_to(&mut w)?;
    }
    w.flush()?;
    Ok(())
}
