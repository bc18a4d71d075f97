use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate};

use super::date::{Date, TimeAnnotation};
use crate::error::{Result, TeroError};

/// Surjection from calendar dates onto time-step indices `0..n_steps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeBinning {
    /// Consecutive windows of `unit_days` days starting at `origin`.
    FixedUnit {
        unit_days: u32,
        origin: NaiveDate,
        n_steps: usize,
    },
    /// Year bins grown until each holds at least `threshold` fact mentions.
    /// `starts[i]` is the first year of bin `i`; the last bin is open-ended.
    Threshold { threshold: u64, starts: Vec<i32> },
}

/// Time annotation after binning. An interval whose endpoints land in the
/// same step collapses to a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimeKey {
    Point(usize),
    Interval(usize, usize),
    BeginOnly(usize),
    EndOnly(usize),
}

impl TimeBinning {
    pub fn n_steps(&self) -> usize {
        match self {
            TimeBinning::FixedUnit { n_steps, .. } => *n_steps,
            TimeBinning::Threshold { starts, .. } => starts.len(),
        }
    }

    pub fn index(&self, date: &Date) -> Result<usize> {
        match self {
            TimeBinning::FixedUnit {
                unit_days,
                origin,
                n_steps,
            } => {
                let day = date.to_naive().ok_or_else(|| {
                    TimeBinning::error(format!("fixed-unit binning needs a full date, got {date}"))
                })?;
                let offset = (day - *origin).num_days();
                if offset < 0 {
                    return Err(TimeBinning::error(format!(
                        "{date} precedes origin {origin}"
                    )));
                }
                let idx = (offset / i64::from(*unit_days)) as usize;
                if idx >= *n_steps {
                    return Err(TimeBinning::error(format!(
                        "{date} lies after the binned span"
                    )));
                }
                Ok(idx)
            }
            TimeBinning::Threshold { starts, .. } => {
                let after = starts.partition_point(|&s| s <= date.year);
                if after == 0 {
                    return Err(TimeBinning::error(format!(
                        "year {} precedes the first bin ({})",
                        date.year, starts[0]
                    )));
                }
                Ok(after - 1)
            }
        }
    }

    pub fn key(&self, time: &TimeAnnotation) -> Result<TimeKey> {
        Ok(match time {
            TimeAnnotation::Point(d) => TimeKey::Point(self.index(d)?),
            TimeAnnotation::Interval { begin, end } => {
                let (b, e) = (self.index(begin)?, self.index(end)?);
                if b == e {
                    TimeKey::Point(b)
                } else {
                    TimeKey::Interval(b, e)
                }
            }
            TimeAnnotation::BeginOnly(d) => TimeKey::BeginOnly(self.index(d)?),
            TimeAnnotation::EndOnly(d) => TimeKey::EndOnly(self.index(d)?),
        })
    }

    /// Human-readable lower bound of every bin, in index order.
    pub fn boundaries(&self) -> Vec<String> {
        match self {
            TimeBinning::FixedUnit {
                unit_days,
                origin,
                n_steps,
            } => (0..*n_steps)
                .map(|i| {
                    let start = *origin + Duration::days(i as i64 * i64::from(*unit_days));
                    Date::from_naive(start).to_string()
                })
                .collect(),
            TimeBinning::Threshold { starts, .. } => starts.iter().map(|y| y.to_string()).collect(),
        }
    }

    pub const MANIFEST_FILE: &'static str = "binning.tsv";

    /// Manifest text: `key<TAB>value` lines for mode, parameter, step count
    /// and origin, then one `boundary<TAB>value` line per bin.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        match self {
            TimeBinning::FixedUnit {
                unit_days, origin, ..
            } => {
                let _ = writeln!(out, "mode\tfixed-unit");
                let _ = writeln!(out, "parameter\t{unit_days}");
                let _ = writeln!(out, "n_steps\t{}", self.n_steps());
                let _ = writeln!(out, "origin\t{}", Date::from_naive(*origin));
            }
            TimeBinning::Threshold { threshold, starts } => {
                let _ = writeln!(out, "mode\tthreshold");
                let _ = writeln!(out, "parameter\t{threshold}");
                let _ = writeln!(out, "n_steps\t{}", self.n_steps());
                let _ = writeln!(out, "origin\t{}", starts[0]);
            }
        }
        for b in self.boundaries() {
            let _ = writeln!(out, "boundary\t{b}");
        }
        out
    }

    pub fn from_manifest(text: &str) -> Result<Self> {
        let mut mode = None;
        let mut parameter = None;
        let mut n_steps = None;
        let mut origin = None;
        let mut boundaries = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| TimeBinning::error(format!("bad manifest line `{line}`")))?;
            match key {
                "mode" => mode = Some(value.to_string()),
                "parameter" => parameter = Some(value.to_string()),
                "n_steps" => n_steps = Some(value.to_string()),
                "origin" => origin = Some(value.to_string()),
                "boundary" => boundaries.push(value.to_string()),
                other => {
                    return Err(TimeBinning::error(format!(
                        "unknown manifest key `{other}`"
                    )))
                }
            }
        }
        let missing = |what: &str| TimeBinning::error(format!("manifest lacks `{what}`"));
        let number = |v: &str| -> Result<u64> {
            v.parse()
                .map_err(|_| TimeBinning::error(format!("bad number `{v}` in manifest")))
        };
        let n_steps = number(&n_steps.ok_or_else(|| missing("n_steps"))?)? as usize;
        let parameter = number(&parameter.ok_or_else(|| missing("parameter"))?)?;
        let binning = match mode.as_deref() {
            Some("fixed-unit") => {
                let origin: Date = origin.ok_or_else(|| missing("origin"))?.parse()?;
                TimeBinning::FixedUnit {
                    unit_days: u32::try_from(parameter)
                        .map_err(|_| TimeBinning::error("unit too large".into()))?,
                    origin: origin
                        .to_naive()
                        .ok_or_else(|| missing("full origin date"))?,
                    n_steps,
                }
            }
            Some("threshold") => {
                let starts = boundaries
                    .iter()
                    .map(|b| {
                        b.parse::<i32>()
                            .map_err(|_| TimeBinning::error(format!("bad year `{b}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if starts.is_empty() || starts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(TimeBinning::error("bin starts must ascend".into()));
                }
                TimeBinning::Threshold {
                    threshold: parameter,
                    starts,
                }
            }
            _ => return Err(missing("mode")),
        };
        if binning.n_steps() != n_steps || n_steps == 0 {
            return Err(TimeBinning::error(
                "n_steps disagrees with boundaries".into(),
            ));
        }
        Ok(binning)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(Self::MANIFEST_FILE);
        fs::write(&path, self.to_manifest()).map_err(TeroError::file(&path))?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(Self::MANIFEST_FILE);
        Self::from_manifest(&fs::read_to_string(&path).map_err(TeroError::file(&path))?)
    }

    fn error(message: String) -> TeroError {
        TeroError::Binning(message)
    }
}

/// Fixed-length windows of `unit_days` days anchored at `origin`. The span
/// runs from `origin` through the latest date in `dates`, inclusive.
pub fn bin_fixed(dates: &[Date], unit_days: u32, origin: Date) -> Result<TimeBinning> {
    if unit_days == 0 {
        return Err(TimeBinning::error(
            "time unit must be at least one day".into(),
        ));
    }
    let origin_day = origin
        .to_naive()
        .ok_or_else(|| TimeBinning::error(format!("origin {origin} is not a full date")))?;
    let mut last = None;
    for d in dates {
        let day = d
            .to_naive()
            .ok_or_else(|| TimeBinning::error(format!("{d} is not a full date")))?;
        if day < origin_day {
            return Err(TimeBinning::error(format!("{d} precedes origin {origin}")));
        }
        last = last.max(Some(day));
    }
    let last = last.ok_or_else(|| TimeBinning::error("no dates to bin".into()))?;
    let span_days = (last - origin_day).num_days() + 1;
    let unit = i64::from(unit_days);
    Ok(TimeBinning::FixedUnit {
        unit_days,
        origin: origin_day,
        n_steps: ((span_days + unit - 1) / unit) as usize,
    })
}

/// Sweeps years in ascending order, closing a bin once its accumulated
/// count reaches `threshold`. A trailing partial bin is merged into the
/// previous one.
pub fn bin_threshold(year_counts: &BTreeMap<i32, u64>, threshold: u64) -> Result<TimeBinning> {
    if threshold == 0 {
        return Err(TimeBinning::error("threshold must be at least 1".into()));
    }
    if year_counts.is_empty() {
        return Err(TimeBinning::error("no years to bin".into()));
    }
    let mut starts = Vec::new();
    let mut open: Option<i32> = None;
    let mut acc = 0u64;
    for (&year, &count) in year_counts {
        let start = *open.get_or_insert(year);
        acc = acc.saturating_add(count);
        if acc >= threshold {
            starts.push(start);
            open = None;
            acc = 0;
        }
    }
    if let (Some(start), true) = (open, starts.is_empty()) {
        starts.push(start);
    }
    Ok(TimeBinning::Threshold { threshold, starts })
}

/// Counts endpoint mentions per year. Points count as both begin and end.
pub fn year_fact_counts<'a>(
    times: impl IntoIterator<Item = &'a TimeAnnotation>,
) -> BTreeMap<i32, u64> {
    let mut counts = BTreeMap::new();
    for t in times {
        for d in t.endpoints() {
            *counts.entry(d.year).or_insert(0) += 1;
        }
    }
    counts
}
