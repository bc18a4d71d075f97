use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;

use crate::error::{Result, TeroError};

/// Calendar date with optional month and day. Years are signed and may be
/// negative (BCE).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Date {
    pub year: i32,
    pub month: Option<u8>,
    pub day: Option<u8>,
}

impl Date {
    pub fn ymd(year: i32, month: u8, day: u8) -> Result<Self> {
        let date = Date {
            year,
            month: Some(month),
            day: Some(day),
        };
        date.validate()?;
        Ok(date)
    }

    pub fn year_only(year: i32) -> Self {
        Date {
            year,
            month: None,
            day: None,
        }
    }

    pub fn is_full(&self) -> bool {
        self.month.is_some() && self.day.is_some()
    }

    pub fn to_naive(&self) -> Option<NaiveDate> {
        match (self.month, self.day) {
            (Some(m), Some(d)) => NaiveDate::from_ymd_opt(self.year, m as u32, d as u32),
            _ => None,
        }
    }

    pub fn from_naive(date: NaiveDate) -> Self {
        use chrono::Datelike;
        Date {
            year: date.year(),
            month: Some(date.month() as u8),
            day: Some(date.day() as u8),
        }
    }

    /// Compares on the components known for both dates; unknown components
    /// compare equal.
    pub fn calendar_cmp(&self, other: &Date) -> Ordering {
        self.year
            .cmp(&other.year)
            .then_with(|| match (self.month, other.month) {
                (Some(a), Some(b)) => a.cmp(&b),
                _ => Ordering::Equal,
            })
            .then_with(|| match (self.month, other.month, self.day, other.day) {
                (Some(_), Some(_), Some(a), Some(b)) => a.cmp(&b),
                _ => Ordering::Equal,
            })
    }

    fn validate(&self) -> Result<()> {
        if let Some(m) = self.month {
            if !(1..=12).contains(&m) {
                return Err(TeroError::Date(self.to_string()));
            }
        }
        if self.day.is_some() && self.month.is_some() && self.to_naive().is_none() {
            return Err(TeroError::Date(self.to_string()));
        }
        if let (None, Some(_)) = (self.month, self.day) {
            return Err(TeroError::Date(self.to_string()));
        }
        Ok(())
    }

    /// Parses one date field. A fully unknown date (`####-##-##`) yields
    /// `Ok(None)`.
    pub fn parse_field(text: &str) -> Result<Option<Date>> {
        let bad = || TeroError::Date(text.to_string());
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let mut parts = body.split('-');
        let year_part = parts.next().ok_or_else(bad)?;
        let month_part = parts.next();
        let day_part = parts.next();
        if parts.next().is_some() || year_part.is_empty() {
            return Err(bad());
        }
        if !year_part.chars().all(|c| c.is_ascii_digit() || c == '#') {
            return Err(bad());
        }
        if year_part.chars().all(|c| c == '#') {
            // Unknown year: the rest must be unknown as well.
            let rest_unknown = [month_part, day_part]
                .iter()
                .flatten()
                .all(|p| !p.is_empty() && p.chars().all(|c| c == '#'));
            return if rest_unknown && !negative {
                Ok(None)
            } else {
                Err(bad())
            };
        }
        // Partially known years such as `19##` resolve to their lower bound.
        let digits: String = year_part
            .chars()
            .map(|c| if c == '#' { '0' } else { c })
            .collect();
        let mut year: i32 = digits.parse().map_err(|_| bad())?;
        if negative {
            year = -year;
        }
        let component = |part: Option<&str>| -> Result<Option<u8>> {
            match part {
                None => Ok(None),
                Some(p) if !p.is_empty() && p.chars().all(|c| c == '#') => Ok(None),
                Some(p) if !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()) => {
                    p.parse().map(Some).map_err(|_| bad())
                }
                Some(_) => Err(bad()),
            }
        };
        let month = component(month_part)?;
        // A day without a month carries no usable information.
        let day = month.and(component(day_part)?);
        let date = Date { year, month, day };
        date.validate().map_err(|_| bad())?;
        Ok(Some(date))
    }

    /// Formats an optional date, writing `####-##-##` for `None`.
    pub fn format_field(date: Option<&Date>) -> String {
        match date {
            Some(d) => d.to_string(),
            None => "####-##-##".to_string(),
        }
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.year < 0 {
            write!(f, "-{:04}", -(self.year as i64))?;
        } else {
            write!(f, "{:04}", self.year)?;
        }
        match self.month {
            Some(m) => write!(f, "-{m:02}")?,
            None => f.write_str("-##")?,
        }
        match self.day {
            Some(d) => write!(f, "-{d:02}"),
            None => f.write_str("-##"),
        }
    }
}

impl FromStr for Date {
    type Err = TeroError;

    fn from_str(s: &str) -> Result<Self> {
        Date::parse_field(s)?.ok_or_else(|| TeroError::Date(s.to_string()))
    }
}

/// Time annotation of a fact: a point, a closed interval, or an interval
/// with one unknown endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeAnnotation {
    Point(Date),
    Interval { begin: Date, end: Date },
    BeginOnly(Date),
    EndOnly(Date),
}

impl TimeAnnotation {
    /// Builds the canonical annotation from two optional endpoints.
    pub fn from_endpoints(begin: Option<Date>, end: Option<Date>) -> Result<Self> {
        match (begin, end) {
            (Some(b), Some(e)) if b == e => Ok(TimeAnnotation::Point(b)),
            (Some(b), Some(e)) => {
                if b.calendar_cmp(&e) == Ordering::Greater {
                    Err(TeroError::Date(format!(
                        "interval begins after it ends: [{b}, {e}]"
                    )))
                } else {
                    Ok(TimeAnnotation::Interval { begin: b, end: e })
                }
            }
            (Some(b), None) => Ok(TimeAnnotation::BeginOnly(b)),
            (None, Some(e)) => Ok(TimeAnnotation::EndOnly(e)),
            (None, None) => Err(TeroError::Date(
                "fact has neither a begin nor an end time".to_string(),
            )),
        }
    }

    pub fn begin(&self) -> Option<Date> {
        match *self {
            TimeAnnotation::Point(d) | TimeAnnotation::BeginOnly(d) => Some(d),
            TimeAnnotation::Interval { begin, .. } => Some(begin),
            TimeAnnotation::EndOnly(_) => None,
        }
    }

    pub fn end(&self) -> Option<Date> {
        match *self {
            TimeAnnotation::Point(d) | TimeAnnotation::EndOnly(d) => Some(d),
            TimeAnnotation::Interval { end, .. } => Some(end),
            TimeAnnotation::BeginOnly(_) => None,
        }
    }

    /// Every known endpoint; a point contributes its date twice, once as
    /// begin and once as end.
    pub fn endpoints(&self) -> impl Iterator<Item = Date> {
        self.begin().into_iter().chain(self.end())
    }
}

impl fmt::Display for TimeAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeAnnotation::Point(d) => write!(f, "{d}"),
            _ => write!(
                f,
                "[{}, {}]",
                Date::format_field(self.begin().as_ref()),
                Date::format_field(self.end().as_ref())
            ),
        }
    }
}
