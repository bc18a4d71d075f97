//! Dataset ingestion: TSV parsing, vocabularies, time binning and the
//! expansion of facts into training quadruples.

mod binning;
mod date;
mod vocab;

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

pub use binning::{bin_fixed, bin_threshold, year_fact_counts, TimeBinning, TimeKey};
pub use date::{Date, TimeAnnotation};
pub use vocab::{Interner, Vocab};

use crate::error::{Result, TeroError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// `s<TAB>r<TAB>o<TAB>YYYY-MM-DD`
    PointTsv,
    /// `s<TAB>r<TAB>o<TAB>begin<TAB>end`, unknown components written as `#`.
    IntervalTsv,
}

impl DatasetFormat {
    fn n_fields(self) -> usize {
        match self {
            DatasetFormat::PointTsv => 4,
            DatasetFormat::IntervalTsv => 5,
        }
    }
}

impl FromStr for DatasetFormat {
    type Err = TeroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "point-tsv" | "point" => Ok(DatasetFormat::PointTsv),
            "interval-tsv" | "interval" => Ok(DatasetFormat::IntervalTsv),
            other => Err(TeroError::Config(format!(
                "unknown dataset format `{other}`"
            ))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetFormat::PointTsv => "point-tsv",
            DatasetFormat::IntervalTsv => "interval-tsv",
        })
    }
}

/// A fact as it appears in a dataset file, before id assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawFact {
    pub subject: String,
    pub relation: String,
    pub object: String,
    pub time: TimeAnnotation,
}

impl RawFact {
    pub fn parse_line(line: &str, format: DatasetFormat) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != format.n_fields() {
            return Err(format!(
                "expected {} tab-separated fields, found {}",
                format.n_fields(),
                fields.len()
            ));
        }
        let time = match format {
            DatasetFormat::PointTsv => {
                let date = Date::parse_field(fields[3].trim())
                    .map_err(|e| e.to_string())?
                    .ok_or("fact has no time information")?;
                TimeAnnotation::Point(date)
            }
            DatasetFormat::IntervalTsv => {
                let begin = Date::parse_field(fields[3].trim()).map_err(|e| e.to_string())?;
                let end = Date::parse_field(fields[4].trim()).map_err(|e| e.to_string())?;
                TimeAnnotation::from_endpoints(begin, end).map_err(|e| e.to_string())?
            }
        };
        Ok(RawFact {
            subject: fields[0].to_string(),
            relation: fields[1].to_string(),
            object: fields[2].to_string(),
            time,
        })
    }

    /// Canonical line for `format`. Non-point annotations cannot be written
    /// in the point format.
    pub fn to_line(&self, format: DatasetFormat) -> Result<String> {
        let head = format!("{}\t{}\t{}", self.subject, self.relation, self.object);
        match (format, &self.time) {
            (DatasetFormat::PointTsv, TimeAnnotation::Point(d)) => Ok(format!("{head}\t{d}")),
            (DatasetFormat::PointTsv, other) => Err(TeroError::Config(format!(
                "annotation {other} cannot be written as a point"
            ))),
            (DatasetFormat::IntervalTsv, t) => Ok(format!(
                "{head}\t{}\t{}",
                Date::format_field(t.begin().as_ref()),
                Date::format_field(t.end().as_ref())
            )),
        }
    }
}

/// Reads every fact of one split file. Blank lines are skipped.
pub fn read_raw(path: &Path, format: DatasetFormat) -> Result<Vec<RawFact>> {
    let reader = BufReader::new(fs::File::open(path).map_err(TeroError::file(path))?);
    let mut facts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fact = RawFact::parse_line(line, format).map_err(|message| TeroError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        })?;
        facts.push(fact);
    }
    Ok(facts)
}

/// A fact with dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quadruple {
    pub subject: usize,
    pub relation: usize,
    pub object: usize,
    pub time: TimeAnnotation,
}

impl Vocab {
    /// Builds a vocabulary over every fact of every split, in order of first
    /// appearance.
    pub fn build<'a>(splits: impl IntoIterator<Item = &'a [RawFact]>) -> Self {
        let mut vocab = Vocab::default();
        for split in splits {
            for fact in split {
                vocab.entities.intern(&fact.subject);
                vocab.relations.intern(&fact.relation);
                vocab.entities.intern(&fact.object);
            }
        }
        vocab
    }

    pub fn encode(&self, fact: &RawFact) -> Result<Quadruple> {
        Ok(Quadruple {
            subject: self.entity_id(&fact.subject)?,
            relation: self.relation_id(&fact.relation)?,
            object: self.entity_id(&fact.object)?,
            time: fact.time,
        })
    }

    pub fn encode_all(&self, facts: &[RawFact]) -> Result<Vec<Quadruple>> {
        facts.iter().map(|f| self.encode(f)).collect()
    }
}

/// Parses a single file and builds a vocabulary from it alone.
pub fn parse_dataset(path: &Path, format: DatasetFormat) -> Result<(Vocab, Vec<Quadruple>)> {
    let raw = read_raw(path, format)?;
    let vocab = Vocab::build([raw.as_slice()]);
    let quads = vocab.encode_all(&raw)?;
    Ok((vocab, quads))
}

/// Train/valid/test splits encoded with a vocabulary shared across all
/// three.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub format: DatasetFormat,
    pub vocab: Vocab,
    pub train: Vec<Quadruple>,
    pub valid: Vec<Quadruple>,
    pub test: Vec<Quadruple>,
}

impl Dataset {
    pub fn load(train: &Path, valid: &Path, test: &Path, format: DatasetFormat) -> Result<Self> {
        let train = read_raw(train, format)?;
        let valid = read_raw(valid, format)?;
        let test = read_raw(test, format)?;
        Self::from_raw(&train, &valid, &test, format)
    }

    pub fn from_raw(
        train: &[RawFact],
        valid: &[RawFact],
        test: &[RawFact],
        format: DatasetFormat,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(TeroError::Empty("training split".to_string()));
        }
        let vocab = Vocab::build([train, valid, test]);
        Self::with_vocab(vocab, train, valid, test, format)
    }

    /// Encodes the splits against an existing vocabulary.
    pub fn with_vocab(
        vocab: Vocab,
        train: &[RawFact],
        valid: &[RawFact],
        test: &[RawFact],
        format: DatasetFormat,
    ) -> Result<Self> {
        Ok(Dataset {
            format,
            train: vocab.encode_all(train)?,
            valid: vocab.encode_all(valid)?,
            test: vocab.encode_all(test)?,
            vocab,
        })
    }

    pub fn all_facts(&self) -> impl Iterator<Item = &Quadruple> {
        self.train.iter().chain(&self.valid).chain(&self.test)
    }

    /// Every date mentioned by any split.
    pub fn dates(&self) -> Vec<Date> {
        self.all_facts().flat_map(|q| q.time.endpoints()).collect()
    }
}

/// Which relation embedding a training quadruple uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Begin,
    End,
}

/// A binned quadruple as consumed by the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainQuad {
    pub subject: usize,
    pub relation: usize,
    pub slot: Slot,
    pub object: usize,
    pub step: usize,
}

/// Splits facts into begin/end training quadruples. With `dual` off every
/// quadruple uses the begin slot and each fact yields one quadruple per
/// distinct known endpoint.
pub fn expand_for_training(
    facts: &[Quadruple],
    binning: &TimeBinning,
    dual: bool,
) -> Result<Vec<TrainQuad>> {
    let mut out = Vec::with_capacity(facts.len() * if dual { 2 } else { 1 });
    for fact in facts {
        let quad = |slot, step| TrainQuad {
            subject: fact.subject,
            relation: fact.relation,
            slot,
            object: fact.object,
            step,
        };
        let key = binning.key(&fact.time)?;
        match (key, dual) {
            (TimeKey::Point(t), true) => {
                out.push(quad(Slot::Begin, t));
                out.push(quad(Slot::End, t));
            }
            (TimeKey::Point(t), false) => out.push(quad(Slot::Begin, t)),
            (TimeKey::Interval(b, e), true) => {
                out.push(quad(Slot::Begin, b));
                out.push(quad(Slot::End, e));
            }
            (TimeKey::Interval(b, e), false) => {
                out.push(quad(Slot::Begin, b));
                out.push(quad(Slot::Begin, e));
            }
            (TimeKey::BeginOnly(t), _) => out.push(quad(Slot::Begin, t)),
            (TimeKey::EndOnly(t), true) => out.push(quad(Slot::End, t)),
            (TimeKey::EndOnly(t), false) => out.push(quad(Slot::Begin, t)),
        }
    }
    Ok(out)
}
