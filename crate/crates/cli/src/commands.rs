use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use tero::data::{
    bin_fixed, bin_threshold, read_raw, year_fact_counts, Dataset, DatasetFormat, Date, RawFact,
    TimeAnnotation, TimeBinning, Vocab,
};
use tero::eval::{evaluate_with, top_candidates, EvalReport, FilterSet, Side, TiePolicy};
use tero::model::{load_checkpoint, save_checkpoint, Checkpoint, ModelParams};
use tero::training::{train_with_observer, TrainData, ValidationRecord};
use tero::TeroError;

use crate::error::CliError;
use crate::settings::RunConfig;

pub const LOG_FILE: &str = "train_log.tsv";
pub const REPORT_FILE: &str = "eval.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ties {
    Mean,
    Optimistic,
    Pessimistic,
}

impl From<Ties> for TiePolicy {
    fn from(t: Ties) -> Self {
        match t {
            Ties::Mean => TiePolicy::Mean,
            Ties::Optimistic => TiePolicy::Optimistic,
            Ties::Pessimistic => TiePolicy::Pessimistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuerySide {
    Subject,
    Object,
}

impl From<QuerySide> for Side {
    fn from(s: QuerySide) -> Self {
        match s {
            QuerySide::Subject => Side::Subject,
            QuerySide::Object => Side::Object,
        }
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn read_optional(path: &Option<PathBuf>, format: DatasetFormat) -> tero::Result<Vec<RawFact>> {
    match path {
        Some(p) => read_raw(p, format),
        None => Ok(Vec::new()),
    }
}

type Splits = (Vec<RawFact>, Vec<RawFact>, Vec<RawFact>);

fn load_splits(run: &RunConfig) -> Result<Splits, CliError> {
    let train = read_raw(required(&run.train, "train")?, run.format)?;
    let valid = read_optional(&run.valid, run.format)?;
    let test = read_optional(&run.test, run.format)?;
    Ok((train, valid, test))
}

/// Fixed-unit steps from the earliest date for point data, year bins for
/// interval data.
pub fn build_binning(run: &RunConfig, ds: &Dataset) -> tero::Result<TimeBinning> {
    match run.format {
        DatasetFormat::PointTsv => {
            let dates = ds.dates();
            let origin = dates
                .iter()
                .min()
                .copied()
                .ok_or_else(|| TeroError::Empty("dataset".to_string()))?;
            bin_fixed(&dates, run.time_unit, origin)
        }
        DatasetFormat::IntervalTsv => {
            let counts = year_fact_counts(ds.all_facts().map(|q| &q.time));
            bin_threshold(&counts, run.time_threshold)
        }
    }
}

/// Loads the splits, builds vocabulary and binning, and writes both into
/// the output directory.
fn prepare(run: &RunConfig) -> Result<(Dataset, TimeBinning), CliError> {
    let (train, valid, test) = load_splits(run)?;
    let ds = Dataset::from_raw(&train, &valid, &test, run.format)?;
    let binning = build_binning(run, &ds)?;
    fs::create_dir_all(&run.out_dir)?;
    ds.vocab.save(&run.out_dir)?;
    binning.save(&run.out_dir)?;
    Ok((ds, binning))
}

pub fn preprocess(run: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    let (ds, binning) = prepare(run)?;
    writeln!(out, "entities\t{}", ds.vocab.n_entities())?;
    writeln!(out, "relations\t{}", ds.vocab.n_relations())?;
    writeln!(out, "time_steps\t{}", binning.n_steps())?;
    writeln!(out, "train\t{}", ds.train.len())?;
    writeln!(out, "valid\t{}", ds.valid.len())?;
    writeln!(out, "test\t{}", ds.test.len())?;
    Ok(())
}

pub fn train(run: &RunConfig, out: &mut impl Write) -> Result<(), CliError> {
    let (ds, binning) = prepare(run)?;
    let filter = FilterSet::build(ds.all_facts(), &binning)?;
    let data = TrainData {
        train: &ds.train,
        valid: &ds.valid,
        filter: &filter,
        binning: &binning,
        n_entities: ds.vocab.n_entities(),
        n_relations: ds.vocab.n_relations(),
    };

    let log_path = run.out_dir.join(LOG_FILE);
    let mut log = fs::File::create(&log_path).map_err(TeroError::file(&log_path))?;
    writeln!(log, "{}", ValidationRecord::TSV_HEADER)?;
    writeln!(out, "{}", ValidationRecord::TSV_HEADER)?;
    let mut io_error = None;
    let outcome = train_with_observer::<f32>(&data, &run.train_config, |rec| {
        let line = rec.to_tsv();
        if let Err(e) = writeln!(log, "{line}").and_then(|_| writeln!(out, "{line}")) {
            io_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }

    if let Some(parent) = run
        .checkpoint
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        fs::create_dir_all(parent)?;
    }
    let sidecar = run.out_dir.to_string_lossy();
    save_checkpoint(&outcome.params, &sidecar, &run.checkpoint)?;
    match outcome.best_epoch {
        Some(e) => writeln!(out, "best_epoch\t{e}")?,
        None => writeln!(out, "best_epoch\tnone")?,
    }
    writeln!(out, "checkpoint\t{}", run.checkpoint.display())?;
    Ok(())
}

/// A checkpoint together with the vocabulary and binning it was trained
/// against.
struct Model {
    params: ModelParams<f32>,
    vocab: Vocab,
    binning: TimeBinning,
}

fn load_model(run: &RunConfig) -> Result<Model, CliError> {
    let Checkpoint { params, sidecar } = load_checkpoint::<f32>(&run.checkpoint)?;
    // Fall back to the checkpoint's own directory when the recorded sidecar
    // path is relative to somewhere else.
    let recorded = PathBuf::from(&sidecar);
    let dir = if recorded.join(Vocab::ENTITY_FILE).is_file() {
        recorded
    } else {
        run.checkpoint
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    };
    let vocab = Vocab::load(&dir)?;
    let binning = TimeBinning::load(&dir)?;
    let sh = params.shape();
    if sh.n_entities != vocab.n_entities()
        || sh.n_relations != vocab.n_relations()
        || sh.n_steps != binning.n_steps()
    {
        return Err(CliError::Core(TeroError::Checkpoint(format!(
            "tables ({} entities, {} relations, {} steps) do not match the artifacts in {} ({}, {}, {})",
            sh.n_entities,
            sh.n_relations,
            sh.n_steps,
            dir.display(),
            vocab.n_entities(),
            vocab.n_relations(),
            binning.n_steps()
        ))));
    }
    Ok(Model {
        params,
        vocab,
        binning,
    })
}

pub struct EvalOptions {
    pub ties: Ties,
    pub report: Option<PathBuf>,
    pub ranks: Option<PathBuf>,
}

pub fn eval(
    run: &RunConfig,
    opts: &EvalOptions,
    out: &mut impl Write,
) -> Result<EvalReport, CliError> {
    let model = load_model(run)?;
    let test_path = required(&run.test, "test")?;
    let train = read_optional(&run.train, run.format)?;
    let valid = read_optional(&run.valid, run.format)?;
    let test = read_raw(test_path, run.format)?;
    let ds = Dataset::with_vocab(model.vocab, &train, &valid, &test, run.format)?;
    let filter = FilterSet::build(ds.all_facts(), &model.binning)?;
    let report = evaluate_with(
        &model.params,
        &ds.test,
        &filter,
        &model.binning,
        opts.ties.into(),
    )?;

    let text = report.to_tsv();
    write!(out, "{text}")?;
    fs::create_dir_all(&run.out_dir)?;
    let report_path = opts
        .report
        .clone()
        .unwrap_or_else(|| run.out_dir.join(REPORT_FILE));
    fs::write(&report_path, &text).map_err(TeroError::file(&report_path))?;

    if let Some(path) = &opts.ranks {
        let mut dump = String::from("subject\trelation\tobject\ttime\tside\trank\n");
        for r in &report.ranks {
            let q = &ds.test[r.fact];
            dump += &format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                ds.vocab.entities.name(q.subject).unwrap_or("?"),
                ds.vocab.relations.name(q.relation).unwrap_or("?"),
                ds.vocab.entities.name(q.object).unwrap_or("?"),
                q.time,
                r.side,
                r.rank
            );
        }
        fs::write(path, dump).map_err(TeroError::file(path))?;
    }
    Ok(report)
}

pub struct PredictQuery {
    pub entity: String,
    pub relation: String,
    pub time: String,
    pub time_end: Option<String>,
    pub side: QuerySide,
    pub top: usize,
}

pub fn predict(run: &RunConfig, q: &PredictQuery, out: &mut impl Write) -> Result<(), CliError> {
    let model = load_model(run)?;
    let known = model.vocab.entity_id(&q.entity)?;
    let relation = model.vocab.relation_id(&q.relation)?;
    let begin = Date::parse_field(&q.time)?;
    let end = match &q.time_end {
        Some(t) => Date::parse_field(t)?,
        None => begin,
    };
    let time = TimeAnnotation::from_endpoints(begin, end)?;
    let key = model.binning.key(&time)?;
    let ranked = top_candidates(&model.params, known, relation, &key, q.side.into(), q.top)?;
    writeln!(out, "rank\tentity\tscore")?;
    for (i, (e, score)) in ranked.iter().enumerate() {
        let name = model.vocab.entities.name(*e).unwrap_or("?");
        writeln!(out, "{}\t{name}\t{score:.6}", i + 1)?;
    }
    Ok(())
}
