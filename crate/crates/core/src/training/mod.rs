//! Negative-sampling training with Adagrad and early stopping on
//! validation MRR.

mod grad;
mod loss;
mod sampling;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use grad::{
    apply_adagrad, batch_gradients, batch_loss, grad_step, Batch, Gradients, ADAGRAD_EPS,
};
pub use loss::{log_sigmoid, loss, sigmoid};
pub use sampling::sample_negatives;

use crate::data::{expand_for_training, Quadruple, TimeBinning, TrainQuad};
use crate::error::{Result, TeroError};
use crate::eval::{evaluate, EvalReport, FilterSet};
use crate::model::{ModelParams, Norm, Real, Shape};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub batch_size: usize,
    pub neg_ratio: usize,
    pub margin: f64,
    pub lr: f64,
    pub max_epochs: usize,
    /// Validate every this many epochs.
    pub valid_every: usize,
    /// Consecutive non-improving validations before stopping.
    pub patience: usize,
    pub norm: Norm,
    pub seed: u64,
    pub dual: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 500,
            batch_size: 512,
            neg_ratio: 10,
            margin: 10.0,
            lr: 0.1,
            max_epochs: 5000,
            valid_every: 100,
            patience: 5,
            norm: Norm::L1,
            seed: 0,
            dual: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(TeroError::Config(m.to_string()));
        if self.dim == 0 {
            return fail("embedding dimension must be at least 1");
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1");
        }
        if self.neg_ratio == 0 {
            return fail("negative ratio must be at least 1");
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return fail("margin must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail("learning rate must be positive");
        }
        if self.valid_every == 0 {
            return fail("validation interval must be at least 1");
        }
        if self.patience == 0 {
            return fail("patience must be at least 1");
        }
        Ok(())
    }
}

/// Everything the trainer reads.
#[derive(Debug, Clone, Copy)]
pub struct TrainData<'a> {
    pub train: &'a [Quadruple],
    pub valid: &'a [Quadruple],
    pub filter: &'a FilterSet,
    pub binning: &'a TimeBinning,
    pub n_entities: usize,
    pub n_relations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRecord {
    pub epoch: usize,
    /// Mean loss over the most recent epoch.
    pub train_loss: f64,
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub seconds: f64,
}

impl ValidationRecord {
    pub const TSV_HEADER: &'static str = "epoch\ttrain_loss\tmrr\thits@1\thits@3\thits@10\tseconds";

    pub fn to_tsv(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.3}",
            self.epoch,
            self.train_loss,
            self.mrr,
            self.hits1,
            self.hits3,
            self.hits10,
            self.seconds
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    /// Best-MRR snapshot, or the final parameters when nothing was validated.
    pub params: ModelParams<F>,
    pub history: Vec<ValidationRecord>,
    /// Mean training loss of every completed epoch.
    pub epoch_losses: Vec<f64>,
    pub best_epoch: Option<usize>,
}

pub fn model_shape(data: &TrainData<'_>, cfg: &TrainConfig) -> Shape {
    Shape {
        n_entities: data.n_entities,
        n_relations: data.n_relations,
        n_steps: data.binning.n_steps(),
        dim: cfg.dim,
        dual: cfg.dual,
        norm: cfg.norm,
    }
}

pub fn train<F: Real>(data: &TrainData<'_>, cfg: &TrainConfig) -> Result<TrainOutcome<F>> {
    train_with_observer(data, cfg, |_| {})
}

/// Like [`train`], calling `observer` after every validation.
pub fn train_with_observer<F: Real>(
    data: &TrainData<'_>,
    cfg: &TrainConfig,
    mut observer: impl FnMut(&ValidationRecord),
) -> Result<TrainOutcome<F>> {
    cfg.validate()?;
    if data.train.is_empty() {
        return Err(TeroError::Empty("training split".to_string()));
    }
    let mut quads = expand_for_training(data.train, data.binning, cfg.dual)?;
    let mut params = ModelParams::<F>::init(model_shape(data, cfg), cfg.seed)?;
    let mut outcome = TrainOutcome {
        params: params.clone(),
        history: Vec::new(),
        epoch_losses: Vec::new(),
        best_epoch: None,
    };
    if cfg.max_epochs == 0 {
        return Ok(outcome);
    }

    // The shuffle/negative stream is separate from the initialization stream.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x005E_ED0F_7E40);
    let margin = F::lit(cfg.margin);
    let lr = F::lit(cfg.lr);
    let started = Instant::now();
    let mut best_mrr = f64::NEG_INFINITY;
    let mut stale = 0usize;
    let mut batch = Batch::default();

    for epoch in 1..=cfg.max_epochs {
        quads.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in quads.chunks(cfg.batch_size) {
            fill_batch(&mut batch, chunk, cfg.neg_ratio, data.n_entities, &mut rng)?;
            let l = grad_step(&mut params, &batch, margin, lr)?;
            epoch_loss += l.to_f64().unwrap() * chunk.len() as f64;
        }
        let epoch_loss = epoch_loss / quads.len() as f64;
        outcome.epoch_losses.push(epoch_loss);

        let due = epoch % cfg.valid_every == 0 || epoch == cfg.max_epochs;
        if due && !data.valid.is_empty() {
            let report = evaluate(&params, data.valid, data.filter, data.binning)?;
            let record = record(epoch, epoch_loss, &report, started);
            observer(&record);
            outcome.history.push(record);
            if report.mrr > best_mrr {
                best_mrr = report.mrr;
                stale = 0;
                outcome.params.clone_from(&params);
                outcome.best_epoch = Some(epoch);
            } else {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
        }
    }
    if outcome.best_epoch.is_none() {
        outcome.params = params;
    }
    Ok(outcome)
}

fn record(
    epoch: usize,
    train_loss: f64,
    report: &EvalReport,
    started: Instant,
) -> ValidationRecord {
    ValidationRecord {
        epoch,
        train_loss,
        mrr: report.mrr,
        hits1: report.hits1,
        hits3: report.hits3,
        hits10: report.hits10,
        seconds: started.elapsed().as_secs_f64(),
    }
}

fn fill_batch(
    batch: &mut Batch,
    chunk: &[TrainQuad],
    neg_ratio: usize,
    n_entities: usize,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    if n_entities < 2 {
        return Err(TeroError::Config(
            "negative sampling needs at least two entities".to_string(),
        ));
    }
    batch.positives.clear();
    batch.positives.extend_from_slice(chunk);
    batch.negatives.resize_with(chunk.len(), Vec::new);
    batch.negatives.truncate(chunk.len());
    for (q, negs) in chunk.iter().zip(batch.negatives.iter_mut()) {
        negs.clear();
        sampling::sample_into(q, neg_ratio, n_entities, rng, negs);
    }
    Ok(())
}
