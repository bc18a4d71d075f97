//! Synthetic temporal graphs shared by the integration tests.

#![allow(dead_code)]

pub mod oracle;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tero::data::{bin_threshold, year_fact_counts, Date, Quadruple, TimeAnnotation, TimeBinning};
use tero::eval::{evaluate, EvalReport, FilterSet};
use tero::model::{ModelParams, Norm, Shape};
use tero::training::{train, TrainConfig, TrainData};

pub const BASE_YEAR: i32 = 2000;

pub fn point(s: usize, r: usize, o: usize, step: usize) -> Quadruple {
    Quadruple {
        subject: s,
        relation: r,
        object: o,
        time: TimeAnnotation::Point(Date::year_only(BASE_YEAR + step as i32)),
    }
}

/// One step per year.
pub fn yearly_binning(facts: &[Quadruple]) -> TimeBinning {
    bin_threshold(&year_fact_counts(facts.iter().map(|q| &q.time)), 1).unwrap()
}

/// Every year clubbed into a single step.
pub fn collapsed_binning(facts: &[Quadruple]) -> TimeBinning {
    bin_threshold(&year_fact_counts(facts.iter().map(|q| &q.time)), u64::MAX).unwrap()
}

pub fn random_params(shape: Shape, seed: u64) -> ModelParams<f64> {
    ModelParams::init(shape, seed).unwrap()
}

pub fn tiny_shape(
    n_entities: usize,
    n_relations: usize,
    n_steps: usize,
    dim: usize,
    norm: Norm,
) -> Shape {
    Shape {
        n_entities,
        n_relations,
        n_steps,
        dim,
        dual: false,
        norm,
    }
}

/// Uniformly random facts without duplicates.
pub fn random_kg(
    n_entities: usize,
    n_relations: usize,
    n_steps: usize,
    n_facts: usize,
    seed: u64,
) -> Vec<Quadruple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut facts = Vec::with_capacity(n_facts);
    while facts.len() < n_facts {
        let q = point(
            rng.gen_range(0..n_entities),
            rng.gen_range(0..n_relations),
            rng.gen_range(0..n_entities),
            rng.gen_range(0..n_steps),
        );
        if seen.insert(q) {
            facts.push(q);
        }
    }
    facts
}

/// A labelled synthetic suite with a held-out split.
pub struct Suite {
    pub name: &'static str,
    pub n_entities: usize,
    pub n_relations: usize,
    pub train: Vec<Quadruple>,
    pub test: Vec<Quadruple>,
}

impl Suite {
    pub fn all(&self) -> Vec<Quadruple> {
        self.train.iter().chain(&self.test).copied().collect()
    }
}

/// Holds out `fraction` of the facts, keeping every held-out link
/// observed at some other step in the training split.
fn hold_out(
    name: &'static str,
    n_entities: usize,
    n_relations: usize,
    mut facts: Vec<Quadruple>,
    fraction: f64,
    seed: u64,
) -> Suite {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    facts.shuffle(&mut rng);
    let target = (facts.len() as f64 * fraction).round() as usize;
    let mut test = Vec::new();
    let mut train = Vec::new();
    for (i, q) in facts.iter().enumerate() {
        let link_elsewhere = facts[i + 1..].iter().chain(&train).any(|p: &Quadruple| {
            (p.subject, p.relation, p.object) == (q.subject, q.relation, q.object)
        });
        if test.len() < target && link_elsewhere {
            test.push(*q);
        } else {
            train.push(*q);
        }
    }
    Suite {
        name,
        n_entities,
        n_relations,
        train,
        test,
    }
}

/// Subjects 0..10 link to objects 10..20 through a shift that depends on
/// the step: at step τ, subject i links to object 10 + (i + τ) mod 5
/// within its block of five. Every link holds at some steps and fails at
/// the others.
pub fn temporary_suite(seed: u64) -> Suite {
    let steps = 20;
    let period = 5;
    let mut facts = Vec::new();
    for t in 0..steps {
        for i in 0..10 {
            let block = (i / period) * period;
            let o = 10 + block + (i + t) % period;
            facts.push(point(i, 0, o, t));
        }
    }
    hold_out("temporary", 20, 1, facts, 0.2, seed)
}

/// A directed path through all 20 entities, observed at every step. The
/// reverse of each edge is never true.
pub fn asymmetric_suite(seed: u64) -> Suite {
    let steps = 20;
    let mut facts = Vec::new();
    for t in 0..steps {
        for i in 0..19 {
            facts.push(point(i, 0, i + 1, t));
        }
    }
    hold_out("asymmetric", 20, 1, facts, 0.2, seed)
}

/// Two reflexive relations over disjoint halves of the entities.
pub fn reflexive_suite(seed: u64) -> Suite {
    let steps = 10;
    let mut facts = Vec::new();
    for t in 0..steps {
        for e in 0..20 {
            facts.push(point(e, usize::from(e >= 10), e, t));
        }
    }
    hold_out("reflexive", 20, 2, facts, 0.2, seed)
}

pub fn suite_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 50,
        batch_size: 16,
        neg_ratio: 10,
        margin: 12.0,
        lr: 0.3,
        max_epochs: 500,
        valid_every: 500,
        patience: 1,
        norm: Norm::L1,
        seed,
        dual: false,
    }
}

/// Trains on the suite under `binning` and evaluates on the held-out facts.
pub fn train_and_eval(suite: &Suite, binning: &TimeBinning, cfg: &TrainConfig) -> EvalReport {
    let all = suite.all();
    let filter = FilterSet::build(&all, binning).unwrap();
    let data = TrainData {
        train: &suite.train,
        valid: &[],
        filter: &filter,
        binning,
        n_entities: suite.n_entities,
        n_relations: suite.n_relations,
    };
    let out = train::<f32>(&data, cfg).unwrap();
    evaluate(&out.params, &suite.test, &filter, binning).unwrap()
}

/// Widens a single-step model to `n_steps` steps that all share its phase,
/// so it can be ranked under a finer filter.
pub fn tie_steps(params: &ModelParams<f32>, n_steps: usize) -> ModelParams<f32> {
    assert_eq!(params.shape().n_steps, 1);
    let k = params.dim();
    let mut flat = params.to_flat();
    let phase = flat.split_off(flat.len() - k);
    for _ in 0..n_steps {
        flat.extend_from_slice(&phase);
    }
    let shape = Shape {
        n_steps,
        ..*params.shape()
    };
    let mut wide = ModelParams::init(shape, 0).unwrap();
    wide.assign_flat(&flat).unwrap();
    wide
}

/// Trains a single-step model and ranks it under the per-year filter.
pub fn train_and_eval_collapsed(suite: &Suite, cfg: &TrainConfig) -> EvalReport {
    let all = suite.all();
    let coarse = collapsed_binning(&all);
    let fine = yearly_binning(&all);
    let data = TrainData {
        train: &suite.train,
        valid: &[],
        filter: &FilterSet::default(),
        binning: &coarse,
        n_entities: suite.n_entities,
        n_relations: suite.n_relations,
    };
    let out = train::<f32>(&data, cfg).unwrap();
    let wide = tie_steps(&out.params, fine.n_steps());
    let filter = FilterSet::build(&all, &fine).unwrap();
    evaluate(&wide, &suite.test, &filter, &fine).unwrap()
}
