//! Time-wise filtered link prediction.
//!
//! Each test fact is queried twice, once with its subject replaced by every
//! entity and once with its object replaced. Candidates that are true facts
//! at the query's own (binned) time are removed; facts true only at other
//! times stay in as distractors.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;

use crate::data::{Quadruple, TimeBinning, TimeKey};
use crate::error::{Result, TeroError};
use crate::model::{score_key, ModelParams, Real};

/// Key of a fact at the model's time resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactKey {
    pub subject: usize,
    pub relation: usize,
    pub object: usize,
    pub time: TimeKey,
}

/// All known true facts (train ∪ valid ∪ test).
#[derive(Debug, Clone, Default)]
pub struct FilterSet {
    keys: HashSet<FactKey>,
}

impl FilterSet {
    pub fn build<'a>(
        facts: impl IntoIterator<Item = &'a Quadruple>,
        binning: &TimeBinning,
    ) -> Result<Self> {
        let keys = facts
            .into_iter()
            .map(|q| fact_key(q, binning))
            .collect::<Result<_>>()?;
        Ok(FilterSet { keys })
    }

    pub fn contains(&self, key: &FactKey) -> bool {
        self.keys.contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

pub fn fact_key(q: &Quadruple, binning: &TimeBinning) -> Result<FactKey> {
    Ok(FactKey {
        subject: q.subject,
        relation: q.relation,
        object: q.object,
        time: binning.key(&q.time)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Subject,
    Object,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Subject => "subject",
            Side::Object => "object",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = TeroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subject" | "head" | "s" => Ok(Side::Subject),
            "object" | "tail" | "o" => Ok(Side::Object),
            other => Err(TeroError::Config(format!("unknown side `{other}`"))),
        }
    }
}

/// How candidates with exactly the test fact's score are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Half of the ties rank ahead, rounded half up.
    #[default]
    Mean,
    Optimistic,
    Pessimistic,
}

impl TiePolicy {
    pub fn rank(self, lower: usize, equal: usize) -> usize {
        match self {
            TiePolicy::Mean => 1 + lower + equal.div_ceil(2),
            TiePolicy::Optimistic => 1 + lower,
            TiePolicy::Pessimistic => 1 + lower + equal,
        }
    }
}

fn substitute(key: &FactKey, side: Side, entity: usize) -> FactKey {
    match side {
        Side::Subject => FactKey {
            subject: entity,
            ..*key
        },
        Side::Object => FactKey {
            object: entity,
            ..*key
        },
    }
}

/// Filtered rank of `quad` among all substitutions on `side`.
pub fn rank_query<F: Real>(
    params: &ModelParams<F>,
    quad: &Quadruple,
    side: Side,
    filter: &FilterSet,
    binning: &TimeBinning,
) -> Result<usize> {
    rank_query_with(params, quad, side, filter, binning, TiePolicy::Mean)
}

pub fn rank_query_with<F: Real>(
    params: &ModelParams<F>,
    quad: &Quadruple,
    side: Side,
    filter: &FilterSet,
    binning: &TimeBinning,
    ties: TiePolicy,
) -> Result<usize> {
    let key = fact_key(quad, binning)?;
    rank_key(params, &key, side, filter, ties)
}

fn rank_key<F: Real>(
    params: &ModelParams<F>,
    key: &FactKey,
    side: Side,
    filter: &FilterSet,
    ties: TiePolicy,
) -> Result<usize> {
    if !filter.contains(key) {
        return Err(TeroError::NotInFilter(format!("{key:?}")));
    }
    let score = |k: &FactKey| score_key(params, k.subject, k.relation, k.object, &k.time);
    let target = score(key)?;
    let (mut lower, mut equal) = (0usize, 0usize);
    for e in 0..params.shape().n_entities {
        let cand = substitute(key, side, e);
        if cand == *key || filter.contains(&cand) {
            continue;
        }
        let s = score(&cand)?;
        if s < target {
            lower += 1;
        } else if s == target {
            equal += 1;
        }
    }
    Ok(ties.rank(lower, equal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryRank {
    /// Index of the fact in the evaluated set.
    pub fact: usize,
    pub side: Side,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
    pub ranks: Vec<QueryRank>,
}

impl EvalReport {
    pub fn from_ranks(ranks: Vec<QueryRank>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(TeroError::Empty("rank list".to_string()));
        }
        let n = ranks.len() as f64;
        let hits = |k: usize| ranks.iter().filter(|r| r.rank <= k).count() as f64 / n;
        Ok(EvalReport {
            mrr: ranks.iter().map(|r| 1.0 / r.rank as f64).sum::<f64>() / n,
            hits1: hits(1),
            hits3: hits(3),
            hits10: hits(10),
            ranks,
        })
    }

    /// `metric<TAB>value` lines.
    pub fn to_tsv(&self) -> String {
        format!(
            "mrr\t{:.6}\nhits@1\t{:.6}\nhits@3\t{:.6}\nhits@10\t{:.6}\nqueries\t{}\n",
            self.mrr,
            self.hits1,
            self.hits3,
            self.hits10,
            self.ranks.len()
        )
    }
}

/// Ranks both sides of every fact. Queries run in parallel; the result is
/// independent of the thread count.
pub fn evaluate<F: Real>(
    params: &ModelParams<F>,
    test: &[Quadruple],
    filter: &FilterSet,
    binning: &TimeBinning,
) -> Result<EvalReport> {
    evaluate_with(params, test, filter, binning, TiePolicy::Mean)
}

pub fn evaluate_with<F: Real>(
    params: &ModelParams<F>,
    test: &[Quadruple],
    filter: &FilterSet,
    binning: &TimeBinning,
    ties: TiePolicy,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(TeroError::Empty("evaluation set".to_string()));
    }
    let keys = test
        .iter()
        .map(|q| fact_key(q, binning))
        .collect::<Result<Vec<_>>>()?;
    let ranks = keys
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, key)| {
            [Side::Subject, Side::Object].into_iter().map(move |side| {
                rank_key(params, key, side, filter, ties).map(|rank| QueryRank {
                    fact: i,
                    side,
                    rank,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvalReport::from_ranks(ranks)
}

/// The `n` best completions of a query, most plausible first. Ties are
/// broken by entity id.
pub fn top_candidates<F: Real>(
    params: &ModelParams<F>,
    known: usize,
    relation: usize,
    time: &TimeKey,
    side: Side,
    n: usize,
) -> Result<Vec<(usize, F)>> {
    let mut scored = (0..params.shape().n_entities)
        .map(|e| {
            let (s, o) = match side {
                Side::Object => (known, e),
                Side::Subject => (e, known),
            };
            score_key(params, s, relation, o, time).map(|sc| (e, sc))
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    scored.truncate(n);
    Ok(scored)
}
