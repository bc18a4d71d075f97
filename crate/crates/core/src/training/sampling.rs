use rand::Rng;

use crate::data::TrainQuad;
use crate::error::{Result, TeroError};

/// Corrupts the subject or the object (fair coin) of `quad`, `neg_ratio`
/// times. The replacement is uniform over all entities except the one being
/// replaced. Accidental true facts are not filtered out.
pub fn sample_negatives<R: Rng + ?Sized>(
    quad: &TrainQuad,
    neg_ratio: usize,
    n_entities: usize,
    rng: &mut R,
) -> Result<Vec<TrainQuad>> {
    if n_entities < 2 {
        return Err(TeroError::Config(
            "negative sampling needs at least two entities".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(neg_ratio);
    sample_into(quad, neg_ratio, n_entities, rng, &mut out);
    Ok(out)
}

pub(crate) fn sample_into<R: Rng + ?Sized>(
    quad: &TrainQuad,
    neg_ratio: usize,
    n_entities: usize,
    rng: &mut R,
    out: &mut Vec<TrainQuad>,
) {
    let other = |rng: &mut R, current: usize| {
        let pick = rng.gen_range(0..n_entities - 1);
        if pick >= current {
            pick + 1
        } else {
            pick
        }
    };
    for _ in 0..neg_ratio {
        let mut neg = *quad;
        if rng.gen::<bool>() {
            neg.subject = other(rng, quad.subject);
        } else {
            neg.object = other(rng, quad.object);
        }
        out.push(neg);
    }
}
