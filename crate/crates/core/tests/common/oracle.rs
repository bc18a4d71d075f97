//! Reference implementations written directly against the flat parameter
//! layout, sharing no code with the library's scorer.

use std::collections::HashSet;

use tero::data::Slot;
use tero::model::{Norm, Shape};

/// Read-only view of a flattened parameter vector.
pub struct FlatModel<'a> {
    pub shape: Shape,
    pub x: &'a [f64],
}

impl FlatModel<'_> {
    fn entity(&self, e: usize, j: usize) -> (f64, f64) {
        let i = 2 * (e * self.shape.dim + j);
        (self.x[i], self.x[i + 1])
    }

    fn relation(&self, r: usize, slot: Slot, j: usize) -> (f64, f64) {
        let k = self.shape.dim;
        let rel_base = 2 * self.shape.n_entities * k;
        let table = if self.shape.dual && slot == Slot::End {
            rel_base + 2 * self.shape.n_relations * k
        } else {
            rel_base
        };
        let i = table + 2 * (r * k + j);
        (self.x[i], self.x[i + 1])
    }

    fn phase(&self, t: usize, j: usize) -> f64 {
        let k = self.shape.dim;
        let tables = if self.shape.dual { 2 } else { 1 };
        let base = 2 * self.shape.n_entities * k + 2 * tables * self.shape.n_relations * k;
        self.x[base + t * k + j]
    }

    /// Distance between the rotated subject plus relation and the
    /// conjugated rotated object.
    pub fn score(&self, s: usize, r: usize, slot: Slot, o: usize, t: usize) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.shape.dim {
            let th = self.phase(t, j);
            let (c, sn) = (th.cos(), th.sin());
            let (a, b) = self.entity(s, j);
            let (p, q) = self.entity(o, j);
            let (rr, ri) = self.relation(r, slot, j);
            let s_re = a * c - b * sn;
            let s_im = a * sn + b * c;
            let o_re = p * c - q * sn;
            let o_im = p * sn + q * c;
            let d_re = s_re + rr - o_re;
            let d_im = s_im + ri + o_im;
            acc += match self.shape.norm {
                Norm::L1 => d_re.abs() + d_im.abs(),
                Norm::L2 => d_re * d_re + d_im * d_im,
            };
        }
        match self.shape.norm {
            Norm::L1 => acc,
            Norm::L2 => acc.sqrt(),
        }
    }
}

/// `(s, r, slot, o, t)`
pub type Tuple = (usize, usize, Slot, usize, usize);

fn ln_sigmoid(x: f64) -> f64 {
    -(1.0 + (-x).exp()).ln()
}

/// Mean negative-sampling loss of a batch of `(positive, negatives)`.
pub fn batch_loss(model: &FlatModel<'_>, batch: &[(Tuple, Vec<Tuple>)], margin: f64) -> f64 {
    let score = |&(s, r, slot, o, t): &Tuple| model.score(s, r, slot, o, t);
    let total: f64 = batch
        .iter()
        .map(|(pos, negs)| {
            let neg: f64 = negs.iter().map(|n| ln_sigmoid(score(n) - margin)).sum();
            -ln_sigmoid(margin - score(pos)) - neg / negs.len() as f64
        })
        .sum();
    total / batch.len() as f64
}

/// Filtered rank by exhaustive enumeration, ties counted half (rounded up).
/// `truth` holds every true `(s, r, o, t)` at step resolution.
pub fn brute_force_rank(
    model: &FlatModel<'_>,
    truth: &HashSet<(usize, usize, usize, usize)>,
    (s, r, o, t): (usize, usize, usize, usize),
    replace_subject: bool,
) -> usize {
    let target = model.score(s, r, Slot::Begin, o, t);
    let mut better = 0usize;
    let mut tied = 0usize;
    for e in 0..model.shape.n_entities {
        let cand = if replace_subject {
            (e, r, o, t)
        } else {
            (s, r, e, t)
        };
        if cand == (s, r, o, t) || truth.contains(&cand) {
            continue;
        }
        let sc = model.score(cand.0, cand.1, Slot::Begin, cand.2, cand.3);
        if sc < target {
            better += 1;
        } else if sc == target {
            tied += 1;
        }
    }
    1 + better + tied.div_ceil(2)
}
