use std::collections::BTreeMap;

use num_complex::Complex;

use super::loss::{loss, loss_weights};
use crate::data::{Slot, TrainQuad};
use crate::error::{Result, TeroError};
use crate::model::{residual, ModelParams, Norm, Real, Shape};

pub const ADAGRAD_EPS: f64 = 1e-10;

/// Positives and their `η` corruptions each.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub positives: Vec<TrainQuad>,
    pub negatives: Vec<Vec<TrainQuad>>,
}

/// Sparse gradient: only rows touched by the batch are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub entity: BTreeMap<usize, Vec<Complex<F>>>,
    pub relation_begin: BTreeMap<usize, Vec<Complex<F>>>,
    pub relation_end: BTreeMap<usize, Vec<Complex<F>>>,
    pub phase: BTreeMap<usize, Vec<F>>,
}

impl<F: Real> Gradients<F> {
    fn new() -> Self {
        Gradients {
            entity: BTreeMap::new(),
            relation_begin: BTreeMap::new(),
            relation_end: BTreeMap::new(),
            phase: BTreeMap::new(),
        }
    }

    /// Dense gradient in [`ModelParams::to_flat`] order.
    pub fn to_flat(&self, shape: &Shape) -> Vec<F> {
        let k = shape.dim;
        let rel_end_rows = if shape.dual { shape.n_relations } else { 0 };
        let mut out = Vec::with_capacity(crate::model::param_count(shape));
        let mut complex_table = |rows: usize, m: &BTreeMap<usize, Vec<Complex<F>>>| {
            for row in 0..rows {
                match m.get(&row) {
                    Some(v) => out.extend(v.iter().flat_map(|z| [z.re, z.im])),
                    None => out.extend(std::iter::repeat_n(F::zero(), 2 * k)),
                }
            }
        };
        complex_table(shape.n_entities, &self.entity);
        complex_table(shape.n_relations, &self.relation_begin);
        complex_table(rel_end_rows, &self.relation_end);
        for row in 0..shape.n_steps {
            match self.phase.get(&row) {
                Some(v) => out.extend_from_slice(v),
                None => out.extend(std::iter::repeat_n(F::zero(), k)),
            }
        }
        out
    }

    fn is_finite(&self) -> bool {
        let c = |m: &BTreeMap<usize, Vec<Complex<F>>>| {
            m.values()
                .flatten()
                .all(|z| z.re.is_finite() && z.im.is_finite())
        };
        c(&self.entity)
            && c(&self.relation_begin)
            && c(&self.relation_end)
            && self.phase.values().flatten().all(|x| x.is_finite())
    }
}

fn check_batch<F: Real>(params: &ModelParams<F>, batch: &Batch) -> Result<()> {
    if batch.positives.is_empty() {
        return Err(TeroError::Config("empty batch".to_string()));
    }
    if batch.negatives.len() != batch.positives.len() {
        return Err(TeroError::LengthMismatch {
            left: batch.positives.len(),
            right: batch.negatives.len(),
        });
    }
    let all = batch
        .positives
        .iter()
        .chain(batch.negatives.iter().flatten());
    for q in all {
        params.check_ids(q.subject, q.relation, q.object, &[q.step])?;
    }
    Ok(())
}

fn quad_score<F: Real>(params: &ModelParams<F>, q: &TrainQuad) -> F {
    crate::model::score_point(params, q.subject, q.relation, q.slot, q.object, q.step)
        .expect("ids checked")
}

/// Mean loss over the batch.
pub fn batch_loss<F: Real>(params: &ModelParams<F>, batch: &Batch, margin: F) -> Result<F> {
    check_batch(params, batch)?;
    let total: F = batch
        .positives
        .iter()
        .zip(&batch.negatives)
        .map(|(pos, negs)| {
            let neg_scores: Vec<F> = negs.iter().map(|n| quad_score(params, n)).collect();
            loss(quad_score(params, pos), &neg_scores, margin)
        })
        .sum();
    Ok(total / F::from_usize(batch.positives.len()).unwrap())
}

/// Mean batch loss and its analytic gradient.
pub fn batch_gradients<F: Real>(
    params: &ModelParams<F>,
    batch: &Batch,
    margin: F,
) -> Result<(F, Gradients<F>)> {
    check_batch(params, batch)?;
    let inv_b = F::one() / F::from_usize(batch.positives.len()).unwrap();
    let mut grads = Gradients::new();
    let mut total = F::zero();
    for (pos, negs) in batch.positives.iter().zip(&batch.negatives) {
        let eta = F::from_usize(negs.len().max(1)).unwrap();
        let pos_score = quad_score(params, pos);
        let neg_scores: Vec<F> = negs.iter().map(|n| quad_score(params, n)).collect();
        total += loss(pos_score, &neg_scores, margin);
        let (w_pos, _) = loss_weights(pos_score, F::zero(), margin, eta);
        add_score_grad(params, pos, w_pos * inv_b, &mut grads);
        for (neg, &s) in negs.iter().zip(&neg_scores) {
            let (_, w_neg) = loss_weights(pos_score, s, margin, eta);
            add_score_grad(params, neg, w_neg * inv_b, &mut grads);
        }
    }
    Ok((total * inv_b, grads))
}

/// Adds `weight · ∂f/∂x` for the score `f` of `q` to every touched row.
fn add_score_grad<F: Real>(
    params: &ModelParams<F>,
    q: &TrainQuad,
    weight: F,
    grads: &mut Gradients<F>,
) {
    let k = params.dim();
    let a: Vec<Complex<F>> =
        residual(params, q.subject, q.relation, q.slot, q.object, q.step).collect();
    let zero = Complex::new(F::zero(), F::zero());
    // ∂f/∂a, written as a complex number (∂/∂re, ∂/∂im)
    let da: Vec<Complex<F>> = match params.norm() {
        Norm::L1 => {
            let sign = |x: F| {
                if x > F::zero() {
                    F::one()
                } else if x < F::zero() {
                    -F::one()
                } else {
                    F::zero()
                }
            };
            a.iter()
                .map(|z| Complex::new(sign(z.re), sign(z.im)))
                .collect()
        }
        Norm::L2 => {
            let f = a.iter().map(|z| z.norm_sqr()).sum::<F>().sqrt();
            if f > F::zero() {
                a.iter().map(|z| z / f).collect()
            } else {
                vec![zero; k]
            }
        }
    };

    let s = params.entity(q.subject);
    let o = params.entity(q.object);
    let theta = params.phase(q.step);
    let rel_table = if params.shape().dual && q.slot == Slot::End {
        &mut grads.relation_end
    } else {
        &mut grads.relation_begin
    };
    let gr = rel_table.entry(q.relation).or_insert_with(|| vec![zero; k]);
    for j in 0..k {
        gr[j] += da[j] * weight;
    }
    let mut ds = vec![zero; k];
    let mut dobj = vec![zero; k];
    let gt = grads
        .phase
        .entry(q.step)
        .or_insert_with(|| vec![F::zero(); k]);
    for j in 0..k {
        let g = da[j] * weight;
        let (sin, cos) = theta[j].sin_cos();
        let rot = Complex::new(cos, sin);
        ds[j] = rot.conj() * g;
        dobj[j] = -(rot * g).conj();
        // ∂a/∂θ = i·(s·τ + conj(o·τ))
        let d_theta = Complex::new(F::zero(), F::one()) * (s[j] * rot + (o[j] * rot).conj());
        gt[j] += g.re * d_theta.re + g.im * d_theta.im;
    }
    let gs = grads
        .entity
        .entry(q.subject)
        .or_insert_with(|| vec![zero; k]);
    for j in 0..k {
        gs[j] += ds[j];
    }
    let go = grads
        .entity
        .entry(q.object)
        .or_insert_with(|| vec![zero; k]);
    for j in 0..k {
        go[j] += dobj[j];
    }
}

#[inline]
fn adagrad<F: Real>(x: &mut F, acc: &mut F, g: F, lr: F, eps: F) {
    *acc += g * g;
    *x -= lr * g / (acc.sqrt() + eps);
}

/// Per-coordinate Adagrad update of every row present in `grads`.
pub fn apply_adagrad<F: Real>(params: &mut ModelParams<F>, grads: &Gradients<F>, lr: F) {
    let k = params.dim();
    let eps = F::lit(ADAGRAD_EPS);
    let ModelParams {
        entity,
        relation_begin,
        relation_end,
        phase,
        accum,
        ..
    } = params;
    let complex_update = |table: &mut Vec<Complex<F>>,
                          acc: &mut Vec<Complex<F>>,
                          rows: &BTreeMap<usize, Vec<Complex<F>>>| {
        for (&row, g) in rows {
            for (j, gj) in g.iter().enumerate() {
                let i = row * k + j;
                adagrad(&mut table[i].re, &mut acc[i].re, gj.re, lr, eps);
                adagrad(&mut table[i].im, &mut acc[i].im, gj.im, lr, eps);
            }
        }
    };
    complex_update(entity, &mut accum.entity, &grads.entity);
    complex_update(
        relation_begin,
        &mut accum.relation_begin,
        &grads.relation_begin,
    );
    complex_update(relation_end, &mut accum.relation_end, &grads.relation_end);
    for (&row, g) in &grads.phase {
        for (j, &gj) in g.iter().enumerate() {
            let i = row * k + j;
            adagrad(&mut phase[i], &mut accum.phase[i], gj, lr, eps);
        }
    }
}

/// One optimizer step. Returns the mean batch loss measured before the
/// update.
pub fn grad_step<F: Real>(
    params: &mut ModelParams<F>,
    batch: &Batch,
    margin: F,
    lr: F,
) -> Result<F> {
    let (loss, grads) = batch_gradients(params, batch, margin)?;
    if !loss.is_finite() || !grads.is_finite() {
        return Err(TeroError::NonFinite("gradient".to_string()));
    }
    apply_adagrad(params, &grads, lr);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::sampling::sample_negatives;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny(norm: Norm, dual: bool, seed: u64) -> ModelParams<f64> {
        ModelParams::init(
            Shape {
                n_entities: 4,
                n_relations: 2,
                n_steps: 3,
                dim: 3,
                dual,
                norm,
            },
            seed,
        )
        .unwrap()
    }

    fn random_batch(rng: &mut ChaCha8Rng, n: usize, eta: usize) -> Batch {
        let mut b = Batch::default();
        for _ in 0..n {
            let q = TrainQuad {
                subject: rng.gen_range(0..4),
                relation: rng.gen_range(0..2),
                slot: if rng.gen() { Slot::Begin } else { Slot::End },
                object: rng.gen_range(0..4),
                step: rng.gen_range(0..3),
            };
            b.negatives.push(sample_negatives(&q, eta, 4, rng).unwrap());
            b.positives.push(q);
        }
        b
    }

    /// Central differences over every coordinate of every table.
    fn finite_difference(
        params: &ModelParams<f64>,
        batch: &Batch,
        margin: f64,
        h: f64,
    ) -> Vec<f64> {
        let base = params.to_flat();
        let mut probe = params.clone();
        (0..base.len())
            .map(|i| {
                let mut x = base.clone();
                x[i] = base[i] + h;
                probe.assign_flat(&x).unwrap();
                let up = batch_loss(&probe, batch, margin).unwrap();
                x[i] = base[i] - h;
                probe.assign_flat(&x).unwrap();
                let down = batch_loss(&probe, batch, margin).unwrap();
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn l2_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (seed, dual) in [(1, true), (2, false), (3, true)] {
            let params = tiny(Norm::L2, dual, seed);
            let batch = random_batch(&mut rng, 4, 3);
            let (_, g) = batch_gradients(&params, &batch, 2.0).unwrap();
            let analytic = g.to_flat(params.shape());
            let numeric = finite_difference(&params, &batch, 2.0, 1e-4);
            for (a, n) in analytic.iter().zip(&numeric) {
                let rel = (a - n).abs() / n.abs().max(1e-8);
                assert!(rel < 1e-4, "analytic {a} vs numeric {n}");
            }
        }
    }

    #[test]
    fn l1_gradients_match_away_from_kinks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = tiny(Norm::L1, true, 9);
        let batch = random_batch(&mut rng, 3, 2);
        // Skip the check if any residual component sits near the |·| kink.
        let near_kink = batch
            .positives
            .iter()
            .chain(batch.negatives.iter().flatten())
            .flat_map(|q| {
                residual(&params, q.subject, q.relation, q.slot, q.object, q.step)
                    .collect::<Vec<_>>()
            })
            .any(|z| z.re.abs() < 1e-3 || z.im.abs() < 1e-3);
        assert!(!near_kink, "pick another seed");
        let (_, g) = batch_gradients(&params, &batch, 3.0).unwrap();
        let analytic = g.to_flat(params.shape());
        let numeric = finite_difference(&params, &batch, 3.0, 1e-6);
        for (a, n) in analytic.iter().zip(&numeric) {
            let rel = (a - n).abs() / n.abs().max(1e-8);
            assert!(rel < 1e-4, "analytic {a} vs numeric {n}");
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params = tiny(Norm::L2, false, 1);
        let before = params.clone();
        let batch = random_batch(&mut rng, 1, 1);
        let (_, g) = batch_gradients(&params, &batch, 2.0).unwrap();
        grad_step(&mut params, &batch, 2.0, 0.05).unwrap();
        let k = params.dim();
        for (&row, gv) in &g.entity {
            for (j, gj) in gv.iter().enumerate() {
                let moved = params.entity[row * k + j] - before.entity[row * k + j];
                for (delta, gc) in [(moved.re, gj.re), (moved.im, gj.im)] {
                    if gc == 0.0 {
                        assert_eq!(delta, 0.0);
                    } else {
                        assert!((delta.abs() - 0.05).abs() < 1e-6, "{delta}");
                        assert!(delta * gc < 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn only_touched_rows_change() {
        let mut params = tiny(Norm::L1, true, 2);
        let before = params.clone();
        let q = TrainQuad {
            subject: 0,
            relation: 1,
            slot: Slot::End,
            object: 1,
            step: 2,
        };
        let n = TrainQuad { subject: 2, ..q };
        let batch = Batch {
            positives: vec![q],
            negatives: vec![vec![n]],
        };
        grad_step(&mut params, &batch, 1.0, 0.1).unwrap();
        assert_eq!(params.entity(3), before.entity(3));
        assert_eq!(
            params.relation(0, Slot::Begin),
            before.relation(0, Slot::Begin)
        );
        assert_eq!(params.relation(0, Slot::End), before.relation(0, Slot::End));
        assert_eq!(
            params.relation(1, Slot::Begin),
            before.relation(1, Slot::Begin)
        );
        assert_ne!(params.relation(1, Slot::End), before.relation(1, Slot::End));
        assert_eq!(params.phase(0), before.phase(0));
        assert_eq!(params.phase(1), before.phase(1));
        assert_ne!(params.entity(2), before.entity(2));
        assert_eq!(params.accumulators().entity[3 * 3], Complex::new(0.0, 0.0));
    }

    #[test]
    fn rejects_empty_and_out_of_range_batches() {
        let mut params = tiny(Norm::L1, false, 0);
        assert!(grad_step(&mut params, &Batch::default(), 1.0, 0.1).is_err());
        let q = TrainQuad {
            subject: 9,
            relation: 0,
            slot: Slot::Begin,
            object: 0,
            step: 0,
        };
        let batch = Batch {
            positives: vec![q],
            negatives: vec![vec![]],
        };
        assert!(grad_step(&mut params, &batch, 1.0, 0.1).is_err());
    }

    #[test]
    fn non_finite_parameters_abort() {
        let mut params = tiny(Norm::L2, false, 0);
        params.entity[0].re = f64::NAN;
        let q = TrainQuad {
            subject: 0,
            relation: 0,
            slot: Slot::Begin,
            object: 1,
            step: 0,
        };
        let batch = Batch {
            positives: vec![q],
            negatives: vec![vec![TrainQuad { object: 2, ..q }]],
        };
        assert!(matches!(
            grad_step(&mut params, &batch, 1.0, 0.1),
            Err(TeroError::NonFinite(_))
        ));
    }
}
