use num_complex::Complex;

use super::complex::unit;
use super::{ModelParams, Norm, Real};
use crate::data::{Quadruple, Slot, TimeBinning, TimeKey};
use crate::error::Result;

/// Residual `a_j = s_j·τ_j + r_j − conj(o_j·τ_j)` for one quadruple.
pub fn residual<'a, F: Real>(
    params: &'a ModelParams<F>,
    s: usize,
    r: usize,
    slot: Slot,
    o: usize,
    step: usize,
) -> impl Iterator<Item = Complex<F>> + 'a {
    let sv = params.entity(s);
    let ov = params.entity(o);
    let rv = params.relation(r, slot);
    let th = params.phase(step);
    (0..params.dim()).map(move |j| {
        let rot = unit(th[j]);
        sv[j] * rot + rv[j] - (ov[j] * rot).conj()
    })
}

pub(crate) fn norm_of<F: Real>(norm: Norm, residual: impl Iterator<Item = Complex<F>>) -> F {
    match norm {
        Norm::L1 => residual.map(|a| a.re.abs() + a.im.abs()).sum(),
        Norm::L2 => residual.map(|a| a.norm_sqr()).sum::<F>().sqrt(),
    }
}

#[inline]
pub(crate) fn score_unchecked<F: Real>(
    params: &ModelParams<F>,
    s: usize,
    r: usize,
    slot: Slot,
    o: usize,
    step: usize,
) -> F {
    norm_of(params.norm(), residual(params, s, r, slot, o, step))
}

/// Distance score of a single time-stamped quadruple. Non-negative; zero
/// means the rotated subject plus relation lands exactly on the conjugated
/// rotated object.
pub fn score_point<F: Real>(
    params: &ModelParams<F>,
    s: usize,
    r: usize,
    slot: Slot,
    o: usize,
    step: usize,
) -> Result<F> {
    params.check_ids(s, r, o, &[step])?;
    Ok(score_unchecked(params, s, r, slot, o, step))
}

/// Score under a binned annotation: intervals (and points) average the
/// begin and end slots, single-endpoint facts use the known endpoint.
pub fn score_key<F: Real>(
    params: &ModelParams<F>,
    s: usize,
    r: usize,
    o: usize,
    key: &TimeKey,
) -> Result<F> {
    let steps = match *key {
        TimeKey::Point(t) | TimeKey::BeginOnly(t) | TimeKey::EndOnly(t) => [t, t],
        TimeKey::Interval(b, e) => [b, e],
    };
    params.check_ids(s, r, o, &steps)?;
    Ok(score_key_unchecked(params, s, r, o, key))
}

pub(crate) fn score_key_unchecked<F: Real>(
    params: &ModelParams<F>,
    s: usize,
    r: usize,
    o: usize,
    key: &TimeKey,
) -> F {
    let half = F::lit(0.5);
    match *key {
        TimeKey::Point(t) => {
            if params.shape().dual {
                half * (score_unchecked(params, s, r, Slot::Begin, o, t)
                    + score_unchecked(params, s, r, Slot::End, o, t))
            } else {
                score_unchecked(params, s, r, Slot::Begin, o, t)
            }
        }
        TimeKey::Interval(b, e) => {
            half * (score_unchecked(params, s, r, Slot::Begin, o, b)
                + score_unchecked(params, s, r, Slot::End, o, e))
        }
        TimeKey::BeginOnly(t) => score_unchecked(params, s, r, Slot::Begin, o, t),
        TimeKey::EndOnly(t) => score_unchecked(params, s, r, Slot::End, o, t),
    }
}

pub fn score_fact<F: Real>(
    params: &ModelParams<F>,
    quad: &Quadruple,
    binning: &TimeBinning,
) -> Result<F> {
    let key = binning.key(&quad.time)?;
    score_key(params, quad.subject, quad.relation, quad.object, &key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{bin_threshold, Date, TimeAnnotation};
    use crate::model::Shape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(n_e: usize, k: usize, dual: bool, norm: Norm) -> Shape {
        Shape {
            n_entities: n_e,
            n_relations: 1,
            n_steps: 2,
            dim: k,
            dual,
            norm,
        }
    }

    /// Term-by-term evaluation with explicit cos/sin arithmetic.
    fn oracle(s: &[(f64, f64)], r: &[(f64, f64)], o: &[(f64, f64)], th: &[f64], p: u8) -> f64 {
        let mut acc = 0.0;
        for j in 0..s.len() {
            let (c, sn) = (th[j].cos(), th[j].sin());
            let st = (s[j].0 * c - s[j].1 * sn, s[j].0 * sn + s[j].1 * c);
            let ot = (o[j].0 * c - o[j].1 * sn, o[j].0 * sn + o[j].1 * c);
            let re = st.0 + r[j].0 - ot.0;
            let im = st.1 + r[j].1 + ot.1;
            acc += if p == 1 {
                re.abs() + im.abs()
            } else {
                re * re + im * im
            };
        }
        if p == 1 {
            acc
        } else {
            acc.sqrt()
        }
    }

    fn pairs(v: &[Complex<f64>]) -> Vec<(f64, f64)> {
        v.iter().map(|z| (z.re, z.im)).collect()
    }

    #[test]
    fn real_identity_scores_zero() {
        let one = vec![Complex::new(1.0, 0.0)];
        let p = ModelParams::from_tables(
            Shape {
                n_steps: 1,
                ..shape(1, 1, false, Norm::L1)
            },
            one.clone(),
            vec![Complex::new(0.0, 0.0)],
            vec![],
            vec![0.0],
        )
        .unwrap();
        assert_eq!(score_point(&p, 0, 0, Slot::Begin, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn exact_translation_scores_zero() {
        let mut p = ModelParams::<f64>::init(shape(2, 4, false, Norm::L2), 5).unwrap();
        // choose o so that conj(o∘τ) = s∘τ + r, i.e. o = conj(s∘τ + r) ∘ conj(τ)
        let target: Vec<Complex<f64>> = (0..4)
            .map(|j| {
                let tau = unit(p.phase(1)[j]);
                (p.entity(0)[j] * tau + p.relation(0, Slot::Begin)[j]).conj() * tau.conj()
            })
            .collect();
        p.entity_mut(1).copy_from_slice(&target);
        assert!(score_point(&p, 0, 0, Slot::Begin, 1, 1).unwrap() < 1e-12);
        assert!(score_point(&p, 0, 0, Slot::Begin, 1, 0).unwrap() > 1e-3);
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for norm in [Norm::L1, Norm::L2] {
            for seed in 0..20 {
                let p = ModelParams::<f64>::init(shape(3, 2, true, norm), seed).unwrap();
                let (s, o, t) = (
                    rng.gen_range(0..3),
                    rng.gen_range(0..3),
                    rng.gen_range(0..2),
                );
                for slot in [Slot::Begin, Slot::End] {
                    let got = score_point(&p, s, 0, slot, o, t).unwrap();
                    let want = oracle(
                        &pairs(p.entity(s)),
                        &pairs(p.relation(0, slot)),
                        &pairs(p.entity(o)),
                        p.phase(t),
                        norm.p(),
                    );
                    assert!((got - want).abs() < 1e-10, "{got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn ids_are_checked() {
        let p = ModelParams::<f64>::init(shape(3, 2, false, Norm::L1), 0).unwrap();
        assert!(score_point(&p, 3, 0, Slot::Begin, 0, 0).is_err());
        assert!(score_point(&p, 0, 1, Slot::Begin, 0, 0).is_err());
        assert!(score_point(&p, 0, 0, Slot::Begin, 0, 2).is_err());
    }

    #[test]
    fn fact_scores_follow_annotation() {
        let counts = [(2003, 1), (2005, 1)].into_iter().collect();
        let binning = bin_threshold(&counts, 1).unwrap();
        let p = ModelParams::<f64>::init(shape(3, 5, true, Norm::L1), 9).unwrap();
        let y = Date::year_only;
        let fact = |time| Quadruple {
            subject: 0,
            relation: 0,
            object: 2,
            time,
        };

        let begin = score_point(&p, 0, 0, Slot::Begin, 2, 0).unwrap();
        let end = score_point(&p, 0, 0, Slot::End, 2, 1).unwrap();
        let interval = score_fact(
            &p,
            &fact(TimeAnnotation::Interval {
                begin: y(2003),
                end: y(2005),
            }),
            &binning,
        )
        .unwrap();
        assert!((interval - 0.5 * (begin + end)).abs() < 1e-12);

        let bo = score_fact(&p, &fact(TimeAnnotation::BeginOnly(y(2003))), &binning).unwrap();
        assert_eq!(bo, begin);
        let eo = score_fact(&p, &fact(TimeAnnotation::EndOnly(y(2005))), &binning).unwrap();
        assert_eq!(eo, end);

        let pt = score_fact(&p, &fact(TimeAnnotation::Point(y(2003))), &binning).unwrap();
        let end0 = score_point(&p, 0, 0, Slot::End, 2, 0).unwrap();
        assert!((pt - 0.5 * (begin + end0)).abs() < 1e-12);
    }

    #[test]
    fn equal_components_average_to_themselves() {
        let counts = [(2003, 1), (2005, 1)].into_iter().collect();
        let binning = bin_threshold(&counts, 1).unwrap();
        let mut p = ModelParams::<f64>::init(shape(2, 3, true, Norm::L1), 2).unwrap();
        let rb = p.relation(0, Slot::Begin).to_vec();
        p.relation_mut(0, Slot::End).copy_from_slice(&rb);
        let th = p.phase(0).to_vec();
        p.phase_mut(1).copy_from_slice(&th);
        let c = score_point(&p, 0, 0, Slot::Begin, 1, 0).unwrap();
        let fact = Quadruple {
            subject: 0,
            relation: 0,
            object: 1,
            time: TimeAnnotation::Interval {
                begin: Date::year_only(2003),
                end: Date::year_only(2005),
            },
        };
        assert!((score_fact(&p, &fact, &binning).unwrap() - c).abs() < 1e-12);
    }
}
