use crate::model::Real;

/// Logistic sigmoid, evaluated without overflow for large `|x|`.
pub fn sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `ln σ(x)`, stable on both tails.
pub fn log_sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative-sampling loss of one positive against its negatives:
/// `−ln σ(γ − f⁺) − (1/η) Σ ln σ(f⁻ − γ)`.
pub fn loss<F: Real>(pos_score: F, neg_scores: &[F], margin: F) -> F {
    let eta = F::from_usize(neg_scores.len().max(1)).unwrap();
    let neg: F = neg_scores.iter().map(|&n| log_sigmoid(n - margin)).sum();
    -log_sigmoid(margin - pos_score) - neg / eta
}

/// Derivatives of [`loss`] with respect to the positive score and to each
/// negative score.
pub(crate) fn loss_weights<F: Real>(pos_score: F, neg_score: F, margin: F, eta: F) -> (F, F) {
    (
        sigmoid(pos_score - margin),
        -sigmoid(margin - neg_score) / eta,
    )
}
