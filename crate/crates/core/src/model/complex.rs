use num_complex::Complex;

use super::Real;
use crate::error::{Result, TeroError};

/// Length-k complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec<F>(pub Vec<Complex<F>>);

/// Length-k vector of rotation angles in radians. The induced coefficients
/// `cos θ + i sin θ` have unit modulus for any finite `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVec<F>(pub Vec<F>);

impl<F: Real> ComplexVec<F> {
    pub fn from_parts(re: &[F], im: &[F]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(TeroError::LengthMismatch {
                left: re.len(),
                right: im.len(),
            });
        }
        Ok(ComplexVec(
            re.iter()
                .zip(im)
                .map(|(&r, &i)| Complex::new(r, i))
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conj(&self) -> Self {
        ComplexVec(self.0.iter().map(Complex::conj).collect())
    }
}

impl<F: Real> PhaseVec<F> {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Unit-modulus rotation coefficients.
    pub fn coefficients(&self) -> Vec<Complex<F>> {
        self.0.iter().map(|&t| unit(t)).collect()
    }
}

#[inline]
pub(crate) fn unit<F: Real>(theta: F) -> Complex<F> {
    let (sin, cos) = theta.sin_cos();
    Complex::new(cos, sin)
}

/// Element-wise rotation `v_j · e^{iφ_j}`.
pub fn rotate<F: Real>(v: &ComplexVec<F>, phase: &PhaseVec<F>) -> Result<ComplexVec<F>> {
    if v.len() != phase.len() {
        return Err(TeroError::LengthMismatch {
            left: v.len(),
            right: phase.len(),
        });
    }
    Ok(ComplexVec(rotate_slice(&v.0, &phase.0).collect()))
}

pub(crate) fn rotate_slice<'a, F: Real>(
    v: &'a [Complex<F>],
    phase: &'a [F],
) -> impl Iterator<Item = Complex<F>> + 'a {
    v.iter().zip(phase).map(|(&x, &t)| x * unit(t))
}
