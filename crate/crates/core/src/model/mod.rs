//! TeRo parameters and scoring.
//!
//! Entities and relations live in `C^k`. Each time step owns a phase vector
//! that rotates entity embeddings element-wise, and a fact `(s, r, o, τ)` is
//! scored by the distance `‖s∘e^{iθ_τ} + r − conj(o∘e^{iθ_τ})‖`. Lower is
//! more plausible.

mod checkpoint;
mod complex;
mod score;

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint,
};
pub use complex::{rotate, ComplexVec, PhaseVec};
pub use score::{residual, score_fact, score_key, score_point};

use crate::data::Slot;
use crate::error::{Result, TeroError};

/// Floating-point scalar the model can be instantiated with.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Norm of the score residual. `L1` sums absolute values of real and
/// imaginary parts; `L2` is the Euclidean norm over the same `2k` reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    L1,
    L2,
}

impl Norm {
    pub fn p(self) -> u8 {
        match self {
            Norm::L1 => 1,
            Norm::L2 => 2,
        }
    }

    pub fn from_p(p: u8) -> Result<Self> {
        match p {
            1 => Ok(Norm::L1),
            2 => Ok(Norm::L2),
            other => Err(TeroError::Config(format!(
                "norm must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl FromStr for Norm {
    type Err = TeroError;

    fn from_str(s: &str) -> Result<Self> {
        s.parse::<u8>()
            .map_err(|_| TeroError::Config(format!("norm must be 1 or 2, got `{s}`")))
            .and_then(Norm::from_p)
    }
}

/// Table sizes and scoring options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n_entities: usize,
    pub n_relations: usize,
    pub n_steps: usize,
    pub dim: usize,
    /// Separate begin/end relation embeddings.
    pub dual: bool,
    pub norm: Norm,
}

/// Per-coordinate Adagrad sums of squared gradients, one per trainable table.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulators<F> {
    pub entity: Vec<Complex<F>>,
    pub relation_begin: Vec<Complex<F>>,
    pub relation_end: Vec<Complex<F>>,
    pub phase: Vec<F>,
}

impl<F: Real> Accumulators<F> {
    fn zeros(shape: &Shape) -> Self {
        let k = shape.dim;
        let zero = Complex::new(F::zero(), F::zero());
        Accumulators {
            entity: vec![zero; shape.n_entities * k],
            relation_begin: vec![zero; shape.n_relations * k],
            relation_end: vec![zero; if shape.dual { shape.n_relations * k } else { 0 }],
            phase: vec![F::zero(); shape.n_steps * k],
        }
    }
}

/// All trainable arrays, stored row-major (`row * k + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    shape: Shape,
    pub(crate) entity: Vec<Complex<F>>,
    pub(crate) relation_begin: Vec<Complex<F>>,
    /// Empty unless `shape.dual`; the end slot then aliases the begin table.
    pub(crate) relation_end: Vec<Complex<F>>,
    pub(crate) phase: Vec<F>,
    pub(crate) accum: Accumulators<F>,
}

impl<F: Real> ModelParams<F> {
    /// Deterministic initialization. Real and imaginary parts are uniform in
    /// `±6/√(2k)`, phases uniform in `[0, 2π)`, accumulators zero.
    pub fn init(shape: Shape, seed: u64) -> Result<Self> {
        if shape.n_entities == 0 || shape.n_relations == 0 || shape.n_steps == 0 || shape.dim == 0 {
            return Err(TeroError::Config(format!(
                "all table sizes must be at least 1: {shape:?}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = shape.dim;
        let bound = 6.0 / ((2 * k) as f64).sqrt();
        let table = |rows: usize, rng: &mut ChaCha8Rng| -> Vec<Complex<F>> {
            (0..rows * k)
                .map(|_| {
                    let re = rng.gen_range(-bound..bound);
                    let im = rng.gen_range(-bound..bound);
                    Complex::new(F::lit(re), F::lit(im))
                })
                .collect()
        };
        let entity = table(shape.n_entities, &mut rng);
        let relation_begin = table(shape.n_relations, &mut rng);
        let relation_end = if shape.dual {
            table(shape.n_relations, &mut rng)
        } else {
            Vec::new()
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let phase = (0..shape.n_steps * k)
            .map(|_| F::lit(rng.gen_range(0.0..two_pi)))
            .collect();
        Ok(ModelParams {
            accum: Accumulators::zeros(&shape),
            shape,
            entity,
            relation_begin,
            relation_end,
            phase,
        })
    }

    /// Assembles parameters from explicit tables (row-major, `k` per row).
    pub fn from_tables(
        shape: Shape,
        entity: Vec<Complex<F>>,
        relation_begin: Vec<Complex<F>>,
        relation_end: Vec<Complex<F>>,
        phase: Vec<F>,
    ) -> Result<Self> {
        let k = shape.dim;
        let check = |have: usize, want: usize| {
            if have == want {
                Ok(())
            } else {
                Err(TeroError::LengthMismatch {
                    left: have,
                    right: want,
                })
            }
        };
        check(entity.len(), shape.n_entities * k)?;
        check(relation_begin.len(), shape.n_relations * k)?;
        check(
            relation_end.len(),
            if shape.dual { shape.n_relations * k } else { 0 },
        )?;
        check(phase.len(), shape.n_steps * k)?;
        Ok(ModelParams {
            accum: Accumulators::zeros(&shape),
            shape,
            entity,
            relation_begin,
            relation_end,
            phase,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn norm(&self) -> Norm {
        self.shape.norm
    }

    pub fn set_norm(&mut self, norm: Norm) {
        self.shape.norm = norm;
    }

    pub fn entity(&self, id: usize) -> &[Complex<F>] {
        let k = self.shape.dim;
        &self.entity[id * k..(id + 1) * k]
    }

    pub fn relation(&self, id: usize, slot: Slot) -> &[Complex<F>] {
        let k = self.shape.dim;
        let table = self.relation_table(slot);
        &table[id * k..(id + 1) * k]
    }

    pub fn phase(&self, step: usize) -> &[F] {
        let k = self.shape.dim;
        &self.phase[step * k..(step + 1) * k]
    }

    pub fn entity_mut(&mut self, id: usize) -> &mut [Complex<F>] {
        let k = self.shape.dim;
        &mut self.entity[id * k..(id + 1) * k]
    }

    pub fn relation_mut(&mut self, id: usize, slot: Slot) -> &mut [Complex<F>] {
        let k = self.shape.dim;
        let table = if self.shape.dual && slot == Slot::End {
            &mut self.relation_end
        } else {
            &mut self.relation_begin
        };
        &mut table[id * k..(id + 1) * k]
    }

    pub fn phase_mut(&mut self, step: usize) -> &mut [F] {
        let k = self.shape.dim;
        &mut self.phase[step * k..(step + 1) * k]
    }

    pub fn entity_vec(&self, id: usize) -> ComplexVec<F> {
        ComplexVec(self.entity(id).to_vec())
    }

    pub fn phase_vec(&self, step: usize) -> PhaseVec<F> {
        PhaseVec(self.phase(step).to_vec())
    }

    pub fn accumulators(&self) -> &Accumulators<F> {
        &self.accum
    }

    /// Drops optimizer state, as when reloading from a checkpoint.
    pub fn reset_accumulators(&mut self) {
        self.accum = Accumulators::zeros(&self.shape);
    }

    /// Number of trainable reals, excluding optimizer state.
    pub fn param_count(&self) -> usize {
        param_count(&self.shape)
    }

    pub fn is_finite(&self) -> bool {
        let c = |v: &Vec<Complex<F>>| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        c(&self.entity)
            && c(&self.relation_begin)
            && c(&self.relation_end)
            && self.phase.iter().all(|t| t.is_finite())
    }

    pub(crate) fn relation_table(&self, slot: Slot) -> &[Complex<F>] {
        if self.shape.dual && slot == Slot::End {
            &self.relation_end
        } else {
            &self.relation_begin
        }
    }

    pub(crate) fn check_ids(&self, s: usize, r: usize, o: usize, steps: &[usize]) -> Result<()> {
        let sh = &self.shape;
        let check = |kind, id, size| {
            if id < size {
                Ok(())
            } else {
                Err(TeroError::IdOutOfRange { kind, id, size })
            }
        };
        check("entity", s, sh.n_entities)?;
        check("entity", o, sh.n_entities)?;
        check("relation", r, sh.n_relations)?;
        for &t in steps {
            check("time step", t, sh.n_steps)?;
        }
        Ok(())
    }

    /// Every trainable real in a fixed order: entity, begin-relation and
    /// end-relation tables as interleaved (re, im) pairs, then phases.
    pub fn to_flat(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.param_count());
        for t in [&self.entity, &self.relation_begin, &self.relation_end] {
            out.extend(t.iter().flat_map(|z| [z.re, z.im]));
        }
        out.extend_from_slice(&self.phase);
        out
    }

    /// Inverse of [`ModelParams::to_flat`]; optimizer state is untouched.
    pub fn assign_flat(&mut self, values: &[F]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(TeroError::LengthMismatch {
                left: values.len(),
                right: self.param_count(),
            });
        }
        let mut it = values.iter().copied();
        for t in [
            &mut self.entity,
            &mut self.relation_begin,
            &mut self.relation_end,
        ] {
            for z in t.iter_mut() {
                z.re = it.next().unwrap();
                z.im = it.next().unwrap();
            }
        }
        for x in self.phase.iter_mut() {
            *x = it.next().unwrap();
        }
        Ok(())
    }

    /// Converts every table to another scalar type.
    pub fn cast<G: Real>(&self) -> ModelParams<G> {
        let cz = |v: &Vec<Complex<F>>| -> Vec<Complex<G>> {
            v.iter()
                .map(|z| {
                    Complex::new(
                        G::lit(z.re.to_f64().unwrap()),
                        G::lit(z.im.to_f64().unwrap()),
                    )
                })
                .collect()
        };
        let cr = |v: &Vec<F>| -> Vec<G> { v.iter().map(|x| G::lit(x.to_f64().unwrap())).collect() };
        ModelParams {
            shape: self.shape,
            entity: cz(&self.entity),
            relation_begin: cz(&self.relation_begin),
            relation_end: cz(&self.relation_end),
            phase: cr(&self.phase),
            accum: Accumulators {
                entity: cz(&self.accum.entity),
                relation_begin: cz(&self.accum.relation_begin),
                relation_end: cz(&self.accum.relation_end),
                phase: cr(&self.accum.phase),
            },
        }
    }
}

/// `2·n_e·k + 2·(dual ? 2 : 1)·n_r·k + n_τ·k`
pub fn param_count(shape: &Shape) -> usize {
    let k = shape.dim;
    let rel_tables = if shape.dual { 2 } else { 1 };
    2 * shape.n_entities * k + 2 * rel_tables * shape.n_relations * k + shape.n_steps * k
}
