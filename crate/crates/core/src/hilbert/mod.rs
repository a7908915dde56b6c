//! Tensor-product state spaces and the types living on them.
//!
//! A [`HilbertLayout`] is an ordered list of factor spaces. Flat indexing is
//! factor-major with the *first* factor varying slowest; Dicke factors are
//! ordered `M = -J..+J` ascending and boson factors `n = 0..n_max` ascending.
//! Every operator and state carries its layout, and layout mismatches are
//! errors rather than silent reinterpretation.

mod ops;
mod sparse;

pub use ops::{boson_ops, dicke_ops, embed, x_basis, BosonOps, DickeOps, XBasis};
pub use sparse::{HarmonicOperator, HarmonicTerm, SparseOperator};

use crate::scalar::{Scalar, C};
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("layout must contain at least one factor")]
    EmptyLayout,
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown factor label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: operator dim {op_dim} vs factor `{label}` dim {factor_dim}")]
    FactorDimMismatch {
        label: String,
        op_dim: usize,
        factor_dim: usize,
    },
    #[error("layouts differ between operands")]
    LayoutMismatch,
    #[error("a Dicke factor needs at least one atom")]
    ZeroAtoms,
    #[error("a boson factor needs a Fock cutoff of at least one")]
    ZeroCutoff,
    #[error("state vector has (near-)zero norm")]
    ZeroNorm,
    #[error("amplitude count {got} does not match layout dimension {want}")]
    AmplitudeCount { got: usize, want: usize },
}

/// Kind of a single tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Symmetric collective spin of `atoms` two-level atoms; dimension `atoms + 1`,
    /// basis `|J, M⟩` with `J = atoms/2`, `M` ascending.
    Dicke { atoms: usize },
    /// Truncated bosonic mode; dimension `cutoff + 1`, Fock basis ascending.
    Boson { cutoff: usize },
    /// A bare d-level system (used for per-atom representations).
    Qudit { levels: usize },
}

impl FactorKind {
    pub fn dim(&self) -> usize {
        match *self {
            FactorKind::Dicke { atoms } => atoms + 1,
            FactorKind::Boson { cutoff } => cutoff + 1,
            FactorKind::Qudit { levels } => levels,
        }
    }
}

/// One labelled factor of a tensor-product space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub kind: FactorKind,
    pub label: String,
}

impl Factor {
    pub fn dicke(atoms: usize, label: &str) -> Self {
        Factor {
            kind: FactorKind::Dicke { atoms },
            label: label.to_string(),
        }
    }
    pub fn boson(cutoff: usize, label: &str) -> Self {
        Factor {
            kind: FactorKind::Boson { cutoff },
            label: label.to_string(),
        }
    }
    pub fn qudit(levels: usize, label: &str) -> Self {
        Factor {
            kind: FactorKind::Qudit { levels },
            label: label.to_string(),
        }
    }
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

/// Ordered tensor-product layout with factor-major flat indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    total: usize,
}

impl HilbertLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self, HilbertError> {
        if factors.is_empty() {
            return Err(HilbertError::EmptyLayout);
        }
        for (i, f) in factors.iter().enumerate() {
            match f.kind {
                FactorKind::Dicke { atoms } if atoms == 0 => return Err(HilbertError::ZeroAtoms),
                FactorKind::Boson { cutoff } if cutoff == 0 => {
                    return Err(HilbertError::ZeroCutoff)
                }
                _ => {}
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(HilbertError::DuplicateLabel(f.label.clone()));
            }
        }
        // First factor varies slowest.
        let n = factors.len();
        let mut strides = vec![1usize; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].dim();
        }
        let total = strides[0] * factors[0].dim();
        Ok(HilbertLayout {
            factors,
            strides,
            total,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn position(&self, label: &str) -> Result<usize, HilbertError> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| HilbertError::UnknownLabel(label.to_string()))
    }

    pub fn stride(&self, pos: usize) -> usize {
        self.strides[pos]
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.factors.len());
        multi
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| m * s)
            .sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.factors.len()];
        let mut rem = flat;
        for (i, f) in self.factors.iter().enumerate() {
            out[i] = rem / self.strides[i];
            rem %= self.strides[i];
            debug_assert!(out[i] < f.dim());
        }
        out
    }

    /// Concatenation of two layouts (labels must stay unique).
    pub fn join(&self, other: &HilbertLayout) -> Result<HilbertLayout, HilbertError> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        HilbertLayout::new(factors)
    }
}

/// Normalized complex amplitudes over a layout.
#[derive(Debug, Clone)]
pub struct StateVector<R: Scalar> {
    layout: HilbertLayout,
    amps: Vec<C<R>>,
}

impl<R: Scalar> StateVector<R> {
    /// Basis state selected by one index per factor.
    pub fn basis(layout: &HilbertLayout, multi: &[usize]) -> Self {
        let mut amps = vec![C::new(R::zero(), R::zero()); layout.total_dim()];
        amps[layout.flat_index(multi)] = C::new(R::one(), R::zero());
        StateVector {
            layout: layout.clone(),
            amps,
        }
    }

    /// Build from raw amplitudes, normalizing. Rejects (near-)zero input.
    pub fn from_amplitudes(
        layout: &HilbertLayout,
        amps: Vec<C<R>>,
    ) -> Result<Self, HilbertError> {
        if amps.len() != layout.total_dim() {
            return Err(HilbertError::AmplitudeCount {
                got: amps.len(),
                want: layout.total_dim(),
            });
        }
        let mut s = StateVector {
            layout: layout.clone(),
            amps,
        };
        let n = s.norm();
        if n < R::of(1e-12) {
            return Err(HilbertError::ZeroNorm);
        }
        s.scale(C::new(R::one() / n, R::zero()));
        Ok(s)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C<R>] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C<R>] {
        &mut self.amps
    }

    pub fn norm(&self) -> R {
        self.amps
            .iter()
            .map(|z| z.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt()
    }

    pub(crate) fn scale(&mut self, f: C<R>) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        if n > R::zero() {
            self.scale(C::new(R::one() / n, R::zero()));
        }
    }

    /// `⟨self|other⟩`.
    pub fn dot(&self, other: &StateVector<R>) -> C<R> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(C::new(R::zero(), R::zero()), |acc, z| acc + z)
    }

    /// Squared overlap `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &StateVector<R>) -> R {
        self.dot(other).norm_sqr()
    }

    /// Tensor product; the joined layout keeps factor order `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector<R>) -> Result<StateVector<R>, HilbertError> {
        let layout = self.layout.join(&other.layout)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { layout, amps })
    }

    /// Occupation probability of the top Fock level of a boson factor.
    pub fn top_level_occupation(&self, pos: usize) -> R {
        let dim = self.layout.factors()[pos].dim();
        let stride = self.layout.stride(pos);
        let mut acc = R::zero();
        for (i, a) in self.amps.iter().enumerate() {
            if (i / stride) % dim == dim - 1 {
                acc += a.norm_sqr();
            }
        }
        acc
    }
}

/// Hermitian, unit-trace matrix over a layout.
#[derive(Debug, Clone)]
pub struct DensityMatrix<R: Scalar> {
    layout: HilbertLayout,
    data: Array2<C<R>>,
}

impl<R: Scalar> DensityMatrix<R> {
    pub fn from_pure(psi: &StateVector<R>) -> Self {
        let d = psi.amplitudes().len();
        let mut data = Array2::zeros((d, d));
        for (i, a) in psi.amplitudes().iter().enumerate() {
            for (j, b) in psi.amplitudes().iter().enumerate() {
                data[(i, j)] = a * b.conj();
            }
        }
        DensityMatrix {
            layout: psi.layout().clone(),
            data,
        }
    }

    pub(crate) fn from_parts(layout: HilbertLayout, data: Array2<C<R>>) -> Self {
        DensityMatrix { layout, data }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<C<R>> {
        &self.data
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut Array2<C<R>> {
        &mut self.data
    }

    pub fn trace(&self) -> C<R> {
        let mut t = C::new(R::zero(), R::zero());
        for i in 0..self.dim() {
            t += self.data[(i, i)];
        }
        t
    }

    pub fn element(&self, row: usize, col: usize) -> C<R> {
        self.data[(row, col)]
    }

    pub fn hermiticity_defect(&self) -> R {
        let mut worst = R::zero();
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let d = (self.data[(i, j)] - self.data[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue; negative values beyond tolerance signal an invalid state.
    pub fn min_eigenvalue(&self) -> R {
        crate::numeric::eigvalsh(&self.data)[0]
    }

    pub fn eigenvalues(&self) -> Vec<R> {
        crate::numeric::eigvalsh(&self.data)
    }
}
