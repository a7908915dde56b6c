//! Sparse operators in coordinate form, plus time-periodic operator sums.
//!
//! Entries are kept sorted by (row, col) and deduplicated; exact zeros are
//! dropped. Builders that promise Hermitian output are tested against
//! `hermiticity_defect` rather than carrying a runtime flag.

use super::{HilbertError, HilbertLayout, StateVector};
use crate::scalar::{phase, Scalar, C};
use ndarray::Array2;

/// Complex sparse matrix tied to a layout.
#[derive(Debug, Clone)]
pub struct SparseOperator<R: Scalar> {
    layout: HilbertLayout,
    entries: Vec<(u32, u32, C<R>)>,
}

impl<R: Scalar> SparseOperator<R> {
    /// Build from coordinate entries: duplicates are summed, exact zeros dropped,
    /// result sorted by (row, col).
    pub fn from_entries(
        layout: &HilbertLayout,
        mut raw: Vec<(usize, usize, C<R>)>,
    ) -> SparseOperator<R> {
        let dim = layout.total_dim();
        debug_assert!(raw.iter().all(|&(r, c, _)| r < dim && c < dim));
        raw.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(u32, u32, C<R>)> = Vec::with_capacity(raw.len());
        for (r, c, v) in raw {
            if let Some(last) = entries.last_mut() {
                if last.0 as usize == r && last.1 as usize == c {
                    last.2 += v;
                    continue;
                }
            }
            entries.push((r as u32, c as u32, v));
        }
        entries.retain(|&(_, _, v)| v.re != R::zero() || v.im != R::zero());
        SparseOperator {
            layout: layout.clone(),
            entries,
        }
    }

    pub fn zero(layout: &HilbertLayout) -> SparseOperator<R> {
        SparseOperator {
            layout: layout.clone(),
            entries: Vec::new(),
        }
    }

    pub fn identity(layout: &HilbertLayout) -> SparseOperator<R> {
        let one = C::new(R::one(), R::zero());
        let entries = (0..layout.total_dim() as u32).map(|i| (i, i, one)).collect();
        SparseOperator {
            layout: layout.clone(),
            entries,
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Entries in (row, col) lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C<R>)> + '_ {
        self.entries
            .iter()
            .map(|&(r, c, v)| (r as usize, c as usize, v))
    }

    pub fn scaled(&self, f: C<R>) -> SparseOperator<R> {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.2 *= f;
        }
        out.entries
            .retain(|&(_, _, v)| v.re != R::zero() || v.im != R::zero());
        out
    }

    pub fn add(&self, other: &SparseOperator<R>) -> Result<SparseOperator<R>, HilbertError> {
        if self.layout != other.layout {
            return Err(HilbertError::LayoutMismatch);
        }
        let mut raw: Vec<(usize, usize, C<R>)> = self.entries().collect();
        raw.extend(other.entries());
        Ok(SparseOperator::from_entries(&self.layout, raw))
    }

    pub fn sub(&self, other: &SparseOperator<R>) -> Result<SparseOperator<R>, HilbertError> {
        self.add(&other.scaled(C::new(-R::one(), R::zero())))
    }

    pub fn adjoint(&self) -> SparseOperator<R> {
        let raw = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseOperator::from_entries(&self.layout, raw)
    }

    /// `self + self†`.
    pub fn plus_adjoint(&self) -> SparseOperator<R> {
        self.add(&self.adjoint()).expect("same layout")
    }

    pub fn matmul(&self, other: &SparseOperator<R>) -> Result<SparseOperator<R>, HilbertError> {
        if self.layout != other.layout {
            return Err(HilbertError::LayoutMismatch);
        }
        // CSR-style row offsets for the right operand.
        let dim = self.dim();
        let mut row_start = vec![0usize; dim + 1];
        for &(r, _, _) in &other.entries {
            row_start[r as usize + 1] += 1;
        }
        for i in 0..dim {
            row_start[i + 1] += row_start[i];
        }
        let zero = C::new(R::zero(), R::zero());
        let mut acc: Vec<C<R>> = vec![zero; dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut raw: Vec<(usize, usize, C<R>)> = Vec::new();
        let mut i = 0;
        while i < self.entries.len() {
            let row = self.entries[i].0;
            touched.clear();
            while i < self.entries.len() && self.entries[i].0 == row {
                let (_, k, va) = self.entries[i];
                for &(_, j, vb) in &other.entries[row_start[k as usize]..row_start[k as usize + 1]]
                {
                    let j = j as usize;
                    if acc[j] == zero {
                        touched.push(j);
                    }
                    acc[j] += va * vb;
                }
                i += 1;
            }
            for &j in &touched {
                raw.push((row as usize, j, acc[j]));
                acc[j] = zero;
            }
        }
        Ok(SparseOperator::from_entries(&self.layout, raw))
    }

    pub fn commutator(&self, other: &SparseOperator<R>) -> Result<SparseOperator<R>, HilbertError> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[C<R>], y: &mut [C<R>]) {
        let zero = C::new(R::zero(), R::zero());
        y.fill(zero);
        for &(r, c, v) in &self.entries {
            y[r as usize] += v * x[c as usize];
        }
    }

    /// `y += f · A x`.
    pub fn apply_add_scaled(&self, x: &[C<R>], y: &mut [C<R>], f: C<R>) {
        for &(r, c, v) in &self.entries {
            y[r as usize] += f * v * x[c as usize];
        }
    }

    /// Apply to a state, renormalizing. Errors on an annihilated state.
    pub fn apply_state(&self, psi: &StateVector<R>) -> Result<StateVector<R>, HilbertError> {
        if *psi.layout() != self.layout {
            return Err(HilbertError::LayoutMismatch);
        }
        let mut out = vec![C::new(R::zero(), R::zero()); self.dim()];
        self.apply_into(psi.amplitudes(), &mut out);
        StateVector::from_amplitudes(&self.layout, out)
    }

    /// `⟨psi| A |psi⟩`.
    pub fn expectation(&self, psi: &StateVector<R>) -> C<R> {
        let x = psi.amplitudes();
        let mut acc = C::new(R::zero(), R::zero());
        for &(r, c, v) in &self.entries {
            acc += x[r as usize].conj() * v * x[c as usize];
        }
        acc
    }

    pub fn to_dense(&self) -> Array2<C<R>> {
        let dim = self.dim();
        let mut m = Array2::zeros((dim, dim));
        for &(r, c, v) in &self.entries {
            m[(r as usize, c as usize)] += v;
        }
        m
    }

    pub fn max_abs_entry(&self) -> R {
        self.entries
            .iter()
            .fold(R::zero(), |acc, &(_, _, v)| acc.max(v.norm()))
    }

    /// `max_ij |a_ij - conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> R {
        self.sub(&self.adjoint())
            .map(|d| d.max_abs_entry())
            .unwrap_or_else(|_| R::infinity())
    }

    pub fn is_hermitian(&self, tol: R) -> bool {
        self.hermiticity_defect() <= tol
    }
}

/// One harmonic term `e^{i freq t} · op` of a time-periodic Hamiltonian.
#[derive(Debug, Clone)]
pub struct HarmonicTerm<R: Scalar> {
    pub freq: R,
    pub op: SparseOperator<R>,
}

/// Time-dependent operator `H(t) = Σ_k e^{i ω_k t} A_k`.
///
/// Hermitian Hamiltonians list each oscillating term together with its
/// conjugate partner `(−ω, A†)` explicitly. Static parts use `ω = 0`.
#[derive(Debug, Clone)]
pub struct HarmonicOperator<R: Scalar> {
    layout: HilbertLayout,
    terms: Vec<HarmonicTerm<R>>,
}

impl<R: Scalar> HarmonicOperator<R> {
    pub fn new(
        layout: &HilbertLayout,
        terms: Vec<HarmonicTerm<R>>,
    ) -> Result<HarmonicOperator<R>, HilbertError> {
        for t in &terms {
            if t.op.layout() != layout {
                return Err(HilbertError::LayoutMismatch);
            }
        }
        Ok(HarmonicOperator {
            layout: layout.clone(),
            terms,
        })
    }

    pub fn constant(op: SparseOperator<R>) -> HarmonicOperator<R> {
        HarmonicOperator {
            layout: op.layout().clone(),
            terms: vec![HarmonicTerm {
                freq: R::zero(),
                op,
            }],
        }
    }

    /// A static operator plus its oscillating terms and their conjugates:
    /// pushes `(freq, op)` and `(-freq, op†)`.
    pub fn push_with_conjugate(&mut self, freq: R, op: SparseOperator<R>) {
        debug_assert!(op.layout() == &self.layout);
        self.terms.push(HarmonicTerm {
            freq: -freq,
            op: op.adjoint(),
        });
        self.terms.push(HarmonicTerm { freq, op });
    }

    pub fn push(&mut self, freq: R, op: SparseOperator<R>) {
        debug_assert!(op.layout() == &self.layout);
        self.terms.push(HarmonicTerm { freq, op });
    }

    pub fn empty(layout: &HilbertLayout) -> HarmonicOperator<R> {
        HarmonicOperator {
            layout: layout.clone(),
            terms: Vec::new(),
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[HarmonicTerm<R>] {
        &self.terms
    }

    /// Instantaneous sparse operator at time `t`.
    pub fn materialize(&self, t: R) -> SparseOperator<R> {
        let mut raw: Vec<(usize, usize, C<R>)> = Vec::new();
        for term in &self.terms {
            let ph = phase(term.freq * t);
            raw.extend(term.op.entries().map(|(r, c, v)| (r, c, ph * v)));
        }
        SparseOperator::from_entries(&self.layout, raw)
    }

    /// `y = H(t) x` without materializing.
    pub fn apply_into(&self, t: R, x: &[C<R>], y: &mut [C<R>]) {
        y.fill(C::new(R::zero(), R::zero()));
        for term in &self.terms {
            term.op.apply_add_scaled(x, y, phase(term.freq * t));
        }
    }

    /// Largest |ω| present, used for step-size heuristics.
    pub fn max_frequency(&self) -> R {
        self.terms
            .iter()
            .fold(R::zero(), |acc, t| acc.max(t.freq.abs()))
    }
}
