//! Collective spin and bosonic ladder operators, the S_x eigenbasis, and
//! Kronecker embedding of single-factor operators into a full layout.

use super::{Factor, HilbertError, HilbertLayout, SparseOperator};
use crate::numeric;
use crate::scalar::{Scalar, C};
use ndarray::Array2;

/// Collective spin operators on the symmetric (Dicke) space of `N` atoms,
/// basis `|J, M⟩` with `J = N/2`, `M = -J..+J` ascending.
pub struct DickeOps<R: Scalar> {
    pub s_plus: SparseOperator<R>,
    pub s_minus: SparseOperator<R>,
    pub s_z: SparseOperator<R>,
    /// `S_x = S⁺ + S⁻` (eigenvalues `2 M_x`).
    pub s_x: SparseOperator<R>,
}

/// `S⁺|J,M⟩ = sqrt(J(J+1) - M(M+1)) |J,M+1⟩` and friends.
pub fn dicke_ops<R: Scalar>(atoms: usize) -> Result<DickeOps<R>, HilbertError> {
    if atoms == 0 {
        return Err(HilbertError::ZeroAtoms);
    }
    let layout = HilbertLayout::new(vec![Factor::dicke(atoms, "dicke")])?;
    let j = R::of(atoms as f64 / 2.0);
    let dim = atoms + 1;
    let mut plus = Vec::with_capacity(dim - 1);
    let mut z = Vec::with_capacity(dim);
    for k in 0..dim {
        let m = R::of(k as f64) - j;
        z.push((k, k, C::new(m, R::zero())));
        if k + 1 < dim {
            let amp = (j * (j + R::one()) - m * (m + R::one())).sqrt();
            plus.push((k + 1, k, C::new(amp, R::zero())));
        }
    }
    let s_plus = SparseOperator::from_entries(&layout, plus);
    let s_minus = s_plus.adjoint();
    let s_x = s_plus.add(&s_minus)?;
    let s_z = SparseOperator::from_entries(&layout, z);
    Ok(DickeOps {
        s_plus,
        s_minus,
        s_z,
        s_x,
    })
}

/// Truncated bosonic ladder operators on Fock space `n = 0..n_max`.
pub struct BosonOps<R: Scalar> {
    pub a: SparseOperator<R>,
    pub a_dag: SparseOperator<R>,
    pub n: SparseOperator<R>,
}

pub fn boson_ops<R: Scalar>(n_max: usize) -> Result<BosonOps<R>, HilbertError> {
    if n_max == 0 {
        return Err(HilbertError::ZeroCutoff);
    }
    let layout = HilbertLayout::new(vec![Factor::boson(n_max, "boson")])?;
    let mut lower = Vec::with_capacity(n_max);
    let mut num = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        lower.push((n - 1, n, C::new(R::of(n as f64).sqrt(), R::zero())));
        num.push((n, n, C::new(R::of(n as f64), R::zero())));
    }
    let a = SparseOperator::from_entries(&layout, lower);
    let a_dag = a.adjoint();
    let n = SparseOperator::from_entries(&layout, num);
    Ok(BosonOps { a, a_dag, n })
}

/// Eigenbasis of `S_x` for `N` atoms.
///
/// `eigenvalues[ix] = 2·M_x` ascending, and `coeffs[(ix, iz)] = ⟨M_x|M_z⟩`
/// (real, with the first nonzero component of each eigenvector positive).
pub struct XBasis<R: Scalar> {
    pub eigenvalues: Vec<R>,
    pub coeffs: Array2<R>,
}

impl<R: Scalar> XBasis<R> {
    /// Number of atoms this basis was built for.
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// ⟨M_x(ix) | M_z(iz)⟩.
    pub fn coeff(&self, ix: usize, iz: usize) -> R {
        self.coeffs[(ix, iz)]
    }
}

pub fn x_basis<R: Scalar>(atoms: usize) -> Result<XBasis<R>, HilbertError> {
    let ops = dicke_ops::<R>(atoms)?;
    let (w, v) = numeric::eigh(&ops.s_x.to_dense());
    let dim = atoms + 1;
    // Eigenvectors of the real tridiagonal S_x come out real up to roundoff;
    // fix the global phase of each column to make the first significant
    // component real positive.
    let mut coeffs = Array2::<R>::zeros((dim, dim));
    for ix in 0..dim {
        let col: Vec<C<R>> = (0..dim).map(|iz| v[(iz, ix)]).collect();
        let colmax = col.iter().fold(R::zero(), |a, z| a.max(z.norm()));
        let lead = col
            .iter()
            .find(|z| z.norm() > R::of(1e-10) * colmax)
            .expect("eigenvector has a nonzero component");
        let ph = lead.unscale(lead.norm()); // unit phase of leading entry
        for iz in 0..dim {
            let fixed = col[iz] * ph.conj();
            debug_assert!(fixed.im.abs() < R::of(1e-10));
            coeffs[(ix, iz)] = fixed.re;
        }
    }
    Ok(XBasis {
        eigenvalues: w,
        coeffs,
    })
}

/// Kronecker embedding of a single-factor operator into `layout` at the factor
/// named `slot`, with identity on all other factors.
pub fn embed<R: Scalar>(
    op: &SparseOperator<R>,
    slot: &str,
    layout: &HilbertLayout,
) -> Result<SparseOperator<R>, HilbertError> {
    let pos = layout.position(slot)?;
    let fdim = layout.factors()[pos].dim();
    if op.dim() != fdim {
        return Err(HilbertError::FactorDimMismatch {
            label: slot.to_string(),
            op_dim: op.dim(),
            factor_dim: fdim,
        });
    }
    let post = layout.stride(pos);
    let pre = layout.total_dim() / (post * fdim);
    let mut raw = Vec::with_capacity(op.nnz() * pre * post);
    for (r, c, v) in op.entries() {
        for a in 0..pre {
            let base_r = (a * fdim + r) * post;
            let base_c = (a * fdim + c) * post;
            for b in 0..post {
                raw.push((base_r + b, base_c + b, v));
            }
        }
    }
    Ok(SparseOperator::from_entries(layout, raw))
}
