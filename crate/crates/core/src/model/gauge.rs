//! Spatial-phase gauge reduction for traveling-wave drives.
//!
//! With per-atom positions the Raman couplings carry phases
//! `e^{i(k1-k2)·r_n}` (classical pair) and `e^{i k3·r_n}` (cavity-assisted
//! leg). A diagonal unitary built from `(k1-k2)·r_n` moves all position
//! dependence onto the cavity term, where it appears as
//! `e^{i(k3-k1+k2)·r_n}` and vanishes when the wave vectors close.

use super::{derived_constants, expect_boson, labels, ModelError, ModelParams};
use crate::hilbert::{boson_ops, embed, Factor, FactorKind, HilbertLayout, SparseOperator};
use crate::scalar::{phase, Scalar, C};

/// Wave vectors of the three traveling-wave drives.
#[derive(Debug, Clone, Copy)]
pub struct KVectors<R: Scalar> {
    pub k1: [R; 3],
    pub k2: [R; 3],
    pub k3: [R; 3],
}

fn dot3<R: Scalar>(a: [R; 3], b: [R; 3]) -> R {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Result of the gauge reduction on a per-atom two-level layout.
pub struct GaugeReduction<R: Scalar> {
    /// Raman Hamiltonian (at `t = 0`) with explicit spatial phases.
    pub h_before: SparseOperator<R>,
    /// `U† H U`: classical-pair phases removed, residual phase on the cavity term.
    pub h_after: SparseOperator<R>,
    /// The diagonal gauge transformation.
    pub u_gauge: SparseOperator<R>,
    /// Residual phase `(k3-k1+k2)·r_n` per atom, as read off `h_after`.
    pub cavity_term_phases: Vec<R>,
}

/// Build the position-dependent Raman Hamiltonian on a per-atom layout and
/// reduce it by the diagonal gauge transformation.
///
/// `positions` lists one 3-vector per atom, cloud 1 first. The drive phases
/// enter at `t = 0` (the two-photon-detuning phase is a prefactor common to
/// all atoms and irrelevant to the reduction).
pub fn gauge_reduce<R: Scalar>(
    p: &ModelParams<R>,
    k: &KVectors<R>,
    positions: &[[R; 3]],
    layout: &HilbertLayout,
) -> Result<GaugeReduction<R>, ModelError> {
    let atoms = p.n1 + p.n2;
    if positions.len() != atoms {
        return Err(ModelError::PositionCount {
            got: positions.len(),
            want: atoms,
        });
    }
    let d = derived_constants(p)?;
    let atom_layout = HilbertLayout::new(vec![Factor::qudit(2, "atom")])?;
    let one = C::new(R::one(), R::zero());
    let raise = SparseOperator::from_entries(&atom_layout, vec![(1, 0, one)]);

    let k12 = [k.k1[0] - k.k2[0], k.k1[1] - k.k2[1], k.k1[2] - k.k2[2]];

    let mut before = SparseOperator::zero(layout);
    let mut atom_index = 0usize;
    let mut atom_meta: Vec<(String, &'static str)> = Vec::new();
    for (cloud, count, cavity) in [(1usize, p.n1, labels::CAVITY1), (2, p.n2, labels::CAVITY2)] {
        let cut = expect_boson(layout, cavity)?;
        let a_dag = embed(&boson_ops::<R>(cut)?.a_dag, cavity, layout)?;
        for n in 0..count {
            let label = labels::atom(cloud, n);
            let r = positions[atom_index];
            let up = embed(&raise, &label, layout)?;
            let drive = up.scaled(d.collective_drive * phase(dot3(k12, r)));
            let cav = a_dag
                .matmul(&up)?
                .scaled(d.cavity_exchange * phase(dot3(k.k3, r)));
            before = before.add(&drive.plus_adjoint())?.add(&cav.plus_adjoint())?;
            atom_meta.push((label, cavity));
            atom_index += 1;
        }
    }

    // Diagonal gauge: per atom, |1⟩ gets e^{+i(k1-k2)·r/2} and |0⟩ the conjugate.
    let dim = layout.total_dim();
    let mut diag: Vec<C<R>> = Vec::with_capacity(dim);
    let atom_positions: Vec<usize> = atom_meta
        .iter()
        .map(|(label, _)| layout.position(label).expect("atom factor exists"))
        .collect();
    for flat in 0..dim {
        let multi = layout.multi_index(flat);
        let mut ph = C::new(R::one(), R::zero());
        for (a, &pos) in atom_positions.iter().enumerate() {
            let half_arg = dot3(k12, positions[a]) / R::of(2.0);
            ph *= if multi[pos] == 1 {
                phase(half_arg)
            } else {
                phase(-half_arg)
            };
        }
        diag.push(ph);
    }
    let u_gauge = SparseOperator::from_entries(
        layout,
        diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect(),
    );

    // U† H U for diagonal U is an entrywise phase rotation.
    let after_raw = before
        .entries()
        .map(|(r, c, v)| (r, c, diag[r].conj() * v * diag[c]))
        .collect();
    let h_after = SparseOperator::from_entries(layout, after_raw);

    // Read the residual cavity-term phase per atom off h_after: the element
    // connecting the global ground state to "this atom flipped, its cavity
    // singly occupied".
    let ground = vec![0usize; layout.num_factors()];
    let col = layout.flat_index(&ground);
    let mut cavity_term_phases = Vec::with_capacity(atoms);
    let dense_lookup: std::collections::HashMap<(usize, usize), C<R>> =
        h_after.entries().map(|(r, c, v)| ((r, c), v)).collect();
    for (a, (label, cavity)) in atom_meta.iter().enumerate() {
        let mut multi = ground.clone();
        multi[layout.position(label)?] = 1;
        multi[layout.position(cavity)?] = 1;
        let row = layout.flat_index(&multi);
        let el = dense_lookup
            .get(&(row, col))
            .copied()
            .unwrap_or_else(|| C::new(R::zero(), R::zero()));
        // Phase relative to the bare coupling Λ.
        let rel = el / d.cavity_exchange;
        cavity_term_phases.push(rel.arg());
        let _ = a;
    }

    Ok(GaugeReduction {
        h_before: before,
        h_after,
        u_gauge,
        cavity_term_phases,
    })
}

/// Convenience check that a layout is the per-atom two-level form.
pub fn is_gauge_layout(layout: &HilbertLayout) -> bool {
    layout
        .factors()
        .iter()
        .all(|f| matches!(f.kind, FactorKind::Qudit { levels: 2 } | FactorKind::Boson { .. }))
}
