//! Observables and verdicts: partial trace, overlap fidelity, protocol
//! target states, and the standard population/coherence/fidelity sample set.

use crate::hilbert::{DensityMatrix, HilbertError, HilbertLayout, SparseOperator, StateVector};
use crate::numeric::{dagger, eigh, eigvalsh};
use crate::scalar::{phase, Scalar, C};
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("keep set must name at least one factor")]
    EmptyKeep,
    #[error("dimension mismatch: state dim {state} vs operator dim {op}")]
    DimensionMismatch { state: usize, op: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

fn keep_split(
    layout: &HilbertLayout,
    keep: &[&str],
) -> Result<(HilbertLayout, Vec<usize>), AnalysisError> {
    if keep.is_empty() {
        return Err(AnalysisError::EmptyKeep);
    }
    let mut keep_pos: Vec<usize> = Vec::with_capacity(keep.len());
    for label in keep {
        keep_pos.push(layout.position(label)?);
    }
    keep_pos.sort_unstable();
    keep_pos.dedup();
    let kept_factors = keep_pos
        .iter()
        .map(|&i| layout.factors()[i].clone())
        .collect();
    Ok((HilbertLayout::new(kept_factors)?, keep_pos))
}

/// Flat index decomposition into (kept, rest) parts for every full index.
fn index_split(layout: &HilbertLayout, keep_pos: &[usize]) -> (Vec<usize>, Vec<usize>, usize) {
    let dim = layout.total_dim();
    let mut keep_flat = vec![0usize; dim];
    let mut rest_flat = vec![0usize; dim];
    let mut rest_dim = 1usize;
    for (i, f) in layout.factors().iter().enumerate() {
        if !keep_pos.contains(&i) {
            rest_dim *= f.dim();
        }
    }
    for flat in 0..dim {
        let multi = layout.multi_index(flat);
        let mut k = 0usize;
        let mut r = 0usize;
        for (i, f) in layout.factors().iter().enumerate() {
            if keep_pos.contains(&i) {
                k = k * f.dim() + multi[i];
            } else {
                r = r * f.dim() + multi[i];
            }
        }
        keep_flat[flat] = k;
        rest_flat[flat] = r;
    }
    (keep_flat, rest_flat, rest_dim)
}

/// Reduced density matrix of a pure state over the named factors.
pub fn partial_trace_state<R: Scalar>(
    state: &StateVector<R>,
    keep: &[&str],
) -> Result<DensityMatrix<R>, AnalysisError> {
    let (kept_layout, keep_pos) = keep_split(state.layout(), keep)?;
    let (keep_flat, rest_flat, rest_dim) = index_split(state.layout(), &keep_pos);
    let kdim = kept_layout.total_dim();
    // Bucket amplitudes by the traced-out index.
    let mut buckets: Vec<Vec<(usize, C<R>)>> = vec![Vec::new(); rest_dim];
    for (flat, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() > R::zero() {
            buckets[rest_flat[flat]].push((keep_flat[flat], *a));
        }
    }
    let mut rho = Array2::<C<R>>::zeros((kdim, kdim));
    for bucket in &buckets {
        for &(ki, ai) in bucket {
            for &(kj, aj) in bucket {
                rho[(ki, kj)] += ai * aj.conj();
            }
        }
    }
    Ok(DensityMatrix::from_parts(kept_layout, rho))
}

/// Reduced density matrix of a mixed state over the named factors.
pub fn partial_trace_rho<R: Scalar>(
    rho: &DensityMatrix<R>,
    keep: &[&str],
) -> Result<DensityMatrix<R>, AnalysisError> {
    let (kept_layout, keep_pos) = keep_split(rho.layout(), keep)?;
    let (keep_flat, rest_flat, _) = index_split(rho.layout(), &keep_pos);
    let kdim = kept_layout.total_dim();
    let dim = rho.dim();
    let mut out = Array2::<C<R>>::zeros((kdim, kdim));
    let m = rho.matrix();
    for i in 0..dim {
        let (ki, ri) = (keep_flat[i], rest_flat[i]);
        for j in 0..dim {
            if rest_flat[j] == ri {
                out[(ki, keep_flat[j])] += m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(kept_layout, out))
}

/// Overlap fidelity `⟨target|ρ|target⟩`.
pub fn fidelity<R: Scalar>(
    rho: &DensityMatrix<R>,
    target: &StateVector<R>,
) -> Result<R, AnalysisError> {
    let dim = rho.dim();
    if target.amplitudes().len() != dim {
        return Err(AnalysisError::DimensionMismatch {
            state: target.amplitudes().len(),
            op: dim,
        });
    }
    let t = target.amplitudes();
    let m = rho.matrix();
    let mut acc = C::new(R::zero(), R::zero());
    for i in 0..dim {
        for j in 0..dim {
            acc += t[i].conj() * m[(i, j)] * t[j];
        }
    }
    Ok(acc.re)
}

/// State-overlap fidelity of two pure states.
pub fn pure_fidelity<R: Scalar>(a: &StateVector<R>, b: &StateVector<R>) -> R {
    a.overlap(b)
}

/// Trace distance `½‖a − b‖₁` of two density matrices.
pub fn trace_distance<R: Scalar>(a: &DensityMatrix<R>, b: &DensityMatrix<R>) -> R {
    let diff = a.matrix() - b.matrix();
    let w = eigvalsh(&diff);
    w.iter().fold(R::zero(), |acc, &x| acc + x.abs()) / R::of(2.0)
}

/// Which two-branch target the protocol aims at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// Branches `|0..0⟩|1..1⟩` and `|1..1⟩|0..0⟩`.
    PsiS,
    /// Branches `|0..0⟩|0..0⟩` and `|1..1⟩|1..1⟩`.
    PsiA,
}

/// Two-branch maximally entangled target with phases `e^{∓i·phase_sign·π/4}`
/// on (first, second) branch.
pub fn target_state<R: Scalar>(
    kind: TargetKind,
    n1: usize,
    n2: usize,
    phase_sign: i32,
) -> StateVector<R> {
    let layout = HilbertLayout::new(vec![
        crate::hilbert::Factor::dicke(n1, crate::model::labels::CLOUD1),
        crate::hilbert::Factor::dicke(n2, crate::model::labels::CLOUD2),
    ])
    .expect("valid cloud sizes");
    let (first, second) = match kind {
        TargetKind::PsiS => ([0usize, n2], [n1, 0usize]),
        TargetKind::PsiA => ([0, 0], [n1, n2]),
    };
    let sign = R::of(phase_sign as f64);
    let quarter = R::PI() / R::of(4.0);
    let inv = R::one() / R::SQRT_2();
    let mut amps = vec![C::new(R::zero(), R::zero()); layout.total_dim()];
    amps[layout.flat_index(&first)] = phase(-sign * quarter).scale(inv);
    amps[layout.flat_index(&second)] = phase(sign * quarter).scale(inv);
    StateVector::from_amplitudes(&layout, amps).expect("normalized by construction")
}

/// The target with the phases the ideal gate actually produces from the
/// canonical start (`|0..0⟩|1..1⟩` for [`TargetKind::PsiS`], the joint ground
/// state for [`TargetKind::PsiA`]) at gate parameter `lambda_tau = ±π/2`:
/// `phase_sign = sign(λτ)` for even total atom number, conjugated for odd.
pub fn protocol_target<R: Scalar>(
    kind: TargetKind,
    n1: usize,
    n2: usize,
    lambda_tau: R,
) -> StateVector<R> {
    let s = if lambda_tau >= R::zero() { 1 } else { -1 };
    let parity = if (n1 + n2) % 2 == 0 { 1 } else { -1 };
    target_state(kind, n1, n2, s * parity)
}

/// One time sample of the standard observable set.
#[derive(Debug, Clone, Copy)]
pub struct ObservableSample<R: Scalar> {
    pub p_ground: R,
    pub p_excited: R,
    pub coh_re: R,
    pub coh_im: R,
    pub fidelity: R,
}

/// The two designated branches of the scenario, as flat indices in the
/// atomic (cloud ⊗ cloud) layout.
#[derive(Debug, Clone, Copy)]
pub struct BranchPair {
    pub ground: usize,
    pub excited: usize,
}

impl BranchPair {
    /// Branch pair for a target kind on an atomic layout.
    pub fn for_kind(kind: TargetKind, n1: usize, n2: usize) -> BranchPair {
        let d2 = n2 + 1;
        match kind {
            // Ground designates the scenario's starting branch.
            TargetKind::PsiS => BranchPair {
                ground: n2, // |0..0⟩|1..1⟩
                excited: n1 * d2,
            },
            TargetKind::PsiA => BranchPair {
                ground: 0,
                excited: n1 * d2 + n2,
            },
        }
    }
}

/// Populations of the two branches, the off-diagonal element
/// `⟨excited|ρ|ground⟩`, and fidelity against the target.
pub fn observables<R: Scalar>(
    rho_atoms: &DensityMatrix<R>,
    branches: BranchPair,
    target: &StateVector<R>,
) -> Result<ObservableSample<R>, AnalysisError> {
    let coh = rho_atoms.element(branches.excited, branches.ground);
    Ok(ObservableSample {
        p_ground: rho_atoms.element(branches.ground, branches.ground).re,
        p_excited: rho_atoms.element(branches.excited, branches.excited).re,
        coh_re: coh.re,
        coh_im: coh.im,
        fidelity: fidelity(rho_atoms, target)?,
    })
}

/// Precomputed rotation `e^{+iGt}` used to report observables in the
/// interaction frame of a static generator `G` (the collective drive).
pub struct FrameRotation<R: Scalar> {
    evals: Vec<R>,
    vecs: Array2<C<R>>,
}

impl<R: Scalar> FrameRotation<R> {
    pub fn new(generator: &SparseOperator<R>) -> FrameRotation<R> {
        let (evals, vecs) = eigh(&generator.to_dense());
        FrameRotation { evals, vecs }
    }

    fn matrix_at(&self, t: R) -> Array2<C<R>> {
        let n = self.evals.len();
        let mut m = self.vecs.clone();
        for (j, &w) in self.evals.iter().enumerate() {
            let ph = phase(w * t);
            for i in 0..n {
                m[(i, j)] *= ph;
            }
        }
        m.dot(&dagger(&self.vecs))
    }

    /// `e^{+iGt} ρ e^{-iGt}`.
    pub fn rotate(&self, rho: &DensityMatrix<R>, t: R) -> DensityMatrix<R> {
        let u = self.matrix_at(t);
        let data = u.dot(rho.matrix()).dot(&dagger(&u));
        DensityMatrix::from_parts(rho.layout().clone(), data)
    }
}

/// Everything needed to turn a full simulation state into one observable
/// sample: which factors to keep, the branch pair on the reduced layout, the
/// target, an optional constant basis change `W` (for simulations run in a
/// rotated atomic representation, applied as `W ρ W†`), and an optional
/// interaction-frame rotation applied before measuring.
pub struct ObservablePipeline<R: Scalar> {
    pub keep: Vec<String>,
    pub branches: BranchPair,
    pub target: StateVector<R>,
    pub basis_change: Option<Array2<C<R>>>,
    pub frame: Option<FrameRotation<R>>,
}

impl<R: Scalar> ObservablePipeline<R> {
    pub fn sample_state(
        &self,
        psi: &StateVector<R>,
        t: R,
    ) -> Result<ObservableSample<R>, AnalysisError> {
        let keep: Vec<&str> = self.keep.iter().map(|s| s.as_str()).collect();
        let rho = partial_trace_state(psi, &keep)?;
        self.finish(rho, t)
    }

    pub fn sample_rho(
        &self,
        rho: &DensityMatrix<R>,
        t: R,
    ) -> Result<ObservableSample<R>, AnalysisError> {
        let keep: Vec<&str> = self.keep.iter().map(|s| s.as_str()).collect();
        let reduced = partial_trace_rho(rho, &keep)?;
        self.finish(reduced, t)
    }

    /// Reduced (basis- and frame-corrected) atomic state, for callers that
    /// need more than the standard sample.
    pub fn reduced_state(
        &self,
        psi: &StateVector<R>,
        t: R,
    ) -> Result<DensityMatrix<R>, AnalysisError> {
        let keep: Vec<&str> = self.keep.iter().map(|s| s.as_str()).collect();
        let rho = partial_trace_state(psi, &keep)?;
        Ok(self.correct(rho, t))
    }

    fn correct(&self, rho: DensityMatrix<R>, t: R) -> DensityMatrix<R> {
        let rho = match &self.basis_change {
            Some(w) => {
                let data = w.dot(rho.matrix()).dot(&dagger(w));
                DensityMatrix::from_parts(rho.layout().clone(), data)
            }
            None => rho,
        };
        match &self.frame {
            Some(f) => f.rotate(&rho, t),
            None => rho,
        }
    }

    fn finish(
        &self,
        rho: DensityMatrix<R>,
        t: R,
    ) -> Result<ObservableSample<R>, AnalysisError> {
        let rho = self.correct(rho, t);
        observables(&rho, self.branches, &self.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Factor;
    use crate::model::labels;
    use crate::propagator::protocol_final_state;
    use crate::scalar::cx;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn bell_layout() -> HilbertLayout {
        HilbertLayout::new(vec![Factor::dicke(1, "a"), Factor::dicke(1, "b")]).unwrap()
    }

    #[test]
    fn product_state_traces_to_projector() {
        let la = HilbertLayout::new(vec![Factor::dicke(2, "a")]).unwrap();
        let lb = HilbertLayout::new(vec![Factor::boson(2, "b")]).unwrap();
        let psi_a = StateVector::<f64>::from_amplitudes(
            &la,
            vec![cx(0.5, 0.1), cx(-0.3, 0.4), cx(0.2, 0.0)],
        )
        .unwrap();
        let psi_b = StateVector::<f64>::basis(&lb, &[1]);
        let joint = psi_a.tensor(&psi_b).unwrap();
        let rho = partial_trace_state(&joint, &["a"]).unwrap();
        let expect = DensityMatrix::from_pure(&psi_a);
        let diff = rho.matrix() - expect.matrix();
        assert!(crate::numeric::max_abs(&diff) < 1e-14);
        assert!((fidelity(&rho, &psi_a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_pair_traces_to_maximally_mixed() {
        let l = bell_layout();
        let inv = 1.0 / 2f64.sqrt();
        let psi = StateVector::<f64>::from_amplitudes(
            &l,
            vec![cx(inv, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(inv, 0.0)],
        )
        .unwrap();
        let rho = partial_trace_state(&psi, &["a"]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(rho.element(i, j).re, want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn random_tripartite_matches_reshape_oracle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(21);
        let l = HilbertLayout::new(vec![
            Factor::qudit(2, "a"),
            Factor::qudit(3, "b"),
            Factor::qudit(2, "c"),
        ])
        .unwrap();
        let amps: Vec<C<f64>> = (0..12)
            .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let psi = StateVector::<f64>::from_amplitudes(&l, amps).unwrap();
        let rho = partial_trace_state(&psi, &["b"]).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);

        // Dense reshape-and-sum oracle: index as (a, b, c) and sum over a, c.
        let mut oracle = Array2::<C<f64>>::zeros((3, 3));
        let x = psi.amplitudes();
        for a in 0..2 {
            for b1 in 0..3 {
                for b2 in 0..3 {
                    for c in 0..2 {
                        let i = (a * 3 + b1) * 2 + c;
                        let j = (a * 3 + b2) * 2 + c;
                        oracle[(b1, b2)] += x[i] * x[j].conj();
                    }
                }
            }
        }
        let diff = rho.matrix() - &oracle;
        assert!(crate::numeric::max_abs(&diff) < 1e-13);

        // Mixed-state route agrees.
        let full = DensityMatrix::from_pure(&psi);
        let rho2 = partial_trace_rho(&full, &["b"]).unwrap();
        let diff = rho.matrix() - rho2.matrix();
        assert!(crate::numeric::max_abs(&diff) < 1e-13);

        // Eigenvalues of reduced states match across routes.
        let w1 = rho.eigenvalues();
        let w2 = rho2.eigenvalues();
        for (a, b) in w1.iter().zip(&w2) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_keep_set_rejected() {
        let l = bell_layout();
        let psi = StateVector::<f64>::basis(&l, &[0, 0]);
        assert!(matches!(
            partial_trace_state(&psi, &[]),
            Err(AnalysisError::EmptyKeep)
        ));
    }

    #[test]
    fn fidelity_basics() {
        let l = bell_layout();
        let psi = StateVector::<f64>::basis(&l, &[1, 0]);
        let rho = DensityMatrix::from_pure(&psi);
        assert_relative_eq!(fidelity(&rho, &psi).unwrap(), 1.0, max_relative = 1e-12);

        // Maximally mixed: 1/d.
        let mut m = Array2::<C<f64>>::zeros((4, 4));
        for i in 0..4 {
            m[(i, i)] = cx(0.25, 0.0);
        }
        let mixed = DensityMatrix::from_parts(l.clone(), m);
        assert_relative_eq!(fidelity(&mixed, &psi).unwrap(), 0.25, max_relative = 1e-12);

        let l3 = HilbertLayout::new(vec![Factor::qudit(3, "x")]).unwrap();
        let other = StateVector::<f64>::basis(&l3, &[0]);
        assert!(matches!(
            fidelity(&rho, &other),
            Err(AnalysisError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn target_state_examples() {
        // N1 = N2 = 1, psi_a: (e^{-iπ/4}|00⟩ + e^{iπ/4}|11⟩)/√2.
        let t = target_state::<f64>(TargetKind::PsiA, 1, 1, 1);
        let inv = 1.0 / 2f64.sqrt();
        assert!(
            (t.amplitudes()[0] - phase::<f64>(-std::f64::consts::FRAC_PI_4).scale(inv)).norm()
                < 1e-14
        );
        assert!(
            (t.amplitudes()[3] - phase::<f64>(std::f64::consts::FRAC_PI_4).scale(inv)).norm()
                < 1e-14
        );
        assert_abs_diff_eq!(t.norm(), 1.0, epsilon = 1e-15);

        for n in [1usize, 2, 4] {
            let s = target_state::<f64>(TargetKind::PsiS, n, n, 1);
            let a = target_state::<f64>(TargetKind::PsiA, n, n, 1);
            assert!(s.overlap(&a) < 1e-15);
        }
    }

    #[test]
    fn protocol_matches_target_cross_module() {
        for (n1, n2) in [(2usize, 2usize), (3, 3), (2, 3)] {
            let l = HilbertLayout::new(vec![
                Factor::dicke(n1, labels::CLOUD1),
                Factor::dicke(n2, labels::CLOUD2),
            ])
            .unwrap();
            let lam = std::f64::consts::FRAC_PI_2;
            let init = StateVector::<f64>::basis(&l, &[0, n2]);
            let out = protocol_final_state(&init, lam).unwrap();
            let t = protocol_target::<f64>(TargetKind::PsiS, n1, n2, lam);
            assert!(
                out.overlap(&t) > 1.0 - 1e-12,
                "({n1},{n2}) psi_s overlap {}",
                out.overlap(&t)
            );

            let init = StateVector::<f64>::basis(&l, &[0, 0]);
            let out = protocol_final_state(&init, lam).unwrap();
            let t = protocol_target::<f64>(TargetKind::PsiA, n1, n2, lam);
            assert!(out.overlap(&t) > 1.0 - 1e-12, "({n1},{n2}) psi_a");
        }
    }

    #[test]
    fn observable_samples() {
        let (n1, n2) = (2usize, 2usize);
        let branches = BranchPair::for_kind(TargetKind::PsiA, n1, n2);
        let target = protocol_target::<f64>(TargetKind::PsiA, n1, n2, std::f64::consts::FRAC_PI_2);
        let l = target.layout().clone();

        // Start state: joint ground.
        let start = StateVector::<f64>::basis(&l, &[0, 0]);
        let s = observables(&DensityMatrix::from_pure(&start), branches, &target).unwrap();
        assert_abs_diff_eq!(s.p_ground, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.p_excited, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.coh_re, 0.0, epsilon = 1e-14);

        // Lossless final state: half/half with |coh| = 1/2 and fidelity 1.
        let s = observables(&DensityMatrix::from_pure(&target), branches, &target).unwrap();
        assert_abs_diff_eq!(s.p_ground, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_excited, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!((s.coh_re * s.coh_re + s.coh_im * s.coh_im).sqrt(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.fidelity, 1.0, epsilon = 1e-12);

        // Fully dephased mixture of the two branches.
        let mut m = Array2::<C<f64>>::zeros((l.total_dim(), l.total_dim()));
        m[(branches.ground, branches.ground)] = cx(0.5, 0.0);
        m[(branches.excited, branches.excited)] = cx(0.5, 0.0);
        let mixed = DensityMatrix::from_parts(l.clone(), m);
        let s = observables(&mixed, branches, &target).unwrap();
        assert_abs_diff_eq!(s.p_ground, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.coh_re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.fidelity, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn coherence_respects_cauchy_schwarz() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let l = bell_layout();
        for _ in 0..50 {
            let amps: Vec<C<f64>> = (0..4)
                .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let psi = StateVector::<f64>::from_amplitudes(&l, amps).unwrap();
            let rho = DensityMatrix::from_pure(&psi);
            let branches = BranchPair { ground: 0, excited: 3 };
            let target = target_state::<f64>(TargetKind::PsiA, 1, 1, 1);
            let s = observables(&rho, branches, &target).unwrap();
            let coh = (s.coh_re * s.coh_re + s.coh_im * s.coh_im).sqrt();
            assert!(coh * coh <= s.p_ground * s.p_excited + 1e-9);
            assert!(s.fidelity >= -1e-12 && s.fidelity <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn factorized_field_preserves_fidelity() {
        let target = protocol_target::<f64>(TargetKind::PsiA, 2, 2, std::f64::consts::FRAC_PI_2);
        let lm = HilbertLayout::new(vec![Factor::boson(3, labels::MODE_C)]).unwrap();
        let field = StateVector::<f64>::from_amplitudes(
            &lm,
            vec![cx(0.5, 0.0), cx(0.1, -0.7), cx(0.0, 0.3), cx(0.2, 0.2)],
        )
        .unwrap();
        let joint = target.tensor(&field).unwrap();
        let rho = partial_trace_state(&joint, &[labels::CLOUD1, labels::CLOUD2]).unwrap();
        assert!((fidelity(&rho, &target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_rotation_moves_to_interaction_frame() {
        // For G = S_x drive and ρ evolved by e^{-iGt}, rotation recovers ρ(0).
        let l = bell_layout();
        let g = crate::propagator::sx_difference::<f64>(&l).unwrap();
        let frame = FrameRotation::new(&g);
        let psi0 = StateVector::<f64>::basis(&l, &[0, 1]);
        let t = 0.9;
        let u = crate::numeric::expm_i_hermitian(&g.to_dense(), t);
        let evolved = crate::propagator::apply_dense(&u, &psi0).unwrap();
        let back = frame.rotate(&DensityMatrix::from_pure(&evolved), t);
        let want = DensityMatrix::from_pure(&psi0);
        let diff = back.matrix() - want.matrix();
        assert!(crate::numeric::max_abs(&diff) < 1e-12);
    }

    #[test]
    fn trace_distance_basics() {
        let l = bell_layout();
        let a = DensityMatrix::from_pure(&StateVector::<f64>::basis(&l, &[0, 0]));
        let b = DensityMatrix::from_pure(&StateVector::<f64>::basis(&l, &[1, 1]));
        assert_abs_diff_eq!(trace_distance(&a, &b), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_distance(&a, &a), 0.0, epsilon = 1e-12);
    }
}
