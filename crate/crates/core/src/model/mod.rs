//! Physical parameters, derived constants, regime diagnostics, Hamiltonian
//! builders for every level of the approximation chain, and the spatial-phase
//! gauge reduction.
//!
//! Units: the cavity coupling magnitude `|g0|` is the frequency unit and time
//! is measured in `1/|g0|`.

mod gauge;
mod hamiltonians;

pub use gauge::{gauge_reduce, is_gauge_layout, GaugeReduction, KVectors};
pub use hamiltonians::{
    h_cavity_fiber, h_eff, h_eff_series, h_full, h_full_series, h_gate_series,
    h_gate_series_xrep, h_prime, h_prime_series, h_raman, h_raman_series, normal_modes,
    spontaneous_emission_ops,
};

use crate::hilbert::{Factor, FactorKind, HilbertError, HilbertLayout};
use crate::scalar::{Scalar, C};
use thiserror::Error;

/// Canonical factor labels used by the layout constructors.
pub mod labels {
    pub const CLOUD1: &str = "cloud1";
    pub const CLOUD2: &str = "cloud2";
    pub const CAVITY1: &str = "cavity1";
    pub const CAVITY2: &str = "cavity2";
    pub const FIBER: &str = "fiber";
    /// Fiber-dark normal mode.
    pub const MODE_C: &str = "mode_c";
    pub const MODE_C1: &str = "mode_c1";
    pub const MODE_C2: &str = "mode_c2";

    pub fn atom(cloud: usize, atom: usize) -> String {
        format!("cloud{cloud}_atom{atom}")
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("division by zero: parameter `{0}` must be nonzero")]
    ZeroParameter(&'static str),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("layout mismatch: {0}")]
    BadLayout(String),
    #[error("the full three-level model supports at most 2 atoms per cloud, got {0}")]
    TooManyAtoms(usize),
    #[error("positions given for {got} atoms but the layout holds {want}")]
    PositionCount { got: usize, want: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// All physical inputs, in units of `|g0|`.
///
/// The detuning of the cavity-assisted transition is derived, not free:
/// [`ModelParams::delta2`] returns `delta0 - delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<R: Scalar> {
    /// Cavity coupling (canonically `|g0| = 1`).
    pub g0: C<R>,
    /// Rabi frequency of the cavity-assisted Raman drive.
    pub omega0: C<R>,
    /// Rabi frequencies of the classical Raman pair.
    pub omega1: C<R>,
    pub omega2: C<R>,
    /// Rabi frequency of the Stark-compensation drive.
    pub omega3: C<R>,
    /// Detunings of the corresponding transitions.
    pub delta0: R,
    pub delta1: R,
    pub delta3: R,
    /// Two-photon detuning of the cavity-assisted Raman transition.
    pub delta: R,
    /// Cavity-fiber coupling strength.
    pub nu: R,
    /// Fiber propagation phase.
    pub phi: R,
    /// Cavity decay rate.
    pub kappa_c: R,
    /// Fiber decay rate.
    pub kappa_f: R,
    /// Atomic spontaneous emission rate.
    pub gamma_e: R,
    /// Atoms per cloud.
    pub n1: usize,
    pub n2: usize,
    /// Fock cutoff per bosonic mode.
    pub n_max: usize,
}

impl<R: Scalar> ModelParams<R> {
    /// Reference parameter set (in units of `|g0|`): strong classical drives
    /// at large detuning, weak cavity-assisted leg, weakly coupled fiber.
    pub fn reference() -> Self {
        ModelParams {
            g0: C::new(R::one(), R::zero()),
            omega0: C::new(R::one(), R::zero()),
            omega1: C::new(R::of(10.0), R::zero()),
            omega2: C::new(R::of(10.0), R::zero()),
            omega3: C::new(R::zero(), R::zero()),
            delta0: R::of(100.0),
            delta1: R::of(-100.0),
            delta3: R::of(200.0),
            delta: R::of(0.01),
            nu: R::of(0.1),
            phi: R::zero(),
            kappa_c: R::zero(),
            kappa_f: R::zero(),
            gamma_e: R::zero(),
            n1: 2,
            n2: 2,
            n_max: 8,
        }
    }

    /// Derived detuning `delta2 = delta0 - delta`.
    pub fn delta2(&self) -> R {
        self.delta0 - self.delta
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidParams(msg.to_string()));
        if self.kappa_c < R::zero() || self.kappa_f < R::zero() || self.gamma_e < R::zero() {
            return bad("decay rates must be nonnegative");
        }
        if self.n1 == 0 || self.n2 == 0 {
            return bad("each cloud needs at least one atom");
        }
        if self.n_max == 0 {
            return bad("the Fock cutoff must be at least one");
        }
        Ok(())
    }

    /// Clouds and both cavity modes; optionally the fiber mode.
    pub fn raman_layout(&self, with_fiber: bool) -> Result<HilbertLayout, ModelError> {
        let mut f = vec![
            Factor::dicke(self.n1, labels::CLOUD1),
            Factor::dicke(self.n2, labels::CLOUD2),
            Factor::boson(self.n_max, labels::CAVITY1),
            Factor::boson(self.n_max, labels::CAVITY2),
        ];
        if with_fiber {
            f.push(Factor::boson(self.n_max, labels::FIBER));
        }
        Ok(HilbertLayout::new(f)?)
    }

    /// Clouds and the three normal modes `c, c1, c2`.
    pub fn normal_mode_layout(&self) -> Result<HilbertLayout, ModelError> {
        Ok(HilbertLayout::new(vec![
            Factor::dicke(self.n1, labels::CLOUD1),
            Factor::dicke(self.n2, labels::CLOUD2),
            Factor::boson(self.n_max, labels::MODE_C),
            Factor::boson(self.n_max, labels::MODE_C1),
            Factor::boson(self.n_max, labels::MODE_C2),
        ])?)
    }

    /// Clouds and the single resonant normal mode, with its own cutoff.
    pub fn effective_layout(&self, mode_cutoff: usize) -> Result<HilbertLayout, ModelError> {
        Ok(HilbertLayout::new(vec![
            Factor::dicke(self.n1, labels::CLOUD1),
            Factor::dicke(self.n2, labels::CLOUD2),
            Factor::boson(mode_cutoff, labels::MODE_C),
        ])?)
    }

    /// Per-atom three-level factors plus both cavity modes (diagnostic use,
    /// at most two atoms per cloud).
    pub fn full_layout(&self) -> Result<HilbertLayout, ModelError> {
        if self.n1 > 2 || self.n2 > 2 {
            return Err(ModelError::TooManyAtoms(self.n1.max(self.n2)));
        }
        let mut f = Vec::new();
        for n in 0..self.n1 {
            f.push(Factor::qudit(3, &labels::atom(1, n)));
        }
        for n in 0..self.n2 {
            f.push(Factor::qudit(3, &labels::atom(2, n)));
        }
        f.push(Factor::boson(self.n_max, labels::CAVITY1));
        f.push(Factor::boson(self.n_max, labels::CAVITY2));
        Ok(HilbertLayout::new(f)?)
    }

    /// Per-atom two-level factors plus both cavity modes (gauge diagnostic).
    pub fn gauge_layout(&self) -> Result<HilbertLayout, ModelError> {
        let mut f = Vec::new();
        for n in 0..self.n1 {
            f.push(Factor::qudit(2, &labels::atom(1, n)));
        }
        for n in 0..self.n2 {
            f.push(Factor::qudit(2, &labels::atom(2, n)));
        }
        f.push(Factor::boson(self.n_max, labels::CAVITY1));
        f.push(Factor::boson(self.n_max, labels::CAVITY2));
        Ok(HilbertLayout::new(f)?)
    }
}

/// Constants derived from [`ModelParams`].
#[derive(Debug, Clone)]
pub struct DerivedConstants<R: Scalar> {
    /// Collective drive amplitude `β = -Ω1 Ω2* / Δ1`.
    pub collective_drive: C<R>,
    /// Cavity-assisted Raman exchange `Λ = -Ω0 g0* / Δ0`.
    pub cavity_exchange: C<R>,
    /// Magnitude `Θ` of the dark-mode gate coupling `√2 Λ / 2 = Θ e^{i θ0}`.
    pub gate_coupling: R,
    /// Phase `θ0` of the dark-mode gate coupling.
    pub gate_phase: R,
    /// Geometric phase rate `λ = -Θ² / (4 δ)`.
    pub phase_rate: R,
    /// Effective cavity-decay-induced rate `Γ_c = κ_c |Ω0 g0|² / (8 δ² Δ0²)`.
    pub cavity_rate: R,
    /// Effective spontaneous-emission rate `Γ_e = γ_e |Ω1|² / Δ1²`.
    pub spontaneous_rate: R,
    /// Effective fiber-loss rate `Γ_f = κ_f |Ω0 g0|² / (Δ0 ν)²`.
    pub fiber_rate: R,
}

pub fn derived_constants<R: Scalar>(
    p: &ModelParams<R>,
) -> Result<DerivedConstants<R>, ModelError> {
    if p.delta0 == R::zero() {
        return Err(ModelError::ZeroParameter("delta0"));
    }
    if p.delta1 == R::zero() {
        return Err(ModelError::ZeroParameter("delta1"));
    }
    if p.delta == R::zero() {
        return Err(ModelError::ZeroParameter("delta"));
    }
    let collective_drive = -(p.omega1 * p.omega2.conj()).unscale(p.delta1);
    let cavity_exchange = -(p.omega0 * p.g0.conj()).unscale(p.delta0);
    let theta_c = cavity_exchange.scale(R::of(2.0).sqrt() / R::of(2.0));
    let gate_coupling = theta_c.norm();
    let gate_phase = theta_c.arg();
    let phase_rate = -gate_coupling * gate_coupling / (R::of(4.0) * p.delta);
    let og = (p.omega0 * p.g0).norm();
    let cavity_rate =
        p.kappa_c * og * og / (R::of(8.0) * p.delta * p.delta * p.delta0 * p.delta0);
    let spontaneous_rate = p.gamma_e * p.omega1.norm_sqr() / (p.delta1 * p.delta1);
    let fiber_rate = if p.kappa_f == R::zero() && p.nu == R::zero() {
        R::zero()
    } else if p.nu == R::zero() {
        return Err(ModelError::ZeroParameter("nu"));
    } else {
        p.kappa_f * og * og / (p.delta0 * p.nu * p.delta0 * p.nu)
    };
    Ok(DerivedConstants {
        collective_drive,
        cavity_exchange,
        gate_coupling,
        gate_phase,
        phase_rate,
        cavity_rate,
        spontaneous_rate,
        fiber_rate,
    })
}

/// Diagnostic ratios for the separation-of-scales conditions behind the
/// effective model. Purely informative; failing conditions are reported,
/// never raised as errors.
#[derive(Debug, Clone)]
pub struct RegimeReport<R: Scalar> {
    /// "much greater" threshold used for the pass flags.
    pub threshold: R,
    /// min(detuning scales) / max(coupling strengths) for the adiabatic
    /// elimination of the excited level.
    pub condition_i_ratio: R,
    /// |Ω2|/|g0| and |Ω3|/|g0| for neglecting the |g0|² terms.
    pub condition_ii_omega2: R,
    pub condition_ii_omega3: R,
    /// Stark-shift sums per ground level and their difference.
    pub stark_level0: R,
    pub stark_level1: R,
    pub stark_differential: R,
    /// Literal pairwise similarity of the Stark terms:
    /// (|Ω0|²/|Δ0|)/(|Ω1|²/|Δ1|) and (|Ω2|²/|Δ1|)/(|Ω3|²/|Δ3|).
    pub stark_literal_ratio0: R,
    pub stark_literal_ratio1: R,
    /// max(|Stark terms|) / |differential|; large means the shifts cancel.
    pub stark_suppression: R,
    /// |β| / max(|δ|, |Λ|, |ν|).
    pub strong_driving_ratio: R,
    /// |ν| / max(|δ|, |Λ|).
    pub mode_separation_ratio: R,
    pub pass_i: bool,
    pub pass_ii: bool,
    /// Literal reading: both Stark pair ratios within a factor of 3 of unity.
    pub pass_iii_literal: bool,
    /// Differential reading: shifts cancel to better than 1/threshold.
    pub pass_iii_differential: bool,
    pub pass_strong_driving: bool,
    pub pass_mode_separation: bool,
}

impl<R: Scalar> RegimeReport<R> {
    pub fn all_pass(&self) -> bool {
        self.pass_i
            && self.pass_ii
            && self.pass_iii_literal
            && self.pass_iii_differential
            && self.pass_strong_driving
            && self.pass_mode_separation
    }
}

pub fn regime_report<R: Scalar>(p: &ModelParams<R>, threshold: R) -> RegimeReport<R> {
    let inf = R::infinity();
    let div = |a: R, b: R| if b == R::zero() { inf } else { a / b };

    let detunings = [
        p.delta0.abs(),
        p.delta1.abs(),
        p.delta2().abs(),
        p.delta3.abs(),
        (p.delta0 - p.delta1).abs(),
        (p.delta1 - p.delta2()).abs(),
        (p.delta2() - p.delta3).abs(),
    ];
    let strengths = [
        p.omega0.norm(),
        p.omega1.norm(),
        p.omega2.norm(),
        p.g0.norm(),
        p.delta.abs(),
    ];
    let min_det = detunings.iter().fold(inf, |a, &b| a.min(b));
    let max_str = strengths.iter().fold(R::zero(), |a, &b| a.max(b));
    let condition_i_ratio = div(min_det, max_str);

    let condition_ii_omega2 = div(p.omega2.norm(), p.g0.norm());
    let condition_ii_omega3 = div(p.omega3.norm(), p.g0.norm());

    let t00 = div(p.omega0.norm_sqr(), p.delta0);
    let t01 = div(p.omega1.norm_sqr(), p.delta1);
    let t10 = div(p.omega2.norm_sqr(), p.delta1);
    let t11 = div(p.omega3.norm_sqr(), p.delta3);
    let stark_level0 = t00 + t01;
    let stark_level1 = t10 + t11;
    let stark_differential = stark_level0 - stark_level1;
    let stark_literal_ratio0 = div(t00.abs(), t01.abs());
    let stark_literal_ratio1 = div(t10.abs(), t11.abs());
    let scale = t00.abs().max(t01.abs()).max(t10.abs()).max(t11.abs());
    let stark_suppression = div(scale, stark_differential.abs());

    let lambda_abs = if p.delta0 == R::zero() {
        R::zero()
    } else {
        (p.omega0 * p.g0).norm() / p.delta0.abs()
    };
    let beta_abs = if p.delta1 == R::zero() {
        R::zero()
    } else {
        (p.omega1 * p.omega2).norm() / p.delta1.abs()
    };
    let small = p.delta.abs().max(lambda_abs);
    let strong_driving_ratio = div(beta_abs, small.max(p.nu.abs()));
    let mode_separation_ratio = div(p.nu.abs(), small);

    let similar = |r: R| r.is_finite() && r > R::of(1.0 / 3.0) && r < R::of(3.0);
    RegimeReport {
        threshold,
        condition_i_ratio,
        condition_ii_omega2,
        condition_ii_omega3,
        stark_level0,
        stark_level1,
        stark_differential,
        stark_literal_ratio0,
        stark_literal_ratio1,
        stark_suppression,
        strong_driving_ratio,
        mode_separation_ratio,
        pass_i: condition_i_ratio >= threshold,
        pass_ii: condition_ii_omega2 >= threshold && condition_ii_omega3 >= threshold,
        pass_iii_literal: similar(stark_literal_ratio0) && similar(stark_literal_ratio1),
        pass_iii_differential: stark_suppression >= threshold,
        pass_strong_driving: strong_driving_ratio >= threshold,
        pass_mode_separation: mode_separation_ratio >= threshold,
    }
}

/// Check that `layout` has a Dicke factor with `atoms` atoms at `label`.
pub(crate) fn expect_dicke(
    layout: &HilbertLayout,
    label: &str,
    atoms: usize,
) -> Result<(), ModelError> {
    let pos = layout
        .position(label)
        .map_err(|_| ModelError::BadLayout(format!("missing factor `{label}`")))?;
    match layout.factors()[pos].kind {
        FactorKind::Dicke { atoms: a } if a == atoms => Ok(()),
        ref k => Err(ModelError::BadLayout(format!(
            "factor `{label}` should be dicke({atoms}), found {k:?}"
        ))),
    }
}

/// Check that `layout` has a boson factor at `label`.
pub(crate) fn expect_boson(layout: &HilbertLayout, label: &str) -> Result<usize, ModelError> {
    let pos = layout
        .position(label)
        .map_err(|_| ModelError::BadLayout(format!("missing factor `{label}`")))?;
    match layout.factors()[pos].kind {
        FactorKind::Boson { cutoff } => Ok(cutoff),
        ref k => Err(ModelError::BadLayout(format!(
            "factor `{label}` should be a boson mode, found {k:?}"
        ))),
    }
}
