//! Interaction-picture Hamiltonians of one and two trapped electrons, and
//! their second-order effective reductions.
//!
//! Every Hamiltonian is stored divided by hbar, so amplitudes and phase rates
//! are angular frequencies (rad/s). A term `e^{+i rate t}` multiplies the
//! spin-raising (or `a b^dagger`) operator exactly as written in the model,
//! and its Hermitian partner carries `e^{-i rate t}`.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::hilbert::{
    embed, lowering_on, number_on, spin_lowering_on, spin_ops, spin_up_projector_on, Factor,
    OperatorMatrix, SpaceLayout,
};
use crate::linalg::{self, SparseOp, C64, ZERO};

/// Factor labels used throughout.
pub mod labels {
    /// Spin of electron e1.
    pub const SPIN1: &str = "spin1";
    /// x-vibration of electron e1.
    pub const MODE_A: &str = "a";
    /// x-vibration of electron e2.
    pub const MODE_B: &str = "b";
    /// Spin of electron e2.
    pub const SPIN2: &str = "spin2";
}

use labels::{MODE_A, MODE_B, SPIN1, SPIN2};

/// Standard layouts, every Fock factor truncated at `fock_dim`.
pub mod layouts {
    use super::*;

    /// `(spin1, a)`
    pub fn single_electron(fock_dim: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(vec![Factor::spin(SPIN1), Factor::fock(MODE_A, fock_dim)])
    }

    /// `(spin1, a, b)`
    pub fn two_electron(fock_dim: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(vec![
            Factor::spin(SPIN1),
            Factor::fock(MODE_A, fock_dim),
            Factor::fock(MODE_B, fock_dim),
        ])
    }

    /// `(spin1, a, b, spin2)`
    pub fn driven_pair(fock_dim: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(vec![
            Factor::spin(SPIN1),
            Factor::fock(MODE_A, fock_dim),
            Factor::fock(MODE_B, fock_dim),
            Factor::spin(SPIN2),
        ])
    }

    /// `(spin1, b)`
    pub fn distant(fock_dim: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(vec![Factor::spin(SPIN1), Factor::fock(MODE_B, fock_dim)])
    }

    /// `(spin1, b, spin2)`
    pub fn bus(fock_dim: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(vec![
            Factor::spin(SPIN1),
            Factor::fock(MODE_B, fock_dim),
            Factor::spin(SPIN2),
        ])
    }

    /// `(spin1, spin2)`
    pub fn spin_pair() -> Result<SpaceLayout> {
        SpaceLayout::new(vec![Factor::spin(SPIN1), Factor::spin(SPIN2)])
    }
}

/// One coupling term `amplitude * (e^{i rate t} O + e^{-i rate t} O^dagger)`,
/// or a static Hermitian `amplitude * O` when `hermitian_pair` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatingTerm {
    pub operator: OperatorMatrix,
    pub amplitude: f64,
    pub phase_rate: f64,
    pub hermitian_pair: bool,
}

impl RotatingTerm {
    pub fn pair(operator: OperatorMatrix, amplitude: f64, phase_rate: f64) -> Self {
        RotatingTerm {
            operator,
            amplitude,
            phase_rate,
            hermitian_pair: true,
        }
    }

    /// Static term; `operator` must be Hermitian.
    pub fn fixed(operator: OperatorMatrix, amplitude: f64) -> Self {
        RotatingTerm {
            operator,
            amplitude,
            phase_rate: 0.0,
            hermitian_pair: false,
        }
    }

    fn coefficient(&self, t: f64) -> C64 {
        if self.phase_rate == 0.0 {
            C64::new(self.amplitude, 0.0)
        } else {
            C64::from_polar(self.amplitude, self.phase_rate * t)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledTerm {
    forward: SparseOp,
    partner: Option<SparseOp>,
}

/// Sum of rotating terms on one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentHamiltonian {
    layout: SpaceLayout,
    terms: Vec<RotatingTerm>,
    compiled: Vec<CompiledTerm>,
}

impl TimeDependentHamiltonian {
    pub fn new(layout: &SpaceLayout) -> Self {
        TimeDependentHamiltonian {
            layout: layout.clone(),
            terms: Vec::new(),
            compiled: Vec::new(),
        }
    }

    pub fn with_term(mut self, term: RotatingTerm) -> Result<Self> {
        self.add_term(term)?;
        Ok(self)
    }

    pub fn add_term(&mut self, term: RotatingTerm) -> Result<()> {
        if term.operator.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        if !term.amplitude.is_finite() || !term.phase_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite term: amplitude {} rate {}",
                term.amplitude, term.phase_rate
            )));
        }
        if !term.hermitian_pair {
            if term.phase_rate != 0.0 {
                return Err(Error::NonHermitian(
                    "unpaired term with nonzero phase rate".into(),
                ));
            }
            if !term.operator.is_hermitian(1e-12 * term.operator.max_abs().max(1.0)) {
                return Err(Error::NonHermitian(
                    "unpaired term operator is not Hermitian".into(),
                ));
            }
        }
        let forward = SparseOp::from_dense(term.operator.entries());
        let partner = term
            .hermitian_pair
            .then(|| SparseOp::from_dense(term.operator.adjoint().entries()));
        self.compiled.push(CompiledTerm { forward, partner });
        self.terms.push(term);
        Ok(())
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn terms(&self) -> &[RotatingTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.phase_rate == 0.0)
    }

    /// `H(t) / hbar` as a dense matrix.
    pub fn evaluate(&self, t: f64) -> OperatorMatrix {
        let mut h = OperatorMatrix::zeros(&self.layout);
        for term in &self.terms {
            let c = term.coefficient(t);
            let mut part = term.operator.scale(c);
            if term.hermitian_pair {
                part = part
                    .add(&term.operator.adjoint().scale(c.conj()))
                    .expect("same layout");
            }
            h = h.add(&part).expect("same layout");
        }
        h
    }

    /// `out = -i H(t) x / hbar`.
    pub fn apply_generator(&self, t: f64, x: &Array1<C64>, out: &mut Array1<C64>) {
        out.fill(ZERO);
        for (term, compiled) in self.terms.iter().zip(&self.compiled) {
            let c = term.coefficient(t);
            let minus_i = C64::new(0.0, -1.0);
            compiled.forward.apply_add(minus_i * c, x, out);
            if let Some(p) = &compiled.partner {
                p.apply_add(minus_i * c.conj(), x, out);
            }
        }
    }

    /// Upper bound on the fastest angular frequency present: the largest
    /// phase rate or the norm bound `sum |amplitude| * ||O||_1` (doubled for
    /// Hermitian pairs).
    pub fn frequency_scale(&self) -> f64 {
        let rates = self
            .terms
            .iter()
            .map(|t| t.phase_rate.abs())
            .fold(0.0, f64::max);
        let norm: f64 = self
            .terms
            .iter()
            .map(|t| {
                let k = if t.hermitian_pair { 2.0 } else { 1.0 };
                k * t.amplitude.abs() * linalg::norm_one(t.operator.entries().view())
            })
            .sum();
        rates.max(norm)
    }

    /// Generator of the backward evolution: `-H(t_final - s)`, so evolving a
    /// state from `s = 0` to `s = t_final` undoes the forward evolution.
    pub fn time_reversed(&self, t_final: f64) -> Self {
        let mut out = TimeDependentHamiltonian::new(&self.layout);
        for term in &self.terms {
            let reversed = if term.hermitian_pair {
                RotatingTerm::pair(
                    term.operator
                        .scale(C64::from_polar(1.0, term.phase_rate * t_final)),
                    -term.amplitude,
                    -term.phase_rate,
                )
            } else {
                RotatingTerm::fixed(term.operator.clone(), -term.amplitude)
            };
            out.add_term(reversed).expect("valid reversed term");
        }
        out
    }
}

fn require_labels(layout: &SpaceLayout, names: &[&str]) -> Result<()> {
    for n in names {
        layout.position(n)?;
    }
    Ok(())
}

fn nonzero_detuning(name: &'static str, v: f64) -> Result<()> {
    if v == 0.0 {
        Err(Error::ZeroDetuning(name))
    } else {
        Ok(())
    }
}

fn sigma_plus_mode(layout: &SpaceLayout, spin: &str, mode: &str) -> Result<OperatorMatrix> {
    let raise = spin_lowering_on(layout, spin)?.adjoint();
    raise.matmul(&lowering_on(layout, mode)?)
}

/// Single-electron spin-orbit coupling
/// `Omega (e^{i delta t} s+ a + e^{-i delta t} s- a^dagger)` on `(spin1, a)`.
pub fn single_electron_jc(
    omega: f64,
    delta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    require_labels(layout, &[SPIN1, MODE_A])?;
    local_jc(omega, delta, layout, SPIN1, MODE_A)
}

/// The same resonant-or-detuned JC coupling between any spin and mode factor.
/// Used for the local gate on electron e2.
pub fn local_jc(
    omega: f64,
    delta: f64,
    layout: &SpaceLayout,
    spin: &str,
    mode: &str,
) -> Result<TimeDependentHamiltonian> {
    TimeDependentHamiltonian::new(layout).with_term(RotatingTerm::pair(
        sigma_plus_mode(layout, spin, mode)?,
        omega,
        delta,
    ))
}

/// Spin-orbit coupling of e1 plus the Coulomb exchange
/// `Omega_tilde (e^{i Delta t} a b^dagger + h.c.)` between the vibrations.
pub fn two_electron_full(
    omega: f64,
    delta: f64,
    omega_tilde: f64,
    big_delta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    require_labels(layout, &[SPIN1, MODE_A, MODE_B])?;
    let a = lowering_on(layout, MODE_A)?;
    let b = lowering_on(layout, MODE_B)?;
    single_electron_jc(omega, delta, layout)?
        .with_term(RotatingTerm::pair(a.matmul(&b.adjoint())?, omega_tilde, big_delta))
}

/// Second-order effective Hamiltonian with mode `a` still present:
/// `(Omega^2/delta)[n_a (P_up - P_down) + P_up] + (Omega_tilde^2/delta)(n_b - n_a)
///  + (Omega Omega_tilde/delta)(s+ b + s- b^dagger)`.
pub fn effective_second_order(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    nonzero_detuning("delta", delta)?;
    require_labels(layout, &[SPIN1, MODE_A, MODE_B])?;
    let n_a = number_on(layout, MODE_A)?;
    let n_b = number_on(layout, MODE_B)?;
    let p_up = spin_up_projector_on(layout, SPIN1)?;
    let p_down = OperatorMatrix::identity(layout).sub(&p_up)?;
    let dispersive = n_a.matmul(&p_up.sub(&p_down)?)?.add(&p_up)?;
    TimeDependentHamiltonian::new(layout)
        .with_term(RotatingTerm::fixed(dispersive, omega * omega / delta))?
        .with_term(RotatingTerm::fixed(
            n_b.sub(&n_a)?,
            omega_tilde * omega_tilde / delta,
        ))?
        .with_term(RotatingTerm::pair(
            sigma_plus_mode(layout, SPIN1, MODE_B)?,
            omega * omega_tilde / delta,
            0.0,
        ))
}

/// Effective Hamiltonian after eliminating mode `a`:
/// `(Omega^2/delta) P_up + (Omega_tilde^2/delta) n_b + (Omega Omega_tilde/delta)(s+ b + h.c.)`.
pub fn effective_reduced(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    nonzero_detuning("delta", delta)?;
    require_labels(layout, &[SPIN1, MODE_B])?;
    TimeDependentHamiltonian::new(layout)
        .with_term(RotatingTerm::fixed(
            spin_up_projector_on(layout, SPIN1)?,
            omega * omega / delta,
        ))?
        .with_term(RotatingTerm::fixed(
            number_on(layout, MODE_B)?,
            omega_tilde * omega_tilde / delta,
        ))?
        .with_term(RotatingTerm::pair(
            sigma_plus_mode(layout, SPIN1, MODE_B)?,
            omega * omega_tilde / delta,
            0.0,
        ))
}

/// JC coupling between the spin of e1 and the vibration of e2:
/// `Omega' (s+ b + s- b^dagger)`.
pub fn distant_jc(omega_prime: f64, layout: &SpaceLayout) -> Result<TimeDependentHamiltonian> {
    require_labels(layout, &[SPIN1, MODE_B])?;
    TimeDependentHamiltonian::new(layout).with_term(RotatingTerm::pair(
        sigma_plus_mode(layout, SPIN1, MODE_B)?,
        omega_prime,
        0.0,
    ))
}

/// Both electrons driven: spin-orbit on e1 at detuning `delta`, Coulomb
/// exchange at `delta`, and `G (e^{i eta t} t+ b + h.c.)` on e2.
pub fn driven_pair_full(
    omega: f64,
    delta: f64,
    omega_tilde: f64,
    g: f64,
    eta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    require_labels(layout, &[SPIN1, MODE_A, MODE_B, SPIN2])?;
    two_electron_full(omega, delta, omega_tilde, delta, layout)?.with_term(RotatingTerm::pair(
        sigma_plus_mode(layout, SPIN2, MODE_B)?,
        g,
        eta,
    ))
}

/// Doubly driven system after eliminating mode `a`: both spins couple to
/// mode `b`, spin1 with `Omega Omega_tilde/delta` at rate `gamma`, spin2 with
/// `G` at rate `eta - Omega_tilde^2/delta`. With `G = Omega Omega_tilde/delta`
/// and `eta = Omega^2/delta` both rates equal `gamma`.
pub fn driven_pair_intermediate(
    omega: f64,
    omega_tilde: f64,
    g: f64,
    delta: f64,
    eta: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    nonzero_detuning("delta", delta)?;
    require_labels(layout, &[SPIN1, MODE_B, SPIN2])?;
    let gamma = (omega * omega - omega_tilde * omega_tilde) / delta;
    TimeDependentHamiltonian::new(layout)
        .with_term(RotatingTerm::pair(
            sigma_plus_mode(layout, SPIN1, MODE_B)?,
            omega * omega_tilde / delta,
            gamma,
        ))?
        .with_term(RotatingTerm::pair(
            sigma_plus_mode(layout, SPIN2, MODE_B)?,
            g,
            eta - omega_tilde * omega_tilde / delta,
        ))
}

/// Flip-flop exchange `Omega'' (s+ t- + s- t+)` between the two spins.
pub fn spin_spin_effective(
    omega_dprime: f64,
    layout: &SpaceLayout,
) -> Result<TimeDependentHamiltonian> {
    require_labels(layout, &[SPIN1, SPIN2])?;
    let s_plus = spin_lowering_on(layout, SPIN1)?.adjoint();
    let t_minus = spin_lowering_on(layout, SPIN2)?;
    TimeDependentHamiltonian::new(layout).with_term(RotatingTerm::pair(
        s_plus.matmul(&t_minus)?,
        omega_dprime,
        0.0,
    ))
}

/// Total excitation number: `P_up` of each listed spin plus `n` of each
/// listed mode.
pub fn excitation_number(layout: &SpaceLayout, spins: &[&str], modes: &[&str]) -> Result<OperatorMatrix> {
    let mut n = OperatorMatrix::zeros(layout);
    for s in spins {
        n = n.add(&spin_up_projector_on(layout, s)?)?;
    }
    for m in modes {
        n = n.add(&number_on(layout, m)?)?;
    }
    Ok(n)
}

/// Instantaneous single-spin unitary embedded at `spin`.
pub fn embed_spin_unitary(
    u: &ndarray::Array2<C64>,
    layout: &SpaceLayout,
    spin: &str,
) -> Result<OperatorMatrix> {
    let local = OperatorMatrix::new(spin_ops().raising.layout().clone(), u.clone())?;
    embed(&local, layout, spin)
}
