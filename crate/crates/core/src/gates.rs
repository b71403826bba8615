//! Gate constructions as pulse schedules, their simulation and scoring.
//!
//! Computational labels: a vibrational qubit uses Fock levels 0 and 1, a spin
//! qubit reads `down` as 0 and `up` as 1. Subspace bases are listed in binary
//! order of (control, target).

use std::f64::consts::PI;
use std::fmt;

use ndarray::{array, Array2};

use crate::error::{Error, Result};
use crate::hamiltonians::{
    distant_jc, embed_spin_unitary, labels, layouts, local_jc, two_electron_full,
    TimeDependentHamiltonian,
};
use crate::hilbert::{Level, OperatorMatrix, SpaceLayout, StateVector};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::propagator::{evolve, propagator_matrix, EvolutionRequest, SimOptions};

use Level::{Down, Fock, Up};

/// `cos(alpha) 1 - i sin(alpha) (e^{i beta} |up><down| + e^{-i beta} |down><up|)`
/// in `(up, down)` order.
pub fn rotation(alpha: f64, beta: f64) -> Array2<C64> {
    let (s, c) = alpha.sin_cos();
    let off = C64::new(0.0, -s);
    array![
        [C64::new(c, 0.0), off * C64::from_polar(1.0, beta)],
        [off * C64::from_polar(1.0, -beta), C64::new(c, 0.0)]
    ]
}

/// Rotation angle used for the spin rotations around the phase gate.
///
/// A quarter turn (`alpha = pi/4`) is what turns the controlled phase into a
/// controlled flip; with `alpha = pi/2` the sandwich only conjugates the
/// phase gate by a spin flip.
pub const CNOT_ROTATION_ANGLE: f64 = PI / 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGateDuration {
    /// s
    pub t: f64,
    pub omega_t: f64,
    pub residual: f64,
}

/// `sin^2(x) + (cos(sqrt(2) x) + 1)^2 / 4` with `x = omega t`.
pub fn phase_residual(x: f64) -> f64 {
    let c = (2f64.sqrt() * x).cos() + 1.0;
    x.sin().powi(2) + 0.25 * c * c
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-13 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Shortest pulse on `omega t in [30, 45]` that leaves the `|0,up>` and
/// `|1,down>` doublet unchanged and flips the sign of `|1,up>`.
pub fn phase_gate_duration(omega: f64) -> Result<PhaseGateDuration> {
    crate::error::positive("omega", omega)?;
    let (lo, hi, n) = (30.0, 45.0, 15_000usize);
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let rs: Vec<f64> = xs.iter().map(|&x| phase_residual(x)).collect();
    let mut candidates: Vec<(f64, f64)> = (1..n)
        .filter(|&k| rs[k] <= rs[k - 1] && rs[k] <= rs[k + 1])
        .map(|k| {
            let x = golden_min(phase_residual, xs[k - 1], xs[k + 1]);
            (x, phase_residual(x))
        })
        .collect();
    for k in [0, n] {
        candidates.push((xs[k], rs[k]));
    }
    let best = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    let (x, r) = candidates
        .into_iter()
        .filter(|c| c.1 <= best + 1e-6)
        .fold((f64::INFINITY, 0.0), |acc, c| if c.0 < acc.0 { c } else { acc });
    Ok(PhaseGateDuration {
        t: x / omega,
        omega_t: x,
        residual: r,
    })
}

/// One step of a pulse schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentAction {
    Evolve {
        hamiltonian: TimeDependentHamiltonian,
        duration: f64,
    },
    /// Exact unitary applied in zero time.
    Instant { unitary: OperatorMatrix },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub label: String,
    pub action: SegmentAction,
}

/// Ordered segments on one layout, applied first to last.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    layout: SpaceLayout,
    segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(layout: &SpaceLayout) -> Self {
        PulseSchedule {
            layout: layout.clone(),
            segments: Vec::new(),
        }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s.action {
                SegmentAction::Evolve { duration, .. } => duration,
                SegmentAction::Instant { .. } => 0.0,
            })
            .sum()
    }

    pub fn push_evolve(
        &mut self,
        label: &str,
        hamiltonian: TimeDependentHamiltonian,
        duration: f64,
    ) -> Result<()> {
        if hamiltonian.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidRequest(format!(
                "segment `{label}` needs a positive duration, got {duration}"
            )));
        }
        self.segments.push(Segment {
            label: label.to_string(),
            action: SegmentAction::Evolve {
                hamiltonian,
                duration,
            },
        });
        Ok(())
    }

    pub fn push_instant(&mut self, label: &str, unitary: OperatorMatrix) -> Result<()> {
        if unitary.layout() != &self.layout {
            return Err(Error::LayoutMismatch);
        }
        let defect = linalg::unitarity_defect(unitary.entries());
        if defect > 1e-10 {
            return Err(Error::InvalidRequest(format!(
                "segment `{label}` is not unitary (defect {defect:e})"
            )));
        }
        self.segments.push(Segment {
            label: label.to_string(),
            action: SegmentAction::Instant { unitary },
        });
        Ok(())
    }

    pub fn extend(&mut self, other: &PulseSchedule) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::LayoutMismatch);
        }
        self.segments.extend(other.segments.iter().cloned());
        Ok(())
    }

    /// Product of the segment propagators, last segment leftmost.
    pub fn propagator(&self, opts: SimOptions) -> Result<OperatorMatrix> {
        let mut u = OperatorMatrix::identity(&self.layout);
        for seg in &self.segments {
            let step = match &seg.action {
                SegmentAction::Evolve {
                    hamiltonian,
                    duration,
                } => propagator_matrix(hamiltonian, *duration, opts.step_control, opts.execution)?,
                SegmentAction::Instant { unitary } => unitary.clone(),
            };
            u = step.matmul(&u)?;
        }
        Ok(u)
    }

    /// Runs one state through every segment.
    pub fn apply(&self, psi: &StateVector, opts: SimOptions) -> Result<StateVector> {
        let mut state = psi.clone();
        for seg in &self.segments {
            state = match &seg.action {
                SegmentAction::Evolve {
                    hamiltonian,
                    duration,
                } => {
                    let req = EvolutionRequest {
                        hamiltonian,
                        initial: state,
                        t_final: *duration,
                        step_control: opts.step_control,
                        sample_times: vec![*duration],
                    };
                    evolve(&req)?.final_state().clone()
                }
                SegmentAction::Instant { unitary } => unitary.apply(&state)?,
            };
        }
        Ok(state)
    }
}

/// Score of a simulated gate on a declared computational subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    /// Kets spanning the computational subspace, in matrix order.
    pub basis: Vec<String>,
    /// Simulated matrix restricted to the subspace, global phase removed.
    pub achieved: Array2<C64>,
    pub target: Array2<C64>,
    /// `|Tr(T^dagger A)|^2 / d^2`.
    pub fidelity: f64,
    /// Mean probability of reaching the target's output basis state.
    pub truth_table_fidelity: f64,
    /// Largest probability of leaving the subspace over subspace inputs.
    pub leakage: f64,
    /// `max |(U^dagger U - 1)_ij|` of the full simulated matrix.
    pub unitarity_defect: f64,
    /// Global phase removed from `achieved` (rad).
    pub removed_phase: f64,
    pub phase_convention: String,
    /// Per mode, smallest final vacuum population over subspace inputs that
    /// start in the vacuum. Empty when not applicable.
    pub mode_ground_population: Vec<(String, f64)>,
}

impl fmt::Display for GateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "fidelity {:.6}  truth table {:.6}  leakage {:.3e}  unitarity defect {:.1e}",
            self.fidelity, self.truth_table_fidelity, self.leakage, self.unitarity_defect
        )?;
        for (mode, p) in &self.mode_ground_population {
            writeln!(f, "mode {mode} ground population {p:.6}")?;
        }
        write!(f, "{}", self.phase_convention)
    }
}

/// `|Tr(T^dagger A)|^2 / d^2`.
pub fn process_fidelity(achieved: &Array2<C64>, target: &Array2<C64>) -> f64 {
    let d = target.nrows() as f64;
    let tr: C64 = target
        .iter()
        .zip(achieved.iter())
        .map(|(t, a)| t.conj() * a)
        .sum();
    tr.norm_sqr() / (d * d)
}

/// `(1/d) sum_j sum_i |T_ij|^2 |A_ij|^2`, the classical success probability
/// when `T` is a permutation up to phases.
pub fn truth_table_fidelity(achieved: &Array2<C64>, target: &Array2<C64>) -> f64 {
    let d = target.ncols() as f64;
    target
        .iter()
        .zip(achieved.iter())
        .map(|(t, a)| t.norm_sqr() * a.norm_sqr())
        .sum::<f64>()
        / d
}

fn level_text(l: Level) -> String {
    match l {
        Up => "up".into(),
        Down => "down".into(),
        Fock(n) => n.to_string(),
    }
}

fn ket_text(levels: &[Level]) -> String {
    let parts: Vec<String> = levels.iter().map(|&l| level_text(l)).collect();
    format!("|{}>", parts.join(","))
}

/// Restricts `u` to `basis` and scores it against `target`.
pub fn score(
    u: &OperatorMatrix,
    basis: &[Vec<Level>],
    target: &Array2<C64>,
    convention: &str,
) -> Result<GateReport> {
    if target.nrows() != basis.len() || target.ncols() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: target.nrows(),
        });
    }
    let raw = u.restrict(basis)?;
    let tr: C64 = target
        .iter()
        .zip(raw.iter())
        .map(|(t, a)| t.conj() * a)
        .sum();
    let phase = if tr.norm() > 0.0 { tr.arg() } else { 0.0 };
    let achieved = raw.mapv(|z| z * C64::from_polar(1.0, -phase));
    let leakage = (0..basis.len())
        .map(|j| 1.0 - raw.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(0.0);
    Ok(GateReport {
        basis: basis.iter().map(|b| ket_text(b)).collect(),
        fidelity: process_fidelity(&achieved, target),
        truth_table_fidelity: truth_table_fidelity(&achieved, target),
        achieved,
        target: target.clone(),
        leakage,
        unitarity_defect: linalg::unitarity_defect(u.entries()),
        removed_phase: phase,
        phase_convention: format!(
            "global phase {phase:.6} rad removed from the achieved matrix; {convention}"
        ),
        mode_ground_population: Vec::new(),
    })
}

fn phase_gate_basis() -> Vec<Vec<Level>> {
    vec![
        vec![Down, Fock(0)],
        vec![Up, Fock(0)],
        vec![Down, Fock(1)],
        vec![Up, Fock(1)],
    ]
}

fn diag(values: &[C64]) -> Array2<C64> {
    Array2::from_diag(&ndarray::Array1::from(values.to_vec()))
}

/// Ideal phase gate `diag(1, 1, 1, -1)` on `|0,down>, |0,up>, |1,down>, |1,up>`.
pub fn ideal_phase_gate() -> Array2<C64> {
    diag(&[ONE, ONE, ONE, -ONE])
}

fn require_phase_fock(fock_dim: usize) -> Result<()> {
    if fock_dim < 3 {
        return Err(Error::Truncation(format!(
            "the phase gate needs the |1,up> <-> |2,down> doublet, so fock_dim >= 3 (got {fock_dim})"
        )));
    }
    Ok(())
}

fn phase_schedule(omega: f64, t: f64, layout: &SpaceLayout, spin: &str, mode: &str) -> Result<PulseSchedule> {
    let mut s = PulseSchedule::new(layout);
    s.push_evolve("phase gate", local_jc(omega, 0.0, layout, spin, mode)?, t)?;
    Ok(s)
}

/// Resonant JC pulse of duration `t`, scored against `diag(1, 1, 1, -1)`.
pub fn simulate_phase_gate(omega: f64, t: f64, fock_dim: usize, opts: SimOptions) -> Result<GateReport> {
    require_phase_fock(fock_dim)?;
    crate::error::positive("omega", omega)?;
    let layout = layouts::single_electron(fock_dim)?;
    let u = phase_schedule(omega, t, &layout, labels::SPIN1, labels::MODE_A)?.propagator(opts)?;
    score(
        &u,
        &phase_gate_basis(),
        &ideal_phase_gate(),
        &format!(
            "the |1,up> entry approximates -1 by cos(sqrt(2) omega t) = {:.6}",
            (2f64.sqrt() * omega * t).cos()
        ),
    )
}

fn spin_rotation_segment(
    schedule: &mut PulseSchedule,
    label: &str,
    beta: f64,
    spin: &str,
) -> Result<()> {
    let u = embed_spin_unitary(&rotation(CNOT_ROTATION_ANGLE, beta), schedule.layout(), spin)?;
    schedule.push_instant(label, u)
}

fn cnot_schedule(omega: f64, layout: &SpaceLayout, spin: &str, mode: &str) -> Result<PulseSchedule> {
    let t = phase_gate_duration(omega)?.t;
    let mut s = PulseSchedule::new(layout);
    spin_rotation_segment(&mut s, "R(pi/4, pi/2)", PI / 2.0, spin)?;
    s.extend(&phase_schedule(omega, t, layout, spin, mode)?)?;
    spin_rotation_segment(&mut s, "R(pi/4, -pi/2)", -PI / 2.0, spin)?;
    Ok(s)
}

/// Ideal composition `R(pi/4, -pi/2) P R(pi/4, pi/2)` on the phase-gate
/// basis: CNOT with an extra sign on the control = 1 block.
pub fn ideal_single_electron_cnot() -> Array2<C64> {
    let r = |beta| {
        let m = rotation(CNOT_ROTATION_ANGLE, beta);
        // (up, down) -> (down, up) reorder, applied per vibrational block
        let mut out = Array2::zeros((4, 4));
        for block in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * block + i, 2 * block + j)] = m[(1 - i, 1 - j)];
                }
            }
        }
        out
    };
    r(-PI / 2.0).dot(&ideal_phase_gate()).dot(&r(PI / 2.0))
}

pub fn cnot_truth_table() -> Array2<C64> {
    array![
        [ONE, ZERO, ZERO, ZERO],
        [ZERO, ONE, ZERO, ZERO],
        [ZERO, ZERO, ZERO, ONE],
        [ZERO, ZERO, ONE, ZERO]
    ]
}

/// Spin flip conditioned on the first vibrational level, built from two
/// spin rotations around the phase gate at the optimized duration.
pub fn single_electron_cnot(
    omega: f64,
    fock_dim: usize,
    opts: SimOptions,
) -> Result<(PulseSchedule, GateReport)> {
    require_phase_fock(fock_dim)?;
    let layout = layouts::single_electron(fock_dim)?;
    let schedule = cnot_schedule(omega, &layout, labels::SPIN1, labels::MODE_A)?;
    let u = schedule.propagator(opts)?;
    let mut report = score(
        &u,
        &phase_gate_basis(),
        &ideal_single_electron_cnot(),
        "target is the ideal rotation-phase-rotation product, equal to CNOT \
         (vibration control, spin target) times -1 on the control = 1 block; \
         truth table scored against plain CNOT",
    )?;
    report.truth_table_fidelity = truth_table_fidelity(&report.achieved, &cnot_truth_table());
    Ok((schedule, report))
}

fn v_basis_effective() -> Vec<Vec<Level>> {
    vec![vec![Down, Fock(0)], vec![Up, Fock(0)], vec![Down, Fock(1)]]
}

/// Half-period JC map on `|down,0>, |up,0>, |down,1>`.
pub fn ideal_v_gate() -> Array2<C64> {
    let mi = C64::new(0.0, -1.0);
    array![[ONE, ZERO, ZERO], [ZERO, ZERO, mi], [ZERO, mi, ZERO]]
}

const V_CONVENTION: &str = "target is the JC half-period map |up1,0b> -> -i|down1,1b>, \
     |down1,1b> -> -i|up1,0b>, |down1,0b> fixed";

/// Distant JC pulse of duration `pi / (2 omega')` under the effective
/// coupling, on `(spin1, b)`.
pub fn v_gate(omega_prime: f64, fock_dim: usize, opts: SimOptions) -> Result<(PulseSchedule, GateReport)> {
    crate::error::positive("omega_prime", omega_prime)?;
    let layout = layouts::distant(fock_dim)?;
    let mut schedule = PulseSchedule::new(&layout);
    schedule.push_evolve("V", distant_jc(omega_prime, &layout)?, PI / (2.0 * omega_prime))?;
    let u = schedule.propagator(opts)?;
    let report = score(&u, &v_basis_effective(), &ideal_v_gate(), V_CONVENTION)?;
    Ok((schedule, report))
}

/// The same pulse under the full two-electron coupling on `(spin1, a, b)`,
/// scored on the mode-`a` vacuum.
pub fn v_gate_full(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    big_delta: f64,
    fock_dim: usize,
    opts: SimOptions,
) -> Result<(PulseSchedule, GateReport)> {
    let layout = layouts::two_electron(fock_dim)?;
    let omega_prime = omega * omega_tilde / delta;
    crate::error::positive("omega_prime", omega_prime)?;
    let mut schedule = PulseSchedule::new(&layout);
    schedule.push_evolve(
        "V (full)",
        two_electron_full(omega, delta, omega_tilde, big_delta, &layout)?,
        PI / (2.0 * omega_prime),
    )?;
    let u = schedule.propagator(opts)?;
    let basis: Vec<Vec<Level>> = v_basis_effective()
        .into_iter()
        .map(|b| vec![b[0], Fock(0), b[1]])
        .collect();
    let report = score(&u, &basis, &ideal_v_gate(), V_CONVENTION)?;
    Ok((schedule, report))
}

/// Which Hamiltonian drives the two `V` segments of the two-spin CNOT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BusModel {
    /// Distant JC coupling `omega'` between spin1 and mode b.
    Effective,
    /// Spin-orbit drive on e1 plus Coulomb exchange between the modes.
    Full {
        omega: f64,
        omega_tilde: f64,
        delta: f64,
        big_delta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpinCnotParams {
    pub omega_prime: f64,
    /// Resonant spin-orbit coupling on e2 used for its local gate.
    pub omega_local: f64,
    pub fock_dim: usize,
    pub model: BusModel,
}

impl TwoSpinCnotParams {
    pub fn from_couplings(c: &crate::constants::DerivedCouplings, fock_dim: usize, model: BusModel) -> Self {
        TwoSpinCnotParams {
            omega_prime: c.omega_prime,
            omega_local: c.omega,
            fock_dim,
            model,
        }
    }
}

/// `V S_2 V` on `(spin1, a, b, spin2)`: map the spin of e1 onto mode b,
/// flip the spin of e2 conditioned on mode b, map back. The drive on e1 is
/// off while the local gate on e2 runs.
pub fn two_spin_cnot(params: &TwoSpinCnotParams, opts: SimOptions) -> Result<(PulseSchedule, GateReport)> {
    require_phase_fock(params.fock_dim)?;
    crate::error::positive("omega_prime", params.omega_prime)?;
    let layout = layouts::driven_pair(params.fock_dim)?;
    let v_duration = PI / (2.0 * params.omega_prime);
    let v_hamiltonian = match params.model {
        BusModel::Effective => distant_jc(params.omega_prime, &layout)?,
        BusModel::Full {
            omega,
            omega_tilde,
            delta,
            big_delta,
        } => two_electron_full(omega, delta, omega_tilde, big_delta, &layout)?,
    };
    let mut schedule = PulseSchedule::new(&layout);
    schedule.push_evolve("V", v_hamiltonian.clone(), v_duration)?;
    schedule.extend(&cnot_schedule(
        params.omega_local,
        &layout,
        labels::SPIN2,
        labels::MODE_B,
    )?)?;
    schedule.push_evolve("V", v_hamiltonian, v_duration)?;

    let u = schedule.propagator(opts)?;
    let basis: Vec<Vec<Level>> = [(Down, Down), (Down, Up), (Up, Down), (Up, Up)]
        .iter()
        .map(|&(s1, s2)| vec![s1, Fock(0), Fock(0), s2])
        .collect();
    let mut report = score(
        &u,
        &basis,
        &cnot_truth_table(),
        "target is CNOT with spin1 control and spin2 target, up = 1",
    )?;
    report.mode_ground_population = [labels::MODE_A, labels::MODE_B]
        .iter()
        .map(|&mode| {
            let pos = layout.position(mode).expect("mode present");
            let worst = basis
                .iter()
                .map(|b| {
                    let col = layout.index_of(b).expect("valid basis");
                    (0..layout.dim())
                        .filter(|&i| layout.levels_of(i)[pos] == 0)
                        .map(|i| u.get(i, col).norm_sqr())
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            (mode.to_string(), worst)
        })
        .collect();
    Ok((schedule, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::basis_state;
    use proptest::prelude::*;

    fn close(a: &Array2<C64>, b: &Array2<C64>, tol: f64) -> bool {
        linalg::max_abs_diff(a.view(), b.view()) < tol
    }

    #[test]
    fn rotation_examples() {
        for beta in [-1.0, 0.0, 2.5] {
            assert!(close(&rotation(0.0, beta), &linalg::identity(2), 1e-15));
        }
        let r = rotation(PI / 2.0, PI / 2.0);
        let expect = array![[ZERO, ONE], [-ONE, ZERO]];
        assert!(close(&r, &expect, 1e-15));
    }

    #[test]
    fn phase_residual_at_twelve_pi() {
        let x = 12.0 * PI;
        assert!(x.sin().abs() < 1e-14);
        let c = (2f64.sqrt() * x).cos();
        assert!((c + 0.995_726_785_249_73).abs() < 1e-12, "cos = {c}");
        // frozen from direct evaluation
        assert!((phase_residual(x) - 0.25 * (c + 1.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn phase_duration_search() {
        let d = phase_gate_duration(2.5e6).unwrap();
        assert!((37.0..=39.0).contains(&d.omega_t), "{d:?}");
        assert!((d.omega_t - 12.0 * PI).abs() < 0.05);
        assert!(d.residual <= phase_residual(12.0 * PI));
        let d2 = phase_gate_duration(5.0e6).unwrap();
        assert!((d2.t - d.t / 2.0).abs() < 1e-12 * d.t);
        assert!(phase_gate_duration(0.0).is_err());
    }

    #[test]
    fn phase_gate_simulation() {
        let omega = 2.5e6;
        let d = phase_gate_duration(omega).unwrap();
        let r = simulate_phase_gate(omega, d.t, 6, SimOptions::default()).unwrap();
        assert!(r.fidelity >= 0.99, "{r}");
        assert!(r.leakage <= 0.01, "{r}");
        // |0,down> is dark
        assert!((r.achieved[(0, 0)] * C64::from_polar(1.0, r.removed_phase) - ONE).norm() < 1e-9);
        let r3 = simulate_phase_gate(omega, d.t, 3, SimOptions::default()).unwrap();
        assert!((r3.fidelity - r.fidelity).abs() < 1e-3);
        assert!(matches!(
            simulate_phase_gate(omega, d.t, 2, SimOptions::default()),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn phase_gate_diagonal_at_twelve_pi() {
        let omega = 1.0e6;
        let t = 12.0 * PI / omega;
        let r = simulate_phase_gate(omega, t, 4, SimOptions::default()).unwrap();
        let raw = r.achieved.mapv(|z| z * C64::from_polar(1.0, r.removed_phase));
        let c = (2f64.sqrt() * 12.0 * PI).cos();
        for (k, v) in [1.0, 1.0, 1.0, c].iter().enumerate() {
            assert!((raw[(k, k)] - C64::new(*v, 0.0)).norm() < 1e-7, "k={k} {}", raw[(k, k)]);
        }
    }

    #[test]
    fn single_electron_cnot_truth_table() {
        let omega = 2.5e6;
        let (schedule, r) = single_electron_cnot(omega, 5, SimOptions::default()).unwrap();
        assert_eq!(schedule.segments().len(), 3);
        assert!(r.truth_table_fidelity >= 0.98, "{r}");
        assert!(r.fidelity >= 0.98, "{r}");
        // |1,down> -> |1,up>, |0,down> -> |0,down>
        assert!(r.achieved[(3, 2)].norm_sqr() > 0.98);
        assert!(r.achieved[(0, 0)].norm_sqr() > 0.999);
        assert!(r.unitarity_defect < 1e-6);
    }

    #[test]
    fn ideal_cnot_is_cnot_with_control_sign() {
        let z = diag(&[ONE, ONE, -ONE, -ONE]);
        assert!(close(&ideal_single_electron_cnot(), &cnot_truth_table().dot(&z), 1e-15));
        // the literal half-turn sandwich is diagonal, no flip
        let r = |beta| {
            let m = rotation(PI / 2.0, beta);
            let mut out = Array2::zeros((4, 4));
            for block in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        out[(2 * block + i, 2 * block + j)] = m[(1 - i, 1 - j)];
                    }
                }
            }
            out
        };
        let half = r(-PI / 2.0).dot(&ideal_phase_gate()).dot(&r(PI / 2.0));
        assert!(truth_table_fidelity(&half, &cnot_truth_table()) < 0.6);
    }

    #[test]
    fn v_gate_effective_and_twice() {
        let wp = 2.5e6;
        let (s, r) = v_gate(wp, 4, SimOptions::default()).unwrap();
        assert!(r.achieved[(2, 1)].norm_sqr() >= 0.999, "{r}");
        assert!(r.fidelity > 0.999);
        let mut twice = s.clone();
        twice.extend(&s).unwrap();
        let l = s.layout().clone();
        let psi = basis_state(&l, &[Up, Fock(0)]).unwrap();
        let out = twice.apply(&psi, SimOptions::default()).unwrap();
        let back = out.inner(&psi).unwrap();
        assert!(back.norm_sqr() >= 0.999);
        assert!((back + ONE).norm() < 1e-6);
        let d0 = basis_state(&l, &[Down, Fock(0)]).unwrap();
        assert!(twice.apply(&d0, SimOptions::default()).unwrap().inner(&d0).unwrap().norm_sqr() >= 0.999);
    }

    #[test]
    fn v_gate_full_model_transfer() {
        let (_, r) = v_gate_full(2.5e7, 2.5e7, 2.5e8, 2.5e8, 4, SimOptions::default()).unwrap();
        assert!(r.achieved[(2, 1)].norm_sqr() >= 0.9, "{r}");
    }

    #[test]
    fn two_spin_cnot_effective() {
        let params = TwoSpinCnotParams {
            omega_prime: 2.5e6,
            omega_local: 2.5e6,
            fock_dim: 3,
            model: BusModel::Effective,
        };
        let (schedule, r) = two_spin_cnot(&params, SimOptions::default()).unwrap();
        assert_eq!(schedule.segments().len(), 5);
        assert!(r.fidelity >= 0.95, "{r}");
        assert!(r.mode_ground_population.iter().all(|(_, p)| *p >= 0.98), "{r}");
        assert!(r.achieved[(0, 0)].norm_sqr() > 0.999);
        assert!(r.unitarity_defect < 1e-6);
    }

    #[test]
    fn schedule_validation() {
        let l = layouts::single_electron(3).unwrap();
        let mut s = PulseSchedule::new(&l);
        let h = local_jc(1.0, 0.0, &l, labels::SPIN1, labels::MODE_A).unwrap();
        assert!(s.push_evolve("x", h.clone(), 0.0).is_err());
        let other = layouts::distant(3).unwrap();
        assert_eq!(
            s.push_evolve("x", distant_jc(1.0, &other).unwrap(), 1.0),
            Err(Error::LayoutMismatch)
        );
        let not_unitary = OperatorMatrix::identity(&l).scale(C64::new(2.0, 0.0));
        assert!(s.push_instant("x", not_unitary).is_err());
        s.push_evolve("x", h, 1.5).unwrap();
        assert_eq!(s.total_duration(), 1.5);
    }

    proptest! {
        #[test]
        fn rotation_inverse_pair(alpha in -7.0f64..7.0, beta in -7.0f64..7.0) {
            let p = rotation(alpha, beta).dot(&rotation(-alpha, beta));
            prop_assert!(close(&p, &linalg::identity(2), 1e-14));
            prop_assert!(linalg::unitarity_defect(&rotation(alpha, beta)) < 1e-14);
        }

        #[test]
        fn fidelity_is_phase_invariant_and_self_one(
            angles in proptest::collection::vec(-3.0f64..3.0, 4),
            phase in -3.2f64..3.2,
        ) {
            let u = linalg::expm(&Array2::from_shape_fn((2, 2), |(i, j)| {
                let h = [[angles[0], angles[1]], [angles[1], angles[2]]];
                C64::new(0.0, -h[i][j]) + if i < j { C64::new(angles[3], 0.0) } else if i > j { C64::new(-angles[3], 0.0) } else { ZERO }
            }));
            prop_assert!((process_fidelity(&u, &u) - 1.0).abs() < 1e-12);
            let v = u.mapv(|z| z * C64::from_polar(1.0, phase));
            prop_assert!((process_fidelity(&v, &u) - 1.0).abs() < 1e-12);
            let f = process_fidelity(&v, &linalg::identity(2));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
