//! Time-dependent Schrodinger propagation, propagator matrices and an
//! independent piecewise matrix-exponential oracle.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::hamiltonians::TimeDependentHamiltonian;
use crate::hilbert::{OperatorMatrix, StateVector};
use crate::linalg::{self, C64, ONE, ZERO};
use crate::par::{self, Execution};

/// Steps per fastest period used when no explicit control is given.
///
/// The fastest period is `2 pi / omega_max`, with `omega_max` from
/// [`TimeDependentHamiltonian::frequency_scale`].
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 200.0;

/// Norm drift at which a trajectory stops being acceptable.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    /// Classical RK4 with this step (s).
    FixedDt(f64),
    /// Classical RK4 with `dt = 2 pi / (omega_max * steps)`.
    StepsPerPeriod(f64),
    /// Adaptive Dormand-Prince 5(4) with this local error target.
    TargetLocalError(f64),
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::StepsPerPeriod(DEFAULT_STEPS_PER_PERIOD)
    }
}

impl StepControl {
    /// Fixed RK4 step for `h`, or `None` for adaptive control.
    pub fn fixed_dt(&self, h: &TimeDependentHamiltonian) -> Option<f64> {
        match *self {
            StepControl::FixedDt(dt) => Some(dt),
            StepControl::StepsPerPeriod(n) => {
                let w = h.frequency_scale();
                Some(if w > 0.0 {
                    2.0 * std::f64::consts::PI / (w * n)
                } else {
                    f64::INFINITY
                })
            }
            StepControl::TargetLocalError(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            StepControl::FixedDt(v) => ("fixed dt", v),
            StepControl::StepsPerPeriod(v) => ("steps per period", v),
            StepControl::TargetLocalError(v) => ("target local error", v),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidRequest(format!("{name} must be positive, got {v}")))
        }
    }
}

/// Integration settings shared by gate, comparison and experiment runners.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub step_control: StepControl,
    pub execution: Execution,
}

#[derive(Debug, Clone)]
pub struct EvolutionRequest<'a> {
    pub hamiltonian: &'a TimeDependentHamiltonian,
    pub initial: StateVector,
    pub t_final: f64,
    pub step_control: StepControl,
    pub sample_times: Vec<f64>,
}

impl<'a> EvolutionRequest<'a> {
    /// Request sampled at `samples` evenly spaced times from 0 to `t_final`.
    pub fn uniform(
        hamiltonian: &'a TimeDependentHamiltonian,
        initial: StateVector,
        t_final: f64,
        samples: usize,
    ) -> Self {
        EvolutionRequest {
            hamiltonian,
            initial,
            t_final,
            step_control: StepControl::default(),
            sample_times: uniform_times(t_final, samples),
        }
    }

    pub fn with_control(mut self, control: StepControl) -> Self {
        self.step_control = control;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidRequest(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.initial.layout() != self.hamiltonian.layout() {
            return Err(Error::LayoutMismatch);
        }
        let n = self.initial.norm();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidRequest(format!(
                "initial state is not normalized (norm {n})"
            )));
        }
        if self.sample_times.is_empty() {
            return Err(Error::InvalidRequest("no sample times".into()));
        }
        let mut prev = 0.0;
        for &t in &self.sample_times {
            if !(t >= prev && t <= self.t_final) {
                return Err(Error::InvalidRequest(format!(
                    "sample times must be sorted within [0, t_final]; found {t}"
                )));
            }
            prev = t;
        }
        self.step_control.validate()
    }
}

/// `n` evenly spaced times covering `[0, t_final]`; `n = 1` gives `[t_final]`.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_final],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    t_final
                } else {
                    t_final * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `max |norm - 1|` over every integration step.
    pub norm_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectories hold at least one sample")
    }

    /// `|<target|psi(t)>|^2` at every sample.
    pub fn occupancy(&self, target: &StateVector) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| crate::hilbert::occupancy(s, target))
            .collect()
    }
}

struct Workspace {
    k: [Array1<C64>; 7],
    tmp: Array1<C64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Workspace {
            k: std::array::from_fn(|_| Array1::zeros(dim)),
            tmp: Array1::zeros(dim),
        }
    }
}

fn axpy_into(out: &mut Array1<C64>, y: &Array1<C64>, terms: &[(f64, &Array1<C64>)]) {
    out.assign(y);
    for &(c, k) in terms {
        if c != 0.0 {
            out.scaled_add(C64::new(c, 0.0), k);
        }
    }
}

fn rk4_step(
    h: &TimeDependentHamiltonian,
    t: f64,
    dt: f64,
    y: &mut Array1<C64>,
    ws: &mut Workspace,
) {
    let [k1, k2, k3, k4, ..] = &mut ws.k;
    let tmp = &mut ws.tmp;
    h.apply_generator(t, y, k1);
    axpy_into(tmp, y, &[(0.5 * dt, k1)]);
    h.apply_generator(t + 0.5 * dt, tmp, k2);
    axpy_into(tmp, y, &[(0.5 * dt, k2)]);
    h.apply_generator(t + 0.5 * dt, tmp, k3);
    axpy_into(tmp, y, &[(dt, k3)]);
    h.apply_generator(t + dt, tmp, k4);
    let c = C64::new(dt / 6.0, 0.0);
    y.scaled_add(c, k1);
    y.scaled_add(c * 2.0, k2);
    y.scaled_add(c * 2.0, k3);
    y.scaled_add(c, k4);
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince trial step. Leaves the fifth-order solution in
/// `ws.tmp` and returns the scaled error estimate.
fn dopri_trial(
    h: &TimeDependentHamiltonian,
    t: f64,
    dt: f64,
    y: &Array1<C64>,
    tol: f64,
    ws: &mut Workspace,
) -> f64 {
    for s in 0..7 {
        let mut stage = y.clone();
        for (j, &a) in DP_A[s].iter().enumerate().take(s) {
            if a != 0.0 {
                stage.scaled_add(C64::new(dt * a, 0.0), &ws.k[j]);
            }
        }
        h.apply_generator(t + DP_C[s] * dt, &stage, &mut ws.k[s]);
    }
    let mut err: f64 = 0.0;
    ws.tmp.assign(y);
    for i in 0..y.len() {
        let mut hi = ZERO;
        let mut lo = ZERO;
        for s in 0..7 {
            hi += ws.k[s][i] * DP_B5[s];
            lo += ws.k[s][i] * DP_B4[s];
        }
        ws.tmp[i] += hi * dt;
        let scale = tol * (1.0 + y[i].norm().max(ws.tmp[i].norm()));
        err = err.max(((hi - lo) * dt).norm() / scale);
    }
    err
}

fn check_drift(y: &Array1<C64>, drift: &mut f64, t: f64) -> Result<()> {
    let d = (linalg::vec_norm(y.view()) - 1.0).abs();
    if !d.is_finite() || d > 10.0 * NORM_TOLERANCE {
        return Err(Error::Integration(format!(
            "norm drift {d:e} at t = {t:e} s exceeds 10x tolerance {NORM_TOLERANCE:e}"
        )));
    }
    *drift = drift.max(d);
    Ok(())
}

/// Integrates `i d/dt psi = H(t) psi` from `t = 0`, sampling the state at
/// each requested time. Integration steps are aligned with the sample times.
pub fn evolve(req: &EvolutionRequest) -> Result<Trajectory> {
    req.validate()?;
    let h = req.hamiltonian;
    let layout = h.layout().clone();
    let mut y = req.initial.amplitudes().clone();
    let mut ws = Workspace::new(layout.dim());
    let mut drift: f64 = (linalg::vec_norm(y.view()) - 1.0).abs();
    let mut steps = 0usize;
    let mut t = 0.0;
    let mut states = Vec::with_capacity(req.sample_times.len());
    let fixed = req.step_control.fixed_dt(h);
    let mut adaptive_dt = fixed.unwrap_or_else(|| {
        let w = h.frequency_scale();
        if w > 0.0 {
            0.1 / w
        } else {
            req.t_final
        }
    });

    for &target in &req.sample_times {
        let span = target - t;
        if span > 0.0 {
            match (fixed, req.step_control) {
                (Some(dt), _) => {
                    let n = if dt.is_finite() {
                        (span / dt).ceil().max(1.0) as usize
                    } else {
                        1
                    };
                    let step = span / n as f64;
                    for i in 0..n {
                        rk4_step(h, t + i as f64 * step, step, &mut y, &mut ws);
                        check_drift(&y, &mut drift, t + (i + 1) as f64 * step)?;
                    }
                    steps += n;
                }
                (None, StepControl::TargetLocalError(tol)) => {
                    let min_step = 1e-13 * req.t_final;
                    let mut local_t = t;
                    while local_t < target {
                        let remaining = target - local_t;
                        let last = adaptive_dt >= remaining;
                        let dt = if last { remaining } else { adaptive_dt };
                        let err = dopri_trial(h, local_t, dt, &y, tol, &mut ws);
                        let factor = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if err <= 1.0 {
                            y.assign(&ws.tmp);
                            local_t = if last { target } else { local_t + dt };
                            steps += 1;
                            check_drift(&y, &mut drift, local_t)?;
                            if !last {
                                adaptive_dt = dt * factor;
                            }
                        } else {
                            adaptive_dt = dt * factor;
                            if adaptive_dt < min_step {
                                return Err(Error::Integration(format!(
                                    "step-size underflow at t = {local_t:e} s (dt = {adaptive_dt:e} s)"
                                )));
                            }
                        }
                    }
                }
                (None, _) => unreachable!("fixed controls always resolve to a step"),
            }
            t = target;
        }
        states.push(StateVector::new(layout.clone(), y.clone())?);
    }

    Ok(Trajectory {
        times: req.sample_times.clone(),
        states,
        norm_drift: drift,
        steps,
    })
}

/// `U(t_final)` built column by column from evolved basis states.
pub fn propagator_matrix(
    h: &TimeDependentHamiltonian,
    t_final: f64,
    control: StepControl,
    exec: Execution,
) -> Result<OperatorMatrix> {
    let layout = h.layout().clone();
    let dim = layout.dim();
    let columns = par::map_range(exec, dim, |j| {
        let mut e = Array1::zeros(dim);
        e[j] = ONE;
        let req = EvolutionRequest {
            hamiltonian: h,
            initial: StateVector::new(layout.clone(), e)?,
            t_final,
            step_control: control,
            sample_times: vec![t_final],
        };
        Ok(evolve(&req)?.final_state().amplitudes().clone())
    });
    let mut u = Array2::zeros((dim, dim));
    for (j, col) in columns.into_iter().enumerate() {
        let col: Array1<C64> = col?;
        u.column_mut(j).assign(&col);
    }
    let defect = linalg::unitarity_defect(&u);
    if defect > 1e-8 {
        return Err(Error::Integration(format!(
            "propagator unitarity defect {defect:e} exceeds 1e-8"
        )));
    }
    OperatorMatrix::new(layout, u)
}

/// Product of exact exponentials of `H` frozen at each slice midpoint.
///
/// Slices are exponentiated and multiplied in contiguous chunks, one chunk
/// per work item, and the chunk products are combined in time order.
pub fn oracle_piecewise_expm(
    h: &TimeDependentHamiltonian,
    t_final: f64,
    n_slices: usize,
    exec: Execution,
) -> Result<OperatorMatrix> {
    if n_slices == 0 {
        return Err(Error::InvalidRequest("n_slices must be at least 1".into()));
    }
    let dim = h.dim();
    let dt = t_final / n_slices as f64;
    let slice = |k: usize| {
        let mid = (k as f64 + 0.5) * dt;
        let g = h.evaluate(mid).into_entries().mapv(|z| z * C64::new(0.0, -dt));
        linalg::expm(&g)
    };
    let chunks = 64.min(n_slices);
    let per = n_slices.div_ceil(chunks);
    let products = par::map_range(exec, chunks, |c| {
        let mut u = linalg::identity(dim);
        for k in (c * per)..((c + 1) * per).min(n_slices) {
            u = slice(k).dot(&u);
        }
        u
    });
    let u = products
        .into_iter()
        .fold(linalg::identity(dim), |acc, p| p.dot(&acc));
    OperatorMatrix::new(h.layout().clone(), u)
}

/// Doubles the slice count from `start` until successive oracle results
/// differ by at most `tol` (max entry), returning the finer result and its
/// slice count.
pub fn converged_oracle(
    h: &TimeDependentHamiltonian,
    t_final: f64,
    start: usize,
    tol: f64,
    max_slices: usize,
    exec: Execution,
) -> Result<(OperatorMatrix, usize)> {
    let mut n = start.max(1);
    let mut prev = oracle_piecewise_expm(h, t_final, n, exec)?;
    while n * 2 <= max_slices {
        n *= 2;
        let next = oracle_piecewise_expm(h, t_final, n, exec)?;
        let change = linalg::max_abs_diff(next.entries().view(), prev.entries().view());
        if change < tol {
            return Ok((next, n));
        }
        prev = next;
    }
    Err(Error::Integration(format!(
        "oracle did not converge to {tol:e} within {max_slices} slices"
    )))
}

/// Largest entrywise difference between two operators on the same layout.
pub fn operator_distance(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<f64> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch);
    }
    Ok(linalg::max_abs_diff(a.entries().view(), b.entries().view()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{layouts, single_electron_jc, RotatingTerm};
    use crate::hilbert::{basis_state, number_on, Level::*};
    use proptest::prelude::*;

    fn jc(omega: f64, delta: f64) -> TimeDependentHamiltonian {
        single_electron_jc(omega, delta, &layouts::single_electron(4).unwrap()).unwrap()
    }

    #[test]
    fn null_generator_keeps_state() {
        let l = layouts::single_electron(3).unwrap();
        let h = TimeDependentHamiltonian::new(&l);
        let psi = basis_state(&l, &[Up, Fock(1)]).unwrap();
        let tr = evolve(&EvolutionRequest::uniform(&h, psi.clone(), 1.0, 5)).unwrap();
        assert!(tr.states.iter().all(|s| *s == psi));
        assert_eq!(tr.norm_drift, 0.0);
        let u = propagator_matrix(&h, 1.0, StepControl::default(), Execution::Sequential).unwrap();
        assert_eq!(u, OperatorMatrix::identity(&l));
    }

    #[test]
    fn resonant_rabi_oscillation() {
        let omega = 2.0e6;
        let h = jc(omega, 0.0);
        let l = h.layout().clone();
        let t_final = 3.0 * std::f64::consts::PI / omega;
        let req = EvolutionRequest::uniform(&h, basis_state(&l, &[Up, Fock(0)]).unwrap(), t_final, 61)
            .with_control(StepControl::StepsPerPeriod(200.0));
        let tr = evolve(&req).unwrap();
        let down1 = basis_state(&l, &[Down, Fock(1)]).unwrap();
        for (t, p) in tr.times.iter().zip(tr.occupancy(&down1).unwrap()) {
            assert!((p - (omega * t).sin().powi(2)).abs() < 1e-8, "t={t} p={p}");
        }
        assert!(tr.norm_drift < NORM_TOLERANCE);
    }

    #[test]
    fn request_validation() {
        let h = jc(1.0, 0.0);
        let l = h.layout().clone();
        let psi = basis_state(&l, &[Up, Fock(0)]).unwrap();
        assert!(evolve(&EvolutionRequest::uniform(&h, psi.clone(), 0.0, 3)).is_err());
        assert!(evolve(&EvolutionRequest::uniform(&h, psi.clone(), 1.0, 0)).is_err());
        let mut r = EvolutionRequest::uniform(&h, psi.clone(), 1.0, 3);
        r.sample_times = vec![0.5, 0.2];
        assert!(evolve(&r).is_err());
        r.sample_times = vec![2.0];
        assert!(evolve(&r).is_err());
        let bad = StateVector::new(l.clone(), psi.amplitudes() * C64::new(2.0, 0.0)).unwrap();
        assert!(evolve(&EvolutionRequest::uniform(&h, bad, 1.0, 3)).is_err());
        let other = basis_state(&layouts::single_electron(3).unwrap(), &[Up, Fock(0)]).unwrap();
        assert_eq!(
            evolve(&EvolutionRequest::uniform(&h, other, 1.0, 3)),
            Err(Error::LayoutMismatch)
        );
        let r = EvolutionRequest::uniform(&h, psi, 1.0, 3).with_control(StepControl::FixedDt(-1.0));
        assert!(evolve(&r).is_err());
    }

    #[test]
    fn coarse_steps_trigger_drift_error() {
        let h = jc(1.0, 0.0);
        let psi = basis_state(h.layout(), &[Up, Fock(0)]).unwrap();
        let req = EvolutionRequest::uniform(&h, psi, 100.0, 2).with_control(StepControl::FixedDt(0.5));
        assert!(matches!(evolve(&req), Err(Error::Integration(_))));
    }

    #[test]
    fn adaptive_matches_fixed() {
        let h = jc(2.0e6, 2.5e7);
        let psi = basis_state(h.layout(), &[Up, Fock(0)]).unwrap();
        let t = 2e-6;
        let a = evolve(
            &EvolutionRequest::uniform(&h, psi.clone(), t, 4)
                .with_control(StepControl::TargetLocalError(1e-12)),
        )
        .unwrap();
        let b = evolve(
            &EvolutionRequest::uniform(&h, psi, t, 4).with_control(StepControl::StepsPerPeriod(400.0)),
        )
        .unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!(x.inner(y).unwrap().norm() > 1.0 - 1e-8);
        }
        assert!(a.norm_drift < NORM_TOLERANCE);
    }

    #[test]
    fn adaptive_step_underflow_is_reported() {
        // a rate of 1e300 rad/s cannot be resolved within the minimum step
        let l = layouts::single_electron(2).unwrap();
        let mut h = TimeDependentHamiltonian::new(&l);
        h.add_term(RotatingTerm::fixed(number_on(&l, "a").unwrap(), 1e300))
            .unwrap();
        let psi = basis_state(&l, &[Up, Fock(1)]).unwrap();
        let req = EvolutionRequest::uniform(&h, psi, 1.0, 2)
            .with_control(StepControl::TargetLocalError(1e-10));
        match evolve(&req) {
            Err(Error::Integration(msg)) => assert!(msg.contains("underflow") || msg.contains("drift")),
            other => panic!("expected integration failure, got {other:?}"),
        }
    }

    #[test]
    fn static_hamiltonian_matches_expm() {
        let h = jc(1.5e6, 0.0);
        let t = 1.3e-6;
        let u = propagator_matrix(&h, t, StepControl::StepsPerPeriod(400.0), Execution::Parallel).unwrap();
        let exact = linalg::expm(&h.evaluate(0.0).into_entries().mapv(|z| z * C64::new(0.0, -t)));
        assert!(linalg::max_abs_diff(u.entries().view(), exact.view()) < 1e-8);
        assert!((linalg::determinant(u.entries()).norm() - 1.0).abs() < 1e-8);
        let o = oracle_piecewise_expm(&h, t, 3, Execution::Sequential).unwrap();
        assert!(linalg::max_abs_diff(o.entries().view(), exact.view()) < 1e-12);
    }

    #[test]
    fn oracle_is_unitary_and_chunking_is_order_preserving() {
        let h = jc(2.0e6, 2.5e7);
        let t = 1e-6;
        for n in [1, 7, 100, 333] {
            let a = oracle_piecewise_expm(&h, t, n, Execution::Parallel).unwrap();
            assert!(linalg::unitarity_defect(a.entries()) < 1e-12);
            let mut b = linalg::identity(h.dim());
            for k in 0..n {
                let mid = (k as f64 + 0.5) * t / n as f64;
                let g = h.evaluate(mid).into_entries().mapv(|z| z * C64::new(0.0, -t / n as f64));
                b = linalg::expm(&g).dot(&b);
            }
            assert!(linalg::max_abs_diff(a.entries().view(), b.view()) < 1e-12);
        }
        assert!(oracle_piecewise_expm(&h, t, 0, Execution::Sequential).is_err());
    }

    #[test]
    fn detuned_propagator_matches_converged_oracle() {
        let h = jc(5.0e6, 2.5e8);
        let t = 2e-7;
        let (oracle, _) = converged_oracle(&h, t, 256, 1e-8, 1 << 20, Execution::Parallel).unwrap();
        let u = propagator_matrix(&h, t, StepControl::default(), Execution::Parallel).unwrap();
        assert!(operator_distance(&u, &oracle).unwrap() < 1e-6);
    }

    #[test]
    fn time_reversal_recovers_initial_state() {
        let h = jc(3.0e6, 2.5e7);
        let l = h.layout().clone();
        let psi0 = basis_state(&l, &[Up, Fock(0)]).unwrap();
        let t = 1.7e-6;
        let fwd = evolve(&EvolutionRequest::uniform(&h, psi0.clone(), t, 2)).unwrap();
        let back = h.time_reversed(t);
        let rev = evolve(&EvolutionRequest::uniform(&back, fwd.final_state().clone(), t, 2)).unwrap();
        let diff = rev.final_state().amplitudes() - psi0.amplitudes();
        assert!(linalg::vec_norm(diff.view()) < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_superpositions_stay_normalized(
            re in proptest::collection::vec(-1.0f64..1.0, 8),
            im in proptest::collection::vec(-1.0f64..1.0, 8),
            omega in 1e5f64..1e7,
            delta in 0.0f64..2.5e8,
        ) {
            let h = jc(omega, delta);
            let raw = Array1::from_shape_fn(8, |k| C64::new(re[k], im[k]));
            let n = linalg::vec_norm(raw.view());
            prop_assume!(n > 1e-3);
            let psi = StateVector::new(h.layout().clone(), raw.mapv(|z| z / n)).unwrap();
            let tr = evolve(&EvolutionRequest::uniform(&h, psi, 1e-6, 3)).unwrap();
            prop_assert!(tr.norm_drift <= NORM_TOLERANCE);
        }
    }
}
