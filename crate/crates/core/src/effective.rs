//! Full versus reduced model comparisons: the distant spin-orbit JC coupling
//! obtained by eliminating the vibration of e1, and the spin-spin flip-flop
//! obtained by eliminating the vibration of e2 as well.

use crate::error::{Error, Result};
use crate::hamiltonians::{
    distant_jc, driven_pair_full, effective_reduced, excitation_number, labels, layouts,
    spin_spin_effective, two_electron_full, TimeDependentHamiltonian,
};
use crate::hilbert::{basis_state, Level, SpaceLayout, StateVector};
use crate::par::{self, Execution};
use crate::propagator::{evolve, EvolutionRequest, SimOptions, Trajectory};

use Level::{Down, Fock, Up};

/// Sampling and truncation shared by the comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSettings {
    pub samples: usize,
    pub fock_dim: usize,
    pub options: SimOptions,
    /// Perturbative ratio above which a regime warning is attached.
    pub regime_threshold: f64,
}

impl Default for ComparisonSettings {
    fn default() -> Self {
        ComparisonSettings {
            samples: 400,
            fock_dim: 6,
            options: SimOptions::default(),
            regime_threshold: 0.2,
        }
    }
}

/// Dominant oscillation of a transfer-probability curve
/// `c0 + c1 cos(2 W t + phi)`, reported as `W` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyFit {
    pub frequency: f64,
    /// RMS residual of the least-squares fit at `frequency`.
    pub residual: f64,
    /// Estimate from the autocorrelation alone, before refinement.
    pub autocorrelation_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    /// Observable labels, the tracked basis states.
    pub observables: Vec<String>,
    pub full_trajectory: Trajectory,
    pub effective_trajectory: Trajectory,
    /// Occupancies per observable, full model.
    pub full_occupancy: Vec<Vec<f64>>,
    /// Occupancies per observable, reduced model.
    pub effective_occupancy: Vec<Vec<f64>>,
    /// Sup-norm of the occupancy difference, per observable.
    pub max_deviation: Vec<f64>,
    /// Maximum of the transfer-state occupancy in the full model.
    pub peak_transfer: f64,
    pub fit: Option<FrequencyFit>,
    /// Oscillation frequency of the transfer occupancy predicted by the
    /// reduced model (rad/s).
    pub predicted_frequency: f64,
    /// Fitted full-model frequency over `predicted_frequency`.
    pub frequency_ratio: Option<f64>,
    /// Largest `|<N>(t) - <N>(0)|` of the reduced model's excitation number.
    pub effective_excitation_drift: f64,
    pub warnings: Vec<String>,
}

impl ModelComparison {
    pub fn overall_max_deviation(&self) -> f64 {
        self.max_deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Mean-removed unbiased autocorrelation at lags `0..n/2`.
fn autocorrelation(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..=n / 2)
        .map(|k| {
            let s: f64 = (0..n - k).map(|i| y[i] * y[i + k]).sum();
            s / (n - k) as f64
        })
        .collect()
}

/// Least-squares `c0 + c1 cos(w t) + c2 sin(w t)`; returns the RMS residual.
fn harmonic_residual(t: &[f64], x: &[f64], w: f64) -> f64 {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (&ti, &xi) in t.iter().zip(x) {
        let row = [1.0, (w * ti).cos(), (w * ti).sin()];
        for a in 0..3 {
            atb[a] += row[a] * xi;
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    let coef = solve3(ata, atb);
    let ss: f64 = t
        .iter()
        .zip(x)
        .map(|(&ti, &xi)| {
            let f = coef[0] + coef[1] * (w * ti).cos() + coef[2] * (w * ti).sin();
            (xi - f).powi(2)
        })
        .sum();
    (ss / t.len() as f64).sqrt()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        if a[k][k].abs() < 1e-300 {
            return [b[0] / a[0][0].max(1e-300), 0.0, 0.0];
        }
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for k in (0..3).rev() {
        let s: f64 = (k + 1..3).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Fits the transfer frequency `W` of a curve shaped like `sin^2(W t)`.
///
/// The first autocorrelation minimum after its first zero crossing sits at
/// half a period of `cos(2 W t)`, giving `W = pi / (2 lag)`; a parabola
/// through the three lags around the minimum refines the lag. The estimate is
/// then polished by minimizing the residual of a harmonic least-squares fit
/// within 30% of it. Requires uniformly spaced samples covering at least one
/// full oscillation of the curve.
pub fn fit_frequency(times: &[f64], signal: &[f64]) -> Option<FrequencyFit> {
    let n = times.len();
    if n < 8 || signal.len() != n {
        return None;
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let r = autocorrelation(signal);
    if r[0] <= 1e-14 {
        return None;
    }
    let zero = r.iter().position(|&v| v < 0.0)?;
    let k = (zero..r.len() - 1).find(|&k| r[k] <= r[k - 1] && r[k] <= r[k + 1])?;
    let (a, b, c) = (r[k - 1], r[k], r[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let lag = (k as f64 + shift.clamp(-0.5, 0.5)) * dt;
    let estimate = std::f64::consts::PI / (2.0 * lag);

    let t0 = times[0];
    let t: Vec<f64> = times.iter().map(|v| v - t0).collect();
    let objective = |w: f64| harmonic_residual(&t, signal, 2.0 * w);
    let (mut lo, mut hi) = (0.7 * estimate, 1.3 * estimate);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..120 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = objective(x2);
        }
        if hi - lo < 1e-12 * estimate {
            break;
        }
    }
    let w = 0.5 * (lo + hi);
    Some(FrequencyFit {
        frequency: w,
        residual: objective(w),
        autocorrelation_estimate: estimate,
    })
}

fn run(
    h: &TimeDependentHamiltonian,
    initial: StateVector,
    t_final: f64,
    settings: &ComparisonSettings,
) -> Result<Trajectory> {
    let req = EvolutionRequest::uniform(h, initial, t_final, settings.samples)
        .with_control(settings.options.step_control);
    evolve(&req)
}

fn occupancies(tr: &Trajectory, layout: &SpaceLayout, states: &[Vec<Level>]) -> Result<Vec<Vec<f64>>> {
    states
        .iter()
        .map(|s| tr.occupancy(&basis_state(layout, s)?))
        .collect()
}

fn excitation_drift(tr: &Trajectory, n: &crate::hilbert::OperatorMatrix) -> Result<f64> {
    let n0 = n.expectation(&tr.states[0])?.re;
    tr.states.iter().try_fold(0.0f64, |acc, s| {
        Ok(acc.max((n.expectation(s)?.re - n0).abs()))
    })
}

struct ModelRun<'a> {
    hamiltonian: &'a TimeDependentHamiltonian,
    observables: Vec<Vec<Level>>,
}

fn compare(
    labels_out: Vec<String>,
    full: ModelRun,
    effective: ModelRun,
    effective_number: crate::hilbert::OperatorMatrix,
    t_final: f64,
    predicted_frequency: f64,
    settings: &ComparisonSettings,
    warnings: Vec<String>,
) -> Result<ModelComparison> {
    let full_layout = full.hamiltonian.layout().clone();
    let eff_layout = effective.hamiltonian.layout().clone();
    let jobs = [&full, &effective];
    let runs = par::map(settings.options.execution, &jobs, |m| {
        run(
            m.hamiltonian,
            basis_state(m.hamiltonian.layout(), &m.observables[0])?,
            t_final,
            settings,
        )
    });
    let mut runs = runs.into_iter();
    let full_tr = runs.next().expect("two runs")?;
    let eff_tr = runs.next().expect("two runs")?;
    let full_occ = occupancies(&full_tr, &full_layout, &full.observables)?;
    let eff_occ = occupancies(&eff_tr, &eff_layout, &effective.observables)?;
    let max_deviation = full_occ
        .iter()
        .zip(&eff_occ)
        .map(|(a, b)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let transfer = &full_occ[1];
    let peak_transfer = transfer.iter().copied().fold(0.0, f64::max);
    let fit = fit_frequency(&full_tr.times, transfer);
    let frequency_ratio = fit.map(|f| f.frequency / predicted_frequency);
    let effective_excitation_drift = excitation_drift(&eff_tr, &effective_number)?;
    Ok(ModelComparison {
        observables: labels_out,
        full_trajectory: full_tr,
        effective_trajectory: eff_tr,
        full_occupancy: full_occ,
        effective_occupancy: eff_occ,
        max_deviation,
        peak_transfer,
        fit,
        predicted_frequency,
        frequency_ratio,
        effective_excitation_drift,
        warnings,
    })
}

fn regime_warnings(pairs: &[(&str, f64)], threshold: f64) -> Vec<String> {
    pairs
        .iter()
        .filter(|(_, v)| !(v.abs() < threshold))
        .map(|(name, v)| format!("{name} = {v:.4} is not below the perturbative threshold {threshold}"))
        .collect()
}

/// Observable labels of the distant JC comparison.
pub const JC_OBSERVABLES: [&str; 2] = ["occ_up1_0_0", "occ_down1_0_1"];
/// Observable labels of the spin-spin comparison.
pub const SPIN_SPIN_OBSERVABLES: [&str; 2] = ["occ_down1_0_0_up2", "occ_up1_0_0_down2"];

/// Reduced Hamiltonian for the distant JC comparison on `(spin1, b)`: the
/// pure JC coupling when `omega == omega_tilde`, otherwise the form that keeps
/// the two Stark shifts.
pub fn jc_effective_hamiltonian(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    fock_dim: usize,
) -> Result<TimeDependentHamiltonian> {
    let layout = layouts::distant(fock_dim)?;
    if omega == omega_tilde {
        distant_jc(omega * omega_tilde / delta, &layout)
    } else {
        effective_reduced(omega, omega_tilde, delta, &layout)
    }
}

/// Two-electron coupling against its reduction, both from `|up1,0,0>`.
pub fn compare_jc_reduction(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    big_delta: f64,
    t_final: f64,
    settings: &ComparisonSettings,
) -> Result<ModelComparison> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning("delta"));
    }
    let mut warnings = regime_warnings(
        &[("omega/delta", omega / delta), ("omega_tilde/delta", omega_tilde / delta)],
        settings.regime_threshold,
    );
    if big_delta != delta {
        warnings.push(format!(
            "big_delta = {big_delta:e} differs from delta = {delta:e}; the reduction assumes they are equal"
        ));
    }
    let full_layout = layouts::two_electron(settings.fock_dim)?;
    let full_h = two_electron_full(omega, delta, omega_tilde, big_delta, &full_layout)?;
    let eff_h = jc_effective_hamiltonian(omega, omega_tilde, delta, settings.fock_dim)?;
    let omega_prime = omega * omega_tilde / delta;
    let gamma = (omega * omega - omega_tilde * omega_tilde) / delta;
    let predicted = (omega_prime * omega_prime + 0.25 * gamma * gamma).sqrt();
    let number = excitation_number(eff_h.layout(), &[labels::SPIN1], &[labels::MODE_B])?;
    compare(
        JC_OBSERVABLES.iter().map(|s| s.to_string()).collect(),
        ModelRun {
            hamiltonian: &full_h,
            observables: vec![vec![Up, Fock(0), Fock(0)], vec![Down, Fock(0), Fock(1)]],
        },
        ModelRun {
            hamiltonian: &eff_h,
            observables: vec![vec![Up, Fock(0)], vec![Down, Fock(1)]],
        },
        number,
        t_final,
        predicted,
        settings,
        warnings,
    )
}

/// Doubly driven system against the flip-flop reduction, both from
/// `|down1,0,0,up2>` (or `|up1,0,0,up2>` with `both_up`).
pub fn compare_spin_spin_reduction(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    g: f64,
    eta: f64,
    t_final: f64,
    settings: &ComparisonSettings,
) -> Result<ModelComparison> {
    compare_spin_spin_from(omega, omega_tilde, delta, g, eta, t_final, settings, false)
}

#[allow(clippy::too_many_arguments)]
pub fn compare_spin_spin_from(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    g: f64,
    eta: f64,
    t_final: f64,
    settings: &ComparisonSettings,
    both_up: bool,
) -> Result<ModelComparison> {
    if delta == 0.0 {
        return Err(Error::ZeroDetuning("delta"));
    }
    let gamma = (omega * omega - omega_tilde * omega_tilde) / delta;
    if gamma == 0.0 {
        return Err(Error::DegenerateSpinSpin);
    }
    let omega_dprime = g * g / gamma;
    let mut warnings = regime_warnings(
        &[
            ("omega/delta", omega / delta),
            ("omega_tilde/delta", omega_tilde / delta),
            ("G/|gamma|", g / gamma.abs()),
        ],
        settings.regime_threshold,
    );
    let symmetric_g = omega * omega_tilde / delta;
    let symmetric_eta = omega * omega / delta;
    if ((g - symmetric_g) / symmetric_g.max(f64::MIN_POSITIVE)).abs() > 1e-9
        || ((eta - symmetric_eta) / symmetric_eta.max(f64::MIN_POSITIVE)).abs() > 1e-9
    {
        warnings.push(
            "G and eta differ from omega*omega_tilde/delta and omega^2/delta; \
             the flip-flop reduction assumes both"
                .into(),
        );
    }
    let full_layout = layouts::driven_pair(settings.fock_dim)?;
    let full_h = driven_pair_full(omega, delta, omega_tilde, g, eta, &full_layout)?;
    let spins = layouts::spin_pair()?;
    let eff_h = spin_spin_effective(omega_dprime, &spins)?;
    let number = excitation_number(&spins, &[labels::SPIN1, labels::SPIN2], &[])?;
    let first = if both_up { Up } else { Down };
    compare(
        SPIN_SPIN_OBSERVABLES.iter().map(|s| s.to_string()).collect(),
        ModelRun {
            hamiltonian: &full_h,
            observables: vec![vec![first, Fock(0), Fock(0), Up], vec![Up, Fock(0), Fock(0), Down]],
        },
        ModelRun {
            hamiltonian: &eff_h,
            observables: vec![vec![first, Up], vec![Up, Down]],
        },
        number,
        t_final,
        omega_dprime.abs(),
        settings,
        warnings,
    )
}

/// Population of Fock levels `>= level` of factor `mode` at every sample.
pub fn mode_population_at_least(tr: &Trajectory, mode: &str, level: usize) -> Result<Vec<f64>> {
    let layout = tr.final_state().layout();
    let pos = layout.position(mode)?;
    let mask: Vec<bool> = (0..layout.dim())
        .map(|i| layout.levels_of(i)[pos] >= level)
        .collect();
    Ok(tr
        .states
        .iter()
        .map(|s| {
            s.amplitudes()
                .iter()
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(z, _)| z.norm_sqr())
                .sum()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub fock_dim: usize,
    /// Largest deviation from the reduced model.
    pub max_deviation: f64,
    /// Sup-norm difference of the full-model occupancy curves against the
    /// previous (smaller) truncation; `None` on the first row.
    pub difference_from_previous: Option<f64>,
    /// Largest transient population of mode `a` levels `>= 1` and `>= 2`.
    pub max_mode_a_excited: f64,
    pub max_mode_a_level2: f64,
}

/// Reruns `experiment` at each truncation, in parallel across dimensions.
pub fn truncation_convergence<F>(
    experiment: F,
    fock_dims: &[usize],
    exec: Execution,
) -> Result<Vec<TruncationRow>>
where
    F: Fn(usize) -> Result<ModelComparison> + Sync + Send,
{
    if fock_dims.len() < 2 || fock_dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidRequest(
            "fock_dims must hold at least two ascending entries".into(),
        ));
    }
    let runs = par::map(exec, fock_dims, |&d| experiment(d));
    let mut rows = Vec::with_capacity(runs.len());
    let mut previous: Option<ModelComparison> = None;
    for (&d, run) in fock_dims.iter().zip(runs) {
        let c = run?;
        let difference_from_previous = previous.as_ref().map(|p| {
            p.full_occupancy
                .iter()
                .zip(&c.full_occupancy)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max)
        });
        let peak = |level| -> Result<f64> {
            Ok(mode_population_at_least(&c.full_trajectory, labels::MODE_A, level)?
                .into_iter()
                .fold(0.0, f64::max))
        };
        rows.push(TruncationRow {
            fock_dim: d,
            max_deviation: c.overall_max_deviation(),
            difference_from_previous,
            max_mode_a_excited: peak(1)?,
            max_mode_a_level2: peak(2)?,
        });
        previous = Some(c);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn settings(fock_dim: usize) -> ComparisonSettings {
        ComparisonSettings {
            fock_dim,
            samples: 200,
            ..Default::default()
        }
    }

    #[test]
    fn fit_recovers_synthetic_frequency() {
        for &(w, periods) in &[(2.5e6, 1.0), (1.3e4, 0.5), (7.0, 3.0)] {
            let t_final = periods * 2.0 * PI / w;
            let times: Vec<f64> = (0..400).map(|k| t_final * k as f64 / 399.0).collect();
            let x: Vec<f64> = times.iter().map(|t| 0.93 * (w * t).sin().powi(2)).collect();
            let fit = fit_frequency(&times, &x).unwrap();
            assert!((fit.frequency / w - 1.0).abs() < 1e-6, "w={w} {fit:?}");
            assert!(fit.residual < 1e-9);
            // the autocorrelation of a single cycle is biased by the short window
            assert!((fit.autocorrelation_estimate / w - 1.0).abs() < 0.15, "{fit:?}");
        }
        assert!(fit_frequency(&[0.0, 1.0], &[0.0, 1.0]).is_none());
        let flat = vec![0.5; 50];
        let t: Vec<f64> = (0..50).map(|k| k as f64).collect();
        assert!(fit_frequency(&t, &flat).is_none());
    }

    #[test]
    fn resonant_reduction_tracks_full_model() {
        let (w, d) = (2.5e7, 2.5e8);
        let wp = w * w / d;
        let c = compare_jc_reduction(w, w, d, d, 2.0 * PI / wp, &settings(4)).unwrap();
        assert!(c.warnings.is_empty(), "{:?}", c.warnings);
        assert!(c.peak_transfer >= 0.9);
        let ratio = c.frequency_ratio.unwrap();
        assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
        assert!(c.overall_max_deviation() <= 1.0);
        assert!(c.effective_excitation_drift < 1e-9);
        // reduced-model curves are exact sinusoids
        for (t, p) in c.effective_trajectory.times.iter().zip(&c.effective_occupancy[1]) {
            assert!((p - (wp * t).sin().powi(2)).abs() < 1e-7);
        }
    }

    #[test]
    fn no_coulomb_coupling_means_no_transfer() {
        let (w, d) = (2.5e7, 2.5e8);
        let c = compare_jc_reduction(w, 0.0, d, d, 1e-6, &settings(3)).unwrap();
        assert!(c.peak_transfer < 1e-12);
        let dip = c.full_occupancy[0].iter().map(|p| 1.0 - p).fold(0.0, f64::max);
        assert!(dip <= 4.0 * (w / d).powi(2), "dip {dip}");
        assert!(c.fit.is_none());
    }

    #[test]
    fn mismatched_detunings_and_large_ratios_warn() {
        let c = compare_jc_reduction(1e8, 2.5e7, 2.5e8, 3e8, 1e-7, &settings(3)).unwrap();
        assert_eq!(c.warnings.len(), 2, "{:?}", c.warnings);
    }

    #[test]
    fn spin_spin_degenerate_is_an_error() {
        let r = compare_spin_spin_reduction(2.5e7, 2.5e7, 2.5e8, 1e6, 1e6, 1e-6, &settings(3));
        assert_eq!(r.unwrap_err(), Error::DegenerateSpinSpin);
    }

    #[test]
    fn spin_spin_without_drive_is_static() {
        let (w, wt, d) = (2.6e6, 2.5e7, 2.5e8);
        let c = compare_spin_spin_reduction(w, wt, d, 0.0, w * w / d, 2e-6, &settings(3)).unwrap();
        for occ in &c.full_occupancy {
            let spread = occ.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - occ.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-12, "spread {spread}");
        }
    }

    #[test]
    fn both_up_is_nearly_stationary() {
        let (w, wt, d) = (2.6e6, 2.5e7, 2.5e8);
        let g = w * wt / d;
        let gamma = (w * w - wt * wt) / d;
        let c = compare_spin_spin_from(w, wt, d, g, w * w / d, 2e-5, &settings(3), true).unwrap();
        let dip = c.full_occupancy[0].iter().map(|p| 1.0 - p).fold(0.0, f64::max);
        // two detuned channels, |up,down,1> and |down,up,1>, each of weight ~4 (G/gamma)^2
        assert!(dip <= 10.0 * (g / gamma).powi(2), "dip {dip}");
        assert!(c.effective_excitation_drift < 1e-12);
    }

    #[test]
    fn truncation_rows_and_validation() {
        let (w, d) = (2.5e7, 2.5e8);
        let t = 2.0 * PI / (w * w / d);
        let rows = truncation_convergence(
            |dim| compare_jc_reduction(w, w, d, d, t, &settings(dim)),
            &[2, 3, 4],
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].difference_from_previous.is_none());
        assert!(rows[0].max_mode_a_level2 == 0.0);
        assert!(rows[2].max_mode_a_excited < 0.05);
        assert!(truncation_convergence(|_| unreachable!(), &[4], Execution::Sequential).is_err());
        assert!(truncation_convergence(|_| unreachable!(), &[4, 3], Execution::Sequential).is_err());
    }
}
