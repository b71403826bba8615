//! Named experiment recipes: the coupling table, the distant JC and
//! flip-flop runs (`fig3`, `fig4`), gate simulations and one-parameter
//! sweeps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::constants::{
    regime_check, rydberg_and_bohr, DerivedCouplings, DeviceParams, RegimeThresholds,
};
use crate::effective::{
    compare_jc_reduction, compare_spin_spin_reduction, jc_effective_hamiltonian,
    ComparisonSettings, ModelComparison, JC_OBSERVABLES, SPIN_SPIN_OBSERVABLES,
};
use crate::error::{Error, Result};
use crate::gates::{
    phase_gate_duration, simulate_phase_gate, single_electron_cnot, two_spin_cnot, BusModel,
    GateReport, TwoSpinCnotParams,
};
use crate::hamiltonians::{driven_pair_full, layouts, spin_spin_effective, two_electron_full};
use crate::hilbert::{basis_state, Level};
use crate::par::{self, Execution};
use crate::propagator::{
    evolve, EvolutionRequest, SimOptions, StepControl, DEFAULT_STEPS_PER_PERIOD, NORM_TOLERANCE,
};

use Level::{Down, Fock, Up};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    ParamsTable,
    Fig3,
    Fig4,
    PhaseGate,
    CnotSingle,
    CnotTwoSpin,
    Sweep,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::ParamsTable,
        ExperimentName::Fig3,
        ExperimentName::Fig4,
        ExperimentName::PhaseGate,
        ExperimentName::CnotSingle,
        ExperimentName::CnotTwoSpin,
        ExperimentName::Sweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::ParamsTable => "params_table",
            ExperimentName::Fig3 => "fig3",
            ExperimentName::Fig4 => "fig4",
            ExperimentName::PhaseGate => "phase_gate",
            ExperimentName::CnotSingle => "cnot_single",
            ExperimentName::CnotTwoSpin => "cnot_two_spin",
            ExperimentName::Sweep => "sweep",
        }
    }

    /// Initial basis state of the time-domain experiments.
    pub fn initial_state(self) -> Option<&'static str> {
        match self {
            ExperimentName::Fig3 => Some("|up1,0,0>"),
            ExperimentName::Fig4 => Some("|down1,0,0,up2>"),
            _ => None,
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            ExperimentName::Fig3 => &JC_OBSERVABLES,
            ExperimentName::Fig4 => &SPIN_SPIN_OBSERVABLES,
            _ => &[],
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelChoice {
    Full,
    Effective,
    #[default]
    Both,
}

impl ModelChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::Full => "full",
            ModelChoice::Effective => "effective",
            ModelChoice::Both => "both",
        }
    }
}

impl FromStr for ModelChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ModelChoice::Full),
            "effective" => Ok(ModelChoice::Effective),
            "both" => Ok(ModelChoice::Both),
            _ => Err(Error::InvalidParameter(format!(
                "unknown model `{s}` (expected full, effective or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMetric {
    Couplings,
    MaxDeviation,
    GateFidelity,
}

impl SweepMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMetric::Couplings => "couplings",
            SweepMetric::MaxDeviation => "max_deviation",
            SweepMetric::GateFidelity => "gate_fidelity",
        }
    }
}

impl FromStr for SweepMetric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "couplings" => Ok(SweepMetric::Couplings),
            "max_deviation" => Ok(SweepMetric::MaxDeviation),
            "gate_fidelity" => Ok(SweepMetric::GateFidelity),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep metric `{s}` (expected couplings, max_deviation or gate_fidelity)"
            ))),
        }
    }
}

/// Device parameter keys accepted by [`set_device_param`], with units in
/// the names.
pub const DEVICE_KEYS: [&str; 16] = [
    "wire_height_m",
    "current_A",
    "static_field_T",
    "electron_distance_m",
    "nu_1x_rad_per_s",
    "nu_2x_rad_per_s",
    "delta_rad_per_s",
    "dielectric_constant",
    "trap_charge_C",
    "trap_depth_m",
    "big_delta_rad_per_s",
    "eta_rad_per_s",
    "g_rad_per_s",
    "omega_rad_per_s",
    "omega_tilde_rad_per_s",
    "temperature_K",
];

/// Sets one device parameter by its configuration key.
pub fn set_device_param(d: &mut DeviceParams, key: &str, v: f64) -> Result<()> {
    match key {
        "wire_height_m" => d.wire_height = v,
        "current_A" => d.electrode_current = v,
        "static_field_T" => d.static_field = v,
        "electron_distance_m" => d.electron_distance = v,
        "nu_1x_rad_per_s" => d.nu_1x = v,
        "nu_2x_rad_per_s" => d.nu_2x = v,
        "delta_rad_per_s" => d.delta = v,
        "dielectric_constant" => d.constants = d.constants.with_dielectric(v),
        "trap_charge_C" => d.trap_charge = Some(v),
        "trap_depth_m" => d.trap_depth = Some(v),
        "big_delta_rad_per_s" => d.big_delta = Some(v),
        "eta_rad_per_s" => d.eta = Some(v),
        "g_rad_per_s" => d.g = Some(v),
        "omega_rad_per_s" => d.omega_override = Some(v),
        "omega_tilde_rad_per_s" => d.omega_tilde_override = Some(v),
        "temperature_K" => d.temperature = v,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "unknown device parameter `{key}`"
            )))
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
    pub metric: SweepMetric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub device: DeviceParams,
    pub model: ModelChoice,
    /// `None` selects the experiment's natural window.
    pub t_final: Option<f64>,
    pub samples: usize,
    pub fock_dim: usize,
    pub steps_per_period: f64,
    pub regime_threshold: f64,
    pub sweep: Option<SweepSpec>,
    pub execution: Execution,
}

impl ExperimentSpec {
    pub fn new(name: ExperimentName, device: DeviceParams) -> Self {
        ExperimentSpec {
            name,
            device,
            model: ModelChoice::Both,
            t_final: None,
            samples: 400,
            fock_dim: 6,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            regime_threshold: RegimeThresholds::default().perturbative,
            sweep: None,
            execution: Execution::default(),
        }
    }

    pub fn options(&self) -> SimOptions {
        SimOptions {
            step_control: StepControl::StepsPerPeriod(self.steps_per_period),
            execution: self.execution,
        }
    }

    pub fn settings(&self) -> ComparisonSettings {
        ComparisonSettings {
            samples: self.samples,
            fock_dim: self.fock_dim,
            options: self.options(),
            regime_threshold: self.regime_threshold,
        }
    }

    fn validate(&self) -> Result<()> {
        self.device.validate()?;
        if self.samples < 2 {
            return Err(Error::InvalidParameter(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "fock_dim must be at least 2, got {}",
                self.fock_dim
            )));
        }
        crate::error::positive("steps_per_period", self.steps_per_period)?;
        crate::error::positive("regime_threshold", self.regime_threshold)?;
        if let Some(t) = self.t_final {
            crate::error::positive("t_final", t)?;
        }
        Ok(())
    }

    /// Fully resolved settings under configuration keys, device first.
    pub fn resolved_entries(&self) -> Result<Vec<(String, String)>> {
        let mut out: Vec<(String, String)> = self
            .device
            .resolved_entries()?
            .into_iter()
            .map(|(k, v)| (k.to_string(), format!("{v:?}")))
            .collect();
        out.push(("name".into(), self.name.as_str().into()));
        out.push(("model".into(), self.model.as_str().into()));
        if let Some(t) = self.t_final {
            out.push(("t_final_s".into(), format!("{t:?}")));
        }
        out.push(("samples".into(), self.samples.to_string()));
        out.push(("fock_dim".into(), self.fock_dim.to_string()));
        out.push(("steps_per_period".into(), format!("{:?}", self.steps_per_period)));
        out.push(("regime_threshold".into(), format!("{:?}", self.regime_threshold)));
        if let Some(s) = &self.sweep {
            out.push(("sweep_param".into(), s.param.clone()));
            out.push((
                "sweep_values".into(),
                s.values
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ));
            out.push(("sweep_metric".into(), s.metric.as_str().into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Real(Vec<f64>),
    Text(Vec<String>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Real(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// Labeled columns of equal length plus provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    /// Resolved configuration, code version and tolerances.
    pub metadata: Vec<(String, String)>,
    /// Derived scalars and warnings for humans.
    pub summary: Vec<(String, String)>,
}

impl ResultTable {
    fn new(columns: Vec<Column>, metadata: Vec<(String, String)>) -> Result<Self> {
        if let Some(first) = columns.first() {
            let n = first.data.len();
            if let Some(bad) = columns.iter().find(|c| c.data.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bad.data.len(),
                });
            }
        }
        Ok(ResultTable {
            columns,
            metadata,
            summary: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|c| c.name == name).map(|c| &c.data)
    }

    pub fn real(&self, name: &str) -> Option<&[f64]> {
        match self.column(name)? {
            ColumnData::Real(v) => Some(v),
            ColumnData::Text(_) => None,
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn real(name: &str, v: Vec<f64>) -> Column {
    Column {
        name: name.into(),
        data: ColumnData::Real(v),
    }
}

fn text(name: &str, v: Vec<String>) -> Column {
    Column {
        name: name.into(),
        data: ColumnData::Text(v),
    }
}

fn metadata(spec: &ExperimentSpec) -> Result<Vec<(String, String)>> {
    let mut m = spec.resolved_entries()?;
    m.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
    m.push(("norm_tolerance".into(), format!("{NORM_TOLERANCE:?}")));
    m.push(("integrator".into(), "rk4_fixed_step_aligned".into()));
    Ok(m)
}

fn regime_columns(device: &DeviceParams, c: &DerivedCouplings, threshold: f64) -> Vec<Column> {
    let report = regime_check(
        device,
        c,
        device.temperature,
        RegimeThresholds {
            perturbative: threshold,
        },
    );
    let mut cols = Vec::new();
    for check in &report.checks {
        cols.push(real(check.name, vec![check.value]));
        cols.push(text(
            &format!("{}_ok", check.name),
            vec![if check.passed { "pass" } else { "fail" }.into()],
        ));
    }
    cols
}

/// One-row table of every derived coupling and regime flag.
pub fn run_params_table(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let d = &spec.device;
    let c = d.couplings()?;
    let (rydberg, bohr) = rydberg_and_bohr(&d.constants)?;
    let trap = match d.trap_frequency() {
        Some(r) => r?,
        None => f64::NAN,
    };
    let mut columns = vec![
        real("omega_from_current_rad_per_s", vec![d.omega_from_current()?]),
        real("omega_rad_per_s", vec![c.omega]),
        real("omega_tilde_from_geometry_rad_per_s", vec![d.omega_tilde_from_geometry()?]),
        real("omega_tilde_rad_per_s", vec![c.omega_tilde]),
        real("omega_prime_rad_per_s", vec![c.omega_prime]),
        real("g_rad_per_s", vec![c.g]),
        real("eta_rad_per_s", vec![c.eta]),
        real("gamma_rad_per_s", vec![c.gamma]),
        real("omega_dprime_rad_per_s", vec![c.omega_dprime.unwrap_or(f64::NAN)]),
        real("nu_s_rad_per_s", vec![c.nu_s.unwrap_or(f64::NAN)]),
        real("trap_frequency_rad_per_s", vec![trap]),
        real("rydberg_rad_per_s", vec![rydberg]),
        real("bohr_radius_m", vec![bohr]),
    ];
    columns.extend(regime_columns(d, &c, spec.regime_threshold));
    let mut table = ResultTable::new(columns, metadata(spec)?)?;
    table.summary.push((
        "frequency_units".into(),
        "all frequencies are angular (rad/s); the cyclic reading follows".into(),
    ));
    let cyclic: Vec<(String, String)> = table
        .columns
        .iter()
        .filter_map(|c| match (&c.data, c.name.strip_suffix("_rad_per_s")) {
            (ColumnData::Real(v), Some(stem)) => {
                Some((format!("{stem}_cyclic_hz"), format!("{:.6e}", v[0] / (2.0 * PI))))
            }
            _ => None,
        })
        .collect();
    table.summary.extend(cyclic);
    if c.is_degenerate() {
        table.summary.push((
            "warning".into(),
            "gamma = 0: spin-spin strength undefined (reported as nan)".into(),
        ));
    }
    Ok(table)
}

/// Model label, sample times and one curve per observable.
type Block<'a> = (&'a str, Vec<f64>, Vec<Vec<f64>>);

/// Occupancy table in long format: one block of samples per model.
fn occupancy_table(
    spec: &ExperimentSpec,
    observables: &[&str],
    blocks: Vec<Block>,
) -> Result<ResultTable> {
    let mut time = Vec::new();
    let mut occ: Vec<Vec<f64>> = vec![Vec::new(); observables.len()];
    let mut model = Vec::new();
    for (name, times, curves) in blocks {
        model.extend(std::iter::repeat_n(name.to_string(), times.len()));
        time.extend(times);
        for (dst, src) in occ.iter_mut().zip(curves) {
            dst.extend(src);
        }
    }
    let mut columns = vec![real("time_s", time)];
    for (name, v) in observables.iter().zip(occ) {
        columns.push(real(name, v));
    }
    columns.push(text("model", model));
    ResultTable::new(columns, metadata(spec)?)
}

fn comparison_summary(table: &mut ResultTable, c: &ModelComparison) {
    for (name, d) in c.observables.iter().zip(&c.max_deviation) {
        table.summary.push((format!("max_deviation_{name}"), format!("{d:.6e}")));
    }
    table.summary.push(("peak_transfer".into(), format!("{:.6}", c.peak_transfer)));
    table
        .summary
        .push(("predicted_frequency_rad_per_s".into(), format!("{:.6e}", c.predicted_frequency)));
    if let Some(f) = c.fit {
        table
            .summary
            .push(("fitted_frequency_rad_per_s".into(), format!("{:.6e}", f.frequency)));
        table.summary.push(("fit_residual".into(), format!("{:.3e}", f.residual)));
    }
    if let Some(r) = c.frequency_ratio {
        table.summary.push(("frequency_ratio".into(), format!("{r:.6}")));
    }
    let drift = c
        .full_trajectory
        .norm_drift
        .max(c.effective_trajectory.norm_drift);
    table.summary.push(("norm_drift".into(), format!("{drift:.3e}")));
    for w in &c.warnings {
        table.summary.push(("warning".into(), w.clone()));
    }
}

fn single_model_summary(table: &mut ResultTable, drift: f64, warnings: &[String]) {
    table.summary.push(("norm_drift".into(), format!("{drift:.3e}")));
    for w in warnings {
        table.summary.push(("warning".into(), w.clone()));
    }
}

fn regime_warnings(spec: &ExperimentSpec, c: &DerivedCouplings) -> Vec<String> {
    regime_check(
        &spec.device,
        c,
        spec.device.temperature,
        RegimeThresholds {
            perturbative: spec.regime_threshold,
        },
    )
    .failures()
    .map(|f| format!("regime check {} failed: value {:.4e}", f.name, f.value))
    .collect()
}

/// Default window for the distant JC experiment: one period `2 pi / omega'`.
pub fn fig3_default_t_final(c: &DerivedCouplings) -> Result<f64> {
    crate::error::positive("omega_prime", c.omega_prime)?;
    Ok(2.0 * PI / c.omega_prime)
}

/// Default window for the flip-flop experiment: `pi / |omega''|`.
pub fn fig4_default_t_final(c: &DerivedCouplings) -> Result<f64> {
    let w = c.spin_spin_strength()?;
    crate::error::positive("|omega_dprime|", w.abs())?;
    Ok(PI / w.abs())
}

/// Distant JC reproduction. Returns the table and, for `model = both`, the
/// comparison it summarizes.
pub fn run_fig3(spec: &ExperimentSpec) -> Result<(ResultTable, Option<ModelComparison>)> {
    spec.validate()?;
    let c = spec.device.couplings()?;
    let t_final = match spec.t_final {
        Some(t) => t,
        None => fig3_default_t_final(&c)?,
    };
    let big_delta = spec.device.big_delta();
    let warnings = regime_warnings(spec, &c);
    match spec.model {
        ModelChoice::Both => {
            let cmp = compare_jc_reduction(c.omega, c.omega_tilde, c.delta, big_delta, t_final, &spec.settings())?;
            let mut table = occupancy_table(
                spec,
                &JC_OBSERVABLES,
                vec![
                    ("full", cmp.full_trajectory.times.clone(), cmp.full_occupancy.clone()),
                    (
                        "effective",
                        cmp.effective_trajectory.times.clone(),
                        cmp.effective_occupancy.clone(),
                    ),
                ],
            )?;
            comparison_summary(&mut table, &cmp);
            for w in warnings {
                table.summary.push(("warning".into(), w));
            }
            Ok((table, Some(cmp)))
        }
        single => {
            let (h, states, label) = if single == ModelChoice::Full {
                let l = layouts::two_electron(spec.fock_dim)?;
                (
                    two_electron_full(c.omega, c.delta, c.omega_tilde, big_delta, &l)?,
                    vec![vec![Up, Fock(0), Fock(0)], vec![Down, Fock(0), Fock(1)]],
                    "full",
                )
            } else {
                (
                    jc_effective_hamiltonian(c.omega, c.omega_tilde, c.delta, spec.fock_dim)?,
                    vec![vec![Up, Fock(0)], vec![Down, Fock(1)]],
                    "effective",
                )
            };
            let (times, curves, drift) = single_run(spec, &h, &states, t_final)?;
            let mut table = occupancy_table(spec, &JC_OBSERVABLES, vec![(label, times, curves)])?;
            single_model_summary(&mut table, drift, &warnings);
            Ok((table, None))
        }
    }
}

fn single_run(
    spec: &ExperimentSpec,
    h: &crate::hamiltonians::TimeDependentHamiltonian,
    states: &[Vec<Level>],
    t_final: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
    let layout = h.layout();
    let req = EvolutionRequest::uniform(h, basis_state(layout, &states[0])?, t_final, spec.samples)
        .with_control(spec.options().step_control);
    let tr = evolve(&req)?;
    let curves = states
        .iter()
        .map(|s| tr.occupancy(&basis_state(layout, s)?))
        .collect::<Result<Vec<_>>>()?;
    Ok((tr.times.clone(), curves, tr.norm_drift))
}

/// Spin-spin flip-flop reproduction.
pub fn run_fig4(spec: &ExperimentSpec) -> Result<(ResultTable, Option<ModelComparison>)> {
    spec.validate()?;
    let c = spec.device.couplings()?;
    let t_final = match spec.t_final {
        Some(t) => t,
        None => fig4_default_t_final(&c)?,
    };
    let warnings = regime_warnings(spec, &c);
    match spec.model {
        ModelChoice::Both => {
            let cmp = compare_spin_spin_reduction(
                c.omega,
                c.omega_tilde,
                c.delta,
                c.g,
                c.eta,
                t_final,
                &spec.settings(),
            )?;
            let mut table = occupancy_table(
                spec,
                &SPIN_SPIN_OBSERVABLES,
                vec![
                    ("full", cmp.full_trajectory.times.clone(), cmp.full_occupancy.clone()),
                    (
                        "effective",
                        cmp.effective_trajectory.times.clone(),
                        cmp.effective_occupancy.clone(),
                    ),
                ],
            )?;
            comparison_summary(&mut table, &cmp);
            for w in warnings {
                table.summary.push(("warning".into(), w));
            }
            Ok((table, Some(cmp)))
        }
        single => {
            let w = c.spin_spin_strength()?;
            let (h, states, label) = if single == ModelChoice::Full {
                let l = layouts::driven_pair(spec.fock_dim)?;
                (
                    driven_pair_full(c.omega, c.delta, c.omega_tilde, c.g, c.eta, &l)?,
                    vec![vec![Down, Fock(0), Fock(0), Up], vec![Up, Fock(0), Fock(0), Down]],
                    "full",
                )
            } else {
                (
                    spin_spin_effective(w, &layouts::spin_pair()?)?,
                    vec![vec![Down, Up], vec![Up, Down]],
                    "effective",
                )
            };
            let (times, curves, drift) = single_run(spec, &h, &states, t_final)?;
            let mut table = occupancy_table(spec, &SPIN_SPIN_OBSERVABLES, vec![(label, times, curves)])?;
            single_model_summary(&mut table, drift, &warnings);
            Ok((table, None))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Phase,
    CnotSingle,
    CnotTwoSpin,
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(GateKind::Phase),
            "cnot1" => Ok(GateKind::CnotSingle),
            "cnot2" => Ok(GateKind::CnotTwoSpin),
            _ => Err(Error::InvalidParameter(format!(
                "unknown gate `{s}` (expected phase, cnot1 or cnot2)"
            ))),
        }
    }
}

/// Gate simulations with the device couplings. The two-spin CNOT uses the
/// reduced bus for `model = effective` or `both`, the full two-electron
/// coupling for `model = full`.
pub fn run_gate(spec: &ExperimentSpec, kind: GateKind) -> Result<GateReport> {
    spec.validate()?;
    let c = spec.device.couplings()?;
    let opts = spec.options();
    match kind {
        GateKind::Phase => {
            let d = phase_gate_duration(c.omega)?;
            simulate_phase_gate(c.omega, d.t, spec.fock_dim, opts)
        }
        GateKind::CnotSingle => Ok(single_electron_cnot(c.omega, spec.fock_dim, opts)?.1),
        GateKind::CnotTwoSpin => {
            let model = match spec.model {
                ModelChoice::Full => BusModel::Full {
                    omega: c.omega,
                    omega_tilde: c.omega_tilde,
                    delta: c.delta,
                    big_delta: spec.device.big_delta(),
                },
                _ => BusModel::Effective,
            };
            let params = TwoSpinCnotParams::from_couplings(&c, spec.fock_dim, model);
            Ok(two_spin_cnot(&params, opts)?.1)
        }
    }
}

fn metric_columns(metric: SweepMetric) -> &'static [&'static str] {
    match metric {
        SweepMetric::Couplings => &[
            "omega_rad_per_s",
            "omega_tilde_rad_per_s",
            "omega_prime_rad_per_s",
            "g_rad_per_s",
            "gamma_rad_per_s",
            "omega_dprime_rad_per_s",
        ],
        SweepMetric::MaxDeviation => &["max_deviation", "peak_transfer", "frequency_ratio"],
        SweepMetric::GateFidelity => &["fidelity", "leakage", "min_mode_ground_population"],
    }
}

fn sweep_row(spec: &ExperimentSpec, metric: SweepMetric) -> Result<Vec<f64>> {
    spec.validate()?;
    let c = spec.device.couplings()?;
    match metric {
        SweepMetric::Couplings => Ok(vec![
            c.omega,
            c.omega_tilde,
            c.omega_prime,
            c.g,
            c.gamma,
            c.omega_dprime.unwrap_or(f64::NAN),
        ]),
        SweepMetric::MaxDeviation => {
            let t = match spec.t_final {
                Some(t) => t,
                None => fig3_default_t_final(&c)?,
            };
            let cmp = compare_jc_reduction(
                c.omega,
                c.omega_tilde,
                c.delta,
                spec.device.big_delta(),
                t,
                &spec.settings(),
            )?;
            Ok(vec![
                cmp.overall_max_deviation(),
                cmp.peak_transfer,
                cmp.frequency_ratio.unwrap_or(f64::NAN),
            ])
        }
        SweepMetric::GateFidelity => {
            let r = run_gate(spec, GateKind::CnotTwoSpin)?;
            let ground = r
                .mode_ground_population
                .iter()
                .map(|m| m.1)
                .fold(f64::INFINITY, f64::min);
            Ok(vec![r.fidelity, r.leakage, ground])
        }
    }
}

/// One row per swept value, other parameters fixed. Rows run in parallel;
/// a failing row keeps `nan` values and its error message.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    let sweep = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("sweep requires sweep_param and sweep_values".into()))?;
    if !DEVICE_KEYS.contains(&sweep.param.as_str()) {
        return Err(Error::InvalidParameter(format!(
            "sweep_param `{}` is not a device parameter",
            sweep.param
        )));
    }
    if sweep.values.is_empty() {
        return Err(Error::InvalidParameter("sweep_values is empty".into()));
    }
    spec.validate()?;
    let names = metric_columns(sweep.metric);
    // rows run concurrently, so each row integrates sequentially
    let row_exec = Execution::Sequential;
    let rows = par::map(spec.execution, &sweep.values, |&v| {
        let mut row_spec = spec.clone();
        row_spec.execution = row_exec;
        row_spec.sweep = None;
        set_device_param(&mut row_spec.device, &sweep.param, v)?;
        sweep_row(&row_spec, sweep.metric)
    });
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut errors = Vec::new();
    for row in rows {
        match row {
            Ok(r) => {
                for (dst, x) in values.iter_mut().zip(r) {
                    dst.push(x);
                }
                errors.push(String::new());
            }
            Err(e) => {
                for dst in values.iter_mut() {
                    dst.push(f64::NAN);
                }
                errors.push(e.to_string());
            }
        }
    }
    let mut columns = vec![real(&sweep.param, sweep.values.clone())];
    for (name, v) in names.iter().zip(values) {
        columns.push(real(name, v));
    }
    columns.push(text("error", errors));
    ResultTable::new(columns, metadata(spec)?)
}

/// Dispatches a time-domain or table experiment by name. Gate experiments
/// return their report as summary lines.
pub fn run(spec: &ExperimentSpec) -> Result<ResultTable> {
    match spec.name {
        ExperimentName::ParamsTable => run_params_table(spec),
        ExperimentName::Fig3 => Ok(run_fig3(spec)?.0),
        ExperimentName::Fig4 => Ok(run_fig4(spec)?.0),
        ExperimentName::Sweep => run_sweep(spec),
        ExperimentName::PhaseGate | ExperimentName::CnotSingle | ExperimentName::CnotTwoSpin => {
            let kind = match spec.name {
                ExperimentName::PhaseGate => GateKind::Phase,
                ExperimentName::CnotSingle => GateKind::CnotSingle,
                _ => GateKind::CnotTwoSpin,
            };
            let r = run_gate(spec, kind)?;
            let mut columns = vec![
                real("fidelity", vec![r.fidelity]),
                real("truth_table_fidelity", vec![r.truth_table_fidelity]),
                real("leakage", vec![r.leakage]),
                real("unitarity_defect", vec![r.unitarity_defect]),
            ];
            for (mode, p) in &r.mode_ground_population {
                columns.push(real(&format!("ground_population_{mode}"), vec![*p]));
            }
            let mut table = ResultTable::new(columns, metadata(spec)?)?;
            table.summary.push(("phase_convention".into(), r.phase_convention));
            Ok(table)
        }
    }
}
