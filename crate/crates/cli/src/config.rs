//! Flat `key = value` run configuration.
//!
//! Grammar, one item per line:
//!
//! ```text
//! line    := blank | comment | section | pair
//! comment := "#" any*
//! section := "[" ("device" | "experiment") "]"
//! pair    := key "=" value [comment]
//! ```
//!
//! Keys and values are trimmed. Numbers use Rust float syntax and must be
//! finite; integers are unsigned decimal; `sweep_values` is a comma-separated
//! list of numbers. Every key belongs to exactly one section, may appear at
//! most once, and carries its unit in its name.

use std::fmt;

use spinorbit::experiments::{
    set_device_param, ExperimentName, ExperimentSpec, ModelChoice, SweepMetric, SweepSpec,
    DEVICE_KEYS,
};
use spinorbit::propagator::DEFAULT_STEPS_PER_PERIOD;
use spinorbit::{DeviceParams, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Positive,
    NonNegative,
    Any,
    AboveOne,
}

impl Range {
    fn check(self, v: f64) -> Option<&'static str> {
        match self {
            Range::Positive if v <= 0.0 => Some("must be positive"),
            Range::NonNegative if v < 0.0 => Some("must be non-negative"),
            Range::AboveOne if v <= 1.0 => Some("must exceed 1"),
            _ => None,
        }
    }
}

/// Required device keys, in serialization order.
pub const REQUIRED_DEVICE_KEYS: [&str; 7] = [
    "wire_height_m",
    "current_A",
    "static_field_T",
    "electron_distance_m",
    "nu_1x_rad_per_s",
    "nu_2x_rad_per_s",
    "delta_rad_per_s",
];

fn device_range(key: &str) -> Range {
    match key {
        "current_A" | "static_field_T" | "g_rad_per_s" | "omega_rad_per_s"
        | "omega_tilde_rad_per_s" => Range::NonNegative,
        "eta_rad_per_s" => Range::Any,
        "dielectric_constant" => Range::AboveOne,
        _ => Range::Positive,
    }
}

pub const EXPERIMENT_KEYS: [&str; 10] = [
    "name",
    "model",
    "t_final_s",
    "samples",
    "fock_dim",
    "steps_per_period",
    "regime_threshold",
    "sweep_param",
    "sweep_values",
    "sweep_metric",
];

/// Default temperature when `temperature_K` is absent.
pub const DEFAULT_TEMPERATURE_K: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub name: Option<ExperimentName>,
    pub model: ModelChoice,
    pub t_final: Option<f64>,
    pub samples: usize,
    pub fock_dim: usize,
    pub steps_per_period: f64,
    pub regime_threshold: f64,
    pub sweep: Option<SweepSpec>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        let base = ExperimentSpec::new(ExperimentName::ParamsTable, DeviceParams::reference_single_electron());
        ExperimentSettings {
            name: None,
            model: base.model,
            t_final: base.t_final,
            samples: base.samples,
            fock_dim: base.fock_dim,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            regime_threshold: base.regime_threshold,
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    pub experiment: ExperimentSettings,
}

impl RunConfig {
    /// Experiment spec for `name`, defaulting to the configured name.
    pub fn spec(&self, name: ExperimentName) -> ExperimentSpec {
        let e = &self.experiment;
        ExperimentSpec {
            model: e.model,
            t_final: e.t_final,
            samples: e.samples,
            fock_dim: e.fock_dim,
            steps_per_period: e.steps_per_period,
            regime_threshold: e.regime_threshold,
            sweep: e.sweep.clone(),
            ..ExperimentSpec::new(name, self.device.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line, absent for whole-file problems.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn schema() -> String {
    let optional: Vec<&str> = DEVICE_KEYS
        .iter()
        .copied()
        .filter(|k| !REQUIRED_DEVICE_KEYS.contains(k))
        .collect();
    format!(
        "expected schema: [device] required {}; [device] optional {}; [experiment] optional {}",
        REQUIRED_DEVICE_KEYS.join(", "),
        optional.join(", "),
        EXPERIMENT_KEYS.join(", ")
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Device,
    Experiment,
}

fn number(value: &str) -> Result<f64, String> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("`{value}` is not a finite number")),
        Err(_) => Err(format!("cannot parse `{value}` as a number")),
    }
}

fn count(value: &str, min: usize) -> Result<usize, String> {
    let n = value
        .parse::<usize>()
        .map_err(|_| format!("cannot parse `{value}` as a non-negative integer"))?;
    if n < min {
        return Err(format!("must be at least {min}, got {n}"));
    }
    Ok(n)
}

fn ranged(key: &str, value: &str, range: Range) -> Result<f64, String> {
    let v = number(value)?;
    match range.check(v) {
        Some(msg) => Err(format!("{key} {msg}, got {value}")),
        None => Ok(v),
    }
}

#[derive(Default)]
struct SweepParts {
    param: Option<(usize, String)>,
    values: Option<Vec<f64>>,
    metric: Option<SweepMetric>,
}

/// Parses and validates a configuration, collecting every error.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut err = |line: usize, message: String| {
        errors.push(ConfigError {
            line: Some(line),
            message,
        })
    };
    let mut device = DeviceParams {
        temperature: DEFAULT_TEMPERATURE_K,
        constants: PhysicalConstants::CODATA,
        ..DeviceParams::reference_single_electron()
    };
    device.trap_charge = None;
    device.trap_depth = None;
    let mut experiment = ExperimentSettings::default();
    let mut sweep = SweepParts::default();
    let mut section = None;
    let mut seen_device = false;
    let mut seen: Vec<(String, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let n = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            section = match rest.strip_suffix(']').map(str::trim) {
                Some("device") => {
                    seen_device = true;
                    Some(Section::Device)
                }
                Some("experiment") => Some(Section::Experiment),
                _ => {
                    err(n, format!("unknown section `{line}` (expected [device] or [experiment])"));
                    None
                }
            };
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            err(n, format!("expected `key = value`, found `{line}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            err(n, format!("`{key}` appears outside a [device] or [experiment] section"));
            continue;
        };
        let in_device = DEVICE_KEYS.contains(&key);
        let in_experiment = EXPERIMENT_KEYS.contains(&key);
        if !in_device && !in_experiment {
            err(n, format!("unknown key `{key}`"));
            continue;
        }
        if in_device != (sec == Section::Device) {
            let home = if in_device { "[device]" } else { "[experiment]" };
            err(n, format!("`{key}` belongs in {home}"));
            continue;
        }
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            err(n, format!("duplicate key `{key}` (first set on line {first})"));
            continue;
        }
        seen.push((key.to_string(), n));

        let result: Result<(), String> = if in_device {
            ranged(key, value, device_range(key)).and_then(|v| {
                set_device_param(&mut device, key, v).map_err(|e| e.to_string())
            })
        } else {
            let e = &mut experiment;
            match key {
                "name" => value
                    .parse()
                    .map(|v| e.name = Some(v))
                    .map_err(|x: spinorbit::Error| x.to_string()),
                "model" => value
                    .parse()
                    .map(|v| e.model = v)
                    .map_err(|x: spinorbit::Error| x.to_string()),
                "t_final_s" => ranged(key, value, Range::Positive).map(|v| e.t_final = Some(v)),
                "samples" => count(value, 2).map(|v| e.samples = v),
                "fock_dim" => count(value, 2).map(|v| e.fock_dim = v),
                "steps_per_period" => {
                    ranged(key, value, Range::Positive).map(|v| e.steps_per_period = v)
                }
                "regime_threshold" => {
                    ranged(key, value, Range::Positive).map(|v| e.regime_threshold = v)
                }
                "sweep_param" => {
                    if DEVICE_KEYS.contains(&value) {
                        sweep.param = Some((n, value.to_string()));
                        Ok(())
                    } else {
                        Err(format!("sweep_param `{value}` is not a device key"))
                    }
                }
                "sweep_values" => value
                    .split(',')
                    .map(|s| number(s.trim()))
                    .collect::<Result<Vec<_>, _>>()
                    .map(|v| sweep.values = Some(v)),
                "sweep_metric" => value
                    .parse()
                    .map(|v| sweep.metric = Some(v))
                    .map_err(|x: spinorbit::Error| x.to_string()),
                _ => unreachable!("experiment key list is exhaustive"),
            }
        };
        if let Err(m) = result {
            err(n, m);
        }
    }

    if !seen_device {
        errors.push(ConfigError {
            line: None,
            message: format!("missing [device] section; {}", schema()),
        });
    } else {
        let missing: Vec<&str> = REQUIRED_DEVICE_KEYS
            .iter()
            .copied()
            .filter(|k| !seen.iter().any(|(s, _)| s == k))
            .collect();
        if !missing.is_empty() {
            errors.push(ConfigError {
                line: None,
                message: format!("missing required keys {}; {}", missing.join(", "), schema()),
            });
        }
    }
    match sweep {
        SweepParts {
            param: Some((_, param)),
            values: Some(values),
            metric,
        } => {
            experiment.sweep = Some(SweepSpec {
                param,
                values,
                metric: metric.unwrap_or(SweepMetric::Couplings),
            })
        }
        SweepParts {
            param: None,
            values: None,
            metric: None,
        } => {}
        _ => errors.push(ConfigError {
            line: sweep.param.as_ref().map(|(l, _)| *l),
            message: "sweep_param and sweep_values must be given together".into(),
        }),
    }
    if errors.is_empty() {
        if let Err(e) = device.validate() {
            errors.push(ConfigError {
                line: None,
                message: e.to_string(),
            });
        }
    }
    if errors.is_empty() {
        Ok(RunConfig { device, experiment })
    } else {
        Err(errors)
    }
}

/// Canonical text form; `parse_config(&serialize_config(c)) == Ok(c)`.
pub fn serialize_config(c: &RunConfig) -> String {
    let d = &c.device;
    let mut out = String::from("[device]\n");
    let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    let required = [
        d.wire_height,
        d.electrode_current,
        d.static_field,
        d.electron_distance,
        d.nu_1x,
        d.nu_2x,
        d.delta,
    ];
    for (k, v) in REQUIRED_DEVICE_KEYS.iter().zip(required) {
        put(k, format!("{v:?}"));
    }
    put("dielectric_constant", format!("{:?}", d.constants.helium_dielectric));
    let optional = [
        ("trap_charge_C", d.trap_charge),
        ("trap_depth_m", d.trap_depth),
        ("big_delta_rad_per_s", d.big_delta),
        ("eta_rad_per_s", d.eta),
        ("g_rad_per_s", d.g),
        ("omega_rad_per_s", d.omega_override),
        ("omega_tilde_rad_per_s", d.omega_tilde_override),
    ];
    for (k, v) in optional {
        if let Some(v) = v {
            put(k, format!("{v:?}"));
        }
    }
    put("temperature_K", format!("{:?}", d.temperature));

    let e = &c.experiment;
    out.push_str("\n[experiment]\n");
    let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    if let Some(n) = e.name {
        put("name", n.as_str().into());
    }
    put("model", e.model.as_str().into());
    if let Some(t) = e.t_final {
        put("t_final_s", format!("{t:?}"));
    }
    put("samples", e.samples.to_string());
    put("fock_dim", e.fock_dim.to_string());
    put("steps_per_period", format!("{:?}", e.steps_per_period));
    put("regime_threshold", format!("{:?}", e.regime_threshold));
    if let Some(s) = &e.sweep {
        put("sweep_param", s.param.clone());
        put(
            "sweep_values",
            s.values
                .iter()
                .map(|v| format!("{v:?}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        put("sweep_metric", s.metric.as_str().into());
    }
    out
}
