//! Physical constants and every device-derived frequency: trap and spin
//! frequencies, the single-electron spin-orbit strength, the Coulomb
//! coupling between neighbouring traps, and the second-order effective
//! strengths built from them.
//!
//! Everything is SI. Closed-form expressions written in Gaussian form
//! (image potential, trap field, trap frequency) use `e^2 -> e^2/(4 pi eps0)`.
//! Frequencies are angular (rad/s).

use std::f64::consts::PI;

use crate::error::{non_negative, positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// kg
    pub electron_mass: f64,
    /// C
    pub elementary_charge: f64,
    /// J s
    pub hbar: f64,
    /// J/T
    pub bohr_magneton: f64,
    /// T m/A
    pub vacuum_permeability: f64,
    /// F/m
    pub vacuum_permittivity: f64,
    /// J/K
    pub boltzmann: f64,
    /// Electronic g-factor, exactly 2 here.
    pub g_factor: f64,
    /// Relative permittivity of liquid helium.
    pub helium_dielectric: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values with `g = 2` and `eps = 1.057`.
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        electron_mass: 9.109_383_701_5e-31,
        elementary_charge: 1.602_176_634e-19,
        hbar: 1.054_571_817e-34,
        bohr_magneton: 9.274_010_078_3e-24,
        vacuum_permeability: 1.256_637_062_12e-6,
        vacuum_permittivity: 8.854_187_812_8e-12,
        boltzmann: 1.380_649e-23,
        g_factor: 2.0,
        helium_dielectric: 1.057,
    };

    pub fn with_dielectric(mut self, eps: f64) -> Self {
        self.helium_dielectric = eps;
        self
    }

    /// `e^2 / (4 pi eps0)` in J m.
    pub fn coulomb_constant(&self) -> f64 {
        self.elementary_charge.powi(2) / (4.0 * PI * self.vacuum_permittivity)
    }

    /// Image-charge factor `(eps - 1) / (4 (eps + 1))`.
    pub fn image_factor(&self) -> Result<f64> {
        let eps = self.helium_dielectric;
        if !(eps > 1.0) || !eps.is_finite() {
            return Err(Error::InvalidDielectric(eps));
        }
        Ok((eps - 1.0) / (4.0 * (eps + 1.0)))
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// Effective Rydberg frequency (rad/s) and Bohr radius (m) of the
/// one-dimensional hydrogenlike surface state bound by the image charge.
pub fn rydberg_and_bohr(c: &PhysicalConstants) -> Result<(f64, f64)> {
    let lambda = c.image_factor()?;
    let k = c.coulomb_constant();
    let rydberg = lambda.powi(2) * k.powi(2) * c.electron_mass / (2.0 * c.hbar.powi(3));
    let bohr = c.hbar.powi(2) / (c.electron_mass * k * lambda);
    Ok((rydberg, bohr))
}

/// In-plane vibrational frequency `sqrt(eQ / (m_e H^3))` of an electron held
/// by an electrode of effective charge `trap_charge` at depth `trap_depth`.
pub fn trap_frequency(c: &PhysicalConstants, trap_charge: f64, trap_depth: f64) -> Result<f64> {
    positive("trap_charge", trap_charge)?;
    positive("trap_depth", trap_depth)?;
    let k = c.elementary_charge * trap_charge / (4.0 * PI * c.vacuum_permittivity);
    Ok((k / (c.electron_mass * trap_depth.powi(3))).sqrt())
}

/// Spin transition frequency in the static field plus the wire field at the
/// electron.
pub fn spin_frequency(
    c: &PhysicalConstants,
    static_field: f64,
    current: f64,
    wire_height: f64,
) -> Result<f64> {
    positive("wire_height", wire_height)?;
    let wire_field = c.vacuum_permeability * current / (2.0 * PI * wire_height);
    Ok(c.g_factor * c.bohr_magneton / c.hbar * (static_field + wire_field))
}

/// Spin-orbit coupling strength produced by the field gradient of a wire
/// carrying `current` at height `wire_height` above an electron vibrating at
/// `nu_x`.
pub fn spin_orbit_strength(
    c: &PhysicalConstants,
    current: f64,
    wire_height: f64,
    nu_x: f64,
) -> Result<f64> {
    non_negative("current", current)?;
    positive("wire_height", wire_height)?;
    positive("nu_x", nu_x)?;
    let num = c.g_factor * c.bohr_magneton * c.vacuum_permeability * current;
    let den = 4.0 * PI * wire_height.powi(2) * (2.0 * c.hbar * c.electron_mass * nu_x).sqrt();
    Ok(num / den)
}

/// Coulomb vibration-exchange strength between two electrons a distance `d`
/// apart vibrating at `nu_1x` and `nu_2x`.
pub fn coulomb_strength(c: &PhysicalConstants, d: f64, nu_1x: f64, nu_2x: f64) -> Result<f64> {
    positive("electron_distance", d)?;
    positive("nu_1x", nu_1x)?;
    positive("nu_2x", nu_2x)?;
    Ok(c.coulomb_constant() / (c.electron_mass * d.powi(3) * (nu_1x * nu_2x).sqrt()))
}

/// How the second electron's drive is chosen in the doubly driven setup.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CouplingChoice {
    /// `G = omega * omega_tilde / delta` and `eta = omega^2 / delta`, which
    /// puts both spin-bus couplings at the same detuning `gamma`.
    #[default]
    Symmetric,
    /// Explicit drive strength and detuning (rad/s).
    Explicit { g: f64, eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCouplings {
    pub omega: f64,
    pub omega_tilde: f64,
    pub delta: f64,
    /// `omega * omega_tilde / delta`: spin of e1 to vibration of e2.
    pub omega_prime: f64,
    pub g: f64,
    pub eta: f64,
    /// `(omega^2 - omega_tilde^2) / delta`, signed.
    pub gamma: f64,
    /// `g^2 / gamma`, signed; `None` when `gamma == 0`.
    pub omega_dprime: Option<f64>,
    /// Spin transition frequency, when a device is known.
    pub nu_s: Option<f64>,
}

impl DerivedCouplings {
    pub fn is_degenerate(&self) -> bool {
        self.gamma == 0.0
    }

    pub fn spin_spin_strength(&self) -> Result<f64> {
        self.omega_dprime.ok_or(Error::DegenerateSpinSpin)
    }
}

pub fn effective_strengths(
    omega: f64,
    omega_tilde: f64,
    delta: f64,
    choice: CouplingChoice,
) -> Result<DerivedCouplings> {
    non_negative("omega", omega)?;
    non_negative("omega_tilde", omega_tilde)?;
    if delta == 0.0 {
        return Err(Error::ZeroDetuning("delta"));
    }
    if !delta.is_finite() {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            requirement: "must be finite",
        });
    }
    let omega_prime = omega * omega_tilde / delta;
    let gamma = (omega * omega - omega_tilde * omega_tilde) / delta;
    let (g, eta) = match choice {
        CouplingChoice::Symmetric => (omega * omega_tilde / delta, omega * omega / delta),
        CouplingChoice::Explicit { g, eta } => (non_negative("g", g)?, eta),
    };
    let omega_dprime = if gamma == 0.0 { None } else { Some(g * g / gamma) };
    Ok(DerivedCouplings {
        omega,
        omega_tilde,
        delta,
        omega_prime,
        g,
        eta,
        gamma,
        omega_dprime,
        nu_s: None,
    })
}

/// Geometry, drive and detunings of a two-trap device.
///
/// `omega_override` / `omega_tilde_override` replace the values derived from
/// the wire current and the trap separation, for settings specified directly
/// as coupling strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceParams {
    pub constants: PhysicalConstants,
    /// C
    pub trap_charge: Option<f64>,
    /// m
    pub trap_depth: Option<f64>,
    /// m
    pub wire_height: f64,
    /// A
    pub electrode_current: f64,
    /// T
    pub static_field: f64,
    /// m
    pub electron_distance: f64,
    pub nu_1x: f64,
    pub nu_2x: f64,
    pub delta: f64,
    /// Vibrational detuning between the traps; defaults to `delta`.
    pub big_delta: Option<f64>,
    pub eta: Option<f64>,
    pub g: Option<f64>,
    pub omega_override: Option<f64>,
    pub omega_tilde_override: Option<f64>,
    /// K
    pub temperature: f64,
}

impl DeviceParams {
    /// Single-electron setting: 1 mA at 0.5 um, 10^10 rad/s vibration,
    /// 0.06 T static field, traps 10 um apart, 250 MHz detuning.
    pub fn reference_single_electron() -> Self {
        DeviceParams {
            constants: PhysicalConstants::CODATA,
            trap_charge: None,
            trap_depth: None,
            wire_height: 0.5e-6,
            electrode_current: 1e-3,
            static_field: 0.06,
            electron_distance: 10e-6,
            nu_1x: 1e10,
            nu_2x: 1e10,
            delta: 2.5e8,
            big_delta: None,
            eta: None,
            g: None,
            omega_override: None,
            omega_tilde_override: None,
            temperature: 0.02,
        }
    }

    /// Distant spin-orbit JC setting: `omega = omega_tilde = 25 MHz`,
    /// `delta = big_delta = 250 MHz`.
    pub fn reference_fig3() -> Self {
        DeviceParams {
            omega_override: Some(2.5e7),
            omega_tilde_override: Some(2.5e7),
            big_delta: Some(2.5e8),
            ..Self::reference_single_electron()
        }
    }

    /// Doubly driven setting: `omega_tilde = 25 MHz`, `omega = 2.6 MHz`,
    /// `delta = 250 MHz`, symmetric `G` and `eta`.
    pub fn reference_fig4() -> Self {
        DeviceParams {
            omega_override: Some(2.6e6),
            omega_tilde_override: Some(2.5e7),
            ..Self::reference_single_electron()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.image_factor()?;
        positive("wire_height", self.wire_height)?;
        non_negative("electrode_current", self.electrode_current)?;
        non_negative("static_field", self.static_field)?;
        positive("electron_distance", self.electron_distance)?;
        positive("nu_1x", self.nu_1x)?;
        positive("nu_2x", self.nu_2x)?;
        positive("delta", self.delta)?;
        positive("temperature", self.temperature)?;
        if let Some(q) = self.trap_charge {
            positive("trap_charge", q)?;
        }
        if let Some(h) = self.trap_depth {
            positive("trap_depth", h)?;
        }
        if let Some(v) = self.big_delta {
            positive("big_delta", v)?;
        }
        if let Some(v) = self.g {
            non_negative("g", v)?;
        }
        if let Some(v) = self.omega_override {
            non_negative("omega", v)?;
        }
        if let Some(v) = self.omega_tilde_override {
            non_negative("omega_tilde", v)?;
        }
        if self.g.is_some() != self.eta.is_some() {
            return Err(Error::InvalidParameter(
                "g and eta must be given together or not at all".into(),
            ));
        }
        Ok(())
    }

    pub fn omega_from_current(&self) -> Result<f64> {
        spin_orbit_strength(
            &self.constants,
            self.electrode_current,
            self.wire_height,
            self.nu_1x,
        )
    }

    pub fn omega_tilde_from_geometry(&self) -> Result<f64> {
        coulomb_strength(&self.constants, self.electron_distance, self.nu_1x, self.nu_2x)
    }

    pub fn omega(&self) -> Result<f64> {
        match self.omega_override {
            Some(v) => Ok(v),
            None => self.omega_from_current(),
        }
    }

    pub fn omega_tilde(&self) -> Result<f64> {
        match self.omega_tilde_override {
            Some(v) => Ok(v),
            None => self.omega_tilde_from_geometry(),
        }
    }

    pub fn big_delta(&self) -> f64 {
        self.big_delta.unwrap_or(self.delta)
    }

    pub fn coupling_choice(&self) -> CouplingChoice {
        match (self.g, self.eta) {
            (Some(g), Some(eta)) => CouplingChoice::Explicit { g, eta },
            _ => CouplingChoice::Symmetric,
        }
    }

    pub fn nu_s(&self) -> Result<f64> {
        spin_frequency(
            &self.constants,
            self.static_field,
            self.electrode_current,
            self.wire_height,
        )
    }

    pub fn trap_frequency(&self) -> Option<Result<f64>> {
        match (self.trap_charge, self.trap_depth) {
            (Some(q), Some(h)) => Some(trap_frequency(&self.constants, q, h)),
            _ => None,
        }
    }

    pub fn couplings(&self) -> Result<DerivedCouplings> {
        self.validate()?;
        let mut c = effective_strengths(
            self.omega()?,
            self.omega_tilde()?,
            self.delta,
            self.coupling_choice(),
        )?;
        c.nu_s = Some(self.nu_s()?);
        Ok(c)
    }

    /// Resolved parameter listing under the unit-suffixed configuration keys.
    /// Optional inputs appear with the value actually used.
    pub fn resolved_entries(&self) -> Result<Vec<(&'static str, f64)>> {
        let c = self.couplings()?;
        let mut out = vec![
            ("dielectric_constant", self.constants.helium_dielectric),
            ("wire_height_m", self.wire_height),
            ("current_A", self.electrode_current),
            ("static_field_T", self.static_field),
            ("electron_distance_m", self.electron_distance),
            ("nu_1x_rad_per_s", self.nu_1x),
            ("nu_2x_rad_per_s", self.nu_2x),
            ("delta_rad_per_s", self.delta),
            ("big_delta_rad_per_s", self.big_delta()),
            ("eta_rad_per_s", c.eta),
            ("g_rad_per_s", c.g),
            ("omega_rad_per_s", c.omega),
            ("omega_tilde_rad_per_s", c.omega_tilde),
            ("temperature_K", self.temperature),
        ];
        if let Some(q) = self.trap_charge {
            out.push(("trap_charge_C", q));
        }
        if let Some(h) = self.trap_depth {
            out.push(("trap_depth_m", h));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// Upper bound for `omega/delta`, `omega_tilde/delta` and `G/|gamma|`.
    pub perturbative: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { perturbative: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCheck {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    /// `true` when `value < threshold` (or `>` for the freezing ratio).
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<RegimeCheck>,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Report-only validity flags for the perturbative reductions and for the
/// vibrational ground-state freezing at `temperature`.
pub fn regime_check(
    params: &DeviceParams,
    couplings: &DerivedCouplings,
    temperature: f64,
    thresholds: RegimeThresholds,
) -> ValidityReport {
    let thr = thresholds.perturbative;
    let below = |name, value: f64| RegimeCheck {
        name,
        value,
        threshold: thr,
        passed: value.is_finite() && value < thr,
    };
    let delta = couplings.delta.abs();
    let c = &params.constants;
    let nu_min = params.nu_1x.min(params.nu_2x);
    let freezing = c.hbar * nu_min / (c.boltzmann * temperature);
    let g_over_gamma = if couplings.gamma == 0.0 {
        f64::INFINITY
    } else {
        couplings.g / couplings.gamma.abs()
    };
    ValidityReport {
        checks: vec![
            below("omega_over_delta", couplings.omega / delta),
            below("omega_tilde_over_delta", couplings.omega_tilde / delta),
            RegimeCheck {
                name: "ground_state_freezing",
                value: freezing,
                threshold: 1.0,
                passed: freezing > 1.0,
            },
            below("g_over_gamma", g_over_gamma),
        ],
    }
}
