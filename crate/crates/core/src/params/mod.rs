//! Physical parameters, their validation, derived quantities and regime
//! checks.

mod config;
mod regime;

pub use config::{load_params, parse_params, ConfigFile, NamedTau, TauSpec};
pub use regime::{check_regime, RegimeCheck, RegimeReport, Verdict, REGIME_THRESHOLD};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, HBAR, K_B};
use crate::{Error, Result};

/// Duration of the signal pulse as printed in the parameter table. It does
/// not agree with thirty mechanical periods at 350 kHz and is kept only as a
/// selectable alternative.
pub const TABLE1_PRINTED_TAU: f64 = 0.84e-3;

/// Number of mechanical periods in the default signal window.
pub const TABLE1_TAU_PERIODS: f64 = 30.0;

/// How the half-width of the pumped central mode is formed from its input
/// coupling and loss rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentralWidth {
    /// `γ = γ0 + γe/2`, the form printed for the central mode.
    #[default]
    Literal,
    /// `γ = γ0 + γe`, the same convention as the sideband modes.
    Sum,
}

/// Choice of the signal-window duration for the table preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TauChoice {
    /// `τ = 30·(2π/ω_m)`.
    #[default]
    ThirtyPeriods,
    /// The printed `0.84 ms`.
    Printed,
}

/// User-supplied physical constants of the oscillator, cavity, pump and
/// measurement window. All values are SI; angular frequencies and rates are
/// in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    /// Oscillator mass, kg.
    pub mass: f64,
    /// Mechanical angular frequency ω_m, rad/s.
    pub omega_m: f64,
    /// Mechanical quality factor, `γ_m = ω_m / (2Q)`.
    pub q_factor: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Duration of the signal pulse τ, s.
    pub tau: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Input coupling rate of the pumped central mode.
    pub gamma0: f64,
    pub gamma0_plus: f64,
    pub gamma0_minus: f64,
    /// Loss rate of the central mode.
    pub gamma_e: f64,
    pub gamma_e_plus: f64,
    pub gamma_e_minus: f64,
    /// Multipliers on the nominal optomechanical coupling of the ± modes.
    pub eps_plus: f64,
    pub eps_minus: f64,
    /// Pump power at the input mirror, W.
    pub p_in: f64,
    #[serde(default)]
    pub central_width: CentralWidth,
}

/// Quantities computed once from [`PhysParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub omega_m: f64,
    pub q_factor: f64,
    pub mass: f64,
    pub tau: f64,
    /// Intrinsic mechanical damping `ω_m/(2Q)`.
    pub gamma_m: f64,
    /// Half-width of the pumped mode.
    pub gamma: f64,
    /// Half-widths `γ0± + γe±` of the sideband modes.
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma0: f64,
    pub gamma0_plus: f64,
    pub gamma0_minus: f64,
    pub gamma_e: f64,
    pub gamma_e_plus: f64,
    pub gamma_e_minus: f64,
    /// Zero-point amplitude `sqrt(ħ / 2mω_m)`, m.
    pub x0: f64,
    /// Optical carrier `2πc/λ`, rad/s.
    pub omega0: f64,
    /// Nominal coupling `ω0·x0/L`, 1/s.
    pub eta_nominal: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// Input photon flux `P_in/(ħω0)`, 1/s.
    pub a0_sq: f64,
    /// Intracavity photon number `2A0²/γ0`.
    pub c0_sq: f64,
    /// Thermal phonon occupancy.
    pub n_thermal: f64,
    /// Thermal smallness factor `n_T·ω_m·τ/Q`.
    pub thermal_factor: f64,
}

impl DerivedParams {
    pub fn c0(&self) -> f64 {
        self.c0_sq.sqrt()
    }

    /// `γe+/γ0+`, the weight of the + loss channel.
    pub fn loss_ratio_plus(&self) -> f64 {
        self.gamma_e_plus / self.gamma0_plus
    }

    pub fn loss_ratio_minus(&self) -> f64 {
        self.gamma_e_minus / self.gamma0_minus
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_e_plus == 0.0 && self.gamma_e_minus == 0.0
    }

    /// Largest relaxation rate of the linear quadrature dynamics,
    /// `max(γ+, γ−, |G(0)| + γ_m)`.
    pub fn max_rate(&self) -> f64 {
        let g0 = self.c0_sq
            * (self.eta_plus.powi(2) / self.gamma_plus - self.eta_minus.powi(2) / self.gamma_minus);
        self.gamma_plus
            .max(self.gamma_minus)
            .max(g0.abs() + self.gamma_m)
    }
}

/// The table preset with `τ` set to thirty mechanical periods.
pub fn table1_preset() -> PhysParams {
    table1_preset_with(TauChoice::ThirtyPeriods)
}

pub fn table1_preset_with(tau: TauChoice) -> PhysParams {
    let omega_m = 2.0 * PI * 3.5e5;
    let bandwidth = 2.3e5;
    let gamma_e = 2.3e3;
    let gamma0 = bandwidth - gamma_e;
    PhysParams {
        mass: 5.0e-8,
        omega_m,
        q_factor: 1.0e9,
        temperature: 20.0,
        tau: match tau {
            TauChoice::ThirtyPeriods => TABLE1_TAU_PERIODS * 2.0 * PI / omega_m,
            TauChoice::Printed => TABLE1_PRINTED_TAU,
        },
        cavity_length: 0.1,
        wavelength: 1.55e-6,
        gamma0,
        gamma0_plus: (1.0 - 0.01) * gamma0,
        gamma0_minus: (1.0 + 0.01) * gamma0,
        gamma_e,
        gamma_e_plus: gamma_e,
        gamma_e_minus: gamma_e,
        eps_plus: 1.0 + 0.03,
        eps_minus: 1.0 - 0.03,
        p_in: 1.0e-6,
        central_width: CentralWidth::Literal,
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() {
        Err(Error::param(field, format!("must be finite, got {v}")))
    } else if v <= 0.0 {
        Err(Error::param(field, format!("must be > 0, got {v}")))
    } else {
        Ok(())
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        Err(Error::param(
            field,
            format!("must be finite and >= 0, got {v}"),
        ))
    } else {
        Ok(())
    }
}

impl PhysParams {
    /// Checks every field invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        positive("mass", self.mass)?;
        positive("omega_m", self.omega_m)?;
        positive("q_factor", self.q_factor)?;
        if self.q_factor < 1.0 {
            return Err(Error::param(
                "q_factor",
                format!("must be >= 1, got {}", self.q_factor),
            ));
        }
        non_negative("temperature", self.temperature)?;
        positive("tau", self.tau)?;
        positive("cavity_length", self.cavity_length)?;
        positive("wavelength", self.wavelength)?;
        positive("gamma0", self.gamma0)?;
        positive("gamma0_plus", self.gamma0_plus)?;
        positive("gamma0_minus", self.gamma0_minus)?;
        non_negative("gamma_e", self.gamma_e)?;
        non_negative("gamma_e_plus", self.gamma_e_plus)?;
        non_negative("gamma_e_minus", self.gamma_e_minus)?;
        for (field, eps) in [("eps_plus", self.eps_plus), ("eps_minus", self.eps_minus)] {
            if !(eps.is_finite() && eps > 0.0 && eps < 2.0) {
                return Err(Error::param(
                    field,
                    format!("must lie in (0, 2), got {eps}"),
                ));
            }
        }
        positive("p_in", self.p_in)?;
        Ok(())
    }

    /// Same parameters with every loss rate set to zero.
    pub fn lossless(mut self) -> Self {
        self.gamma_e = 0.0;
        self.gamma_e_plus = 0.0;
        self.gamma_e_minus = 0.0;
        self
    }

    /// Same parameters with the ± modes made identical: unit coupling
    /// multipliers, `γ0± = γ0` and `γe± = γe`.
    pub fn symmetric(mut self) -> Self {
        self.eps_plus = 1.0;
        self.eps_minus = 1.0;
        self.gamma0_plus = self.gamma0;
        self.gamma0_minus = self.gamma0;
        self.gamma_e_plus = self.gamma_e;
        self.gamma_e_minus = self.gamma_e;
        self
    }

    pub fn with_pump_multiplier(mut self, k: f64) -> Self {
        self.p_in *= k;
        self
    }
}

/// Thermal occupancy `1/(exp(ħω/k_B T) − 1)`; zero at `T = 0`.
pub fn bose_occupancy(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (K_B * temperature);
    1.0 / x.exp_m1()
}

/// Computes every [`DerivedParams`] field from validated inputs.
pub fn derive(p: &PhysParams) -> Result<DerivedParams> {
    p.validate()?;

    let gamma_m = p.omega_m / (2.0 * p.q_factor);
    let gamma = match p.central_width {
        CentralWidth::Literal => p.gamma0 + 0.5 * p.gamma_e,
        CentralWidth::Sum => p.gamma0 + p.gamma_e,
    };
    let x0 = (HBAR / (2.0 * p.mass * p.omega_m)).sqrt();
    let omega0 = 2.0 * PI * C_LIGHT / p.wavelength;
    let eta_nominal = omega0 * x0 / p.cavity_length;
    let a0_sq = p.p_in / (HBAR * omega0);
    let c0_sq = 2.0 * a0_sq / p.gamma0;
    let n_thermal = bose_occupancy(p.omega_m, p.temperature);

    let d = DerivedParams {
        omega_m: p.omega_m,
        q_factor: p.q_factor,
        mass: p.mass,
        tau: p.tau,
        gamma_m,
        gamma,
        gamma_plus: p.gamma0_plus + p.gamma_e_plus,
        gamma_minus: p.gamma0_minus + p.gamma_e_minus,
        gamma0: p.gamma0,
        gamma0_plus: p.gamma0_plus,
        gamma0_minus: p.gamma0_minus,
        gamma_e: p.gamma_e,
        gamma_e_plus: p.gamma_e_plus,
        gamma_e_minus: p.gamma_e_minus,
        x0,
        omega0,
        eta_nominal,
        eta_plus: p.eps_plus * eta_nominal,
        eta_minus: p.eps_minus * eta_nominal,
        a0_sq,
        c0_sq,
        n_thermal,
        thermal_factor: n_thermal * p.omega_m * p.tau / p.q_factor,
    };

    let checks = [
        ("gamma_m", d.gamma_m),
        ("x0", d.x0),
        ("eta_nominal", d.eta_nominal),
        ("c0_sq", d.c0_sq),
        ("gamma_plus", d.gamma_plus),
        ("gamma_minus", d.gamma_minus),
    ];
    for (field, v) in checks {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(
                field,
                format!("derived value is not positive and finite: {v}"),
            ));
        }
    }
    if !d.n_thermal.is_finite() {
        return Err(Error::param("temperature", "thermal occupancy overflows"));
    }
    Ok(d)
}
