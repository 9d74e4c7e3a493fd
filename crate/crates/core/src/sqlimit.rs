//! Standard-quantum-limit benchmark and the minimum detectable force.
//!
//! Here 𝒦 is a pump-proportional measurement strength of a single-mode
//! position meter, which trades imprecision `(γ_m² + Ω²)/𝒦` against back
//! action `𝒦`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::HBAR;
use crate::params::{DerivedParams, REGIME_THRESHOLD};
use crate::{Error, Result};

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "𝒦 must be positive, got {kappa}"
        )))
    }
}

/// `2γ_m(n_T + 1/2) + (γ_m² + Ω²)/𝒦 + 𝒦`.
pub fn s_fa(kappa: f64, gamma_m: f64, n_t: f64, omega: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(2.0 * gamma_m * (n_t + 0.5) + (gamma_m * gamma_m + omega * omega) / kappa + kappa)
}

/// The 𝒦 that minimizes [`s_fa`] at `Ω`: `sqrt(γ_m² + Ω²)`.
pub fn optimal_kappa(gamma_m: f64, omega: f64) -> f64 {
    gamma_m.hypot(omega)
}

/// Force budget for a resonant square pulse of duration τ.
///
/// Normalized terms are in units of `F_s0² / (4ħ m ω_m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceBudget {
    pub tau: f64,
    /// `2γ_m(n_T + 1/2)/τ`.
    pub thermal: f64,
    /// `(2/√3)·2π/τ²`.
    pub sql: f64,
    pub total: f64,
    /// Minimum detectable amplitude F_s0, N.
    pub force: f64,
    /// Quantum-only amplitude `(4/τ)·sqrt(πħmω_m/√3)`, N.
    pub force_sql: f64,
    /// Same budget with the quantum term replaced by `4π/τ²`, N.
    pub force_alt: f64,
    /// `γ_m τ`; the budget assumes it is small.
    pub gamma_m_tau: f64,
    pub short_time: bool,
}

impl ForceBudget {
    /// Ratio of the alternative quantum term to the optimized one (√3).
    pub fn alt_ratio(&self) -> f64 {
        4.0 * PI / (self.tau * self.tau) / self.sql
    }
}

pub fn min_force(d: &DerivedParams, tau: f64) -> Result<ForceBudget> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", format!("must be > 0, got {tau}")));
    }
    let unit = 4.0 * HBAR * d.mass * d.omega_m;
    let thermal = 2.0 * d.gamma_m * (d.n_thermal + 0.5) / tau;
    let sql = 2.0 / 3f64.sqrt() * 2.0 * PI / (tau * tau);
    let alt = 4.0 * PI / (tau * tau);
    let total = thermal + sql;
    let gamma_m_tau = d.gamma_m * tau;
    Ok(ForceBudget {
        tau,
        thermal,
        sql,
        total,
        force: (unit * total).sqrt(),
        force_sql: 4.0 / tau * (PI * HBAR * d.mass * d.omega_m / 3f64.sqrt()).sqrt(),
        force_alt: (unit * (thermal + alt)).sqrt(),
        gamma_m_tau,
        short_time: gamma_m_tau < REGIME_THRESHOLD,
    })
}

/// Numerical and closed-form values of `∫₀^{2π/τ} S_fa dΩ/2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandIntegral {
    pub numeric: f64,
    /// `[2γ_m(n_T+1/2) + (γ_m² + (2π/τ)²/3)/𝒦 + 𝒦]/τ`.
    pub closed_form: f64,
    pub relative_error: f64,
}

pub const BAND_INTEGRAL_TOL: f64 = 1e-6;

// Five-point Gauss–Legendre on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

/// Composite Gauss–Legendre over `[a, b]` with `panels` equal panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

pub fn band_integral(gamma_m: f64, n_t: f64, kappa: f64, tau: f64) -> Result<BandIntegral> {
    check_kappa(kappa)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::param("tau", format!("must be > 0, got {tau}")));
    }
    let top = 2.0 * PI / tau;
    let numeric = gauss_legendre(
        |w| 2.0 * gamma_m * (n_t + 0.5) + (gamma_m * gamma_m + w * w) / kappa + kappa,
        0.0,
        top,
        16,
    ) / (2.0 * PI);
    let closed_form =
        (2.0 * gamma_m * (n_t + 0.5) + (gamma_m * gamma_m + top * top / 3.0) / kappa + kappa) / tau;
    let relative_error = (numeric - closed_form).abs() / closed_form.abs();
    if !relative_error.is_finite() || relative_error > BAND_INTEGRAL_TOL {
        return Err(Error::Quadrature(format!(
            "band integral {numeric} vs closed form {closed_form} (relative error {relative_error:.3e})"
        )));
    }
    Ok(BandIntegral {
        numeric,
        closed_form,
        relative_error,
    })
}

/// [`band_integral`] with the oscillator's own `γ_m` and `n_T`.
pub fn band_integral_check(d: &DerivedParams, kappa: f64, tau: f64) -> Result<BandIntegral> {
    band_integral(d.gamma_m, d.n_thermal, kappa, tau)
}
