use std::fmt;

use serde::Serialize;

use super::{DerivedParams, PhysParams};

/// Ratio below which a "much smaller than" condition is considered met.
pub const REGIME_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// ratio < 0.1
    Pass,
    /// 0.1 <= ratio < 1: the ordering holds but not by an order of magnitude.
    Marginal,
    Fail,
}

impl Verdict {
    fn from_ratio(ratio: f64) -> Self {
        if ratio < REGIME_THRESHOLD {
            Verdict::Pass
        } else if ratio < 1.0 {
            Verdict::Marginal
        } else {
            Verdict::Fail
        }
    }

    pub fn passes(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Marginal => "marginal-pass",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One "a ≪ b" condition, evaluated as the ratio a/b.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeCheck {
    pub name: &'static str,
    pub condition: &'static str,
    pub ratio: f64,
    /// `threshold / ratio`; infinite when the ratio is zero.
    pub margin: f64,
    pub verdict: Verdict,
    pub detail: String,
}

impl RegimeCheck {
    fn new(name: &'static str, condition: &'static str, ratio: f64, detail: String) -> Self {
        let margin = if ratio == 0.0 {
            f64::INFINITY
        } else {
            REGIME_THRESHOLD / ratio
        };
        Self {
            name,
            condition,
            ratio,
            margin,
            verdict: Verdict::from_ratio(ratio),
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub loss_smallness: RegimeCheck,
    pub resolved_sideband: RegimeCheck,
    /// Ratio is the thermal factor `B = n_T ω_m τ / Q` itself.
    pub thermal: RegimeCheck,
    pub short_pulse: RegimeCheck,
}

impl RegimeReport {
    pub fn checks(&self) -> [&RegimeCheck; 4] {
        [
            &self.loss_smallness,
            &self.resolved_sideband,
            &self.thermal,
            &self.short_pulse,
        ]
    }

    pub fn thermal_factor(&self) -> f64 {
        self.thermal.ratio
    }
}

fn fmt_margin(m: f64) -> String {
    if m.is_infinite() {
        "∞".to_string()
    } else {
        format!("{m:.3}")
    }
}

impl fmt::Display for RegimeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.checks() {
            writeln!(
                f,
                "{:<18} {:<28} ratio = {:<12.4e} margin = {:<8} {}  ({})",
                c.name,
                c.condition,
                c.ratio,
                fmt_margin(c.margin),
                c.verdict,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Evaluates every regime condition. Never fails: violations show up as
/// verdicts, and every ratio is reported.
pub fn check_regime(d: &DerivedParams, p: &PhysParams) -> RegimeReport {
    let loss_ratios = [
        p.gamma_e / p.gamma0,
        p.gamma_e_plus / p.gamma0_plus,
        p.gamma_e_minus / p.gamma0_minus,
    ];
    let loss = loss_ratios.iter().copied().fold(0.0, f64::max);
    let loss_smallness = RegimeCheck::new(
        "loss-smallness",
        "γe, γe± ≪ γ0, γ0±",
        loss,
        format!(
            "γe/γ0 = {:.3e}, γe+/γ0+ = {:.3e}, γe−/γ0− = {:.3e}",
            loss_ratios[0], loss_ratios[1], loss_ratios[2]
        ),
    );

    let widest = d.gamma.max(d.gamma_plus).max(d.gamma_minus);
    let narrowest = d.gamma.min(d.gamma_plus).min(d.gamma_minus);
    let mech_vs_optical = d.gamma_m / narrowest;
    let optical_vs_mech = widest / d.omega_m;
    let resolved_sideband = RegimeCheck::new(
        "resolved-sideband",
        "γ_m ≪ γ ≪ ω_m",
        mech_vs_optical.max(optical_vs_mech),
        format!("γ_m/γ = {mech_vs_optical:.3e}, γ/ω_m = {optical_vs_mech:.4}"),
    );

    let thermal = RegimeCheck::new(
        "thermal",
        "B = n_T ω_m τ / Q ≪ 1",
        d.thermal_factor,
        format!("n_T = {:.4e}, B = {:.4}", d.n_thermal, d.thermal_factor),
    );

    let short = d.gamma_m * p.tau;
    let short_pulse = RegimeCheck::new(
        "short-pulse",
        "γ_m τ ≪ 1",
        short,
        format!("γ_m = {:.4e} s⁻¹, τ = {:.4e} s", d.gamma_m, p.tau),
    );

    RegimeReport {
        loss_smallness,
        resolved_sideband,
        thermal,
        short_pulse,
    }
}
