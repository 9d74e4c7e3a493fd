//! Deterministic response to an injected pulse.
//!
//! A free oscillator (`γ_m ≪` any other rate) does not return to rest after
//! the pulse within any practical record, so the response is transformed
//! with a decaying kernel, `X(w) = Σ_n b̄_n e^{iw t_n} Δ` at `w = Ω + iσ`,
//! and compared with the analytic transfer functions continued to the same
//! complex frequency.

use num_complex::Complex64;
use serde::Serialize;

use super::integrator::ExactStepper;
use super::{run_trajectory, weights_from, SignalPulse, SimConfig};
use crate::params::DerivedParams;
use crate::spectra::coeffs_at;
use crate::{Error, Result};

/// Measured over expected response at one complex frequency. Every ratio
/// is 1 for an exact simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferPoint {
    pub omega: f64,
    pub decay: f64,
    /// Σ(w)/F(w); Σ carries the force with unit coefficient.
    pub sigma_ratio: Complex64,
    /// b+(w) over `−A+ F/(Γm − iw)`.
    pub plus_ratio: Complex64,
    /// b−(w) over `+A− F/(Γm − iw)`.
    pub minus_ratio: Complex64,
}

impl TransferPoint {
    /// Largest `|ratio − 1|` over the three ratios.
    pub fn max_error(&self) -> f64 {
        [self.sigma_ratio, self.plus_ratio, self.minus_ratio]
            .iter()
            .map(|r| (r - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

fn csinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0)
    } else {
        z.sin() / z
    }
}

/// Injects `pulse` with the noise switched off and compares the transformed
/// outputs at `Ω + iσ` for every `Ω` in `omegas`.
pub fn signal_transfer(
    d: &DerivedParams,
    cfg: &SimConfig,
    pulse: SignalPulse,
    omegas: &[f64],
    decay: f64,
) -> Result<Vec<TransferPoint>> {
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(Error::SimConfig(format!(
            "decay rate must be positive, got {decay}"
        )));
    }
    let cfg = SimConfig {
        signal: Some(pulse),
        noise: false,
        ..cfg.clone()
    };
    cfg.validate(d)?;
    let stepper = ExactStepper::new(d, cfg.sample_interval())?;
    let samples = cfg.samples();
    let delta = stepper.delta;
    let residual = (-decay * samples as f64 * delta).exp();
    if residual > 1e-12 {
        return Err(Error::SimConfig(format!(
            "record too short for decay rate {decay}: kernel still at {residual:.3e} at the end"
        )));
    }
    let (bp, bm) = run_trajectory(&stepper, &cfg, 0, samples, false)?;

    omegas
        .iter()
        .map(|&omega| {
            let w = Complex64::new(omega, decay);
            let i = Complex64::i();
            // e^{iw t_n} with t_n = (n + ½)Δ, built by recurrence
            let ratio = (i * w * delta).exp();
            let mut phase = (i * w * 0.5 * delta).exp();
            let (mut xp, mut xm) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (p, m) in bp.iter().zip(&bm) {
                xp += phase * *p;
                xm += phase * *m;
                phase *= ratio;
            }
            let gain = csinc(0.5 * w * delta);
            xp *= delta / gain;
            xm *= delta / gain;

            let c = coeffs_at(d, w).map_err(|e| Error::at(omega, e))?;
            let y = cfg
                .y_policy
                .resolve(&c, d)
                .map_err(|e| Error::at(omega, e))?;
            let (hp, hm) = weights_from(&c, y);
            let f = pulse.transform(w);
            let mech = c.gamma_total - i * w;
            Ok(TransferPoint {
                omega,
                decay,
                sigma_ratio: (hp * xp + hm * xm) / f,
                plus_ratio: xp / (-c.a_plus * f / mech),
                minus_ratio: xm / (c.a_minus * f / mech),
            })
        })
        .collect()
}
