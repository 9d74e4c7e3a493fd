//! Time-domain stochastic oracle.
//!
//! The amplitude-quadrature equations are integrated with an exact
//! discretisation (see [`integrator`]) driven by independent white noises
//! whose intensities follow the analytic convention: unit two-sided spectral
//! density for each optical vacuum channel and `n_T + 1/2` for the thermal
//! force entering through `sqrt(2γ_m)`. The detected outputs are averaged
//! over each output interval Δ, which the spectral estimator compensates.
//!
//! The post-processing weights are frequency dependent, so the weighted sum
//! Σ is formed per Fourier bin:
//! `Σ(Ω) = (y − ½)(Γm − iΩ)/A+ · b+(Ω) + (y + ½)(Γm − iΩ)/A− · b−(Ω)`,
//! which carries the signal force with unit coefficient.

mod compare;
pub mod integrator;
mod psd;
mod transfer;

pub use compare::{compare, ComparisonReport, BIN_PASS_FRACTION, MEAN_TOLERANCE, SIGMA_MULTIPLE};
pub use psd::{
    estimate_psd, run_ensemble, run_ensemble_with, welch_psd, Band, PsdEstimate, SigmaWeights,
    SpectralEstimator,
};
pub use transfer::{signal_transfer, TransferPoint};

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::params::DerivedParams;
use crate::spectra::{coeffs, YPolicy};
use crate::{Error, Result};
use integrator::{ExactStepper, Vec5};

/// Fraction of the stability scale `1/max_rate` used as the default step.
pub const DEFAULT_DT_FRACTION: f64 = 0.05;
/// Upper bound on `dt·max_rate`.
pub const DT_BOUND: f64 = 0.1;
pub const DEFAULT_SAMPLE_EVERY: usize = 100;
pub const DEFAULT_SEGMENT_LEN: usize = 65_536;
pub const DEFAULT_SEGMENTS: usize = 16;
pub const DEFAULT_TRAJECTORIES: usize = 64;
pub const MIN_SEGMENTS: usize = 8;
/// Lowest Fourier bin used in comparisons; lower bins are dominated by
/// window leakage of the slow mechanical drift.
pub const FIRST_BAND_BIN: usize = 16;
/// Upper band edge as `Ω·Δ`; above it aliasing of the white output noise
/// into the averaged samples becomes visible.
pub const MAX_OMEGA_DELTA: f64 = 0.2;

/// Resonant square pulse. Its amplitude quadrature is a rectangle of height
/// `f_s0·cos(ψ_f)/√2` on `[start, start + duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignalPulse {
    /// Normalized force amplitude `F_s0 / sqrt(2ħ ω_m m)`.
    pub amplitude: f64,
    pub phase: f64,
    pub start: f64,
    pub duration: f64,
}

impl SignalPulse {
    pub fn quadrature_amplitude(&self) -> f64 {
        self.amplitude * self.phase.cos() / 2f64.sqrt()
    }

    /// Transform `∫ f_sa(t) e^{iwt} dt` at complex `w`.
    pub fn transform(&self, w: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        let h = self.quadrature_amplitude();
        if w.norm() * self.duration < 1e-8 {
            return Complex64::new(h * self.duration, 0.0) * (i * w * self.start).exp();
        }
        h * ((i * w * (self.start + self.duration)).exp() - (i * w * self.start).exp()) / (i * w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Integration step bound, s. Must satisfy `dt·max_rate < 0.1`.
    pub dt: f64,
    /// Output samples are taken every `sample_every` steps: `Δ = sample_every·dt`.
    pub sample_every: usize,
    pub duration: f64,
    pub trajectories: usize,
    pub segments: usize,
    pub seed: u64,
    pub scenario: Option<String>,
    pub y_policy: YPolicy,
    pub signal: Option<SignalPulse>,
    pub noise: bool,
}

impl SimConfig {
    /// Default statistics: 64 trajectories, 16 segments of 65 536 samples.
    pub fn default_for(d: &DerivedParams) -> Self {
        let dt = DEFAULT_DT_FRACTION / d.max_rate();
        let delta = dt * DEFAULT_SAMPLE_EVERY as f64;
        Self {
            dt,
            sample_every: DEFAULT_SAMPLE_EVERY,
            duration: (DEFAULT_SEGMENTS * DEFAULT_SEGMENT_LEN) as f64 * delta,
            trajectories: DEFAULT_TRAJECTORIES,
            segments: DEFAULT_SEGMENTS,
            seed: 0,
            scenario: None,
            y_policy: YPolicy::AnalyticOptimal,
            signal: None,
            noise: true,
        }
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.sample_interval() * (1.0 + 1e-12)).floor() as usize
    }

    pub fn segment_len(&self) -> usize {
        self.samples() / self.segments.max(1)
    }

    /// Checks the step bound and that the record is long enough for the
    /// comparison band.
    pub fn validate(&self, d: &DerivedParams) -> Result<()> {
        let bad = |m: String| Err(Error::SimConfig(m));
        let rate = d.max_rate();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.dt * rate >= DT_BOUND {
            return bad(format!(
                "dt = {:.3e} s exceeds the stability bound {:.3e} s (0.1 / max rate {:.3e} s⁻¹)",
                self.dt,
                DT_BOUND / rate,
                rate
            ));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if self.trajectories == 0 {
            return bad("need at least one trajectory".into());
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.segments < MIN_SEGMENTS {
            return bad(format!(
                "need at least {MIN_SEGMENTS} segments, got {}",
                self.segments
            ));
        }
        if self.segment_len() < 2 * FIRST_BAND_BIN + 2 {
            return bad(format!(
                "record of {} samples is too short for {} segments",
                self.samples(),
                self.segments
            ));
        }
        let band = Band::for_config(self)?;
        let needed = 100.0 * 2.0 * PI / band.omega_lo;
        if self.duration < needed {
            return bad(format!(
                "duration {:.3e} s is shorter than 100 periods of the lowest band frequency ({needed:.3e} s)",
                self.duration
            ));
        }
        if let Some(p) = &self.signal {
            if !(p.duration > 0.0 && p.start >= 0.0 && p.amplitude.is_finite()) {
                return bad(format!("bad signal pulse {p:?}"));
            }
        }
        Ok(())
    }
}

/// Per-step force inputs for a pulse, exact for pulse edges that fall
/// inside an output interval.
#[derive(Debug, Clone)]
pub(crate) struct ForceSchedule {
    first: usize,
    last: usize,
    interior: Vec5,
    edges: Vec<(usize, Vec5)>,
}

impl ForceSchedule {
    pub(crate) fn new(stepper: &ExactStepper, pulse: &SignalPulse) -> Self {
        let delta = stepper.delta;
        let h = pulse.quadrature_amplitude();
        let (t0, t1) = (pulse.start, pulse.start + pulse.duration);
        let first = (t0 / delta).floor() as usize;
        let last = ((t1 / delta).ceil() as usize).max(first + 1) - 1;
        let mut edges = Vec::new();
        for n in [first, last] {
            if edges.iter().any(|&(k, _)| k == n) {
                continue;
            }
            let base = n as f64 * delta;
            let s0 = (t0 - base).clamp(0.0, delta);
            let s1 = (t1 - base).clamp(0.0, delta);
            edges.push((n, stepper.partial_drive(s0, s1) * h));
        }
        Self {
            first,
            last,
            interior: stepper.drive * h,
            edges,
        }
    }

    #[inline]
    pub(crate) fn at(&self, n: usize) -> Option<Vec5> {
        if n < self.first || n > self.last {
            return None;
        }
        Some(
            self.edges
                .iter()
                .find(|&&(k, _)| k == n)
                .map_or(self.interior, |&(_, v)| v),
        )
    }
}

/// Generator for one trajectory: ChaCha8 seeded from the run seed, with the
/// trajectory index as stream.
pub fn trajectory_rng(seed: u64, trajectory: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory as u64);
    rng
}

/// Simulates one trajectory, returning the averaged outputs `(b̄+, b̄−)`.
pub(crate) fn run_trajectory(
    stepper: &ExactStepper,
    cfg: &SimConfig,
    trajectory: usize,
    samples: usize,
    noise: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = trajectory_rng(cfg.seed, trajectory);
    let schedule = cfg.signal.as_ref().map(|p| ForceSchedule::new(stepper, p));
    let mut z = Vec5::zeros();
    let mut bp = Vec::with_capacity(samples);
    let mut bm = Vec::with_capacity(samples);
    let mut xi = Vec5::zeros();
    for n in 0..samples {
        if noise {
            for v in xi.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
        }
        let force = schedule.as_ref().and_then(|s| s.at(n));
        let (p, m) = stepper.step(&mut z, noise.then_some(&xi), force);
        if n % 4096 == 0 && !(z.iter().all(|v| v.is_finite() && v.abs() < 1e150)) {
            return Err(Error::Diverged {
                trajectory,
                time: (n + 1) as f64 * stepper.delta,
            });
        }
        bp.push(p);
        bm.push(m);
    }
    if !(z.iter().all(|v| v.is_finite())) {
        return Err(Error::Diverged {
            trajectory,
            time: samples as f64 * stepper.delta,
        });
    }
    Ok((bp, bm))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub stream: u64,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    /// Σ(t), formed by per-bin weighting over the whole (periodically
    /// extended) record.
    pub sigma: Vec<f64>,
}

/// Sampled outputs of every trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeriesBundle {
    /// Output interval Δ, s.
    pub sample_interval: f64,
    /// Interval midpoints `(n + ½)Δ`.
    pub times: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    /// Noise-free response to the injected signal, if any. It is the
    /// deterministic part of every trajectory.
    pub signal_response: Option<(Vec<f64>, Vec<f64>)>,
}

impl TimeSeriesBundle {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes one trajectory as `time,b_plus_a,b_minus_a` text.
    pub fn write_csv(&self, trajectory: usize, mut w: impl Write) -> Result<()> {
        let t = self
            .trajectories
            .get(trajectory)
            .ok_or_else(|| Error::SimConfig(format!("no trajectory {trajectory} in bundle")))?;
        writeln!(w, "time,b_plus_a,b_minus_a")?;
        for ((time, p), m) in self.times.iter().zip(&t.b_plus).zip(&t.b_minus) {
            writeln!(w, "{time:.9e},{p:.9e},{m:.9e}")?;
        }
        Ok(())
    }
}

/// Runs every trajectory of `cfg` and keeps the full records. Memory grows
/// as `trajectories × samples`; use [`run_ensemble`] for long runs.
pub fn simulate(d: &DerivedParams, cfg: &SimConfig) -> Result<TimeSeriesBundle> {
    cfg.validate(d)?;
    let stepper = ExactStepper::new(d, cfg.sample_interval())?;
    let samples = cfg.samples();
    let delta = stepper.delta;
    let trajectories = (0..cfg.trajectories)
        .map(|k| {
            let (b_plus, b_minus) = run_trajectory(&stepper, cfg, k, samples, cfg.noise)?;
            let sigma = form_sigma(d, &b_plus, &b_minus, delta, &cfg.y_policy)?;
            Ok(Trajectory {
                seed: cfg.seed,
                stream: k as u64,
                b_plus,
                b_minus,
                sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let signal_response = match (&cfg.signal, cfg.noise) {
        (Some(_), true) => Some(run_trajectory(&stepper, cfg, 0, samples, false)?),
        _ => None,
    };
    Ok(TimeSeriesBundle {
        sample_interval: delta,
        times: (0..samples).map(|n| (n as f64 + 0.5) * delta).collect(),
        trajectories,
        signal_response,
    })
}

/// Forms Σ(t) from a record by weighting each Fourier bin with the
/// coefficients at its frequency. The record is treated as periodic.
pub fn form_sigma(
    d: &DerivedParams,
    b_plus: &[f64],
    b_minus: &[f64],
    delta: f64,
    policy: &YPolicy,
) -> Result<Vec<f64>> {
    let n = b_plus.len();
    if n != b_minus.len() {
        return Err(Error::SimConfig("channel lengths differ".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut planner = FftPlanner::new();
    // e^{+iΩt} into the frequency domain, e^{-iΩt} back
    let to_freq: Arc<dyn rustfft::Fft<f64>> = planner.plan_fft_inverse(n);
    let to_time = planner.plan_fft_forward(n);
    let mut xp: Vec<Complex64> = b_plus.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut xm: Vec<Complex64> = b_minus.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    to_freq.process(&mut xp);
    to_freq.process(&mut xm);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..=n / 2 {
        let omega = 2.0 * PI * k as f64 / (n as f64 * delta);
        let (hp, hm) = sigma_weights(d, omega, policy)?;
        out[k] = hp * xp[k] + hm * xm[k];
        if k != 0 && 2 * k != n {
            out[n - k] = hp.conj() * xp[n - k] + hm.conj() * xm[n - k];
        }
    }
    to_time.process(&mut out);
    Ok(out.into_iter().map(|v| v.re / n as f64).collect())
}

/// Per-bin weights `(H+, H−)` with `Σ = H+ b+ + H− b−`.
pub fn sigma_weights(
    d: &DerivedParams,
    omega: f64,
    policy: &YPolicy,
) -> Result<(Complex64, Complex64)> {
    let c = coeffs(d, omega)?;
    let y = policy.resolve(&c, d)?;
    Ok(weights_from(&c, y))
}

pub(crate) fn weights_from(c: &crate::spectra::CoeffSet, y: Complex64) -> (Complex64, Complex64) {
    let w = Complex64::new(c.omega, c.decay);
    let mech = c.gamma_total - Complex64::i() * w;
    ((y - 0.5) * mech / c.a_plus, (y + 0.5) * mech / c.a_minus)
}
