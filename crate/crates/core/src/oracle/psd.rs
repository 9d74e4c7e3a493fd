//! Segment-averaged periodograms.
//!
//! Records are cut into non-overlapping segments, multiplied by a Hann
//! window `w_n = sin²(π(n + ½)/N)` and transformed with `e^{+iΩt}`. A
//! segment contributes `Δ/Σw²·|X(Ω_k)|²` at `Ω_k = 2πk/(NΔ)`, which
//! reproduces a two-sided density: white noise of unit density averaged
//! over Δ gives 1. For Σ the interval averaging of the samples is undone
//! by dividing by `sinc²(Ω_kΔ/2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::integrator::ExactStepper;
use super::{
    run_trajectory, weights_from, SimConfig, TimeSeriesBundle, FIRST_BAND_BIN, MAX_OMEGA_DELTA,
};
use crate::params::DerivedParams;
use crate::spectra::{coeffs, YPolicy};
use crate::{Error, Result};

/// Range of Fourier bins used for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub segment_len: usize,
    pub delta: f64,
    pub first_bin: usize,
    pub last_bin: usize,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl Band {
    /// Bins from [`FIRST_BAND_BIN`] up to `Ω·Δ ≤ 0.2`.
    pub fn new(segment_len: usize, delta: f64) -> Result<Self> {
        let bin = 2.0 * PI / (segment_len as f64 * delta);
        let last_bin = ((MAX_OMEGA_DELTA / delta / bin).floor() as usize).min(segment_len / 2 - 1);
        if segment_len < 4 || last_bin < FIRST_BAND_BIN {
            return Err(Error::Psd(format!(
                "segments of {segment_len} samples leave no bins between {FIRST_BAND_BIN} and Ω·Δ = {MAX_OMEGA_DELTA}"
            )));
        }
        Ok(Self {
            segment_len,
            delta,
            first_bin: FIRST_BAND_BIN,
            last_bin,
            omega_lo: FIRST_BAND_BIN as f64 * bin,
            omega_hi: last_bin as f64 * bin,
        })
    }

    pub fn for_config(cfg: &SimConfig) -> Result<Self> {
        Self::new(cfg.segment_len(), cfg.sample_interval())
    }

    pub fn omega(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / (self.segment_len as f64 * self.delta)
    }

    pub fn omegas(&self) -> Vec<f64> {
        (self.first_bin..=self.last_bin)
            .map(|k| self.omega(k))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.last_bin + 1 - self.first_bin
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Windowed transform of fixed-length segments.
#[derive(Clone)]
pub struct SpectralEstimator {
    pub segment_len: usize,
    pub delta: f64,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectralEstimator {
    pub fn new(segment_len: usize, delta: f64) -> Self {
        let window: Vec<f64> = (0..segment_len)
            .map(|n| (PI * (n as f64 + 0.5) / segment_len as f64).sin().powi(2))
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_inverse(segment_len);
        Self {
            segment_len,
            delta,
            window,
            window_power,
            fft,
        }
    }

    /// `Σ_n w_n x_n e^{+2πikn/N}` for every k.
    pub fn transform(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x
            .iter()
            .zip(&self.window)
            .map(|(&v, &w)| Complex64::new(v * w, 0.0))
            .collect();
        self.fft.process(&mut buf);
        buf
    }

    /// Converts `|X|²` into a two-sided density.
    pub fn scale(&self) -> f64 {
        self.delta / self.window_power
    }
}

/// Periodogram of one real record averaged over its segments; bins
/// `0..=N/2`, two-sided normalization, no averaging compensation.
pub fn welch_psd(x: &[f64], segment_len: usize, delta: f64) -> Result<Vec<(f64, f64)>> {
    let segments = x.len().checked_div(segment_len).unwrap_or(0);
    if segments == 0 || segment_len < 2 {
        return Err(Error::Psd(format!(
            "record of {} samples is too short for segments of {segment_len}",
            x.len()
        )));
    }
    let est = SpectralEstimator::new(segment_len, delta);
    let mut acc = vec![0.0; segment_len / 2 + 1];
    for seg in x.chunks_exact(segment_len) {
        for (a, v) in acc.iter_mut().zip(est.transform(seg)) {
            *a += v.norm_sqr();
        }
    }
    let norm = est.scale() / segments as f64;
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(k, a)| (2.0 * PI * k as f64 / (segment_len as f64 * delta), a * norm))
        .collect())
}

/// Per-bin weights of Σ for one y-policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaWeights {
    pub omegas: Vec<f64>,
    pub y: Vec<Complex64>,
    pub h_plus: Vec<Complex64>,
    pub h_minus: Vec<Complex64>,
    /// `sinc²(ΩΔ/2)`, the power gain of interval averaging.
    pub averaging_gain: Vec<f64>,
}

impl SigmaWeights {
    pub fn new(d: &DerivedParams, band: &Band, policy: &YPolicy) -> Result<Self> {
        let omegas = band.omegas();
        let mut w = Self {
            omegas: omegas.clone(),
            y: Vec::with_capacity(omegas.len()),
            h_plus: Vec::with_capacity(omegas.len()),
            h_minus: Vec::with_capacity(omegas.len()),
            averaging_gain: Vec::with_capacity(omegas.len()),
        };
        for &omega in &omegas {
            let c = coeffs(d, omega).map_err(|e| Error::at(omega, e))?;
            let y = policy.resolve(&c, d).map_err(|e| Error::at(omega, e))?;
            let (hp, hm) = weights_from(&c, y);
            let x = 0.5 * omega * band.delta;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            w.y.push(y);
            w.h_plus.push(hp);
            w.h_minus.push(hm);
            w.averaging_gain.push(sinc * sinc);
        }
        Ok(w)
    }
}

/// Estimated spectral density of Σ's noise part over the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdEstimate {
    pub omegas: Vec<f64>,
    pub psd: Vec<f64>,
    /// y used at each bin.
    pub y: Vec<Complex64>,
    /// Relative one-sigma error `1/sqrt(segments·trajectories)`.
    pub rel_error: f64,
    pub band: (f64, f64),
    pub segments: usize,
    pub trajectories: usize,
    /// Per-segment densities averaged over trajectories.
    pub segment_psd: Vec<Vec<f64>>,
}

impl PsdEstimate {
    /// An estimate built from given values, e.g. an analytic curve.
    pub fn from_values(omegas: Vec<f64>, psd: Vec<f64>, rel_error: f64) -> Self {
        let band = (
            omegas.first().copied().unwrap_or(0.0),
            omegas.last().copied().unwrap_or(0.0),
        );
        Self {
            y: vec![Complex64::new(0.0, 0.0); omegas.len()],
            segment_psd: vec![psd.clone()],
            omegas,
            psd,
            rel_error,
            band,
            segments: 1,
            trajectories: 1,
        }
    }

    fn over_segments(&self, range: std::ops::Range<usize>) -> Self {
        let parts = &self.segment_psd[range];
        let n = parts.len();
        let psd = (0..self.omegas.len())
            .map(|k| parts.iter().map(|s| s[k]).sum::<f64>() / n as f64)
            .collect();
        Self {
            psd,
            rel_error: 1.0 / ((n * self.trajectories) as f64).sqrt(),
            segments: n,
            segment_psd: parts.to_vec(),
            ..self.clone()
        }
    }

    /// Estimates from the first and second halves of the segments.
    pub fn halves(&self) -> (Self, Self) {
        let mid = self.segments / 2;
        (
            self.over_segments(0..mid),
            self.over_segments(mid..self.segments),
        )
    }
}

/// Per-policy, per-segment sums of `|Σ|²` for one trajectory.
fn accumulate(
    est: &SpectralEstimator,
    band: &Band,
    weights: &[SigmaWeights],
    segments: usize,
    b_plus: &[f64],
    b_minus: &[f64],
) -> Vec<Vec<Vec<f64>>> {
    let n = est.segment_len;
    let mut out = vec![vec![vec![0.0; band.len()]; segments]; weights.len()];
    for s in 0..segments {
        let xp = est.transform(&b_plus[s * n..(s + 1) * n]);
        let xm = est.transform(&b_minus[s * n..(s + 1) * n]);
        for (wi, w) in weights.iter().enumerate() {
            for (j, k) in (band.first_bin..=band.last_bin).enumerate() {
                let sigma = w.h_plus[j] * xp[k] + w.h_minus[j] * xm[k];
                out[wi][s][j] = sigma.norm_sqr() * est.scale() / w.averaging_gain[j];
            }
        }
    }
    out
}

fn finish(
    sums: Vec<Vec<Vec<f64>>>,
    weights: &[SigmaWeights],
    band: &Band,
    segments: usize,
    trajectories: usize,
) -> Vec<PsdEstimate> {
    sums.into_iter()
        .zip(weights)
        .map(|(per_segment, w)| {
            let segment_psd: Vec<Vec<f64>> = per_segment
                .into_iter()
                .map(|s| s.into_iter().map(|v| v / trajectories as f64).collect())
                .collect();
            let psd = (0..band.len())
                .map(|k| segment_psd.iter().map(|s| s[k]).sum::<f64>() / segments as f64)
                .collect();
            PsdEstimate {
                omegas: w.omegas.clone(),
                psd,
                y: w.y.clone(),
                rel_error: 1.0 / ((segments * trajectories) as f64).sqrt(),
                band: (band.omega_lo, band.omega_hi),
                segments,
                trajectories,
                segment_psd,
            }
        })
        .collect()
}

fn add_into(total: &mut [Vec<Vec<f64>>], part: &[Vec<Vec<f64>>]) {
    for (t, p) in total.iter_mut().zip(part) {
        for (ts, ps) in t.iter_mut().zip(p) {
            for (a, b) in ts.iter_mut().zip(ps) {
                *a += b;
            }
        }
    }
}

fn subtract(x: &[f64], det: Option<&Vec<f64>>) -> Vec<f64> {
    match det {
        Some(det) => x.iter().zip(det).map(|(a, b)| a - b).collect(),
        None => x.to_vec(),
    }
}

/// Spectral density of Σ's noise part from stored records. The
/// deterministic signal response, if present, is removed first.
pub fn estimate_psd(
    d: &DerivedParams,
    ts: &TimeSeriesBundle,
    segments: usize,
    policy: &YPolicy,
) -> Result<PsdEstimate> {
    if segments < super::MIN_SEGMENTS {
        return Err(Error::Psd(format!(
            "need at least {} segments, got {segments}",
            super::MIN_SEGMENTS
        )));
    }
    if ts.trajectories.is_empty() {
        return Err(Error::Psd("no trajectories".into()));
    }
    let band = Band::new(ts.len() / segments, ts.sample_interval)?;
    let est = SpectralEstimator::new(band.segment_len, band.delta);
    let weights = [SigmaWeights::new(d, &band, policy)?];
    let mut total = vec![vec![vec![0.0; band.len()]; segments]; 1];
    for t in &ts.trajectories {
        let det = ts.signal_response.as_ref();
        let bp = subtract(&t.b_plus, det.map(|r| &r.0));
        let bm = subtract(&t.b_minus, det.map(|r| &r.1));
        add_into(
            &mut total,
            &accumulate(&est, &band, &weights, segments, &bp, &bm),
        );
    }
    Ok(
        finish(total, &weights, &band, segments, ts.trajectories.len())
            .pop()
            .expect("one policy"),
    )
}

/// Runs the ensemble without storing records and estimates Σ's noise
/// spectrum for `cfg.y_policy`.
pub fn run_ensemble(d: &DerivedParams, cfg: &SimConfig) -> Result<PsdEstimate> {
    Ok(
        run_ensemble_with(d, cfg, std::slice::from_ref(&cfg.y_policy))?
            .pop()
            .expect("one policy"),
    )
}

/// As [`run_ensemble`], weighting the same records with several policies.
///
/// Trajectories run in parallel; their sums are reduced in trajectory
/// order so the result does not depend on scheduling.
pub fn run_ensemble_with(
    d: &DerivedParams,
    cfg: &SimConfig,
    policies: &[YPolicy],
) -> Result<Vec<PsdEstimate>> {
    cfg.validate(d)?;
    let stepper = ExactStepper::new(d, cfg.sample_interval())?;
    let band = Band::for_config(cfg)?;
    let segments = cfg.segments;
    let samples = band.segment_len * segments;
    let est = SpectralEstimator::new(band.segment_len, band.delta);
    let weights = policies
        .iter()
        .map(|p| SigmaWeights::new(d, &band, p))
        .collect::<Result<Vec<_>>>()?;
    let det = match (&cfg.signal, cfg.noise) {
        (Some(_), true) => Some(run_trajectory(&stepper, cfg, 0, samples, false)?),
        _ => None,
    };

    let parts = (0..cfg.trajectories)
        .into_par_iter()
        .map(|k| {
            let (bp, bm) = run_trajectory(&stepper, cfg, k, samples, cfg.noise)?;
            let bp = subtract(&bp, det.as_ref().map(|r| &r.0));
            let bm = subtract(&bm, det.as_ref().map(|r| &r.1));
            Ok(accumulate(&est, &band, &weights, segments, &bp, &bm))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = vec![vec![vec![0.0; band.len()]; segments]; weights.len()];
    for p in &parts {
        add_into(&mut total, p);
    }
    Ok(finish(total, &weights, &band, segments, cfg.trajectories))
}
