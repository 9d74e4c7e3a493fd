use std::fmt;

use serde::Serialize;

use super::PsdEstimate;
use crate::spectra::SpectrumRecord;
use crate::{Error, Result};

/// A bin agrees when `|ratio − 1|` is within this many error bars.
pub const SIGMA_MULTIPLE: f64 = 3.0;
/// Fraction of agreeing bins needed to pass.
pub const BIN_PASS_FRACTION: f64 = 0.95;
/// Largest allowed `|mean ratio − 1|`.
pub const MEAN_TOLERANCE: f64 = 0.05;

/// Estimated over analytic `S_f`, bin by bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub band: (f64, f64),
    pub omegas: Vec<f64>,
    pub analytic: Vec<f64>,
    pub estimate: Vec<f64>,
    pub ratio: Vec<f64>,
    pub rel_error: f64,
    pub within_fraction: f64,
    pub mean_ratio: f64,
    /// Largest `|ratio − 1|`.
    pub max_deviation: f64,
    /// Mean of `((ratio − 1)/σ)²`; about 1 for a correct model.
    pub chi2_per_bin: f64,
    pub pass: bool,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "result          {}",
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        writeln!(
            f,
            "band            [{:.4e}, {:.4e}] rad/s ({} bins)",
            self.band.0,
            self.band.1,
            self.omegas.len()
        )?;
        writeln!(f, "error bar       {:.4} relative", self.rel_error)?;
        writeln!(
            f,
            "within {SIGMA_MULTIPLE}σ       {:.4} (need ≥ {BIN_PASS_FRACTION})",
            self.within_fraction
        )?;
        writeln!(
            f,
            "mean ratio      {:.5} (need within {MEAN_TOLERANCE} of 1)",
            self.mean_ratio
        )?;
        writeln!(f, "max deviation   {:.4}", self.max_deviation)?;
        write!(f, "chi2 per bin    {:.4}", self.chi2_per_bin)
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x);
    if k < xs.len() && xs[k] == x {
        return ys[k];
    }
    let (x0, x1, y0, y1) = (xs[k - 1], xs[k], ys[k - 1], ys[k]);
    if x0 > 0.0 && y0 > 0.0 && y1 > 0.0 {
        let t = (x / x0).ln() / (x1 / x0).ln();
        (y0.ln() + t * (y1 / y0).ln()).exp()
    } else {
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Compares an estimate with analytic `S_f = S_qu + S_T` over the overlap
/// of both ranges and the optional `band`. Analytic values between grid
/// points are interpolated log-log.
pub fn compare(
    analytic: &[SpectrumRecord],
    est: &PsdEstimate,
    band: Option<(f64, f64)>,
) -> Result<ComparisonReport> {
    let (Some(first), Some(last)) = (analytic.first(), analytic.last()) else {
        return Err(Error::Compare("analytic curve is empty".into()));
    };
    let mut lo = first.omega.max(est.band.0);
    let mut hi = last.omega.min(est.band.1);
    if let Some((a, b)) = band {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let xs: Vec<f64> = analytic.iter().map(|r| r.omega).collect();
    let ys: Vec<f64> = analytic.iter().map(|r| r.s_f).collect();
    let picked: Vec<usize> = (0..est.omegas.len())
        .filter(|&k| est.omegas[k] >= lo && est.omegas[k] <= hi)
        .collect();
    if lo > hi || picked.is_empty() {
        return Err(Error::Compare(format!(
            "bands do not overlap: analytic [{:.4e}, {:.4e}], estimate [{:.4e}, {:.4e}]",
            first.omega, last.omega, est.band.0, est.band.1
        )));
    }

    let omegas: Vec<f64> = picked.iter().map(|&k| est.omegas[k]).collect();
    let estimate: Vec<f64> = picked.iter().map(|&k| est.psd[k]).collect();
    let analytic_vals: Vec<f64> = omegas.iter().map(|&w| interpolate(&xs, &ys, w)).collect();
    let ratio: Vec<f64> = estimate
        .iter()
        .zip(&analytic_vals)
        .map(|(e, a)| e / a)
        .collect();
    let n = ratio.len() as f64;
    let sigma = est.rel_error;
    let within = ratio
        .iter()
        .filter(|r| (*r - 1.0).abs() <= SIGMA_MULTIPLE * sigma)
        .count() as f64
        / n;
    let mean_ratio = ratio.iter().sum::<f64>() / n;
    let max_deviation = ratio.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let chi2_per_bin = if sigma > 0.0 {
        ratio
            .iter()
            .map(|r| ((r - 1.0) / sigma).powi(2))
            .sum::<f64>()
            / n
    } else {
        0.0
    };
    let pass = within >= BIN_PASS_FRACTION && (mean_ratio - 1.0).abs() <= MEAN_TOLERANCE;
    Ok(ComparisonReport {
        band: (omegas[0], omegas[omegas.len() - 1]),
        omegas,
        analytic: analytic_vals,
        estimate,
        ratio,
        rel_error: sigma,
        within_fraction: within,
        mean_ratio,
        max_deviation,
        chi2_per_bin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, table1_preset};
    use crate::spectra::{spectrum_sweep, GridSpec, YPolicy};

    fn curve() -> Vec<SpectrumRecord> {
        let d = derive(&table1_preset()).unwrap();
        let grid = GridSpec::default().omegas(d.tau).unwrap();
        spectrum_sweep(&d, &grid, &YPolicy::AnalyticOptimal).unwrap()
    }

    fn as_estimate(records: &[SpectrumRecord], scale: f64) -> PsdEstimate {
        PsdEstimate::from_values(
            records.iter().map(|r| r.omega).collect(),
            records.iter().map(|r| scale * r.s_f).collect(),
            0.03,
        )
    }

    #[test]
    fn identity_passes_exactly() {
        let c = curve();
        let r = compare(&c, &as_estimate(&c, 1.0), None).unwrap();
        assert!(r.pass);
        assert_eq!(r.within_fraction, 1.0);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn doubled_curve_fails() {
        let c = curve();
        let r = compare(&c, &as_estimate(&c, 2.0), None).unwrap();
        assert!(!r.pass);
        assert_eq!(r.within_fraction, 0.0);
        assert!(r.to_string().contains("FAIL"));
    }

    #[test]
    fn interpolated_bins_and_disjoint_bands() {
        let c = curve();
        let mid: Vec<f64> = c
            .windows(2)
            .map(|p| (p[0].omega * p[1].omega).sqrt())
            .collect();
        let d = derive(&table1_preset()).unwrap();
        let exact = spectrum_sweep(&d, &mid, &YPolicy::AnalyticOptimal).unwrap();
        let r = compare(&c, &as_estimate(&exact, 1.0), None).unwrap();
        assert!(r.max_deviation < 1e-3, "{}", r.max_deviation);

        let far = PsdEstimate::from_values(vec![1e9, 2e9], vec![1.0, 1.0], 0.03);
        assert!(compare(&c, &far, None).is_err());
        assert!(compare(&c, &as_estimate(&c, 1.0), Some((1e8, 1e9))).is_err());
    }
}
