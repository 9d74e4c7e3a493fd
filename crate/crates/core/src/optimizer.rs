//! Optimal post-processing weight `y`.
//!
//! `S_qu(y)` is a sum of four weighted squared distances `w_k|y − c_k|²`, so
//! its minimizer is the weighted centroid of the centres. The closed form is
//! kept in the grouped shape (sideband terms plus a loss correction) and a
//! Nelder–Mead search over `(Re y, Im y)` checks it numerically.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::params::DerivedParams;
use crate::spectra::{coeffs, quadratic_terms, s_qu, validate_grid, CoeffSet};
use crate::{Error, Result};

/// Pieces of the closed-form optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalWeight {
    pub y: Complex64,
    /// `𝔹² = |B+|² + |B−|² + 𝔹e²`.
    pub total_weight: f64,
    /// `𝔹e² = (γe+/γ0+)|Be+|² + (γe−/γ0−)|Be−|²`.
    pub loss_weight: f64,
    /// Loss correction Δe; zero without losses.
    pub delta_e: Complex64,
}

pub fn optimal_weight(c: &CoeffSet, d: &DerivedParams) -> Result<OptimalWeight> {
    let half = Complex64::new(0.5, 0.0);
    let bp = c.b_plus.norm_sqr();
    let bm = c.b_minus.norm_sqr();
    let ep = d.loss_ratio_plus() * c.be_plus.norm_sqr();
    let em = d.loss_ratio_minus() * c.be_minus.norm_sqr();
    let loss_weight = ep + em;
    let total_weight = bp + bm + loss_weight;
    if !(total_weight > 0.0 && total_weight.is_finite()) {
        return Err(Error::DegenerateQuadratic);
    }
    let delta_e = (ep * (half - c.ye_plus) - em * (half + c.ye_minus)) / total_weight;
    let y =
        bp / total_weight * (half - c.y_plus) - bm / total_weight * (half + c.y_minus) + delta_e;
    Ok(OptimalWeight {
        y,
        total_weight,
        loss_weight,
        delta_e,
    })
}

/// Closed-form minimizer of `S_qu(y)`.
pub fn y_opt_analytic(c: &CoeffSet, d: &DerivedParams) -> Result<Complex64> {
    optimal_weight(c, d).map(|w| w.y)
}

/// Nelder–Mead on a function of two real variables.
///
/// Coefficients are the textbook ones: reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2. The initial simplex is the start point plus
/// axis steps of `initial_step`. Once the simplex diameter falls below the
/// tolerance the best vertex is probed with axis steps of that size; if a
/// probe improves by more than rounding noise, the search restarts from it
/// with a simplex of `restart_step`, otherwise it stops.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub restart_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl NelderMead {
    /// `tol` is relative to `max(1, |x_best|)`.
    pub fn new(tol: f64, scale: f64) -> Self {
        Self {
            tol,
            max_iter: 10_000,
            initial_step: 0.5 * tol * scale,
            restart_step: 0.1 * scale,
        }
    }

    fn simplex(f: &impl Fn([f64; 2]) -> f64, x: [f64; 2], h: f64) -> [([f64; 2], f64); 3] {
        let pts = [x, [x[0] + h, x[1]], [x[0], x[1] + h]];
        pts.map(|p| (p, f(p)))
    }

    pub fn minimize(&self, f: impl Fn([f64; 2]) -> f64, x0: [f64; 2]) -> Minimum {
        let mut s = Self::simplex(&f, x0, self.initial_step);
        for iter in 1..=self.max_iter {
            s.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = s[0];
            let diameter = dist(s[0].0, s[1].0)
                .max(dist(s[0].0, s[2].0))
                .max(dist(s[1].0, s[2].0));
            let scale = best.0[0].hypot(best.0[1]).max(1.0);
            if diameter < self.tol * scale {
                let h = self.tol * scale;
                let probe = [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]]
                    .into_iter()
                    .map(|[dx, dy]| {
                        let p = [best.0[0] + dx, best.0[1] + dy];
                        (p, f(p))
                    })
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .filter(|p| p.1 < best.1 - 64.0 * f64::EPSILON * best.1.abs());
                match probe {
                    Some((p, _)) => {
                        s = Self::simplex(&f, p, self.restart_step.max(h));
                        continue;
                    }
                    None => {
                        return Minimum {
                            x: best.0,
                            value: best.1,
                            iterations: iter,
                            converged: true,
                        }
                    }
                }
            }

            let centroid = lerp(s[0].0, s[1].0, 0.5);
            let worst = s[2];
            let reflected = lerp(centroid, worst.0, -REFLECT);
            let fr = f(reflected);
            if fr < s[0].1 {
                let expanded = lerp(centroid, worst.0, -EXPAND);
                let fe = f(expanded);
                s[2] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else if fr < s[1].1 {
                s[2] = (reflected, fr);
            } else {
                let (target, ft) = if fr < worst.1 { (reflected, fr) } else { worst };
                let contracted = lerp(centroid, target, CONTRACT);
                let fc = f(contracted);
                if fc < ft {
                    s[2] = (contracted, fc);
                } else {
                    for v in s.iter_mut().skip(1) {
                        let p = lerp(best.0, v.0, SHRINK);
                        *v = (p, f(p));
                    }
                }
            }
        }
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        Minimum {
            x: s[0].0,
            value: s[0].1,
            iterations: self.max_iter,
            converged: false,
        }
    }
}

/// Analytic and numeric optimum at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptResult {
    pub omega: f64,
    pub y_analytic: Complex64,
    pub y_numeric: Complex64,
    pub s_analytic: f64,
    pub s_numeric: f64,
    /// `|S_analytic − S_numeric| / S_analytic`.
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_TOL: f64 = 1e-9;

/// Minimizes `S_qu` numerically from `init` and records it next to the
/// closed form. Running out of iterations is reported via `converged`.
pub fn y_opt_numeric(
    c: &CoeffSet,
    d: &DerivedParams,
    init: Complex64,
    tol: f64,
) -> Result<OptResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let y_analytic = y_opt_analytic(c, d)?;
    let s_analytic = s_qu(c, d, y_analytic);
    let f = |x: [f64; 2]| s_qu(c, d, Complex64::new(x[0], x[1]));
    let nm = NelderMead::new(tol, init.norm().max(1.0));
    let m = nm.minimize(f, [init.re, init.im]);
    Ok(OptResult {
        omega: c.omega,
        y_analytic,
        y_numeric: Complex64::new(m.x[0], m.x[1]),
        s_analytic,
        s_numeric: m.value,
        relative_gap: (s_analytic - m.value).abs() / s_analytic,
        iterations: m.iterations,
        converged: m.converged,
    })
}

/// Both optimizers at every grid frequency, starting the numeric search
/// from `y = 0`.
pub fn optimal_sweep(d: &DerivedParams, grid: &[f64]) -> Result<Vec<OptResult>> {
    validate_grid(grid)?;
    grid.par_iter()
        .map(|&omega| {
            coeffs(d, omega)
                .and_then(|c| y_opt_numeric(&c, d, Complex64::new(0.0, 0.0), DEFAULT_TOL))
                .map_err(|e| Error::at(omega, e))
        })
        .collect()
}

/// Minimum of the quadratic, `Σ w_k|ȳ − c_k|²` at the weighted centroid ȳ.
pub fn s_qu_min(c: &CoeffSet, d: &DerivedParams) -> Result<f64> {
    let y = y_opt_analytic(c, d)?;
    Ok(quadratic_terms(c, d)
        .iter()
        .map(|&(w, centre)| w * (y - centre).norm_sqr())
        .sum())
}
