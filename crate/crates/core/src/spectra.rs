//! Per-frequency coefficient algebra and the analytic noise spectral
//! densities.
//!
//! Spectral densities are in the normalized-force units used throughout the
//! crate: optical vacuum channels carry unit weight and the thermal term is
//! `2γ_m(n_T + 1/2)`. Frequencies are angular, in rad/s.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::optimizer::y_opt_analytic;
use crate::params::DerivedParams;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex coefficients at one frequency.
///
/// `omega` is the real frequency. `decay` is nonzero only for coefficients
/// evaluated off the real axis at `w = Ω + i·decay` (see [`coeffs_at`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffSet {
    pub omega: f64,
    pub decay: f64,
    /// Optical damping G.
    pub g: Complex64,
    /// Γm = γ_m + G.
    pub gamma_total: Complex64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    pub be_plus: Complex64,
    pub be_minus: Complex64,
    pub y_plus: Complex64,
    pub y_minus: Complex64,
    pub ye_plus: Complex64,
    pub ye_minus: Complex64,
    pub xi_plus: Complex64,
    pub xi_minus: Complex64,
    pub mu_plus: Complex64,
    pub mu_minus: Complex64,
}

impl CoeffSet {
    /// Every complex coefficient, in field order. Handy for symmetry checks.
    pub fn all(&self) -> [(&'static str, Complex64); 16] {
        [
            ("G", self.g),
            ("Gamma_m", self.gamma_total),
            ("A+", self.a_plus),
            ("A-", self.a_minus),
            ("B+", self.b_plus),
            ("B-", self.b_minus),
            ("Be+", self.be_plus),
            ("Be-", self.be_minus),
            ("Y+", self.y_plus),
            ("Y-", self.y_minus),
            ("Ye+", self.ye_plus),
            ("Ye-", self.ye_minus),
            ("xi+", self.xi_plus),
            ("xi-", self.xi_minus),
            ("mu+", self.mu_plus),
            ("mu-", self.mu_minus),
        ]
    }
}

/// Optical damping `G(w)`, evaluated at a possibly complex frequency.
pub fn optical_damping(d: &DerivedParams, w: Complex64) -> Complex64 {
    d.c0_sq
        * (d.eta_plus * d.eta_plus / (d.gamma_plus - I * w)
            - d.eta_minus * d.eta_minus / (d.gamma_minus - I * w))
}

/// Coefficients at real frequency `omega`.
pub fn coeffs(d: &DerivedParams, omega: f64) -> Result<CoeffSet> {
    coeffs_at(d, Complex64::new(omega, 0.0))
}

/// Coefficients at complex frequency `w = Ω + iσ`.
///
/// With the `e^{-iΩt}` convention used here, `w` with `σ > 0` corresponds to
/// a transform weighted by `e^{-σt}`, which the oracle uses for responses
/// that do not decay.
pub fn coeffs_at(d: &DerivedParams, w: Complex64) -> Result<CoeffSet> {
    let c0 = d.c0();
    let kp = d.eta_plus * c0;
    let km = d.eta_minus * c0;
    if !(kp.is_finite() && kp != 0.0) {
        return Err(Error::VanishingCoupling { which: "η+" });
    }
    if !(km.is_finite() && km != 0.0) {
        return Err(Error::VanishingCoupling { which: "η−" });
    }

    let g = optical_damping(d, w);
    let gamma_total = d.gamma_m + g;
    let mech = gamma_total - I * w;
    let s2p = (2.0 * d.gamma0_plus).sqrt();
    let s2m = (2.0 * d.gamma0_minus).sqrt();

    let a_plus = s2p * kp / (d.gamma_plus - I * w);
    let a_minus = s2m * km / (d.gamma_minus - I * w);
    let b_plus = (d.gamma0_plus - d.gamma_e_plus + I * w) * mech / (s2p * kp);
    let b_minus = (d.gamma0_minus - d.gamma_e_minus + I * w) * mech / (s2m * km);
    let be_plus = s2p * mech / kp;
    let be_minus = s2m * mech / km;

    let xi_plus = (d.gamma0_plus - d.gamma_e_plus + I * w) / (d.gamma_plus - I * w);
    let xi_minus = (d.gamma0_minus - d.gamma_e_minus + I * w) / (d.gamma_minus - I * w);
    let mu_plus = 2.0 * (d.gamma0_plus * d.gamma_e_plus).sqrt() / (d.gamma_plus - I * w);
    let mu_minus = 2.0 * (d.gamma0_minus * d.gamma_e_minus).sqrt() / (d.gamma_minus - I * w);

    Ok(CoeffSet {
        omega: w.re,
        decay: w.im,
        g,
        gamma_total,
        a_plus,
        a_minus,
        b_plus,
        b_minus,
        be_plus,
        be_minus,
        y_plus: a_plus / b_plus,
        y_minus: a_minus / b_minus,
        ye_plus: a_plus / be_plus,
        ye_minus: a_minus / be_minus,
        xi_plus,
        xi_minus,
        mu_plus,
        mu_minus,
    })
}

/// The four weights and centres of the quantum-noise quadratic:
/// `S_qu(y) = Σ_k w_k |y − c_k|²`.
pub(crate) fn quadratic_terms(c: &CoeffSet, d: &DerivedParams) -> [(f64, Complex64); 4] {
    let half = Complex64::new(0.5, 0.0);
    [
        (c.b_plus.norm_sqr(), half - c.y_plus),
        (c.b_minus.norm_sqr(), -half - c.y_minus),
        (d.loss_ratio_plus() * c.be_plus.norm_sqr(), half - c.ye_plus),
        (
            d.loss_ratio_minus() * c.be_minus.norm_sqr(),
            -half - c.ye_minus,
        ),
    ]
}

/// Quantum part of the force-noise spectral density for weight `y`.
pub fn s_qu(c: &CoeffSet, d: &DerivedParams, y: Complex64) -> f64 {
    quadratic_terms(c, d)
        .iter()
        .map(|&(w, centre)| w * (y - centre).norm_sqr())
        .sum()
}

/// Thermal part `2γ_m(n_T + 1/2)`, independent of frequency.
pub fn s_thermal(d: &DerivedParams) -> f64 {
    2.0 * d.gamma_m * (d.n_thermal + 0.5)
}

/// Standard-quantum-limit reference `2·sqrt(γ_m² + Ω²)`.
pub fn s_sql(gamma_m: f64, omega: f64) -> f64 {
    2.0 * gamma_m.hypot(omega)
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// True when the ± modes are identical (coupling, input and loss rates).
pub fn is_symmetric(d: &DerivedParams) -> bool {
    rel_eq(d.eta_plus, d.eta_minus)
        && rel_eq(d.gamma0_plus, d.gamma0_minus)
        && rel_eq(d.gamma_e_plus, d.gamma_e_minus)
}

/// Measurement strength `𝒦(Ω) = 4γη²C0²/(γ² + Ω²)` of the symmetric
/// lossless system, with γ the sideband half-width.
pub fn kappa_sym(d: &DerivedParams, omega: f64) -> Result<f64> {
    if !is_symmetric(d) {
        return Err(Error::Precondition(format!(
            "closed form needs symmetric modes, got η+ = {}, η− = {}, γ0+ = {}, γ0− = {}",
            d.eta_plus, d.eta_minus, d.gamma0_plus, d.gamma0_minus
        )));
    }
    if !d.is_lossless() {
        return Err(Error::Precondition(format!(
            "closed form needs γe± = 0, got γe+ = {}, γe− = {}",
            d.gamma_e_plus, d.gamma_e_minus
        )));
    }
    let g = d.gamma_plus;
    Ok(4.0 * g * d.eta_plus.powi(2) * d.c0_sq / (g * g + omega * omega))
}

/// Closed-form `S_qu = (γ_m² + Ω²)/𝒦` for the symmetric lossless system at
/// its optimum `y = −Y`.
pub fn s_qu_sym_lossless(d: &DerivedParams, omega: f64) -> Result<f64> {
    let k = kappa_sym(d, omega)?;
    Ok((d.gamma_m * d.gamma_m + omega * omega) / k)
}

/// Near-resonant lossless estimate together with whether `|Ω|` is inside
/// the `|Ω| < 0.1·min(γ±)` window where it applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantEstimate {
    pub value: f64,
    pub in_regime: bool,
    /// `G ≈ η+²C0²/γ+ − η−²C0²/γ−`.
    pub g: f64,
    /// `G+ = η+²C0²/γ+ + η−²C0²/γ−`.
    pub g_plus: f64,
}

/// Optimal lossless `S_qu ≈ ((γ_m − G)² + Ω²)/(2G+)` for `|Ω| ≪ γ±`.
pub fn s_qu_nonsym_resonant(d: &DerivedParams, omega: f64) -> Result<ResonantEstimate> {
    if !d.is_lossless() {
        return Err(Error::Precondition(format!(
            "resonant form needs γe± = 0, got γe+ = {}, γe− = {}",
            d.gamma_e_plus, d.gamma_e_minus
        )));
    }
    let p = d.eta_plus.powi(2) * d.c0_sq / d.gamma_plus;
    let m = d.eta_minus.powi(2) * d.c0_sq / d.gamma_minus;
    let (g, g_plus) = (p - m, p + m);
    Ok(ResonantEstimate {
        value: ((d.gamma_m - g).powi(2) + omega * omega) / (2.0 * g_plus),
        in_regime: omega.abs() < 0.1 * d.gamma_plus.min(d.gamma_minus),
        g,
        g_plus,
    })
}

/// How the post-processing weight is chosen at each frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum YPolicy {
    AnalyticOptimal,
    Fixed(Complex64),
    /// `(Ω, y)` pairs with strictly increasing Ω; linearly interpolated.
    Table(Vec<(f64, Complex64)>),
}

impl YPolicy {
    pub fn resolve(&self, c: &CoeffSet, d: &DerivedParams) -> Result<Complex64> {
        match self {
            YPolicy::AnalyticOptimal => y_opt_analytic(c, d),
            YPolicy::Fixed(y) => Ok(*y),
            YPolicy::Table(t) => interpolate(t, c.omega),
        }
    }
}

fn interpolate(table: &[(f64, Complex64)], omega: f64) -> Result<Complex64> {
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Precondition("empty y table".into())),
    };
    if omega < first.0 || omega > last.0 {
        return Err(Error::Precondition(format!(
            "y table covers [{}, {}], not {omega}",
            first.0, last.0
        )));
    }
    let k = table.partition_point(|&(w, _)| w <= omega);
    if k == 0 || k >= table.len() {
        return Ok(if k == 0 { first.1 } else { last.1 });
    }
    let (w0, y0) = table[k - 1];
    let (w1, y1) = table[k];
    let t = (omega - w0) / (w1 - w0);
    Ok(y0 + (y1 - y0) * t)
}

/// Real outputs at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub omega: f64,
    /// `Ω·τ/(2π)`.
    pub omega_tau_over_2pi: f64,
    pub y: Complex64,
    pub s_qu: f64,
    pub s_t: f64,
    /// `S_qu + S_T`.
    pub s_f: f64,
    pub s_sql: f64,
    /// `S_qu / S_SQL`.
    pub r: f64,
    pub scenario: Option<String>,
}

/// Checks that a grid is finite and strictly increasing.
pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if let Some(w) = grid.iter().find(|w| !w.is_finite()) {
        return Err(Error::Grid(format!("non-finite frequency {w}")));
    }
    if let Some(p) = grid.windows(2).find(|p| p[1] <= p[0]) {
        return Err(Error::Grid(format!(
            "frequencies must be strictly increasing, got {} then {}",
            p[0], p[1]
        )));
    }
    Ok(())
}

pub fn spectrum_point(d: &DerivedParams, omega: f64, policy: &YPolicy) -> Result<SpectrumRecord> {
    let c = coeffs(d, omega)?;
    let y = policy.resolve(&c, d)?;
    let s_qu = s_qu(&c, d, y);
    let s_t = s_thermal(d);
    let s_sql = s_sql(d.gamma_m, omega);
    Ok(SpectrumRecord {
        omega,
        omega_tau_over_2pi: omega * d.tau / (2.0 * PI),
        y,
        s_qu,
        s_t,
        s_f: s_qu + s_t,
        s_sql,
        r: s_qu / s_sql,
        scenario: None,
    })
}

/// One record per grid frequency, in grid order.
pub fn spectrum_sweep(
    d: &DerivedParams,
    grid: &[f64],
    policy: &YPolicy,
) -> Result<Vec<SpectrumRecord>> {
    validate_grid(grid)?;
    grid.par_iter()
        .map(|&omega| spectrum_point(d, omega, policy).map_err(|e| Error::at(omega, e)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

/// Frequency grid in the dimensionless units `Ω·τ/(2π)`, so one spec
/// serves any pulse duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: Spacing,
    pub points: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Default for GridSpec {
    /// 400 log-spaced points over `Ω·τ/(2π) ∈ [10⁻³, 10]`.
    fn default() -> Self {
        Self {
            spacing: Spacing::Log,
            points: 400,
            lo: 1e-3,
            hi: 10.0,
        }
    }
}

impl GridSpec {
    pub fn log(points: usize, lo: f64, hi: f64) -> Self {
        Self {
            spacing: Spacing::Log,
            points,
            lo,
            hi,
        }
    }

    pub fn linear(points: usize, lo: f64, hi: f64) -> Self {
        Self {
            spacing: Spacing::Linear,
            points,
            lo,
            hi,
        }
    }

    /// Grid points in the dimensionless units.
    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::Grid(format!("bounds must be finite: {self}")));
        }
        if self.points > 1 && self.lo >= self.hi {
            return Err(Error::Grid(format!("need lo < hi: {self}")));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(Error::Grid(format!("log grid needs lo > 0: {self}")));
        }
        let n = self.points;
        let at = |k: usize| -> f64 {
            if k + 1 == n {
                return self.hi;
            }
            let t = if n > 1 {
                k as f64 / (n - 1) as f64
            } else {
                0.0
            };
            match self.spacing {
                Spacing::Log => self.lo * (self.hi / self.lo).powf(t),
                Spacing::Linear => self.lo + (self.hi - self.lo) * t,
            }
        };
        if n == 1 {
            return Ok(vec![self.lo]);
        }
        Ok((0..n).map(at).collect())
    }

    /// Grid points in rad/s for signal duration `tau`.
    pub fn omegas(&self, tau: f64) -> Result<Vec<f64>> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Grid(format!("τ must be positive, got {tau}")));
        }
        let scale = 2.0 * PI / tau;
        Ok(self.nodes()?.into_iter().map(|x| x * scale).collect())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.spacing {
            Spacing::Log => "log",
            Spacing::Linear => "linear",
        };
        write!(f, "{s}:{}:{}:{}", self.points, self.lo, self.hi)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// Parses `{log|linear}:N:lo:hi`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, n, lo, hi] = parts[..] else {
            return Err(Error::Grid(format!(
                "expected {{log|linear}}:N:lo:hi, got `{s}`"
            )));
        };
        let spacing = match kind {
            "log" => Spacing::Log,
            "linear" | "lin" => Spacing::Linear,
            other => return Err(Error::Grid(format!("unknown spacing `{other}`"))),
        };
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::Grid(format!("bad bound `{v}`: {e}")))
        };
        let points = n
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Grid(format!("bad point count `{n}`: {e}")))?;
        let spec = GridSpec {
            spacing,
            points,
            lo: num(lo)?,
            hi: num(hi)?,
        };
        spec.nodes()?;
        Ok(spec)
    }
}
