//! Exact discretisation of the linear quadrature dynamics.
//!
//! The state is `z = (c+, c−, d, J+, J−)` where `J± = ∫ b± dt` over the
//! current output interval. Over an interval of length Δ the update
//! `z ← Φ z + L ξ + ψ f` is exact in law for white-noise inputs: Φ is the
//! matrix exponential of the drift, `L Lᵀ` the integrated noise covariance,
//! and ψ the response to a force held constant over the interval. After
//! each step `J±/Δ` is the interval-averaged output and `J±` are reset.

use nalgebra::{SMatrix, SVector, SymmetricEigen};

use crate::params::DerivedParams;
use crate::{Error, Result};

pub type Mat5 = SMatrix<f64, 5, 5>;
pub type Vec5 = SVector<f64, 5>;

/// Index of the mechanical coordinate in the state vector.
pub const D_INDEX: usize = 2;

/// Drift Ā, noise input matrix B and channel intensities Q for inputs
/// `(a+, a−, e+, e−, q)`.
pub fn system_matrices(d: &DerivedParams) -> (Mat5, Mat5, Vec5) {
    let c0 = d.c0();
    let mut a = Mat5::zeros();
    a[(0, 0)] = -d.gamma_plus;
    a[(0, 2)] = -d.eta_plus * c0;
    a[(1, 1)] = -d.gamma_minus;
    a[(1, 2)] = d.eta_minus * c0;
    a[(2, 0)] = d.eta_plus * c0;
    a[(2, 1)] = d.eta_minus * c0;
    a[(2, 2)] = -d.gamma_m;
    a[(3, 0)] = (2.0 * d.gamma0_plus).sqrt();
    a[(4, 1)] = (2.0 * d.gamma0_minus).sqrt();

    let mut b = Mat5::zeros();
    b[(0, 0)] = (2.0 * d.gamma0_plus).sqrt();
    b[(0, 2)] = (2.0 * d.gamma_e_plus).sqrt();
    b[(1, 1)] = (2.0 * d.gamma0_minus).sqrt();
    b[(1, 3)] = (2.0 * d.gamma_e_minus).sqrt();
    b[(2, 4)] = (2.0 * d.gamma_m).sqrt();
    b[(3, 0)] = -1.0;
    b[(4, 1)] = -1.0;

    let q = Vec5::new(1.0, 1.0, 1.0, 1.0, d.n_thermal + 0.5);
    (a, b, q)
}

/// Van Loan: Φ(h) and the noise covariance accumulated over `h`.
fn van_loan(a: &Mat5, bqb: &Mat5, h: f64) -> (Mat5, Mat5) {
    let mut m = SMatrix::<f64, 10, 10>::zeros();
    m.fixed_view_mut::<5, 5>(0, 0).copy_from(&(-a * h));
    m.fixed_view_mut::<5, 5>(0, 5).copy_from(&(bqb * h));
    m.fixed_view_mut::<5, 5>(5, 5)
        .copy_from(&(a.transpose() * h));
    let e = m.exp();
    let phi = e.fixed_view::<5, 5>(5, 5).transpose();
    let cov = phi * e.fixed_view::<5, 5>(0, 5);
    (phi, 0.5 * (cov + cov.transpose()))
}

/// Covariance over Δ by Van Loan at a short step followed by repeated
/// doubling `Σ(2h) = Σ(h) + Φ(h) Σ(h) Φ(h)ᵀ`, with Φ recomputed at every
/// level rather than squared.
pub fn noise_covariance(a: &Mat5, bqb: &Mat5, delta: f64) -> Mat5 {
    let norm = a.abs().row_sum().max();
    let mut levels = 0u32;
    while norm * delta / 2f64.powi(levels as i32) > 1e-2 && levels < 60 {
        levels += 1;
    }
    let mut h = delta / 2f64.powi(levels as i32);
    let (_, mut cov) = van_loan(a, bqb, h);
    for _ in 0..levels {
        let phi = (a * h).exp();
        cov += phi * cov * phi.transpose();
        cov = 0.5 * (cov + cov.transpose());
        h *= 2.0;
    }
    cov
}

/// `Φ(Δ − s1)·ψ(s1 − s0)`: response at the end of an interval to a unit
/// force applied over `[s0, s1] ⊂ [0, Δ]`.
fn partial_drive(a: &Mat5, delta: f64, s0: f64, s1: f64) -> Vec5 {
    let mut m = SMatrix::<f64, 6, 6>::zeros();
    m.fixed_view_mut::<5, 5>(0, 0).copy_from(&(a * (s1 - s0)));
    m[(D_INDEX, 5)] = s1 - s0;
    let psi: Vec5 = m.exp().fixed_view::<5, 1>(0, 5).into();
    (a * (delta - s1)).exp() * psi
}

/// One-interval exact update.
#[derive(Debug, Clone)]
pub struct ExactStepper {
    pub delta: f64,
    pub drift: Mat5,
    pub phi: Mat5,
    /// `L` with `L Lᵀ` the interval noise covariance.
    pub noise: Mat5,
    /// Response to a unit force held over a whole interval.
    pub drive: Vec5,
}

impl ExactStepper {
    pub fn new(d: &DerivedParams, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::SimConfig(format!(
                "output interval must be positive, got {delta}"
            )));
        }
        let (a, b, q) = system_matrices(d);
        let bqb = b * Mat5::from_diagonal(&q) * b.transpose();
        let cov = noise_covariance(&a, &bqb, delta);
        let eig = SymmetricEigen::new(cov);
        let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
        let noise = eig.eigenvectors * Mat5::from_diagonal(&sqrt_vals);
        let phi = (a * delta).exp();
        if phi.iter().any(|v| !v.is_finite()) || noise.iter().any(|v| !v.is_finite()) {
            return Err(Error::SimConfig("transition matrix is not finite".into()));
        }
        Ok(Self {
            delta,
            drift: a,
            phi,
            noise,
            drive: partial_drive(&a, delta, 0.0, delta),
        })
    }

    /// Unit-force response for a force active over `[s0, s1]` within one
    /// interval.
    pub fn partial_drive(&self, s0: f64, s1: f64) -> Vec5 {
        partial_drive(&self.drift, self.delta, s0, s1)
    }

    /// Advances one interval and returns the averaged outputs `(b̄+, b̄−)`.
    #[inline]
    pub fn step(&self, z: &mut Vec5, xi: Option<&Vec5>, force: Option<Vec5>) -> (f64, f64) {
        let mut next = self.phi * *z;
        if let Some(xi) = xi {
            next += self.noise * xi;
        }
        if let Some(f) = force {
            next += f;
        }
        let out = (next[3] / self.delta, next[4] / self.delta);
        next[3] = 0.0;
        next[4] = 0.0;
        *z = next;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, table1_preset};

    fn rel_max(a: &Mat5, b: &Mat5) -> f64 {
        (a - b).abs().max() / b.abs().max()
    }

    #[test]
    fn doubling_matches_direct_van_loan() {
        let d = derive(&table1_preset()).unwrap();
        let (a, b, q) = system_matrices(&d);
        let bqb = b * Mat5::from_diagonal(&q) * b.transpose();
        // at a step short enough for Van Loan on its own
        let delta = 1e-7;
        let (_, direct) = van_loan(&a, &bqb, delta);
        let doubled = noise_covariance(&a, &bqb, delta);
        assert!(rel_max(&doubled, &direct) < 1e-10);
    }

    #[test]
    fn covariance_is_positive_semidefinite() {
        let d = derive(&table1_preset()).unwrap();
        let s = ExactStepper::new(&d, 2e-5).unwrap();
        let cov = s.noise * s.noise.transpose();
        assert!(SymmetricEigen::new(cov).eigenvalues.min() > -1e-9 * cov.max());
        // the output channels see white vacuum noise: Var(J) ≈ Δ
        assert!((cov[(3, 3)] / 2e-5 - 1.0).abs() < 0.5);
    }

    #[test]
    fn partial_drives_compose() {
        let d = derive(&table1_preset()).unwrap();
        let s = ExactStepper::new(&d, 2e-5).unwrap();
        let split = s.partial_drive(0.0, 0.7e-5) + s.partial_drive(0.7e-5, 2e-5);
        assert!((split - s.drive).abs().max() < 1e-12 * s.drive.abs().max());
    }

    #[test]
    fn homogeneous_system_stays_at_zero() {
        let d = derive(&table1_preset()).unwrap();
        let s = ExactStepper::new(&d, 2e-5).unwrap();
        let mut z = Vec5::zeros();
        for _ in 0..100 {
            assert_eq!(s.step(&mut z, None, None), (0.0, 0.0));
        }
    }
}
