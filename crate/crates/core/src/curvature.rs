//! Scalar curvature of the 2D and 4D Moyal spheres on the diagonal basis,
//! and the profiles `eta` and `Lambda` obtained by replacing star inverses
//! with ordinary reciprocals.

use serde::Serialize;

use crate::diag_series::DiagSeries;
use crate::error::{Error, Result};
use crate::params::SphereParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dimension {
    Two,
    Four,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSeries {
    pub params: SphereParams,
    pub dim: Dimension,
}

impl CurvatureSeries {
    /// Coefficient at total level `k`.
    pub fn coeff(&self, k: u64) -> f64 {
        let a2 = self.params.a2();
        let t = self.params.theta_eff();
        let k = k as f64;
        match self.dim {
            Dimension::Two => {
                let a4 = a2 * a2;
                2.0 / a2 - 2.0 * t * (a2 + t) / (a4 * (2.0 * t * k + a2 + 3.0 * t))
                    + 2.0 * t * (a2 - t) / (a4 * (2.0 * t * k + a2 - t))
            }
            Dimension::Four => {
                12.0 / a2 + 6.0 * t / (a2 * (a2 + 2.0 * t * k))
                    - 6.0 * t / (a2 * (a2 + 4.0 * t + 2.0 * t * k))
            }
        }
    }

    /// Curvature of the round sphere of the same radius.
    pub fn classical(&self) -> f64 {
        match self.dim {
            Dimension::Two => 2.0 / self.params.a2(),
            Dimension::Four => 12.0 / self.params.a2(),
        }
    }

    pub fn coeff_vec(&self, n: usize) -> Vec<f64> {
        (0..n as u64).map(|k| self.coeff(k)).collect()
    }

    pub fn to_series(&self) -> Result<DiagSeries> {
        let me = *self;
        DiagSeries::from_fn(self.params.theta_eff(), self.params.half_dim, move |k| me.coeff(k))
    }
}

pub fn s2_coeffs(params: &SphereParams) -> Result<CurvatureSeries> {
    params.validate()?;
    if params.half_dim != 1 {
        return Err(Error::HalfDim {
            expected: 1,
            got: params.half_dim,
        });
    }
    Ok(CurvatureSeries {
        params: *params,
        dim: Dimension::Two,
    })
}

pub fn s4_coeffs(params: &SphereParams) -> Result<CurvatureSeries> {
    params.validate()?;
    if params.half_dim != 2 {
        return Err(Error::HalfDim {
            expected: 2,
            got: params.half_dim,
        });
    }
    Ok(CurvatureSeries {
        params: *params,
        dim: Dimension::Four,
    })
}

/// One plane's contribution to the unreduced 4D double sum at `(m, n)`:
/// `(6/theta)(phi_m+psi_n){[-(4m+2)phi_m + 2m phi_(m-1) + 2(m+1) phi_(m+1)] - ...}`.
fn plane_term(phi: &dyn Fn(u64) -> f64, other: f64, m: u64, theta: f64) -> Result<f64> {
    let pm = phi(m);
    let pp = phi(m + 1);
    let d0 = pm + other;
    let dp = pp + other;
    let mf = m as f64;
    let mut lap = -(4.0 * mf + 2.0) * pm + 2.0 * (mf + 1.0) * pp;
    let mut sq = (mf + 1.0) * (pp - pm).powi(2) * (1.0 / nonzero(d0)? + 1.0 / nonzero(dp)?);
    if m > 0 {
        let pl = phi(m - 1);
        lap += 2.0 * mf * pl;
        sq += mf * (pm - pl).powi(2) * (1.0 / d0 + 1.0 / nonzero(pl + other)?);
    }
    Ok(6.0 / theta * d0 * (lap - sq))
}

fn nonzero(d: f64) -> Result<f64> {
    if d == 0.0 {
        Err(Error::Pole("phi_m + psi_n vanishes".into()))
    } else {
        Ok(d)
    }
}

/// Unreduced 4D curvature coefficient for a separable conformal factor
/// `h = sum (phi_m + psi_n) f_mm g_nn`.
pub fn s4_separable_oracle<'a>(
    phi: &'a dyn Fn(u64) -> f64,
    psi: &'a dyn Fn(u64) -> f64,
    params: &SphereParams,
) -> impl Fn(u64, u64) -> Result<f64> + 'a {
    let theta = params.theta_eff();
    move |m, n| Ok(plane_term(phi, psi(n), m, theta)? + plane_term(psi, phi(m), n, theta)?)
}

/// `phi_m = (4 theta m + 2 theta + A^2)/(4 A^2)`, one plane's share of the sphere factor.
pub fn sphere_plane_coeff(params: &SphereParams) -> impl Fn(u64) -> f64 {
    let (a2, t) = (params.a2(), params.theta_eff());
    move |m| (4.0 * t * m as f64 + 2.0 * t + a2) / (4.0 * a2)
}

fn check_profile(r: f64, lam: f64, theta: f64) -> Result<()> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    if !(lam > 0.0 && theta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda and theta must be positive, got {lam}, {theta}"
        )));
    }
    Ok(())
}

/// `eta = 1 - (lam+1)/(lam (r^2/theta + lam + 2)) + (lam-1)/(lam (r^2/theta + lam - 2))`.
pub fn eta(r: f64, lam: f64, theta: f64) -> Result<f64> {
    check_profile(r, lam, theta)?;
    let x = r * r / theta;
    let d = x + lam - 2.0;
    if d.abs() <= 4.0 * f64::EPSILON * (x + lam) {
        return Err(Error::Pole(format!("r^2/theta + lambda - 2 = 0 at r = {r}")));
    }
    Ok(1.0 - (lam + 1.0) / (lam * (x + lam + 2.0)) + (lam - 1.0) / (lam * d))
}

/// `Lambda = 1 + theta/(2(r^2 + lam theta - 2 theta)) - theta/(2(r^2 + lam theta + 2 theta))`.
pub fn lambda_big(r: f64, lam: f64, theta: f64) -> Result<f64> {
    check_profile(r, lam, theta)?;
    let base = r * r + lam * theta;
    let d = base - 2.0 * theta;
    if d.abs() <= 4.0 * f64::EPSILON * base {
        return Err(Error::Pole(format!("r^2 + (lambda - 2) theta = 0 at r = {r}")));
    }
    Ok(1.0 + theta / (2.0 * d) - theta / (2.0 * (base + 2.0 * theta)))
}
