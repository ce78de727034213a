//! Sphere parameters shared by the curvature, area and Gauss-Bonnet modules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius `a`, noncommutative parameter `theta`, deformation `mu` and half
/// dimension `half_dim` (the space is `R^{2 half_dim}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereParams {
    pub a: f64,
    pub theta: f64,
    pub mu: f64,
    pub half_dim: u32,
    /// Skip the `theta_eff < a^2/2` window check.
    #[serde(default)]
    pub allow_out_of_window: bool,
}

impl SphereParams {
    /// Undeformed parameters, validated against the singularity-free window.
    pub fn new(a: f64, theta: f64, half_dim: u32) -> Result<Self> {
        Self::deformed(a, theta, 0.0, half_dim)
    }

    pub fn deformed(a: f64, theta: f64, mu: f64, half_dim: u32) -> Result<Self> {
        let p = SphereParams {
            a,
            theta,
            mu,
            half_dim,
            allow_out_of_window: false,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same parameters with the window check disabled (positivity is still enforced).
    pub fn unchecked_window(a: f64, theta: f64, half_dim: u32) -> Result<Self> {
        let p = SphereParams {
            a,
            theta,
            mu: 0.0,
            half_dim,
            allow_out_of_window: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_half_dim(mut self, half_dim: u32) -> Result<Self> {
        self.half_dim = half_dim;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {}", self.a)));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive, got {}",
                self.theta
            )));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be nonnegative, got {}", self.mu)));
        }
        if self.half_dim == 0 {
            return Err(Error::InvalidParameter("half dimension must be at least 1".into()));
        }
        let limit = self.a * self.a / 2.0;
        if !self.allow_out_of_window && self.theta_eff() >= limit {
            return Err(Error::OutOfWindow {
                a: self.a,
                theta_eff: self.theta_eff(),
                limit,
            });
        }
        Ok(())
    }

    /// `sqrt(theta^2 + mu^2)`; equals `theta` for the undeformed space.
    pub fn theta_eff(&self) -> f64 {
        if self.mu == 0.0 {
            self.theta
        } else {
            self.theta.hypot(self.mu)
        }
    }

    /// `lambda = a^2 / theta_eff`.
    pub fn lambda(&self) -> f64 {
        self.a * self.a / self.theta_eff()
    }

    pub fn a2(&self) -> f64 {
        self.a * self.a
    }

    /// Distance of `theta_eff` from the upper window edge relative to the edge.
    pub fn window_margin(&self) -> f64 {
        1.0 - self.theta_eff() / (self.a2() / 2.0)
    }
}
