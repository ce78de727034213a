//! The constant-curvature condition for a radial conformal factor `h`,
//! `h * [Lap h - (m/2)(h^{-1} * sum (d_i h)^2 + sum d_i h * h^{-1} * d_i h)] = const`,
//! evaluated with the second-order radial calculus.
//!
//! The non-radial pieces are reduced to radial ones through the Leibniz rule:
//! `sum d_i f * d_i g = B(f, g) = [Lap(f*g) - Lap f * g - f * Lap g]/2`, and
//! similarly for the three-factor term.

use super::epsilon::{epsilon_closed_4d_fn, EpsilonConstants};
use super::{star_inv_radial, star_mul_radial, RadialFn};
use crate::error::{Error, Result};

struct Calc {
    theta: f64,
    m: u32,
}

impl Calc {
    fn mul(&self, f: &RadialFn, g: &RadialFn) -> Result<RadialFn> {
        star_mul_radial(f, g, self.theta, self.m)
    }

    fn lap(&self, f: &RadialFn) -> RadialFn {
        f.laplacian(self.m)
    }

    fn bracket(&self, f: &RadialFn, g: &RadialFn) -> Result<RadialFn> {
        let whole = self.lap(&self.mul(f, g)?);
        let parts = self.mul(&self.lap(f), g)?.add(&self.mul(f, &self.lap(g))?);
        Ok(whole.sub(&parts).scale(0.5))
    }
}

/// `h * [Lap h - (m/2)(h^{-1} * Q1 + Q2)]` on `R^{2m}`; the scalar curvature is
/// `2(2m - 1)` times this. For `h0` it equals `m/A^2 + O(theta^2)`.
pub fn constant_curvature_lhs(h: &RadialFn, theta: f64, m: u32) -> Result<RadialFn> {
    let c = Calc { theta, m };
    let g = star_inv_radial(h, theta, m)?;
    let lh = c.lap(h);
    let q1 = c.bracket(h, h)?;
    let hgh = c.mul(&c.mul(h, &g)?, h)?;
    let three = c
        .lap(&hgh)
        .sub(&c.mul(&c.mul(&lh, &g)?, h)?)
        .sub(&c.mul(&c.mul(h, &c.lap(&g))?, h)?)
        .sub(&c.mul(&c.mul(h, &g)?, &lh)?)
        .scale(0.5);
    let q2 = three
        .sub(&c.mul(&c.bracket(h, &g)?, h)?)
        .sub(&c.mul(h, &c.bracket(&g, h)?)?);
    let inner = lh.sub(&c.mul(&g, &q1)?.add(&q2).scale(0.5 * f64::from(m)));
    c.mul(h, &inner)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty radius grid".into()));
    }
    Ok(())
}

/// `max |LHS - 2/A^2|` over `grid` for an arbitrary 4D factor `h`.
pub fn constant_curvature_residual_of(h: &RadialFn, a: f64, theta: f64, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let lhs = constant_curvature_lhs(h, theta, 2)?;
    let target = 2.0 / (a * a);
    let mut worst: f64 = 0.0;
    for &r in grid {
        worst = worst.max((lhs.value(r)? - target).abs());
    }
    Ok(worst)
}

/// Residual of the 4D condition with `C = 12/A^2` and `h = h0 + theta^2 eps`,
/// `eps` the closed form with default constants.
pub fn constant_curvature_residual(a: f64, theta: f64, grid: &[f64]) -> Result<f64> {
    let eps = epsilon_closed_4d_fn(a, EpsilonConstants::defaults(a))?;
    let h = RadialFn::sphere_factor(a).add(&eps.scale(theta * theta));
    constant_curvature_residual_of(&h, a, theta, grid)
}

/// Source of the linearised equation for `eps` on `R^{2m}`, obtained numerically:
/// the `theta^2` coefficient of the left side at `h = h0`, divided by `h0`.
/// Richardson extrapolation over `theta0` and `theta0/2` removes the `theta^4` part.
pub fn source_from_lhs(r: f64, a: f64, m: u32, theta0: f64) -> Result<f64> {
    let h0 = RadialFn::sphere_factor(a);
    let base = f64::from(m) / (a * a);
    let d = |t: f64| -> Result<f64> { Ok((constant_curvature_lhs(&h0, t, m)?.value(r)? - base) / (t * t)) };
    let (d1, d2) = (d(theta0)?, d(theta0 / 2.0)?);
    Ok((4.0 * d2 - d1) / 3.0 / h0.value(r)?)
}

/// `|f * f^{-1} - 1|` at `r`.
pub fn star_inverse_defect(f: &RadialFn, theta: f64, m: u32, r: f64) -> Result<f64> {
    let inv = star_inv_radial(f, theta, m)?;
    Ok((star_mul_radial(f, &inv, theta, m)?.value(r)? - 1.0).abs())
}
