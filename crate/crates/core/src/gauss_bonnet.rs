//! Total curvature of the 2D Moyal sphere.
//!
//! `int S * dsigma = 2 pi theta sum_m t_m` with
//! `t_m = 8(2 theta A^2 m + A^4 - 2 theta^2 + theta A^2) / [(u)(u - 2 theta)(u + 2 theta)]`,
//! `u = 2 theta m + A^2 + theta`. With `B_m = 1/(2 m theta + A^2 - theta)` the
//! summand telescopes and the total is `8 pi` for every admissible `theta`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::params::SphereParams;
use crate::summation::CompensatedSum;

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GBTerm {
    pub m: u64,
    pub value: f64,
    /// `B_m`.
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbDirect {
    pub n: u64,
    /// `2 pi theta sum_{m<N} t_m`, summed in ascending order.
    pub partial: f64,
    /// Upper bound on the neglected remainder, so `partial <= total <= partial + tail_bound`.
    pub tail_bound: f64,
    /// `partial` plus the midpoint of the remainder bracket.
    pub estimate: f64,
    /// Half-width of the remainder bracket; `|estimate - total| <= estimate_error`.
    pub estimate_error: f64,
}

fn check(params: &SphereParams) -> Result<()> {
    params.validate()?;
    if params.half_dim != 1 {
        return Err(Error::HalfDim {
            expected: 1,
            got: params.half_dim,
        });
    }
    Ok(())
}

fn b(params: &SphereParams, m: u64) -> f64 {
    let t = params.theta_eff();
    1.0 / (2.0 * m as f64 * t + params.a2() - t)
}

pub fn gb_term(params: &SphereParams, m: u64) -> GBTerm {
    let (a2, t) = (params.a2(), params.theta_eff());
    let mf = m as f64;
    let u = 2.0 * t * mf + a2 + t;
    let num = 8.0 * (2.0 * t * a2 * mf + a2 * a2 - 2.0 * t * t + t * a2);
    GBTerm {
        m,
        value: num / (u * (u - 2.0 * t) * (u + 2.0 * t)),
        b: b(params, m),
    }
}

impl GBTerm {
    /// `(2/theta) [(A^2 - theta) B_m + 2 theta B_(m+1) - (A^2 + theta) B_(m+2)]`.
    ///
    /// The three terms cancel to `O(1/m^2)`, so the relative rounding error grows like `m`.
    pub fn partial_fraction(&self, params: &SphereParams) -> f64 {
        let (a2, t) = (params.a2(), params.theta_eff());
        2.0 / t
            * ((a2 - t) * self.b + 2.0 * t * b(params, self.m + 1) - (a2 + t) * b(params, self.m + 2))
    }

    /// The same combination regrouped as telescoping differences,
    /// `B_m - B_(m+1) = 2 theta B_m B_(m+1)`, which avoids the cancellation.
    pub fn telescoped_pair(&self, params: &SphereParams) -> f64 {
        let (a2, t) = (params.a2(), params.theta_eff());
        let (b1, b2) = (b(params, self.m + 1), b(params, self.m + 2));
        4.0 * ((a2 - t) * self.b * b1 + (a2 + t) * b1 * b2)
    }
}

/// `2 pi theta t(m)` continued to real `m`.
fn scaled_term(params: &SphereParams, m: f64) -> f64 {
    let (a2, t) = (params.a2(), params.theta_eff());
    let u = 2.0 * t * m + a2 + t;
    16.0 * PI * t * (a2 * u - 2.0 * t * t) / (u * (u - 2.0 * t) * (u + 2.0 * t))
}

/// `int_N^inf 2 pi theta t(m) dm = (2 pi/theta)[(A^2+theta) ln(1+x) - (A^2-theta) ln(1-x)]`,
/// `x = 2 theta / u_N`.
fn tail_integral(params: &SphereParams, n: u64) -> f64 {
    let (a2, t) = (params.a2(), params.theta_eff());
    let u = 2.0 * t * n as f64 + a2 + t;
    let x = 2.0 * t / u;
    2.0 * PI / t * ((a2 + t) * x.ln_1p() - (a2 - t) * (-x).ln_1p())
}

/// Partial sum over `m < n` with a certified remainder bracket.
///
/// The summand is decreasing in `m` inside the window, so the remainder lies
/// between `int_N^inf` and `int_N^inf + term(N)`.
pub fn gb_direct(params: &SphereParams, n: u64) -> Result<GbDirect> {
    check(params)?;
    let t = params.theta_eff();
    let terms = par::map_range(n as usize, |m| gb_term(params, m as u64).value);
    let sum: CompensatedSum = terms.into_iter().sum();
    let partial = 2.0 * PI * t * sum.value();
    let integral = tail_integral(params, n);
    let last = scaled_term(params, n as f64);
    Ok(GbDirect {
        n,
        partial,
        tail_bound: integral + last,
        estimate: partial + integral + 0.5 * last,
        estimate_error: 0.5 * last,
    })
}

/// Closed form of `2 pi theta sum_{j<=m} t_j`:
/// `4 pi [(A^2 - theta)(B_0 - B_(m+1)) + (A^2 + theta)(B_1 - B_(m+2))]`.
pub fn gb_telescoped(params: &SphereParams, m: u64) -> Result<f64> {
    check(params)?;
    let (a2, t) = (params.a2(), params.theta_eff());
    let bm = |k| b(params, k);
    Ok(4.0 * PI * ((a2 - t) * (bm(0) - bm(m + 1)) + (a2 + t) * (bm(1) - bm(m + 2))))
}

/// `4 pi [(A^2 - theta) B_0 + (A^2 + theta) B_1]`, which is `8 pi`.
pub fn gb_limit(params: &SphereParams) -> Result<f64> {
    check(params)?;
    let (a2, t) = (params.a2(), params.theta_eff());
    Ok(4.0 * PI * ((a2 - t) * b(params, 0) + (a2 + t) * b(params, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, t: f64) -> SphereParams {
        SphereParams::new(a, t, 1).unwrap()
    }

    #[test]
    fn partial_fractions_per_term() {
        for &(a, t) in &[(1.0, 0.1), (1.0, 0.4), (2.0, 0.3), (5.0, 1.0), (2.0, 1.9)] {
            let q = p(a, t);
            for m in (0..10_000u64).step_by(97) {
                let g = gb_term(&q, m);
                let pair = g.telescoped_pair(&q);
                assert!((g.value - pair).abs() <= 1e-13 * g.value.abs(), "A={a} t={t} m={m}");
                let pf = g.partial_fraction(&q);
                assert!((g.value - pf).abs() <= 1e-14 * (m + 10) as f64 * g.value.abs(), "A={a} t={t} m={m}");
            }
        }
    }

    #[test]
    fn telescoped_matches_direct() {
        let q = p(1.0, 0.1);
        let tel = gb_telescoped(&q, 100).unwrap();
        let direct = gb_direct(&q, 101).unwrap();
        assert!((tel - direct.partial).abs() < 1e-12);
        let term0 = 2.0 * PI * 0.1 * gb_term(&q, 0).partial_fraction(&q);
        assert!((gb_telescoped(&q, 0).unwrap() - term0).abs() < 1e-13);
    }

    #[test]
    fn limit_is_eight_pi() {
        for &(a, t) in &[(1.0, 0.1), (2.0, 0.3), (5.0, 1.0)] {
            assert_eq!(gb_limit(&p(a, t)).unwrap(), 25.132741228718345);
        }
        let four = SphereParams::new(1.0, 0.1, 2).unwrap();
        assert!(gb_limit(&four).is_err());
    }

    #[test]
    fn empty_sum_bound_covers_total() {
        let d = gb_direct(&p(1.0, 0.1), 0).unwrap();
        assert_eq!(d.partial, 0.0);
        assert!(d.tail_bound >= 8.0 * PI);
    }

    #[test]
    fn bracket_contains_total() {
        for &(a, t) in &[(1.0, 0.1), (2.0, 1.9), (1.0, 0.4)] {
            for n in [1u64, 10, 1000, 100_000] {
                let d = gb_direct(&p(a, t), n).unwrap();
                assert!(d.partial <= 8.0 * PI + 1e-12);
                assert!(8.0 * PI <= d.partial + d.tail_bound + 1e-12);
                assert!((d.estimate - 8.0 * PI).abs() <= d.estimate_error + 1e-12);
            }
        }
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        // int_N^inf of the continued summand by Simpson on m = N + s/(1-s)
        let q = p(2.0, 0.3);
        let n = 50u64;
        let k = 20_000;
        let f = |s: f64| scaled_term(&q, n as f64 + s / (1.0 - s)) / (1.0 - s).powi(2);
        let h = 1.0 / k as f64;
        let mut acc = f(0.0);
        for i in 1..k {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        // f(1) is the limit m^2 t(m) -> 4 pi A^2 / theta
        acc += 4.0 * PI * 4.0 / 0.3;
        let quad = acc * h / 3.0;
        assert!((tail_integral(&q, n) - quad).abs() < 1e-10 * quad);
    }
}
