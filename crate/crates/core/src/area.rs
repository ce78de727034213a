//! Areas of Moyal spheres in `2M` dimensions.
//!
//! The noncommutative area is the classical area times
//! `gamma_M(lambda) = lambda^M (2M-1)!!/2 * sum_{k>=0} C(k+M-1, M-1) / (k + (lambda+M)/2)^(2M)`,
//! with `lambda = A^2 / theta`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::params::SphereParams;
use crate::special::{self, BERNOULLI_EVEN};
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaResult {
    pub area: f64,
    pub gamma_factor: f64,
    pub classical_area: f64,
    pub lambda: f64,
    /// `|closed form - series|` when both routes were evaluated.
    pub cross_check: Option<f64>,
}

/// Bernoulli corrections used by the Euler-Maclaurin tail.
const EM_TERMS: usize = 8;
const FIRST_CUT: u64 = 32;
const MAX_CUT: u64 = 1 << 22;

fn check(m: u32, lam: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("half dimension must be at least 1".into()));
    }
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lam}")));
    }
    Ok(())
}

/// `C(x+M-1, M-1) / (x+a)^(2M)` as a jet in `x` about `x0 = k`.
fn summand_jet(m: u32, a: f64, k: f64, order: usize) -> Jet {
    let x = Jet::variable(k, order);
    let mut num = Jet::constant(1.0, order);
    for i in 1..m {
        num = &num * &x.add_scalar(f64::from(i)).scale(1.0 / f64::from(i));
    }
    &num / &x.add_scalar(a).powi(2 * m)
}

/// `int_K^inf C(x+M-1, M-1)/(x+a)^(2M) dx`, expanded about `K` so every term is positive.
fn tail_integral(m: u32, a: f64, k: f64) -> f64 {
    // numerator polynomial in t = x - K
    let deg = (m - 1) as usize;
    let mut poly = vec![0.0; deg + 1];
    poly[0] = 1.0;
    for i in 1..m {
        let c0 = (k + f64::from(i)) / f64::from(i);
        let c1 = 1.0 / f64::from(i);
        for j in (0..poly.len()).rev() {
            let lower = if j > 0 { poly[j - 1] } else { 0.0 };
            poly[j] = poly[j] * c0 + lower * c1;
        }
    }
    // int_0^inf t^j/(c+t)^(2M) dt = c^(j+1-2M) j! (2M-j-2)! / (2M-1)!
    let c = k + a;
    let two_m = 2 * m;
    let mut total = 0.0;
    for (j, pj) in poly.iter().enumerate() {
        let j32 = j as u32;
        let w = special::factorial(j32) * special::factorial(two_m - j32 - 2)
            / special::factorial(two_m - 1);
        total += pj * w * c.powi(j as i32 + 1 - two_m as i32);
    }
    total
}

/// `gamma_M(lambda)` by direct summation plus an Euler-Maclaurin tail; the
/// cut is doubled until the last Bernoulli correction is below `tol`.
pub fn gamma_m_series(m: u32, lam: f64, tol: f64) -> Result<f64> {
    check(m, lam)?;
    let a = (lam + f64::from(m)) / 2.0;
    let pref = lam.powi(m as i32) * special::odd_double_factorial(m) / 2.0;
    let term = |k: u64| {
        let kf = k as f64;
        special::binomial(k + u64::from(m) - 1, u64::from(m) - 1) / (kf + a).powi(2 * m as i32)
    };

    let mut cut = FIRST_CUT;
    let mut head = CompensatedSum::new();
    let mut summed = 0u64;
    loop {
        for k in summed..cut {
            head.add(term(k));
        }
        summed = cut;
        let kf = cut as f64;
        let jet = summand_jet(m, a, kf, 2 * EM_TERMS);
        let mut tail = tail_integral(m, a, kf) + 0.5 * jet.value();
        let mut last = 0.0;
        for (j, b) in BERNOULLI_EVEN.iter().take(EM_TERMS).enumerate() {
            let order = 2 * j + 1;
            // B_2j/(2j)! f^(2j-1)(K) = B_2j/(2j) * c_(2j-1)
            last = -b / (order + 1) as f64 * jet.coeffs()[order];
            tail += last;
        }
        let estimate = pref * last.abs();
        if estimate <= tol {
            return Ok(pref * (head.value() + tail));
        }
        if cut >= MAX_CUT {
            return Err(Error::ToleranceNotReached {
                tol,
                levels: cut,
                estimate,
            });
        }
        cut *= 2;
    }
}

/// `gamma_1(lambda) = (lambda/2) Psi'((lambda+1)/2)`.
pub fn gamma1_closed(lam: f64) -> Result<f64> {
    check(1, lam)?;
    Ok(lam / 2.0 * special::polygamma(1, (lam + 1.0) / 2.0)?)
}

/// `gamma_2(lambda) = (lambda^2/8) [-6 Psi''(1+lambda/2) - lambda Psi'''(1+lambda/2)]`.
pub fn gamma2_closed(lam: f64) -> Result<f64> {
    check(2, lam)?;
    let x = 1.0 + lam / 2.0;
    let p2 = special::polygamma(2, x)?;
    let p3 = special::polygamma(3, x)?;
    Ok(lam * lam / 8.0 * (-6.0 * p2 - lam * p3))
}

/// `2 pi^(M+1/2) A^(2M) / Gamma(M+1/2)`.
pub fn classical_area(m: u32, a: f64) -> f64 {
    let pi = std::f64::consts::PI;
    2.0 * pi.powf(f64::from(m) + 0.5) * a.powi(2 * m as i32) / special::gamma_half_integer(m)
}

/// Default series tolerance for [`sphere_area`].
pub const AREA_TOL: f64 = 1e-13;

pub fn sphere_area(params: &SphereParams) -> Result<AreaResult> {
    params.validate()?;
    let m = params.half_dim;
    let lam = params.lambda();
    let series = gamma_m_series(m, lam, AREA_TOL)?;
    let (gamma_factor, cross_check) = match m {
        1 => {
            let c = gamma1_closed(lam)?;
            (c, Some((c - series).abs()))
        }
        2 => {
            let c = gamma2_closed(lam)?;
            (c, Some((c - series).abs()))
        }
        _ => (series, None),
    };
    let classical = classical_area(m, params.a);
    Ok(AreaResult {
        area: classical * gamma_factor,
        gamma_factor,
        classical_area: classical,
        lambda: lam,
        cross_check,
    })
}

/// Area of the `4n`-dimensional sphere over the two-parameter deformed space,
/// which depends on `theta` and `mu` only through `sqrt(theta^2 + mu^2)`.
pub fn deformed_area(n: u32, a: f64, theta: f64, mu: f64) -> Result<AreaResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let p = SphereParams::deformed(a, theta, mu, 2 * n)?;
    sphere_area(&p)
}
