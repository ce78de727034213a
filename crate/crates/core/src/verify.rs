//! Self-checks run by `moyal verify`: each compares a computed quantity with an
//! independent reference and reports the discrepancy against a fixed bound.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::area::{deformed_area, gamma1_closed, gamma2_closed, gamma_m_series, sphere_area};
use crate::band_matrix::{scalar_curvature_generic, BandMatrix};
use crate::curvature::{eta, lambda_big, s2_coeffs, s4_coeffs};
use crate::diag_series::DiagSeries;
use crate::error::{Error, Result};
use crate::gauss_bonnet::{gb_direct, gb_limit};
use crate::params::SphereParams;
use crate::radial::constant_curvature::{constant_curvature_residual, star_inverse_defect};
use crate::radial::epsilon::{closed_form_residual, epsilon_closed_4d, epsilon_ode, EpsilonConstants, Family};
use crate::radial::ode::{ode_solve, InitMode, OdeOptions};
use crate::radial::RadialFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    All,
    Algebra,
    Curvature,
    Gb,
    Area,
    Ode,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Algebra, Suite::Curvature, Suite::Gb, Suite::Area, Suite::Ode];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Algebra => "algebra",
            Suite::Curvature => "curvature",
            Suite::Gb => "gb",
            Suite::Area => "area",
            Suite::Ode => "ode",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::All]
            .into_iter()
            .chain(Suite::EACH)
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{} {:<10} {:<48} {:.3e} {op} {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.value,
            self.limit
        )
    }
}

struct Report {
    suite: &'static str,
    checks: Vec<Check>,
}

impl Report {
    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, Bound::AtMost, limit, value <= limit);
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        self.push(name.into(), value, Bound::AtLeast, limit, value >= limit);
    }

    fn push(&mut self, name: String, value: f64, bound: Bound, limit: f64, pass: bool) {
        self.checks.push(Check {
            suite: self.suite,
            name,
            value,
            bound,
            limit,
            pass,
        });
    }
}

/// Slope of `log y` against `log x` by least squares.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn algebra(rep: &mut Report) -> Result<()> {
    let p = SphereParams::new(1.0, 0.2, 1)?;
    let h = DiagSeries::sphere_factor(&p)?;
    let one = h.star_mul(&h.star_inv()?)?;
    let dev = one.coeff_vec(1000).iter().fold(0.0f64, |m, c| m.max((c - 1.0).abs()));
    rep.at_most("diag h * h^-1 = 1", dev, 1e-15);

    let lap = DiagSeries::affine(0.2, 1, 0.3, 1.7)?.laplacian()?;
    let dev = lap.coeff_vec(1000).iter().fold(0.0f64, |m, c| m.max((c - 2.0 / 0.2 * 0.3).abs()));
    rep.at_most("diag Laplacian of affine coefficients", dev, 1e-12);

    let theta = 0.1;
    let unit = DiagSeries::unit(theta, 1)?.with_trunc(400)?;
    let level = DiagSeries::affine(theta, 1, 1.0, 0.0)?.with_trunc(400)?;
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.3, 2.0] {
        worst = worst.max((unit.eval(r)?.value - 1.0).abs());
        worst = worst.max((level.eval(r)?.value - (r * r / theta - 1.0) / 2.0).abs());
    }
    rep.at_most("pointwise unit and level series", worst, 1e-8);

    let n = 8;
    let entries: Vec<Complex64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            let d = if i == j { 4.0 } else { 0.0 };
            Complex64::new(d + (1.3 * k as f64).sin() * 0.5, (0.7 * k as f64).cos() * 0.5)
        })
        .collect();
    let a = BandMatrix::from_entries(0.1, n, entries)?;
    let resid = a.star_mul(&a.star_inv()?)?.max_abs_diff(&BandMatrix::identity(0.1, n)?);
    rep.at_most("dense inverse residual, N = 8", resid, 1e-10);

    let m = BandMatrix::from_diag(&h, 48)?;
    let plus = scalar_curvature_generic(&m)?;
    let minus = scalar_curvature_generic(&m.opposite())?;
    rep.at_most("opposite algebra curvature", plus.with_valid(24).max_abs_diff(&minus), 1e-12);
    Ok(())
}

fn curvature(rep: &mut Report) -> Result<()> {
    let p = SphereParams::new(1.0, 0.2, 1)?;
    let h = BandMatrix::from_diag(&DiagSeries::sphere_factor(&p)?, 64)?;
    let s = scalar_curvature_generic(&h)?;
    let exact = s2_coeffs(&p)?;
    let dev = (0..=32).fold(0.0f64, |w, m| w.max((s.get(m, m) - exact.coeff(m as u64)).norm()));
    rep.at_most("generic 2D curvature vs closed form, N = 64", dev, 1e-9);

    let thetas = [1e-2, 1e-3, 1e-4];
    let level = 5;
    let d2: Vec<f64> = thetas
        .iter()
        .map(|&t| Ok((s2_coeffs(&SphereParams::new(1.0, t, 1)?)?.coeff(level) - 2.0).abs()))
        .collect::<Result<_>>()?;
    rep.at_least("2D classical limit, convergence order", loglog_slope(&thetas, &d2), 1.0);
    let d4: Vec<f64> = thetas
        .iter()
        .map(|&t| Ok((s4_coeffs(&SphereParams::new(1.0, t, 2)?)?.coeff(level) - 12.0).abs()))
        .collect::<Result<_>>()?;
    rep.at_least("4D classical limit, convergence order", loglog_slope(&thetas, &d4), 1.0);

    let (a, t) = (1.0, 0.1);
    let s2 = s2_coeffs(&SphereParams::new(a, t, 1)?)?;
    let s4 = s4_coeffs(&SphereParams::new(a, t, 2)?)?;
    let mut worst: f64 = 0.0;
    for m in 0..50u64 {
        let r = (t * (2 * m + 1) as f64).sqrt();
        worst = worst.max((2.0 * eta(r, a * a / t, t)? - s2.coeff(m)).abs());
        let r = (t * (2 * m + 2) as f64).sqrt();
        worst = worst.max((12.0 * lambda_big(r, a * a / t, t)? - s4.coeff(m)).abs());
    }
    rep.at_most("profiles at level radii", worst, 1e-12);
    Ok(())
}

fn gb(rep: &mut Report) -> Result<()> {
    for &(a, t) in &[(1.0, 0.1), (1.0, 0.4), (2.0, 0.3), (5.0, 1.0)] {
        let p = SphereParams::new(a, t, 1)?;
        let d = gb_direct(&p, 1_000_000)?;
        let dev = (d.partial - 8.0 * PI).abs();
        rep.at_most(format!("A={a} theta={t}: |partial - 8pi| - tail bound"), dev - d.tail_bound, 0.0);
        rep.at_most(
            format!("A={a} theta={t}: corrected sum error"),
            (d.estimate - 8.0 * PI).abs().max(d.estimate_error),
            1e-5,
        );
        let lim = gb_limit(&p)?;
        rep.at_most(format!("A={a} theta={t}: telescoped limit"), (lim / (8.0 * PI) - 1.0).abs(), 1e-12);
    }
    Ok(())
}

fn area(rep: &mut Report) -> Result<()> {
    let mut worst: f64 = 0.0;
    for lam in [0.1, 1.0, 10.0, 100.0] {
        worst = worst.max((gamma_m_series(1, lam, 1e-13)? - gamma1_closed(lam)?).abs());
        worst = worst.max((gamma_m_series(2, lam, 1e-13)? - gamma2_closed(lam)?).abs());
    }
    rep.at_most("series vs closed forms, M = 1, 2", worst, 1e-10);

    let mut outside: f64 = 0.0;
    let mut lows: f64 = 0.0;
    let mut highs: f64 = 1.0;
    for m in [1, 2, 4, 6] {
        for lam in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3, 1e4] {
            let g = gamma_m_series(m, lam, 1e-13)?;
            if !(g > 0.0 && g < 1.0) {
                outside += 1.0;
            }
        }
        lows = lows.max(gamma_m_series(m, 1e-3, 1e-13)?);
        highs = highs.min(gamma_m_series(m, 1e4, 1e-13)?);
    }
    rep.at_most("grid points with gamma outside (0, 1)", outside, 0.0);
    rep.at_most("max gamma at lambda = 1e-3", lows, 1e-2);
    rep.at_least("min gamma at lambda = 1e4", highs, 0.999);

    let def = deformed_area(1, 1.0, 0.03, 0.04)?.area;
    let plain = sphere_area(&SphereParams::new(1.0, 0.05, 2)?)?.area;
    rep.at_most("deformed area vs theta' area (ulps)", ulps(def, plain), 0.0);
    Ok(())
}

fn ulps(a: f64, b: f64) -> f64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs() as f64
}

fn ode(rep: &mut Report) -> Result<()> {
    let grid: Vec<f64> = (0..=2000).map(|i| 1e-3 * (1e4f64).powf(i as f64 / 2000.0)).collect();
    for a in [0.5, 1.0, 2.0] {
        let res = closed_form_residual(a, EpsilonConstants::defaults(a), &grid)?;
        rep.at_most(format!("A={a}: closed-form residual on [1e-3, 10]"), res, 1e-8);
    }
    let e = epsilon_closed_4d(1e-6, 1.0, EpsilonConstants::defaults(1.0))?.abs();
    rep.at_most("|eps(1e-6)|, A = 1", e, 1e-9);

    for a in [0.5, 1.0, 2.0] {
        let out: Vec<f64> = (0..=200).map(|i| 0.01 + (5.0 - 0.01) * i as f64 / 200.0).collect();
        let opts = OdeOptions {
            output: Some(out.clone()),
            ..OdeOptions::default()
        };
        let sol = ode_solve(&epsilon_ode(Family::FourD, a)?, 5.0, InitMode::Bounded { eps0: 0.0 }, &opts)?;
        let k = EpsilonConstants::defaults(a);
        let exact: Vec<f64> = out.iter().map(|&r| epsilon_closed_4d(r, a, k)).collect::<Result<_>>()?;
        let scale = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let dev = sol.eps.iter().zip(&exact).fold(0.0f64, |m, (s, x)| m.max((s - x).abs()));
        rep.at_most(format!("A={a}: solver vs closed form on [0.01, 5]"), dev / scale, 1e-6);
    }

    let thetas = [0.1, 0.05, 0.025];
    for r in [0.5, 1.0, 2.0] {
        let h = RadialFn::sphere_factor(1.0);
        let inv: Vec<f64> = thetas.iter().map(|&t| star_inverse_defect(&h, t, 2, r)).collect::<Result<_>>()?;
        rep.at_least(format!("r={r}: order of |h * h^-1 - 1|"), loglog_slope(&thetas, &inv), 3.5);
        let cc: Vec<f64> = thetas
            .iter()
            .map(|&t| constant_curvature_residual(1.0, t, &[r]))
            .collect::<Result<_>>()?;
        rep.at_least(format!("r={r}: order of corrected curvature residual"), loglog_slope(&thetas, &cc), 3.5);
    }
    Ok(())
}

/// Run one suite, or every suite in a fixed order.
pub fn run_suite(suite: Suite) -> Result<Vec<Check>> {
    let list: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let reports = crate::par::map_slice(&list, |&s| -> Result<Vec<Check>> {
        let mut rep = Report {
            suite: s.name(),
            checks: Vec::new(),
        };
        match s {
            Suite::Algebra => algebra(&mut rep)?,
            Suite::Curvature => curvature(&mut rep)?,
            Suite::Gb => gb(&mut rep)?,
            Suite::Area => area(&mut rep)?,
            Suite::Ode => ode(&mut rep)?,
            Suite::All => unreachable!(),
        }
        Ok(rep.checks)
    });
    let mut out = Vec::new();
    for r in reports {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names() {
        assert_eq!("gb".parse::<Suite>().unwrap(), Suite::Gb);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((loglog_slope(&x, &y) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn algebra_suite_passes() {
        let checks = run_suite(Suite::Algebra).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
    }
}
