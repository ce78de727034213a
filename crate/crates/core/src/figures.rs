//! Builders for the curve tables emitted by the command-line tool.

use std::f64::consts::PI;

use crate::area::{gamma1_closed, gamma2_closed, gamma_m_series};
use crate::curvature::{eta, lambda_big, s2_coeffs, s4_coeffs, Dimension};
use crate::error::{Error, Result};
use crate::gauss_bonnet::{gb_direct, gb_telescoped};
use crate::params::SphereParams;
use crate::radial::epsilon::{epsilon_closed_4d_fn, epsilon_ode, h_ratio, EpsilonConstants, Family};
use crate::table::CurveTable;

/// `n` points from `lo` to `hi` inclusive; a single point is `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

fn check_range(r_min: f64, r_max: f64, samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if !(r_min >= 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("bad radius range [{r_min}, {r_max}]")));
    }
    Ok(())
}

/// `eta` (2D) or `Lambda` (4D) on a radius grid, next to the exact curvature
/// coefficient of the nearest level divided by the classical value.
pub fn cmd_curvature(dim: Dimension, params: &SphereParams, r_min: f64, r_max: f64, samples: usize) -> Result<CurveTable> {
    check_range(r_min, r_max, samples)?;
    let t = params.theta_eff();
    let lam = params.lambda();
    let (series, name) = match dim {
        Dimension::Two => (s2_coeffs(&params.with_half_dim(1)?)?, "eta"),
        Dimension::Four => (s4_coeffs(&params.with_half_dim(2)?)?, "lambda"),
    };
    let classical = series.classical();
    let mut table = CurveTable::new([("r", "length"), (name, "1"), ("exact_coeff_at_nearest_level", "1")]);
    table
        .meta("command", "curvature")
        .meta("dim", if dim == Dimension::Two { 2 } else { 4 })
        .meta("A", params.a)
        .meta("theta", params.theta)
        .meta("mu", params.mu)
        .meta("lambda", lam)
        .meta("r_min", r_min)
        .meta("r_max", r_max)
        .meta("samples", samples);
    for r in linspace(r_min, r_max, samples) {
        let x = r * r / t;
        let (profile, level) = match dim {
            Dimension::Two => (eta(r, lam, t)?, ((x - 1.0) / 2.0).round()),
            Dimension::Four => (lambda_big(r, lam, t)?, (x / 2.0 - 1.0).round()),
        };
        let level = level.max(0.0) as u64;
        table.push_row(vec![r, profile, series.coeff(level) / classical])?;
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbReport {
    pub table: CurveTable,
    pub deviation: f64,
    pub tail_bound: f64,
    pub estimate_error: f64,
    /// `|partial - 8 pi| <= tail_bound`.
    pub pass: bool,
}

/// Direct and telescoped partial sums at decades up to `n`.
pub fn cmd_gauss_bonnet(params: &SphereParams, n: u64) -> Result<GbReport> {
    let p = params.with_half_dim(1)?;
    let mut checkpoints: Vec<u64> = std::iter::successors(Some(1u64), |&k| k.checked_mul(10))
        .take_while(|&k| k < n)
        .collect();
    checkpoints.insert(0, 0);
    if n > 0 {
        checkpoints.push(n);
    }
    let mut table = CurveTable::new([
        ("m", "1"),
        ("partial_direct", "1"),
        ("partial_telescoped", "1"),
        ("abs_diff", "1"),
        ("tail_bound", "1"),
    ]);
    table
        .meta("command", "gauss-bonnet")
        .meta("A", p.a)
        .meta("theta", p.theta)
        .meta("mu", p.mu)
        .meta("N", n);
    let mut last = None;
    for &k in &checkpoints {
        let d = gb_direct(&p, k)?;
        let tel = if k == 0 { 0.0 } else { gb_telescoped(&p, k - 1)? };
        table.push_row(vec![k as f64, d.partial, tel, (d.partial - tel).abs(), d.tail_bound])?;
        last = Some(d);
    }
    let d = last.expect("checkpoint list is never empty");
    let deviation = (d.partial - 8.0 * PI).abs();
    let pass = deviation <= d.tail_bound;
    table
        .meta("deviation_from_8pi", format!("{deviation:.16e}"))
        .meta("tail_bound", format!("{:.16e}", d.tail_bound))
        .meta("estimate", format!("{:.16e}", d.estimate))
        .meta("estimate_error", format!("{:.16e}", d.estimate_error))
        .meta("pass", pass);
    Ok(GbReport {
        table,
        deviation,
        tail_bound: d.tail_bound,
        estimate_error: d.estimate_error,
        pass,
    })
}

/// `gamma_M(lambda)` for each `M`, with the closed forms for `M = 1, 2`.
pub fn cmd_area(ms: &[u32], lambdas: &[f64], tol: f64) -> Result<CurveTable> {
    if ms.is_empty() {
        return Err(Error::InvalidParameter("empty list of half dimensions".into()));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    let mut cols = vec![("lambda".to_string(), "1".to_string())];
    for &m in ms {
        cols.push((format!("gamma_{m}"), "1".into()));
        if m <= 2 {
            cols.push((format!("closed_{m}"), "1".into()));
            cols.push((format!("abs_diff_{m}"), "1".into()));
        }
    }
    let mut table = CurveTable::new(cols);
    let list: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
    let grid: Vec<String> = lambdas.iter().map(|l| format!("{l:e}")).collect();
    table
        .meta("command", "area")
        .meta("M", list.join(","))
        .meta("lambda", grid.join(","))
        .meta("tol", tol);
    for &lam in lambdas {
        let mut row = vec![lam];
        for &m in ms {
            let g = gamma_m_series(m, lam, tol)?;
            row.push(g);
            let closed = match m {
                1 => Some(gamma1_closed(lam)?),
                2 => Some(gamma2_closed(lam)?),
                _ => None,
            };
            if let Some(c) = closed {
                row.push(c);
                row.push((g - c).abs());
            }
        }
        table.push_row(row)?;
    }
    Ok(table)
}

/// `h^{-2}/h0^{-2}` of the corrected 4D factor for each radius `A`, with the
/// ODE residual of the closed-form correction.
pub fn cmd_epsilon(a_list: &[f64], theta: f64, radii: &[f64]) -> Result<CurveTable> {
    if a_list.is_empty() {
        return Err(Error::InvalidParameter("empty list of radii A".into()));
    }
    if radii.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("radii must be finite and nonnegative".into()));
    }
    let mut cols = vec![("r".to_string(), "length".to_string())];
    for &a in a_list {
        cols.push((format!("ratio_A{a}"), "1".into()));
    }
    for &a in a_list {
        cols.push((format!("ode_residual_A{a}"), "1".into()));
    }
    let mut table = CurveTable::new(cols);
    let list: Vec<String> = a_list.iter().map(|a| a.to_string()).collect();
    table
        .meta("command", "epsilon")
        .meta("A", list.join(","))
        .meta("theta", theta)
        .meta("C1", "default")
        .meta("C2", "default");
    let mut solutions = Vec::with_capacity(a_list.len());
    for &a in a_list {
        let ode = epsilon_ode(Family::FourD, a)?;
        let eps = epsilon_closed_4d_fn(a, EpsilonConstants::defaults(a))?;
        solutions.push((ode, eps));
    }
    for &r in radii {
        let mut row = vec![r];
        for &a in a_list {
            row.push(h_ratio(r, a, theta)?);
        }
        for (ode, eps) in &solutions {
            row.push(ode.defect(r, eps.eval3(r)?).abs());
        }
        table.push_row(row)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 1), vec![0.0]);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1e-2, 1e3, 6);
        assert!((l[0] - 1e-2).abs() < 1e-17 && (l[5] - 1e3).abs() < 1e-10);
    }

    #[test]
    fn curvature_single_row() {
        let p = SphereParams::new(1.0, 0.1, 1).unwrap();
        let t = cmd_curvature(Dimension::Two, &p, 0.0, 0.0, 1).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][0], 0.0);
        // at r^2 = 3 theta the profile sits exactly on level 1
        let r = 0.3f64.sqrt();
        let t = cmd_curvature(Dimension::Two, &p, r, r, 1).unwrap();
        assert!((t.rows[0][1] - t.rows[0][2]).abs() < 1e-13);
    }

    #[test]
    fn gb_zero_terms() {
        let p = SphereParams::new(1.0, 0.1, 1).unwrap();
        let rep = cmd_gauss_bonnet(&p, 0).unwrap();
        assert_eq!(rep.table.rows.len(), 1);
        assert!(rep.pass);
    }

    #[test]
    fn area_reference_and_errors() {
        let t = cmd_area(&[1], &[1.0], 1e-13).unwrap();
        assert!((t.rows[0][1] - 0.8224670334241132).abs() < 1e-10);
        assert!(cmd_area(&[], &[1.0], 1e-13).is_err());
    }

    #[test]
    fn epsilon_flat_at_zero_theta() {
        let t = cmd_epsilon(&[0.5, 1.0], 0.0, &[0.0, 1.0, 3.0]).unwrap();
        for row in &t.rows {
            assert_eq!(&row[1..3], &[1.0, 1.0]);
            assert!(row[3] <= 1e-8 && row[4] <= 1e-8);
        }
    }
}
