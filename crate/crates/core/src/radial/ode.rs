//! Adaptive integration of the correction ODE from near the regular singular
//! point at the origin.

use serde::Serialize;

use super::epsilon::EpsilonOde;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitMode {
    /// Bounded branch with `eps(0) = eps0`, started from a two-term Frobenius series.
    Bounded { eps0: f64 },
    /// Explicit data at `r0 > 0`.
    At { r0: f64, eps: f64, deps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Start of the Frobenius branch, as a multiple of `A`.
    pub start_factor: f64,
    /// Output radii; defaults to `samples` evenly spaced points ending at `r_end`.
    pub output: Option<Vec<f64>>,
    pub samples: usize,
    /// Largest admissible interpolated defect.
    pub residual_tol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-14,
            start_factor: 1e-4,
            output: None,
            samples: 201,
            residual_tol: 1e-6,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSolution {
    pub r: Vec<f64>,
    pub eps: Vec<f64>,
    pub deps: Vec<f64>,
    /// Largest `|H'' + p H' + q H + s|` at step midpoints, `H` the quintic
    /// Hermite interpolant of each step.
    pub max_residual: f64,
    pub steps: usize,
    pub rejected: usize,
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State = [f64; 2];

fn rhs(ode: &EpsilonOde, r: f64, y: State) -> State {
    [y[1], -ode.p(r) * y[1] - ode.q(r) * y[0] - ode.s(r)]
}

/// Defect of the quintic Hermite interpolant at the midpoint of `[r0, r0 + h]`.
fn midpoint_defect(ode: &EpsilonOde, r0: f64, h: f64, y0: [f64; 3], y1: [f64; 3]) -> f64 {
    let c0 = y0[0];
    let c1 = h * y0[1];
    let c2 = h * h * y0[2] / 2.0;
    let r0v = y1[0] - c0 - c1 - c2;
    let r1v = h * y1[1] - c1 - 2.0 * c2;
    let r2v = h * h * y1[2] - 2.0 * c2;
    let c3 = 10.0 * r0v - 4.0 * r1v + 0.5 * r2v;
    let c4 = -15.0 * r0v + 7.0 * r1v - r2v;
    let c5 = 6.0 * r0v - 3.0 * r1v + 0.5 * r2v;
    let c = [c0, c1, c2, c3, c4, c5];
    let t: f64 = 0.5;
    let mut v = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let kf = k as f64;
        v += ck * t.powi(k as i32);
        if k >= 1 {
            d1 += kf * ck * t.powi(k as i32 - 1);
        }
        if k >= 2 {
            d2 += kf * (kf - 1.0) * ck * t.powi(k as i32 - 2);
        }
    }
    ode.defect(r0 + h / 2.0, [v, d1 / h, d2 / (h * h)]).abs()
}

fn initial_state(ode: &EpsilonOde, init: InitMode, opts: &OdeOptions) -> Result<(f64, State)> {
    match init {
        InitMode::Bounded { eps0 } => {
            let delta = opts.start_factor * ode.a;
            // eps = a0 + a2 r^2: 2 a2 (1 + P0) + Q0 a0 + S0 = 0
            let a2 = -(ode.q(0.0) * eps0 + ode.s(0.0)) / (2.0 * (1.0 + ode.rp0));
            Ok((delta, [eps0 + a2 * delta * delta, 2.0 * a2 * delta]))
        }
        InitMode::At { r0, eps, deps } => {
            if !(r0 > 0.0) {
                return Err(Error::Domain(format!("start radius must be positive, got {r0}")));
            }
            Ok((r0, [eps, deps]))
        }
    }
}

/// Integrate to `r_end`, reporting the solution on the output radii.
pub fn ode_solve(ode: &EpsilonOde, r_end: f64, init: InitMode, opts: &OdeOptions) -> Result<OdeSolution> {
    let (r_start, mut y) = initial_state(ode, init, opts)?;
    if !(r_end > r_start) {
        return Err(Error::Domain(format!("end radius {r_end} must exceed start {r_start}")));
    }
    let outputs: Vec<f64> = match &opts.output {
        Some(o) => {
            if o.windows(2).any(|w| w[1] <= w[0]) || o.iter().any(|&r| r < r_start || r > r_end) {
                return Err(Error::Domain(format!(
                    "output radii must increase within [{r_start}, {r_end}]"
                )));
            }
            o.clone()
        }
        None => {
            let n = opts.samples.max(2);
            (0..n).map(|i| r_start + (r_end - r_start) * i as f64 / (n - 1) as f64).collect()
        }
    };

    let mut sol = OdeSolution {
        r: Vec::with_capacity(outputs.len()),
        eps: Vec::with_capacity(outputs.len()),
        deps: Vec::with_capacity(outputs.len()),
        max_residual: 0.0,
        steps: 0,
        rejected: 0,
    };
    let mut next_out = 0;
    let mut r = r_start;
    while next_out < outputs.len() && outputs[next_out] <= r {
        sol.r.push(r);
        sol.eps.push(y[0]);
        sol.deps.push(y[1]);
        next_out += 1;
    }

    let mut h = 0.1 * r_start;
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(ode, r, y);
    while r < r_end {
        if sol.steps + sol.rejected >= opts.max_steps {
            return Err(Error::StepFailure {
                r,
                reason: "step limit reached".into(),
            });
        }
        let target = outputs.get(next_out).copied().unwrap_or(r_end).min(r_end);
        let hits = r + h >= target;
        let step = if hits { target - r } else { h };
        if step < 1e-14 * r.max(1.0) {
            return Err(Error::StepFailure {
                r,
                reason: format!("step size {step:e} underflow"),
            });
        }

        for i in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i) {
                yi[0] += step * A[i][j] * kj[0];
                yi[1] += step * A[i][j] * kj[1];
            }
            k[i] = rhs(ode, r + C[i] * step, yi);
        }
        let mut y5 = y;
        let mut err = 0.0;
        for c in 0..2 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for i in 0..7 {
                d5 += B5[i] * k[i][c];
                d4 += B4[i] * k[i][c];
            }
            y5[c] = y[c] + step * d5;
            let sc = opts.atol + opts.rtol * y[c].abs().max(y5[c].abs());
            err += (step * (d5 - d4) / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            return Err(Error::StepFailure {
                r,
                reason: "non-finite state".into(),
            });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            let r1 = if hits { target } else { r + step };
            let f0 = k[0];
            let f1 = k[6];
            let res = midpoint_defect(ode, r, step, [y[0], y[1], f0[1]], [y5[0], y5[1], f1[1]]);
            sol.max_residual = sol.max_residual.max(res);
            y = y5;
            r = r1;
            k[0] = f1;
            sol.steps += 1;
            if hits && next_out < outputs.len() {
                sol.r.push(r);
                sol.eps.push(y[0]);
                sol.deps.push(y[1]);
                next_out += 1;
            } else {
                h = step * factor;
            }
        } else {
            sol.rejected += 1;
            h = step * factor;
        }
    }
    if sol.max_residual > opts.residual_tol {
        return Err(Error::ResidualTooLarge {
            residual: sol.max_residual,
            tol: opts.residual_tol,
        });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::epsilon::{epsilon_closed_4d, epsilon_ode, EpsilonConstants, Family};

    #[test]
    fn zero_problem_stays_zero() {
        let ode = EpsilonOde::custom(1.0, 3.0, |r| 3.0 / r, |_| 1.0, |_| 0.0);
        let sol = ode_solve(&ode, 2.0, InitMode::Bounded { eps0: 0.0 }, &OdeOptions::default()).unwrap();
        assert!(sol.eps.iter().all(|&e| e == 0.0));
        assert_eq!(sol.max_residual, 0.0);
    }

    #[test]
    fn bessel_like_problem() {
        // eps'' + eps'/r + eps = 0 with eps(0) = 1 is J0
        let ode = EpsilonOde::custom(1.0, 1.0, |r| 1.0 / r, |_| 1.0, |_| 0.0);
        let opts = OdeOptions {
            output: Some(vec![1.0, 2.404825557695773]),
            ..OdeOptions::default()
        };
        let sol = ode_solve(&ode, 3.0, InitMode::Bounded { eps0: 1.0 }, &opts).unwrap();
        assert!((sol.eps[0] - 0.7651976865579666).abs() < 1e-9);
        assert!(sol.eps[1].abs() < 1e-9);
    }

    #[test]
    fn four_d_matches_closed_form() {
        let a = 1.0;
        let ode = epsilon_ode(Family::FourD, a).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| 0.01 + (5.0 - 0.01) * i as f64 / 100.0).collect();
        let opts = OdeOptions {
            output: Some(grid.clone()),
            ..OdeOptions::default()
        };
        let sol = ode_solve(&ode, 5.0, InitMode::Bounded { eps0: 0.0 }, &opts).unwrap();
        let k = EpsilonConstants::defaults(a);
        let exact: Vec<f64> = grid.iter().map(|&r| epsilon_closed_4d(r, a, k).unwrap()).collect();
        let scale = exact.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        for (e, x) in sol.eps.iter().zip(&exact) {
            assert!((e - x).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let ode = epsilon_ode(Family::FourD, 1.0).unwrap();
        assert!(ode_solve(&ode, 0.0, InitMode::Bounded { eps0: 0.0 }, &OdeOptions::default()).is_err());
        let init = InitMode::At { r0: -1.0, eps: 0.0, deps: 0.0 };
        assert!(ode_solve(&ode, 1.0, init, &OdeOptions::default()).is_err());
    }
}
