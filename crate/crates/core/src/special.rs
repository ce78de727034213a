//! Polygamma, Bernoulli numbers and half-integer gamma values.

use crate::error::{Error, Result};

/// `B_2, B_4, ..., B_30`.
pub const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Argument above which the asymptotic series is used.
const LIFT: f64 = 15.0;
const ASYMPTOTIC_TERMS: usize = 12;

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `(2n - 1)!!`, with `(-1)!! = 1`.
pub fn odd_double_factorial(n: u32) -> f64 {
    (1..=n).map(|k| f64::from(2 * k - 1)).product()
}

/// `Gamma(M + 1/2) = (2M - 1)!! sqrt(pi) / 2^M`.
pub fn gamma_half_integer(m: u32) -> f64 {
    odd_double_factorial(m) * std::f64::consts::PI.sqrt() / 2f64.powi(m as i32)
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// `Psi^(n)(x) = (-1)^(n+1) n! sum_{k>=0} 1/(x+k)^(n+1)` for `n >= 1`, `x > 0`.
///
/// The argument is lifted past 15 by the recurrence, then the asymptotic
/// expansion in Bernoulli numbers is applied.
pub fn polygamma(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("polygamma order must be at least 1".into()));
    }
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("polygamma argument must be positive, got {x}")));
    }
    let shift = if x < LIFT { (LIFT - x).ceil() as u32 } else { 0 };
    let y = x + f64::from(shift);

    // sum_{k>=0} 1/(y+k)^(n+1) ~ y^-n/n + y^-(n+1)/2 + sum_j B_2j (2j+n-1)!/((2j)! n!) y^-(2j+n)
    let nf = f64::from(n);
    let inv = 1.0 / y;
    let mut tail = inv.powi(n as i32) / nf + 0.5 * inv.powi(n as i32 + 1);
    // rising ratio (2j+n-1)!/((2j)! n!) built incrementally
    let mut ratio = 1.0 / nf; // j = 0 value (n-1)!/n!
    let mut ypow = inv.powi(n as i32);
    for (j, b) in BERNOULLI_EVEN.iter().take(ASYMPTOTIC_TERMS).enumerate() {
        let j = (j + 1) as f64;
        ratio *= (2.0 * j + nf - 2.0) * (2.0 * j + nf - 1.0) / ((2.0 * j - 1.0) * 2.0 * j);
        ypow *= inv * inv;
        tail += b * ratio * ypow;
    }
    // lifted terms, smallest first
    let mut lifted = 0.0;
    for k in (0..shift).rev() {
        lifted += (x + f64::from(k)).powi(-(n as i32 + 1));
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * factorial(n) * (lifted + tail))
}
