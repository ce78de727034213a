//! Radial functions on diagonal matrix-basis elements.
//!
//! A radial function on `R^{2M}` with noncommutative parameter `theta` is
//! `sum_k a(k) F_k`, where `F_k` is the sum of all products
//! `f_{m1 m1} ... f_{mM mM}` with `m1 + ... + mM = k`. Because
//! `f_mn * f_kl = delta_nk f_ml`, the star product of two such functions is
//! the levelwise product of their coefficients, the star inverse is the
//! levelwise reciprocal, and `int F_k = (2 pi theta)^M C(k+M-1, M-1)`.
//!
//! Coefficients are kept as closed forms wherever possible; only
//! [`DiagSeries::integrate`] and [`DiagSeries::eval`] truncate.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par;
use crate::params::SphereParams;
use crate::summation::CompensatedSum;

/// Default number of levels visited by truncating operations.
pub const DEFAULT_TRUNC: u64 = 1 << 22;

/// Number of terminal partial sums averaged by [`DiagSeries::eval`].
const EULER_DEPTH: usize = 32;

#[derive(Clone)]
pub enum Coeffs {
    /// `slope * k + offset`, exact for every level.
    Affine { slope: f64, offset: f64 },
    /// Stored levels `0..len`; zero beyond.
    Table(Arc<[f64]>),
    /// Any closed form, evaluated on demand.
    Lazy(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Coeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeffs::Affine { slope, offset } => write!(f, "Affine({slope} k + {offset})"),
            Coeffs::Table(t) => write!(f, "Table(len {})", t.len()),
            Coeffs::Lazy(_) => write!(f, "Lazy"),
        }
    }
}

impl Coeffs {
    #[inline]
    fn at(&self, k: u64) -> f64 {
        match self {
            Coeffs::Affine { slope, offset } => slope * k as f64 + offset,
            Coeffs::Table(t) => t.get(k as usize).copied().unwrap_or(0.0),
            Coeffs::Lazy(f) => f(k),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagSeries {
    half_dim: u32,
    theta: f64,
    coeffs: Coeffs,
    trunc: u64,
}

/// Result of [`DiagSeries::integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    /// Levels actually summed.
    pub levels: u64,
}

/// Result of [`DiagSeries::eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    /// Spread between two averaging depths; infinite when the basis underflows.
    pub accuracy: f64,
}

impl DiagSeries {
    fn build(theta: f64, half_dim: u32, coeffs: Coeffs, trunc: u64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if half_dim == 0 {
            return Err(Error::InvalidParameter("half dimension must be at least 1".into()));
        }
        if trunc == 0 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        Ok(DiagSeries {
            half_dim,
            theta,
            coeffs,
            trunc,
        })
    }

    pub fn affine(theta: f64, half_dim: u32, slope: f64, offset: f64) -> Result<Self> {
        Self::build(theta, half_dim, Coeffs::Affine { slope, offset }, DEFAULT_TRUNC)
    }

    pub fn unit(theta: f64, half_dim: u32) -> Result<Self> {
        Self::affine(theta, half_dim, 0.0, 1.0)
    }

    pub fn zero(theta: f64, half_dim: u32) -> Result<Self> {
        Self::affine(theta, half_dim, 0.0, 0.0)
    }

    /// Finitely many levels; the truncation is the table length.
    pub fn from_table(theta: f64, half_dim: u32, table: Vec<f64>) -> Result<Self> {
        if let Some(k) = table.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("coefficient {k} is not finite")));
        }
        let n = table.len().max(1) as u64;
        Self::build(theta, half_dim, Coeffs::Table(table.into()), n)
    }

    pub fn from_fn<F>(theta: f64, half_dim: u32, f: F) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::build(theta, half_dim, Coeffs::Lazy(Arc::new(f)), DEFAULT_TRUNC)
    }

    /// Series of `c2 r^2 + c0`: `coeff(k) = c2 (2 theta k + M theta) + c0`.
    pub fn from_r2_affine(c2: f64, c0: f64, params: &SphereParams) -> Result<Self> {
        params.validate()?;
        let theta = params.theta_eff();
        let m = params.half_dim as f64;
        Self::affine(theta, params.half_dim, 2.0 * theta * c2, c2 * m * theta + c0)
    }

    /// Conformal factor `h0 = (r^2 + A^2) / (2 A^2)` of the round sphere.
    pub fn sphere_factor(params: &SphereParams) -> Result<Self> {
        Self::from_r2_affine(1.0 / (2.0 * params.a2()), 0.5, params)
    }

    pub fn with_trunc(mut self, trunc: u64) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::InvalidParameter("truncation must be at least 1".into()));
        }
        self.trunc = trunc;
        Ok(self)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn half_dim(&self) -> u32 {
        self.half_dim
    }

    pub fn trunc(&self) -> u64 {
        self.trunc
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// `(slope, offset)` when the coefficients are an exact affine form.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        match self.coeffs {
            Coeffs::Affine { slope, offset } => Some((slope, offset)),
            _ => None,
        }
    }

    #[inline]
    pub fn coeff(&self, k: u64) -> f64 {
        self.coeffs.at(k)
    }

    pub fn coeff_vec(&self, n: usize) -> Vec<f64> {
        (0..n as u64).map(|k| self.coeff(k)).collect()
    }

    fn is_unit(&self) -> bool {
        matches!(self.coeffs, Coeffs::Affine { slope, offset } if slope == 0.0 && offset == 1.0)
    }

    fn check_compatible(&self, other: &DiagSeries) -> Result<()> {
        if self.theta != other.theta {
            return Err(Error::Mismatch(format!("theta {} vs {}", self.theta, other.theta)));
        }
        if self.half_dim != other.half_dim {
            return Err(Error::Mismatch(format!(
                "half dimension {} vs {}",
                self.half_dim, other.half_dim
            )));
        }
        Ok(())
    }

    fn derived(&self, coeffs: Coeffs, trunc: u64) -> DiagSeries {
        DiagSeries {
            half_dim: self.half_dim,
            theta: self.theta,
            coeffs,
            trunc,
        }
    }

    /// Levelwise map, kept lazy.
    pub fn map<F>(&self, f: F) -> DiagSeries
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let a = self.coeffs.clone();
        self.derived(Coeffs::Lazy(Arc::new(move |k| f(a.at(k)))), self.trunc)
    }

    pub fn scale(&self, s: f64) -> DiagSeries {
        match self.coeffs {
            Coeffs::Affine { slope, offset } => self.derived(
                Coeffs::Affine {
                    slope: slope * s,
                    offset: offset * s,
                },
                self.trunc,
            ),
            _ => self.map(move |x| x * s),
        }
    }

    pub fn add(&self, other: &DiagSeries) -> Result<DiagSeries> {
        self.check_compatible(other)?;
        let trunc = self.trunc.min(other.trunc);
        if let (Some((s1, o1)), Some((s2, o2))) = (self.as_affine(), other.as_affine()) {
            return Ok(self.derived(
                Coeffs::Affine {
                    slope: s1 + s2,
                    offset: o1 + o2,
                },
                trunc,
            ));
        }
        let (a, b) = (self.coeffs.clone(), other.coeffs.clone());
        Ok(self.derived(Coeffs::Lazy(Arc::new(move |k| a.at(k) + b.at(k))), trunc))
    }

    pub fn sub(&self, other: &DiagSeries) -> Result<DiagSeries> {
        self.add(&other.scale(-1.0))
    }

    /// Star product: `coeff(k) = a(k) b(k)`.
    pub fn star_mul(&self, other: &DiagSeries) -> Result<DiagSeries> {
        self.check_compatible(other)?;
        let trunc = self.trunc.min(other.trunc);
        if self.is_unit() {
            return Ok(other.derived(other.coeffs.clone(), trunc));
        }
        if other.is_unit() {
            return Ok(self.derived(self.coeffs.clone(), trunc));
        }
        let (a, b) = (self.coeffs.clone(), other.coeffs.clone());
        Ok(self.derived(Coeffs::Lazy(Arc::new(move |k| a.at(k) * b.at(k))), trunc))
    }

    /// First level in `0..trunc` whose coefficient is zero.
    fn first_zero(&self) -> Option<u64> {
        match &self.coeffs {
            Coeffs::Affine { slope, offset } => {
                if *slope == 0.0 {
                    return (*offset == 0.0).then_some(0);
                }
                let root = -offset / slope;
                if root < -0.5 || root > self.trunc as f64 {
                    return None;
                }
                let k = root.round().max(0.0) as u64;
                (k < self.trunc && self.coeff(k) == 0.0).then_some(k)
            }
            _ => (0..self.trunc).find(|&k| self.coeff(k) == 0.0),
        }
    }

    /// Star inverse: the levelwise reciprocal.
    pub fn star_inv(&self) -> Result<DiagSeries> {
        if let Some(k) = self.first_zero() {
            return Err(Error::ZeroCoefficient(k));
        }
        if self.is_unit() {
            return Ok(self.clone());
        }
        Ok(self.map(|x| 1.0 / x))
    }

    /// Laplacian in two dimensions:
    /// `(2/theta) [-(2m+1) a(m) + m a(m-1) + (m+1) a(m+1)]`.
    pub fn laplacian(&self) -> Result<DiagSeries> {
        if self.half_dim != 1 {
            return Err(Error::HalfDim {
                expected: 1,
                got: self.half_dim,
            });
        }
        let theta = self.theta;
        if let Some((slope, _)) = self.as_affine() {
            // the three-term stencil annihilates the offset and maps slope -> slope
            return Ok(self.derived(
                Coeffs::Affine {
                    slope: 0.0,
                    offset: 2.0 * slope / theta,
                },
                self.trunc,
            ));
        }
        let a = self.coeffs.clone();
        Ok(self.derived(
            Coeffs::Lazy(Arc::new(move |m| {
                let mf = m as f64;
                let below = if m == 0 { 0.0 } else { mf * a.at(m - 1) };
                2.0 / theta * (-(2.0 * mf + 1.0) * a.at(m) + below + (mf + 1.0) * a.at(m + 1))
            })),
            self.trunc.saturating_sub(1).max(1),
        ))
    }

    /// Multiplicity of level `k`: `C(k + M - 1, M - 1)`.
    pub fn multiplicity(&self, k: u64) -> f64 {
        level_multiplicity(self.half_dim, k)
    }

    /// `int f = (2 pi theta)^M sum_k C(k+M-1, M-1) a(k)`.
    ///
    /// Levels are summed in ascending order with compensated accumulation.
    /// Partial sums at doubling checkpoints give the decay ratio of the tail;
    /// a ratio at or above one is reported as divergence, otherwise the
    /// geometric tail is added and the change between successive
    /// extrapolations is the error estimate.
    pub fn integrate(&self, tol: f64) -> Result<Integral> {
        let scale = (2.0 * std::f64::consts::PI * self.theta).powi(self.half_dim as i32);
        let weighted = |k: u64| self.multiplicity(k) * self.coeff(k);

        if let Coeffs::Table(t) = &self.coeffs {
            let n = (t.len() as u64).min(self.trunc);
            let terms = par::map_range(n as usize, |k| weighted(k as u64));
            let sum: CompensatedSum = terms.into_iter().sum();
            return Ok(Integral {
                value: scale * sum.value(),
                error: 0.0,
                levels: n,
            });
        }

        const FIRST: u64 = 1024;
        let mut acc = CompensatedSum::new();
        let mut checkpoints: Vec<f64> = Vec::new();
        let mut extrapolations: Vec<f64> = Vec::new();
        let mut done = 0u64;
        let mut next = FIRST.min(self.trunc);
        loop {
            let block = par::map_range((next - done) as usize, |i| weighted(done + i as u64));
            for t in block {
                acc.add(t);
            }
            done = next;
            checkpoints.push(acc.value());

            let n = checkpoints.len();
            if n >= 3 {
                let d1 = checkpoints[n - 2] - checkpoints[n - 3];
                let d2 = checkpoints[n - 1] - checkpoints[n - 2];
                if d1 == 0.0 && d2 == 0.0 {
                    return Ok(Integral {
                        value: scale * checkpoints[n - 1],
                        error: 0.0,
                        levels: done,
                    });
                }
                let ratio = d2 / d1;
                if ratio.is_finite() && ratio > 0.0 {
                    // d ~ K^(1-p) over a doubling
                    let exponent = 1.0 - ratio.log2();
                    if exponent <= 1.02 {
                        return Err(Error::Divergent { exponent });
                    }
                    extrapolations.push(checkpoints[n - 1] + d2 * ratio / (1.0 - ratio));
                } else {
                    extrapolations.push(checkpoints[n - 1]);
                }
                if extrapolations.len() >= 2 {
                    let e = extrapolations.len();
                    let value = extrapolations[e - 1];
                    let err = (extrapolations[e - 1] - extrapolations[e - 2]).abs();
                    if scale * err <= tol {
                        return Ok(Integral {
                            value: scale * value,
                            error: scale * err,
                            levels: done,
                        });
                    }
                    if done >= self.trunc {
                        return Err(Error::ToleranceNotReached {
                            tol,
                            levels: done,
                            estimate: scale * err,
                        });
                    }
                }
            }
            if done >= self.trunc {
                return Err(Error::ToleranceNotReached {
                    tol,
                    levels: done,
                    estimate: f64::INFINITY,
                });
            }
            next = (done * 2).min(self.trunc);
        }
    }

    /// Pointwise value `sum_{m < trunc} a(m) f_mm(r)` in two dimensions.
    ///
    /// The basis is `f_mm(r) = 2 (-1)^m L_m(2 r^2/theta) exp(-r^2/theta)`.
    /// For fixed `r` the terms alternate with a slowly varying envelope, so the
    /// raw partial sums oscillate; the value returned is the repeated pairwise
    /// average of the last partial sums (Euler transform of the tail).
    pub fn eval(&self, r: f64) -> Result<PointValue> {
        if self.half_dim != 1 {
            return Err(Error::HalfDim {
                expected: 1,
                got: self.half_dim,
            });
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
        }
        let n = self.trunc as usize;
        let x = 2.0 * r * r / self.theta;
        let basis = scaled_laguerre(n, x);

        let mut partial = Vec::with_capacity(n);
        let mut acc = CompensatedSum::new();
        for (m, l) in basis.iter().enumerate() {
            let sign = if m % 2 == 0 { 2.0 } else { -2.0 };
            acc.add(self.coeff(m as u64) * sign * l);
            partial.push(acc.value());
        }
        let deep = euler_average(&partial, EULER_DEPTH);
        let shallow = euler_average(&partial, EULER_DEPTH * 3 / 4);
        let accuracy = if x / 2.0 > 700.0 {
            f64::INFINITY
        } else {
            (deep - shallow).abs()
        };
        Ok(PointValue {
            value: deep,
            accuracy,
        })
    }
}

/// `C(k + M - 1, M - 1)`, the number of multi-indices of total level `k`.
pub fn level_multiplicity(half_dim: u32, k: u64) -> f64 {
    let mut c = 1.0;
    for i in 1..half_dim as u64 {
        c = c * (k + i) as f64 / i as f64;
    }
    c
}

/// `L_m(x) exp(-x/2)` for `m < n` by the three-term recurrence.
pub fn scaled_laguerre(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let g = (-x / 2.0).exp();
    out.push(g);
    if n > 1 {
        out.push((1.0 - x) * g);
    }
    for m in 1..n.saturating_sub(1) {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 - x) * out[m] - mf * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

/// `depth`-fold pairwise averaging of the last `depth + 1` partial sums.
fn euler_average(partial: &[f64], depth: usize) -> f64 {
    if partial.is_empty() {
        return 0.0;
    }
    let depth = depth.min(partial.len() - 1);
    let mut window: Vec<f64> = partial[partial.len() - 1 - depth..].to_vec();
    for _ in 0..depth {
        for i in 0..window.len() - 1 {
            window[i] = 0.5 * (window[i] + window[i + 1]);
        }
        window.pop();
    }
    window[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, theta: f64, m: u32) -> SphereParams {
        SphereParams::new(a, theta, m).unwrap()
    }

    #[test]
    fn sphere_factor_coefficients() {
        let h = DiagSeries::sphere_factor(&params(1.0, 0.1, 1)).unwrap();
        assert!((h.coeff(0) - 0.55).abs() < 1e-15);
        assert!((h.coeff(3) - 0.85).abs() < 1e-15);
        let unit = DiagSeries::from_r2_affine(0.0, 1.0, &params(1.0, 0.1, 1)).unwrap();
        assert_eq!(unit.coeff(12345), 1.0);
    }

    #[test]
    fn r2_in_four_dimensions_counts_both_planes() {
        // rho^2 + sigma^2 at levels (m, n): theta(2m+1) + theta(2n+1) = 2 theta k + 2 theta
        let r2 = DiagSeries::from_r2_affine(1.0, 0.0, &params(1.0, 0.1, 2)).unwrap();
        for k in 0..10u64 {
            // split k as (0, k)
            let oracle = 0.1 + 0.1 * (2 * k + 1) as f64;
            assert!((r2.coeff(k) - oracle).abs() < 1e-15);
            assert!((r2.coeff(k) - (0.2 * k as f64 + 0.2)).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_is_neutral_and_inverse_is_exact() {
        let p = params(1.0, 0.1, 1);
        let h = DiagSeries::sphere_factor(&p).unwrap();
        let unit = DiagSeries::unit(0.1, 1).unwrap();
        let prod = unit.star_mul(&h).unwrap();
        assert_eq!(prod.as_affine(), h.as_affine());
        let inv = h.star_inv().unwrap();
        let one = h.star_mul(&inv).unwrap();
        for k in [0u64, 1, 7, 1000, 1 << 20] {
            assert!((one.coeff(k) - 1.0).abs() <= f64::EPSILON);
        }
        let sq = h.star_mul(&h).unwrap();
        for k in 0..20u64 {
            let phi = (0.2 * k as f64 + 1.1) / 2.0;
            assert!((sq.coeff(k) - phi * phi).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_detects_zero_level() {
        // r^2 + A^2 - 2 theta at level 0 is A^2 - theta
        let ok = DiagSeries::from_r2_affine(1.0, 1.0 - 2.0 * 0.6, &SphereParams::unchecked_window(1.0, 0.6, 1).unwrap()).unwrap();
        assert!((ok.coeff(0) - 0.4).abs() < 1e-15);
        assert!(ok.star_inv().is_ok());
        let bad = DiagSeries::from_r2_affine(1.0, 1.0 - 2.0, &SphereParams::unchecked_window(1.0, 1.0, 1).unwrap()).unwrap();
        assert_eq!(bad.star_inv().unwrap_err(), Error::ZeroCoefficient(0));
        let table = DiagSeries::from_table(0.1, 1, vec![1.0, 2.0, 0.0, 3.0]).unwrap();
        assert_eq!(table.star_inv().unwrap_err(), Error::ZeroCoefficient(2));
    }

    #[test]
    fn sphere_denominator_inverse() {
        // (r^2 + A^2 + 2 theta)^{-1} at level 3, A=1, theta=0.1
        let p = params(1.0, 0.1, 1);
        let d = DiagSeries::from_r2_affine(1.0, 1.0 + 0.2, &p).unwrap();
        let inv = d.star_inv().unwrap();
        // 2 theta m + A^2 + 3 theta = 0.6 + 1.3
        assert!((inv.coeff(3) - 1.0 / 1.9).abs() < 1e-16);
    }

    #[test]
    fn laplacian_of_affine_is_constant() {
        let p = params(1.0, 0.1, 1);
        let h = DiagSeries::sphere_factor(&p).unwrap();
        let lap = h.laplacian().unwrap();
        assert!((lap.coeff(0) - 2.0).abs() < 1e-14);
        let r2 = DiagSeries::from_r2_affine(1.0, 0.0, &p).unwrap();
        assert!((r2.laplacian().unwrap().coeff(17) - 4.0).abs() < 1e-14);
        let unit = DiagSeries::unit(0.1, 1).unwrap();
        assert_eq!(unit.laplacian().unwrap().coeff(5), 0.0);
        let four_d = DiagSeries::unit(0.1, 2).unwrap();
        assert!(four_d.laplacian().is_err());
    }

    #[test]
    fn lazy_laplacian_matches_stencil() {
        // a(m) = m^2: (2/theta)[-(2m+1)m^2 + m(m-1)^2 + (m+1)^3] = (2/theta)(4m + 1)
        let a = DiagSeries::from_fn(0.5, 1, |m| (m * m) as f64).unwrap();
        let lap = a.laplacian().unwrap();
        for m in 0..10u64 {
            assert!((lap.coeff(m) - 4.0 * (4.0 * m as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn integrate_indicator_and_zero() {
        let theta = 0.3;
        for m in 1..=3u32 {
            let mut t = vec![0.0; 6];
            t[4] = 1.0;
            let s = DiagSeries::from_table(theta, m, t).unwrap();
            let got = s.integrate(1e-12).unwrap();
            let expected = (2.0 * std::f64::consts::PI * theta).powi(m as i32) * level_multiplicity(m, 4);
            assert_eq!(got.value, expected);
        }
        let z = DiagSeries::zero(0.1, 1).unwrap();
        assert_eq!(z.integrate(1e-12).unwrap().value, 0.0);
        let unit = DiagSeries::unit(0.1, 1).unwrap();
        assert!(matches!(unit.integrate(1e-8), Err(Error::Divergent { .. })));
        let slow = DiagSeries::from_fn(0.1, 2, |k| 1.0 / ((k + 1) as f64).powi(2)).unwrap();
        assert!(matches!(slow.integrate(1e-8), Err(Error::Divergent { .. })));
    }

    #[test]
    fn integrate_reports_exhausted_truncation() {
        let s = DiagSeries::from_fn(0.1, 1, |k| 1.0 / ((k + 1) as f64).powi(2))
            .unwrap()
            .with_trunc(4096)
            .unwrap();
        assert!(matches!(s.integrate(1e-14), Err(Error::ToleranceNotReached { .. })));
    }

    #[test]
    fn eval_reproduces_basis_identities() {
        let unit = DiagSeries::unit(0.1, 1).unwrap().with_trunc(400).unwrap();
        let level = DiagSeries::affine(0.1, 1, 1.0, 0.0).unwrap().with_trunc(400).unwrap();
        for r in [0.0, 0.5, 1.3, 2.0] {
            let u = unit.eval(r).unwrap();
            assert!((u.value - 1.0).abs() < 1e-8, "r={r}: {u:?}");
            let l = level.eval(r).unwrap();
            assert!((l.value - (r * r / 0.1 - 1.0) / 2.0).abs() < 1e-8, "r={r}: {l:?}");
        }
        let zero = DiagSeries::zero(0.1, 1).unwrap().with_trunc(50).unwrap();
        assert_eq!(zero.eval(1.0).unwrap().value, 0.0);
    }
}
