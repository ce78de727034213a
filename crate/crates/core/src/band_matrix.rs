//! Truncated matrix-basis expansions of general 2D functions.
//!
//! A function `sum c_mn f_mn` is stored as the `N x N` matrix `c`. The star
//! product is the matrix product and derivatives are commutators with the
//! ladder matrix `a` (`a[n-1][n] = sqrt(n)`):
//! `d c = [c, a^T]/sqrt(theta)`, `dbar c = [a, c]/sqrt(theta)`,
//! `d_x1 = (d + dbar)/sqrt 2`, `d_x2 = (dbar - d)/(sqrt 2 i)`.
//!
//! Truncation corrupts entries near the edge, so every value carries a
//! `valid` size: entries with both indices below it are exact. A negative
//! `theta` denotes the opposite algebra, `f *_(-theta) g = g *_theta f`, on the
//! same basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::diag_series::DiagSeries;
use crate::error::{Error, Result};
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X1, Axis::X2];
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    theta: f64,
    n: usize,
    entries: Vec<Complex64>,
    valid: usize,
    /// Half bandwidth of the represented infinite matrix, if known.
    band: Option<usize>,
}

impl BandMatrix {
    pub fn zeros(theta: f64, n: usize) -> Result<Self> {
        if !(theta.is_finite() && theta != 0.0) {
            return Err(Error::InvalidParameter(format!("theta must be nonzero, got {theta}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(BandMatrix {
            theta,
            n,
            entries: vec![ZERO; n * n],
            valid: n,
            band: Some(0),
        })
    }

    pub fn identity(theta: f64, n: usize) -> Result<Self> {
        let mut m = Self::zeros(theta, n)?;
        for i in 0..n {
            m.entries[i * n + i] = ONE;
        }
        Ok(m)
    }

    /// Row-major entries; treated as exact on the whole block with unknown bandwidth.
    pub fn from_entries(theta: f64, n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Mismatch(format!("{} entries for dimension {n}", entries.len())));
        }
        let mut m = Self::zeros(theta, n)?;
        m.entries = entries;
        m.band = m.measured_band();
        Ok(m)
    }

    pub fn from_diag(series: &DiagSeries, n: usize) -> Result<Self> {
        if series.half_dim() != 1 {
            return Err(Error::HalfDim {
                expected: 1,
                got: series.half_dim(),
            });
        }
        let mut m = Self::zeros(series.theta(), n)?;
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(series.coeff(i as u64), 0.0);
        }
        Ok(m)
    }

    /// The same function read in the opposite algebra (`theta -> -theta`).
    pub fn opposite(&self) -> BandMatrix {
        BandMatrix {
            theta: -self.theta,
            ..self.clone()
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn valid(&self) -> usize {
        self.valid
    }

    pub fn bandwidth(&self) -> Option<usize> {
        self.band
    }

    /// Restrict the trusted window further.
    pub fn with_valid(mut self, valid: usize) -> Self {
        self.valid = self.valid.min(valid);
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.n + j] = v;
        self.band = self.measured_band();
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    fn measured_band(&self) -> Option<usize> {
        let mut b = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) != ZERO {
                    b = b.max(i.abs_diff(j));
                }
            }
        }
        // a full block says nothing about the entries beyond the truncation
        (b + 1 < self.n).then_some(b)
    }

    pub fn is_diagonal(&self) -> bool {
        self.band == Some(0)
    }

    fn check_compatible(&self, other: &BandMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Mismatch(format!("dimension {} vs {}", self.n, other.n)));
        }
        if self.theta != other.theta {
            return Err(Error::Mismatch(format!("theta {} vs {}", self.theta, other.theta)));
        }
        Ok(())
    }

    fn zip_with(&self, other: &BandMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<BandMatrix> {
        self.check_compatible(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(&x, &y)| f(x, y)).collect();
        Ok(BandMatrix {
            theta: self.theta,
            n: self.n,
            entries,
            valid: self.valid.min(other.valid),
            band: self.band.zip(other.band).map(|(a, b)| a.max(b)),
        })
    }

    pub fn add(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.zip_with(other, |x, y| x - y)
    }

    pub fn scale(&self, s: Complex64) -> BandMatrix {
        BandMatrix {
            entries: self.entries.iter().map(|&x| x * s).collect(),
            ..self.clone()
        }
    }

    /// Valid size and bandwidth of a product of `self` and `other`.
    fn product_window(&self, other: &BandMatrix) -> (usize, Option<usize>) {
        let v = self.valid.min(other.valid);
        match (self.band, other.band) {
            (Some(a), Some(b)) => (v.saturating_sub(a.min(b)), Some(a + b)),
            (Some(a), None) | (None, Some(a)) => (v.saturating_sub(a), None),
            (None, None) => (v / 2, None),
        }
    }

    fn matmul(left: &BandMatrix, right: &BandMatrix, parallel: bool) -> Vec<Complex64> {
        let n = left.n;
        let mut out = vec![ZERO; n * n];
        let row = |i: usize, dst: &mut [Complex64]| {
            let lrow = &left.entries[i * n..(i + 1) * n];
            let (lo, hi) = match left.band {
                Some(b) => (i.saturating_sub(b), (i + b + 1).min(n)),
                None => (0, n),
            };
            for (j, d) in dst.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in lo..hi {
                    acc += lrow[k] * right.entries[k * n + j];
                }
                *d = acc;
            }
        };
        if parallel {
            par::for_each_row(&mut out, n, row);
        } else {
            par::seq::for_each_row(&mut out, n, row);
        }
        out
    }

    fn star_mul_impl(&self, other: &BandMatrix, parallel: bool) -> Result<BandMatrix> {
        self.check_compatible(other)?;
        let (left, right) = if self.theta > 0.0 { (self, other) } else { (other, self) };
        let (valid, band) = self.product_window(other);
        Ok(BandMatrix {
            theta: self.theta,
            n: self.n,
            entries: Self::matmul(left, right, parallel),
            valid,
            band,
        })
    }

    /// Star product; rows are computed on the rayon pool when the `parallel`
    /// feature is on, each entry accumulated in ascending index order.
    pub fn star_mul(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.star_mul_impl(other, true)
    }

    /// Star product on the calling thread only; bit-identical to [`star_mul`](Self::star_mul).
    pub fn star_mul_sequential(&self, other: &BandMatrix) -> Result<BandMatrix> {
        self.star_mul_impl(other, false)
    }

    /// Holomorphic and antiholomorphic derivatives `(d c, dbar c)`.
    pub fn complex_derivs(&self) -> (BandMatrix, BandMatrix) {
        let n = self.n;
        let s = 1.0 / self.theta.abs().sqrt();
        let c = |i: usize, j: usize| self.entries[i * n + j];
        let sq = |k: usize| (k as f64).sqrt();
        let mut d = vec![ZERO; n * n];
        let mut dbar = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                // (c a^T)_ij = c_(i,j+1) sqrt(j+1);  (a^T c)_ij = sqrt(i) c_(i-1,j)
                let mut v = ZERO;
                if j + 1 < n {
                    v += c(i, j + 1) * sq(j + 1);
                }
                if i > 0 {
                    v -= c(i - 1, j) * sq(i);
                }
                d[i * n + j] = v * s;
                // (a c)_ij = sqrt(i+1) c_(i+1,j);  (c a)_ij = c_(i,j-1) sqrt(j)
                let mut w = ZERO;
                if i + 1 < n {
                    w += c(i + 1, j) * sq(i + 1);
                }
                if j > 0 {
                    w -= c(i, j - 1) * sq(j);
                }
                dbar[i * n + j] = w * s;
            }
        }
        let wrap = |entries| BandMatrix {
            theta: self.theta,
            n,
            entries,
            valid: self.valid.saturating_sub(1),
            band: self.band.map(|b| b + 1).filter(|&b| b + 1 < n),
        };
        (wrap(d), wrap(dbar))
    }

    pub fn deriv(&self, axis: Axis) -> BandMatrix {
        let (d, dbar) = self.complex_derivs();
        let r2 = std::f64::consts::SQRT_2;
        let combined = match axis {
            Axis::X1 => d.add(&dbar).map(|m| m.scale(Complex64::new(1.0 / r2, 0.0))),
            // (dbar - d)/(sqrt2 i) = -i (dbar - d)/sqrt2
            Axis::X2 => dbar.sub(&d).map(|m| m.scale(Complex64::new(0.0, -1.0 / r2))),
        };
        combined.expect("derivatives share shape")
    }

    /// Star inverse. Diagonal inputs give the exact levelwise reciprocal;
    /// otherwise the truncated block is inverted and the valid window halved.
    pub fn star_inv(&self) -> Result<BandMatrix> {
        self.star_inv_with_margin(self.valid / 2)
    }

    /// As [`star_inv`](Self::star_inv) with an explicit margin for non-diagonal input.
    pub fn star_inv_with_margin(&self, margin: usize) -> Result<BandMatrix> {
        let n = self.n;
        if self.is_diagonal() {
            let mut out = self.clone();
            for i in 0..n {
                let d = self.get(i, i);
                if d == ZERO {
                    return Err(Error::Singular);
                }
                out.entries[i * n + i] = if d.im == 0.0 {
                    Complex64::new(1.0 / d.re, 0.0)
                } else {
                    d.inv()
                };
            }
            return Ok(out);
        }
        let m = DMatrix::from_row_slice(n, n, &self.entries);
        let inv = m.try_inverse().ok_or(Error::Singular)?;
        if inv.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Singular);
        }
        let mut entries = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = inv[(i, j)];
            }
        }
        Ok(BandMatrix {
            theta: self.theta,
            n,
            entries,
            valid: self.valid.saturating_sub(margin),
            band: None,
        })
    }

    /// Largest `|c_ij - conj(c_ji)|` inside the valid window.
    pub fn hermitian_defect(&self) -> f64 {
        let v = self.valid;
        let mut worst: f64 = 0.0;
        for i in 0..v {
            for j in 0..v {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Largest entrywise difference on the common valid window.
    pub fn max_abs_diff(&self, other: &BandMatrix) -> f64 {
        let v = self.valid.min(other.valid);
        let mut worst: f64 = 0.0;
        for i in 0..v {
            for j in 0..v {
                worst = worst.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        worst
    }
}

/// Structure constants of the frame `e_i = h * d_i` for a conformally flat
/// 2D metric `h^{-2} delta`: `c_iji = -(h * d_j h * h^{-1})`,
/// `c_ijj = h * d_i h * h^{-1}` for `i != j`, antisymmetric in `i, j`.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    /// `h * d_1 h * h^{-1}` and `h * d_2 h * h^{-1}`.
    frame: [BandMatrix; 2],
}

impl StructureConstants {
    pub fn new(h: &BandMatrix, h_inv: &BandMatrix) -> Result<Self> {
        let g = |axis| h.star_mul(&h.deriv(axis))?.star_mul(h_inv);
        Ok(StructureConstants {
            frame: [g(Axis::X1)?, g(Axis::X2)?],
        })
    }

    /// `c_ijk` with zero-based `i, j, k`; `None` when it vanishes identically.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Option<BandMatrix> {
        if i == j || k > 1 {
            return None;
        }
        let minus = Complex64::new(-1.0, 0.0);
        if k == i {
            Some(self.frame[j].scale(minus))
        } else {
            Some(self.frame[i].clone())
        }
    }
}

/// Scalar curvature of the metric `h^{-2}(dx1^2 + dx2^2)`:
/// `S = 2 e_i c_ijj - c_kii c_kjj - c_ijk c_ijk / 4 - c_ijk c_ikj / 2`,
/// with all products star products and `e_i g = h * d_i g`.
pub fn scalar_curvature_generic(h: &BandMatrix) -> Result<BandMatrix> {
    let h_inv = h.star_inv()?;
    let c = StructureConstants::new(h, &h_inv)?;
    let mut s = BandMatrix::zeros(h.theta(), h.dim())?;
    let mut acc = |term: Result<BandMatrix>, weight: f64| -> Result<()> {
        s = s.add(&term?.scale(Complex64::new(weight, 0.0)))?;
        Ok(())
    };
    for i in 0..2 {
        for j in 0..2 {
            if let Some(cijj) = c.get(i, j, j) {
                acc(h.star_mul(&cijj.deriv(Axis::BOTH[i])), 2.0)?;
            }
            for k in 0..2 {
                if let (Some(a), Some(b)) = (c.get(k, i, i), c.get(k, j, j)) {
                    acc(a.star_mul(&b), -1.0)?;
                }
                if let Some(a) = c.get(i, j, k) {
                    acc(a.star_mul(&a), -0.25)?;
                    if let Some(b) = c.get(i, k, j) {
                        acc(a.star_mul(&b), -0.5)?;
                    }
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::s2_coeffs;
    use crate::params::SphereParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_diag_embeds_coefficients() {
        let p = SphereParams::new(1.0, 0.1, 1).unwrap();
        let h = DiagSeries::sphere_factor(&p).unwrap();
        let m = BandMatrix::from_diag(&h, 4).unwrap();
        let d: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
        for (x, e) in d.iter().zip([0.55, 0.65, 0.75, 0.85]) {
            assert!((x - e).abs() < 1e-15);
        }
        let unit = DiagSeries::unit(0.1, 1).unwrap();
        assert_eq!(BandMatrix::from_diag(&unit, 5).unwrap(), BandMatrix::identity(0.1, 5).unwrap());
        assert!(BandMatrix::from_diag(&DiagSeries::unit(0.1, 2).unwrap(), 3).is_err());
    }

    #[test]
    fn single_entry_derivative() {
        let theta = 0.5;
        let mut m = BandMatrix::zeros(theta, 8).unwrap();
        m.set(2, 3, ONE);
        let d = m.deriv(Axis::X1);
        let s = |k: f64| (k / theta).sqrt() / std::f64::consts::SQRT_2;
        let mut expect = BandMatrix::zeros(theta, 8).unwrap();
        expect.set(2, 2, c(s(3.0), 0.0));
        expect.set(3, 3, c(-s(3.0), 0.0));
        expect.set(1, 3, c(s(2.0), 0.0));
        expect.set(2, 4, c(-s(4.0), 0.0));
        for i in 0..8 {
            for j in 0..8 {
                assert!((d.get(i, j) - expect.get(i, j)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn laplacian_of_r_squared() {
        let p = SphereParams::new(1.0, 0.1, 1).unwrap();
        let r2 = DiagSeries::from_r2_affine(1.0, 0.0, &p).unwrap();
        let m = BandMatrix::from_diag(&r2, 16).unwrap();
        let lap = m.deriv(Axis::X1).deriv(Axis::X1).add(&m.deriv(Axis::X2).deriv(Axis::X2)).unwrap();
        assert_eq!(lap.valid(), 14);
        let four = BandMatrix::identity(0.1, 16).unwrap().scale(c(4.0, 0.0));
        assert!(lap.max_abs_diff(&four) < 1e-12);
        let one = BandMatrix::identity(0.1, 16).unwrap();
        assert!(one.deriv(Axis::X2).max_abs_diff(&BandMatrix::zeros(0.1, 16).unwrap()) == 0.0);
    }

    #[test]
    fn diagonal_inverse_is_exact() {
        let p = SphereParams::new(1.0, 0.1, 1).unwrap();
        let h = DiagSeries::sphere_factor(&p).unwrap();
        let m = BandMatrix::from_diag(&h, 10).unwrap();
        let inv = m.star_inv().unwrap();
        assert_eq!(inv.valid(), 10);
        for i in 0..10 {
            assert_eq!(inv.get(i, i).re, 1.0 / h.coeff(i as u64));
        }
        let mut z = BandMatrix::identity(0.1, 3).unwrap();
        z.set(1, 1, ZERO);
        assert_eq!(z.star_inv().unwrap_err(), Error::Singular);
    }

    #[test]
    fn dense_inverse_residual() {
        let n = 8;
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let base = if i == j { 4.0 } else { 0.0 };
                c(base + ((i * 7 + j * 3) % 5) as f64 * 0.1, ((i + 2 * j) % 3) as f64 * 0.05)
            })
            .collect();
        let a = BandMatrix::from_entries(0.3, n, entries).unwrap();
        let prod = a.star_mul(&a.star_inv().unwrap()).unwrap();
        let id = BandMatrix::identity(0.3, n).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((prod.get(i, j) - id.get(i, j)).norm());
            }
        }
        assert!(worst <= 1e-10);
    }

    #[test]
    fn flat_metric_has_zero_curvature() {
        let h = BandMatrix::identity(0.2, 12).unwrap().scale(c(1.7, 0.0));
        let s = scalar_curvature_generic(&h).unwrap();
        assert_eq!(s.max_abs_diff(&BandMatrix::zeros(0.2, 12).unwrap()), 0.0);
    }

    #[test]
    fn sphere_curvature_matches_closed_form() {
        for &(a, t) in &[(1.0, 0.2), (2.0, 0.3)] {
            let p = SphereParams::new(a, t, 1).unwrap();
            let h = BandMatrix::from_diag(&DiagSeries::sphere_factor(&p).unwrap(), 64).unwrap();
            let s = scalar_curvature_generic(&h).unwrap();
            let exact = s2_coeffs(&p).unwrap();
            for m in 0..=32 {
                assert!((s.get(m, m).re - exact.coeff(m as u64)).abs() < 1e-9, "m={m}");
                assert!(s.get(m, m).im.abs() < 1e-12);
            }
            assert!(s.is_hermitian(1e-12));
        }
    }

    #[test]
    fn opposite_algebra_gives_same_curvature() {
        let p = SphereParams::new(1.0, 0.2, 1).unwrap();
        let h = BandMatrix::from_diag(&DiagSeries::sphere_factor(&p).unwrap(), 48).unwrap();
        let plus = scalar_curvature_generic(&h).unwrap();
        let minus = scalar_curvature_generic(&h.opposite()).unwrap();
        assert!(plus.with_valid(24).max_abs_diff(&minus) < 1e-12);
    }
}
