//! Compensated accumulation in a fixed order.

use std::iter::Sum;
use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation. Terms are folded in the order they
/// are added, so a fixed input order gives a bit-reproducible result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl Sum<f64> for CompensatedSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice in ascending index order.
pub fn compensated(xs: &[f64]) -> f64 {
    xs.iter().copied().sum::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated(&xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn harmonic_tail_matches_reference() {
        // sum_{k=1}^{10^6} 1/k^2 = pi^2/6 - psi'(10^6 + 1)
        let xs: Vec<f64> = (1..=1_000_000u64).map(|k| 1.0 / (k as f64 * k as f64)).collect();
        let tail = 1.0 / 1_000_000.5;
        let reference = std::f64::consts::PI.powi(2) / 6.0 - tail;
        assert!((compensated(&xs) - reference).abs() < 1e-15);
    }
}
