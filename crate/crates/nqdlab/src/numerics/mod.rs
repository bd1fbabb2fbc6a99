//! Shared numeric kernels: compensated summation, adaptive quadrature and
//! closed-form tail bounds for log-power sums.

pub mod powlog;
pub mod quad;

use std::ops::AddAssign;

/// Neumaier-compensated accumulator.
///
/// Long series of slowly varying terms (the checker sums up to 2^20 of them)
/// would otherwise lose the trend in rounding noise.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
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

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for KahanSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl From<KahanSum> for f64 {
    fn from(k: KahanSum) -> f64 {
        k.value()
    }
}

/// Sum an iterator with compensation.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = KahanSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive_on_harmonic_tail() {
        // Σ 1/k over a huge range in ascending order is a classic
        // cancellation trap for naive accumulation.
        let n = 2_000_000u64;
        let naive: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        let comp = kahan_sum((1..=n).map(|k| 1.0 / k as f64));
        // Descending-order naive sum is accurate to ~1 ulp and serves as the
        // reference.
        let reference: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
        assert!((comp - reference).abs() <= (naive - reference).abs());
        assert!((comp - reference).abs() < 1e-12);
    }

    #[test]
    fn compensated_sum_exact_small_cases() {
        let mut acc = KahanSum::new();
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 1.0);
    }
}
