//! Compensated summation with a fixed reduction order.

/// Kahan–Babuška (Neumaier) accumulator.
///
/// Exact zeros are skipped, so summing the same nonzero terms in the same
/// order gives a bitwise-identical result regardless of how many zero cells
/// the traversal visits.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        if term == 0.0 {
            return;
        }
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Trapezoidal rule over (possibly non-uniform) abscissae.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    let mut acc = KahanSum::new();
    for k in 1..times.len() {
        acc.add(0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]));
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_cancellation() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(kahan_sum(terms), 2.0);
        assert_ne!(terms.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn zeros_do_not_perturb() {
        let a = kahan_sum([0.1, 0.2, 0.3, 1e-17]);
        let b = kahan_sum([0.0, 0.1, 0.0, 0.2, 0.0, 0.3, 0.0, 1e-17, 0.0]);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let t = [0.0, 0.5, 1.5, 2.0];
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &v) - 8.0).abs() < 1e-14);
    }
}
