//! Dense univariate polynomials with real coefficients.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// `c[0] + c[1] t + ... + c[k] t^k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `offset + rate * t`.
    pub fn linear(offset: f64, rate: f64) -> Self {
        Self { coeffs: vec![offset, rate] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Nominal degree (length of the coefficient vector minus one).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// Evaluates the `order`-th derivative at `t` without allocating.
    pub fn eval_derivative(&self, order: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().skip(order).rev() {
            let falling: f64 = ((i - order + 1)..=i).map(|k| k as f64).product();
            acc = acc * t + c * falling;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(0.0);
        }
        Self {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Number of sign changes in the coefficient sequence, zeros skipped.
    /// By Descartes' rule this bounds the number of positive real roots, and
    /// differs from it by an even number.
    pub fn sign_changes(&self) -> usize {
        let mut prev = 0.0f64;
        let mut changes = 0;
        for &c in &self.coeffs {
            if c == 0.0 {
                continue;
            }
            if prev != 0.0 && (c > 0.0) != (prev > 0.0) {
                changes += 1;
            }
            prev = c;
        }
        changes
    }

    /// `p(-t)`: sign changes of this bound the negative real roots.
    pub fn reflect(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { *c })
                .collect(),
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Polynomial { coeffs }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) - rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Polynomial { coeffs }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::default();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn horner_and_derivatives() {
        // 1 + 2t + 3t^2 + 4t^3
        let p = Polynomial::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.eval(2.0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(p.eval_derivative(1, 2.0), 2.0 + 12.0 + 48.0);
        assert_eq!(p.eval_derivative(2, 2.0), 6.0 + 48.0);
        assert_eq!(p.eval_derivative(3, 2.0), 24.0);
        assert_eq!(p.eval_derivative(4, 2.0), 0.0);
        assert_eq!(p.derivative().eval(2.0), p.eval_derivative(1, 2.0));
    }

    #[test]
    fn descartes_counts() {
        // (t - 1)(t - 2) = 2 - 3t + t^2: two sign changes, two positive roots.
        let p = Polynomial::new(vec![2.0, -3.0, 1.0]);
        assert_eq!(p.sign_changes(), 2);
        assert_eq!(p.reflect().sign_changes(), 0);
        assert_eq!(Polynomial::new(vec![1.0, 0.0, 0.0, 5.0]).sign_changes(), 0);
        assert_eq!(Polynomial::new(vec![-1.0, 0.0, 2.0]).sign_changes(), 1);
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(
            a in prop::collection::vec(-10.0f64..10.0, 1..6),
            b in prop::collection::vec(-10.0f64..10.0, 1..6),
            t in -3.0f64..3.0,
        ) {
            let (pa, pb) = (Polynomial::new(a), Polynomial::new(b));
            let prod = (&pa * &pb).eval(t);
            let expect = pa.eval(t) * pb.eval(t);
            prop_assert!((prod - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            let diff = (&pa - &pb).eval(t);
            prop_assert!((diff - (pa.eval(t) - pb.eval(t))).abs() <= 1e-9 * (1.0 + diff.abs()));
        }
    }
}
