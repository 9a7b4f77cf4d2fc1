//! Truncated Laurent series in `x = tau^(-1/2)`.
//!
//! A series carries its lowest exponent and the coefficients of every
//! exponent up to its order; every coefficient that is stored is exact with
//! respect to the operands, and operations shrink the order whenever a
//! coefficient would depend on terms beyond an operand's truncation.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct HalfPowerSeries {
    low: i32,
    coeffs: Vec<f64>,
}

impl HalfPowerSeries {
    /// Series `sum_j coeffs[j] x^(low + j)`; its order is `low + coeffs.len() - 1`.
    pub fn new(low: i32, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        HalfPowerSeries { low, coeffs }
    }

    /// `c x^exponent`, known exactly through `order`.
    pub fn monomial(c: f64, exponent: i32, order: i32) -> Self {
        assert!(order >= exponent);
        let mut coeffs = vec![0.0; (order - exponent + 1) as usize];
        coeffs[0] = c;
        HalfPowerSeries::new(exponent, coeffs)
    }

    pub fn constant(c: f64, order: i32) -> Self {
        Self::monomial(c, 0, order)
    }

    pub fn zero(order: i32) -> Self {
        Self::constant(0.0, order)
    }

    pub fn low(&self) -> i32 {
        self.low
    }

    /// Highest exponent whose coefficient is known.
    pub fn order(&self) -> i32 {
        self.low + self.coeffs.len() as i32 - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^n`; zero below the lowest exponent.
    ///
    /// Panics when `n` lies beyond the order.
    pub fn coeff(&self, n: i32) -> f64 {
        assert!(n <= self.order(), "coefficient x^{n} beyond order {}", self.order());
        if n < self.low {
            0.0
        } else {
            self.coeffs[(n - self.low) as usize]
        }
    }

    pub fn truncate(&self, order: i32) -> Self {
        let order = order.min(self.order());
        assert!(order >= self.low, "truncation below the lowest exponent");
        HalfPowerSeries::new(self.low, self.coeffs[..(order - self.low + 1) as usize].to_vec())
    }

    pub fn scale(&self, c: f64) -> Self {
        HalfPowerSeries::new(self.low, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Evaluates the truncated sum at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        // Horner in x, then the x^low prefactor
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc * x.powi(self.low)
    }

    /// Derivative with respect to `tau = x^(-2)`, i.e. `-(x^3 / 2) d/dx`.
    pub fn d_dtau(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| -0.5 * (self.low + j as i32) as f64 * c)
            .collect();
        HalfPowerSeries::new(self.low + 2, coeffs)
    }

    /// Derivative with respect to `x`.
    pub fn d_dx(&self) -> Self {
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| (self.low + j as i32) as f64 * c)
            .collect();
        HalfPowerSeries::new(self.low - 1, coeffs)
    }

    /// `(sin a, cos a)` for a series without negative powers.
    pub fn sin_cos(&self) -> (Self, Self) {
        assert!(self.low >= 0, "trigonometric composition needs a finite constant term");
        let order = self.order();
        let n = (order + 1) as usize;
        let a: Vec<f64> = (0..=order).map(|k| self.coeff(k)).collect();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        (s[0], c[0]) = a[0].sin_cos();
        // S' = C a', C' = -S a'
        for j in 1..n {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for k in 1..=j {
                let w = k as f64 * a[k];
                ds += w * c[j - k];
                dc -= w * s[j - k];
            }
            s[j] = ds / j as f64;
            c[j] = dc / j as f64;
        }
        (HalfPowerSeries::new(0, s), HalfPowerSeries::new(0, c))
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Multiplicative inverse; the lowest stored coefficient must be nonzero.
    pub fn recip(&self) -> Self {
        let b0 = self.coeffs[0];
        assert!(b0 != 0.0, "reciprocal of a series with vanishing leading coefficient");
        let n = self.coeffs.len();
        let mut c = vec![0.0; n];
        c[0] = 1.0 / b0;
        for j in 1..n {
            let acc: f64 = (1..=j).map(|k| self.coeffs[k] * c[j - k]).sum();
            c[j] = -acc / b0;
        }
        HalfPowerSeries::new(-self.low, c)
    }

    /// `m x (1 + x^2)^(-1/2)`, i.e. `m / sqrt(1 + tau)` written in `x`, through `order`.
    pub fn decaying_pump(m: f64, order: i32) -> Self {
        assert!(order >= 1);
        let mut coeffs = vec![0.0; order as usize];
        // binomial series of (1 + y)^(-1/2) with y = x^2
        let mut binom = 1.0;
        let mut j = 0usize;
        while 2 * j < coeffs.len() {
            coeffs[2 * j] = m * binom;
            binom *= -(0.5 + j as f64) / (j as f64 + 1.0);
            j += 1;
        }
        HalfPowerSeries::new(1, coeffs)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let low = self.low.min(other.low);
        let order = self.order().min(other.order());
        let coeffs = (low..=order)
            .map(|n| {
                let a = if n >= self.low { self.coeff(n) } else { 0.0 };
                let b = if n >= other.low { other.coeff(n) } else { 0.0 };
                a + sign * b
            })
            .collect();
        HalfPowerSeries::new(low, coeffs)
    }
}

impl Add for &HalfPowerSeries {
    type Output = HalfPowerSeries;
    fn add(self, rhs: &HalfPowerSeries) -> HalfPowerSeries {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &HalfPowerSeries {
    type Output = HalfPowerSeries;
    fn sub(self, rhs: &HalfPowerSeries) -> HalfPowerSeries {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &HalfPowerSeries {
    type Output = HalfPowerSeries;
    fn neg(self) -> HalfPowerSeries {
        self.scale(-1.0)
    }
}

impl Mul for &HalfPowerSeries {
    type Output = HalfPowerSeries;
    fn mul(self, rhs: &HalfPowerSeries) -> HalfPowerSeries {
        let low = self.low + rhs.low;
        let order = (self.order() + rhs.low).min(rhs.order() + self.low);
        let coeffs = (low..=order)
            .map(|n| {
                (self.low..=n - rhs.low)
                    .map(|i| self.coeff(i) * rhs.coeff(n - i))
                    .sum()
            })
            .collect();
        HalfPowerSeries::new(low, coeffs)
    }
}

impl Mul<f64> for &HalfPowerSeries {
    type Output = HalfPowerSeries;
    fn mul(self, rhs: f64) -> HalfPowerSeries {
        self.scale(rhs)
    }
}
