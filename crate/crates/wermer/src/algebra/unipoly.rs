//! Dense univariate polynomials over complex coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// ldexp with saturation: overflow yields infinity, underflow yields zero.
pub fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut v = x;
    let mut rem = e;
    while rem > 1000 {
        v *= 2f64.powi(1000);
        if !v.is_finite() {
            return v;
        }
        rem -= 1000;
    }
    while rem < -1000 {
        v *= 2f64.powi(-1000);
        if v == 0.0 {
            return 0.0;
        }
        rem += 1000;
    }
    v * 2f64.powi(rem as i32)
}

fn ldexp_c(z: Complex64, e: i64) -> Complex64 {
    Complex64::new(ldexp(z.re, e), ldexp(z.im, e))
}

/// A value carried as `mantissa * 2^exp2` so that products and polynomial
/// values far outside f64 range stay representable. The mantissa magnitude
/// is kept within a comfortable window around 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub exp2: i64,
}

impl Scaled {
    pub fn new(value: Complex64) -> Self {
        Scaled {
            mantissa: value,
            exp2: 0,
        }
        .renormalized()
    }

    pub fn zero() -> Self {
        Scaled {
            mantissa: Complex64::new(0.0, 0.0),
            exp2: 0,
        }
    }

    pub fn one() -> Self {
        Scaled {
            mantissa: Complex64::new(1.0, 0.0),
            exp2: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    fn renormalized(mut self) -> Self {
        let re = self.mantissa.re.abs();
        let im = self.mantissa.im.abs();
        let m = if re > im { re } else { im };
        if m == 0.0 {
            self.exp2 = 0;
            return self;
        }
        if !m.is_finite() {
            // Caller fed an already-overflowed value; nothing to recover.
            return self;
        }
        if !(1e-60..=1e60).contains(&m) {
            let e = m.log2().round() as i64;
            self.mantissa = ldexp_c(self.mantissa, -e);
            self.exp2 += e;
        }
        self
    }

    pub fn mul(self, other: Scaled) -> Scaled {
        Scaled {
            mantissa: self.mantissa * other.mantissa,
            exp2: self.exp2 + other.exp2,
        }
        .renormalized()
    }

    pub fn mul_value(self, value: Complex64) -> Scaled {
        Scaled {
            mantissa: self.mantissa * value,
            exp2: self.exp2,
        }
        .renormalized()
    }

    /// Add a plain complex value, respecting the exponent offset.
    pub fn add_value(self, value: Complex64) -> Scaled {
        if value == Complex64::new(0.0, 0.0) {
            return self;
        }
        if self.is_zero() {
            return Scaled::new(value);
        }
        let shifted = ldexp_c(value, -self.exp2);
        if shifted.re.is_finite() && shifted.im.is_finite() {
            if shifted == Complex64::new(0.0, 0.0) {
                // Value is negligible against the accumulator.
                return self;
            }
            Scaled {
                mantissa: self.mantissa + shifted,
                exp2: self.exp2,
            }
            .renormalized()
        } else {
            // Value dwarfs the accumulator beyond f64 range.
            Scaled::new(value)
        }
    }

    pub fn add(self, other: Scaled) -> Scaled {
        if other.is_zero() {
            return self;
        }
        if self.is_zero() {
            return other;
        }
        let shift = other.exp2 - self.exp2;
        let shifted = ldexp_c(other.mantissa, shift);
        if shifted.re.is_finite() && shifted.im.is_finite() {
            if shifted == Complex64::new(0.0, 0.0) {
                return self;
            }
            Scaled {
                mantissa: self.mantissa + shifted,
                exp2: self.exp2,
            }
            .renormalized()
        } else {
            other
        }
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
        }
    }

    /// Collapse to a plain complex; may overflow/underflow by design.
    pub fn value(&self) -> Complex64 {
        ldexp_c(self.mantissa, self.exp2)
    }

    /// Ratio of two scaled values as a plain complex number.
    pub fn ratio(self, denom: Scaled) -> Complex64 {
        let q = self.mantissa / denom.mantissa;
        ldexp_c(q, self.exp2 - denom.exp2)
    }
}

/// Dense univariate polynomial, coefficients in ascending degree order.
///
/// The leading coefficient of a nonzero polynomial is kept nonzero (degrees
/// are tight); the zero polynomial is a single zero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    pub coeffs: Vec<Complex64>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm_sqr() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly {
            coeffs: vec![Complex64::new(0.0, 0.0)],
        }
    }

    pub fn one() -> Self {
        UniPoly {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn constant(c: Complex64) -> Self {
        UniPoly::new(vec![c])
    }

    /// `z - root`
    pub fn linear(root: Complex64) -> Self {
        UniPoly {
            coeffs: vec![-root, Complex64::new(1.0, 0.0)],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm_sqr() == 0.0
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().expect("non-empty by construction")
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Plain Horner evaluation; adequate when coefficients and argument stay
    /// well inside f64 range.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation with exponent tracking; safe for large degrees and
    /// arguments far outside the coefficient scale.
    pub fn eval_scaled(&self, z: Complex64) -> Scaled {
        let mut acc = Scaled::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_value(z).add_value(*c);
        }
        acc
    }

    /// Evaluate the polynomial and its derivative together (scaled).
    pub fn eval_with_derivative_scaled(&self, z: Complex64) -> (Scaled, Scaled) {
        let mut p = Scaled::zero();
        let mut d = Scaled::zero();
        for c in self.coeffs.iter().rev() {
            d = d.mul_value(z).add(p);
            p = p.mul_value(z).add_value(*c);
        }
        (p, d)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.degree() == 0 {
            return UniPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
        UniPoly::new(coeffs)
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        UniPoly::new(coeffs)
    }

    pub fn scale(&self, s: Complex64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        UniPoly::new(crate::algebra::convolve(&self.coeffs, &other.coeffs))
    }

    /// Monic product of `z - r` over the given roots with multiplicities.
    pub fn from_roots(roots: &[(Complex64, u32)]) -> UniPoly {
        let mut p = UniPoly::one();
        for &(r, m) in roots {
            let lin = UniPoly::linear(r);
            for _ in 0..m {
                p = p.mul(&lin);
            }
        }
        p
    }

    /// Divide all coefficients so the maximum magnitude is 1.
    /// Returns the normalized polynomial and the removed scale.
    pub fn max_normalized(&self) -> (UniPoly, f64) {
        let m = self.max_coeff_norm();
        if m == 0.0 {
            return (self.clone(), 1.0);
        }
        (UniPoly::new(self.coeffs.iter().map(|c| c / m).collect()), m)
    }

    pub fn require_nonzero_leading(&self, context: &str) -> Result<()> {
        if self.is_zero() || self.leading().norm_sqr() == 0.0 {
            return Err(Error::Degenerate(format!(
                "{context}: leading coefficient vanishes"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_is_tight() {
        let p = UniPoly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn eval_matches_naive() {
        let p = UniPoly::new(vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0)]);
        let z = c(1.5, -0.5);
        let naive = p.coeffs[0] + p.coeffs[1] * z + p.coeffs[2] * z * z;
        assert!((p.eval(z) - naive).norm() < 1e-14);
        assert!((p.eval_scaled(z).value() - naive).norm() < 1e-14);
    }

    #[test]
    fn scaled_eval_survives_huge_arguments() {
        // (z - 1)^4 at z = 1e120 would overflow term-by-term powers.
        let p = UniPoly::from_roots(&[(c(1.0, 0.0), 4)]);
        let z = c(1e120, 0.0);
        let v = p.eval_scaled(z);
        let expected_ln = 4.0 * (1e120f64).ln();
        assert!((v.ln_abs() - expected_ln).abs() < 1e-6 * expected_ln.abs());
    }

    #[test]
    fn scaled_derivative_matches_dense() {
        let p = UniPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(1.0, 0.0)]);
        let z = c(-0.7, 0.4);
        let (pv, dv) = p.eval_with_derivative_scaled(z);
        assert!((pv.value() - p.eval(z)).norm() < 1e-13);
        assert!((dv.value() - p.derivative().eval(z)).norm() < 1e-13);
    }

    #[test]
    fn derivative_of_cubic() {
        let p = UniPoly::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)]);
        let d = p.derivative();
        assert_eq!(d.coeffs.len(), 3);
        assert!((d.coeffs[1] - c(6.0, 0.0)).norm() < 1e-15);
        assert!((d.coeffs[2] - c(6.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn from_roots_expands() {
        // (z-1)^2 (z+i) has constant coefficient i.
        let p = UniPoly::from_roots(&[(c(1.0, 0.0), 2), (c(0.0, -1.0), 1)]);
        assert_eq!(p.degree(), 3);
        assert!((p.eval(c(1.0, 0.0))).norm() < 1e-14);
        assert!((p.eval(c(0.0, -1.0))).norm() < 1e-14);
        assert!((p.coeffs[0] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn scaled_addition_extremes() {
        let big = Scaled::new(c(1.0, 0.0)).mul(Scaled {
            mantissa: c(1.0, 0.0),
            exp2: 4000,
        });
        let tiny = Scaled::new(c(1.0, 0.0));
        let sum = big.add(tiny);
        assert_eq!(sum.exp2, 4000);
        let sum2 = tiny.add(big);
        assert!((sum2.ln_abs() - 4000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
