//! Dense bivariate polynomials in (z, w).

use num_complex::Complex64;

use super::unipoly::{Scaled, UniPoly};
use crate::error::{Error, Result};

/// Dense bivariate polynomial. `w_rows[j]` holds the coefficient polynomial
/// (in z) of `w^j`, so the coefficient of `z^i w^j` is `w_rows[j].coeffs[i]`.
///
/// Degrees are kept tight: the top w-row is not identically zero and each
/// row's z-degree is tight.
#[derive(Debug, Clone, PartialEq)]
pub struct BiPoly {
    pub w_rows: Vec<UniPoly>,
}

impl BiPoly {
    pub fn new(mut w_rows: Vec<UniPoly>) -> Self {
        while w_rows.len() > 1 && w_rows.last().map_or(false, |r| r.is_zero()) {
            w_rows.pop();
        }
        if w_rows.is_empty() {
            w_rows.push(UniPoly::zero());
        }
        BiPoly { w_rows }
    }

    pub fn zero() -> Self {
        BiPoly {
            w_rows: vec![UniPoly::zero()],
        }
    }

    pub fn deg_w(&self) -> usize {
        self.w_rows.len() - 1
    }

    pub fn deg_z(&self) -> usize {
        self.w_rows.iter().map(|r| r.degree()).max().unwrap_or(0)
    }

    /// Coefficient polynomial of the top power of w.
    pub fn leading_w_row(&self) -> &UniPoly {
        self.w_rows.last().expect("non-empty by construction")
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.w_rows
            .iter()
            .map(|r| r.max_coeff_norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> BiPoly {
        BiPoly::new(self.w_rows.iter().map(|r| r.scale(s)).collect())
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let n = self.w_rows.len().max(other.w_rows.len());
        let mut rows = vec![UniPoly::zero(); n];
        for (j, r) in self.w_rows.iter().enumerate() {
            rows[j] = rows[j].add(r);
        }
        for (j, r) in other.w_rows.iter().enumerate() {
            rows[j] = rows[j].add(r);
        }
        BiPoly::new(rows)
    }

    /// Product of two bivariate polynomials (convolution over w-rows).
    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        if self.is_zero() || other.is_zero() {
            return BiPoly::zero();
        }
        let n = self.deg_w() + other.deg_w() + 1;
        let mut rows = vec![UniPoly::zero(); n];
        for (j1, r1) in self.w_rows.iter().enumerate() {
            if r1.is_zero() {
                continue;
            }
            for (j2, r2) in other.w_rows.iter().enumerate() {
                if r2.is_zero() {
                    continue;
                }
                rows[j1 + j2] = rows[j1 + j2].add(&r1.mul(r2));
            }
        }
        BiPoly::new(rows)
    }

    pub fn is_zero(&self) -> bool {
        self.w_rows.len() == 1 && self.w_rows[0].is_zero()
    }

    /// Horner evaluation, outer loop over w.
    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for row in self.w_rows.iter().rev() {
            acc = acc * w + row.eval(z);
        }
        acc
    }

    /// Scaled evaluation for points where plain f64 range is insufficient.
    pub fn eval_scaled(&self, z: Complex64, w: Complex64) -> Scaled {
        let mut acc = Scaled::zero();
        for row in self.w_rows.iter().rev() {
            acc = acc.mul_value(w).add(row.eval_scaled(z));
        }
        acc
    }

    /// Coefficients of the univariate polynomial `w -> p(z0, w)`.
    pub fn fiber_coeffs(&self, z0: Complex64) -> Vec<Complex64> {
        self.w_rows.iter().map(|r| r.eval(z0)).collect()
    }

    /// Partial derivative with respect to w.
    pub fn derivative_w(&self) -> BiPoly {
        if self.deg_w() == 0 {
            return BiPoly::zero();
        }
        let rows = self
            .w_rows
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, r)| r.scale(Complex64::new(j as f64, 0.0)))
            .collect();
        BiPoly::new(rows)
    }

    /// Monic-in-w normalization: requires the leading w-row to be a nonzero
    /// constant, which holds for every stage polynomial of the recursion.
    pub fn monic_in_w(&self) -> Result<BiPoly> {
        let lead = self.leading_w_row();
        if lead.degree() != 0 {
            return Err(Error::Degenerate(
                "leading w-coefficient is not constant in z".into(),
            ));
        }
        let c = lead.coeffs[0];
        if c.norm_sqr() == 0.0 {
            return Err(Error::Degenerate("leading w-coefficient vanishes".into()));
        }
        Ok(self.scale(Complex64::new(1.0, 0.0) / c))
    }

    /// Build from a univariate polynomial in w (constant in z).
    pub fn from_w_poly(coeffs: &[Complex64]) -> BiPoly {
        BiPoly::new(coeffs.iter().map(|&c| UniPoly::constant(c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// w^2 - (z - a1)
    fn p1(a1: Complex64) -> BiPoly {
        BiPoly::new(vec![
            UniPoly::new(vec![a1, c(-1.0, 0.0)]),
            UniPoly::zero(),
            UniPoly::one(),
        ])
    }

    #[test]
    fn eval_examples() {
        // Spec examples for poly_eval with a1 = 0.
        let p = p1(c(0.0, 0.0));
        assert!(p.eval(c(1.0, 0.0), c(1.0, 0.0)).norm() < 1e-15);
        assert!(p.eval(c(0.0, 0.0), c(0.0, 0.0)).norm() < 1e-15);
        let v = p.eval(c(2.0, 1.0), c(0.0, 0.0));
        assert!((v - c(-2.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn degrees_are_tight() {
        let p = BiPoly::new(vec![UniPoly::one(), UniPoly::zero(), UniPoly::zero()]);
        assert_eq!(p.deg_w(), 0);
        let q = p1(c(0.5, 0.0));
        assert_eq!(q.deg_w(), 2);
        assert_eq!(q.deg_z(), 1);
    }

    #[test]
    fn mul_matches_eval() {
        let p = p1(c(0.0, 0.0));
        let q = p1(c(1.0, 0.0));
        let r = p.mul(&q);
        let (z, w) = (c(0.3, 0.7), c(-1.2, 0.4));
        let direct = p.eval(z, w) * q.eval(z, w);
        assert!((r.eval(z, w) - direct).norm() < 1e-13);
        assert_eq!(r.deg_w(), 4);
    }

    #[test]
    fn derivative_w_of_p1() {
        let p = p1(c(0.0, 0.0));
        let d = p.derivative_w();
        // d/dw (w^2 - z) = 2w
        assert_eq!(d.deg_w(), 1);
        assert!((d.eval(c(5.0, 0.0), c(3.0, 0.0)) - c(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn monic_requires_constant_lead() {
        let bad = BiPoly::new(vec![UniPoly::zero(), UniPoly::new(vec![c(0.0, 0.0), c(1.0, 0.0)])]);
        assert!(bad.monic_in_w().is_err());
        let good = p1(c(0.0, 0.0)).scale(c(2.0, 0.0));
        let m = good.monic_in_w().unwrap();
        assert!((m.leading_w_row().coeffs[0] - c(1.0, 0.0)).norm() < 1e-15);
    }
}
