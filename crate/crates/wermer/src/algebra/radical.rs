//! Radical-adjoined expansion: the product over both square roots of the
//! shift polynomial, reduced back to a genuine bivariate polynomial.

use num_complex::Complex64;

use super::bipoly::BiPoly;
use super::unipoly::UniPoly;
use crate::error::{Error, Result};

const ODD_RESIDUE_TOL: f64 = 1e-8;

/// Element of C[z,w][A] / (A^2 - S): `even + odd * A`.
#[derive(Clone)]
struct RadicalPair {
    even: BiPoly,
    odd: BiPoly,
}

impl RadicalPair {
    fn zero() -> Self {
        RadicalPair {
            even: BiPoly::zero(),
            odd: BiPoly::zero(),
        }
    }

    /// Multiply by (w + sign*A), reducing A^2 to S.
    fn mul_w_plus_signed_radical(&self, sign: f64, s: &UniPoly) -> RadicalPair {
        let even_w = mul_by_w(&self.even);
        let odd_w = mul_by_w(&self.odd);
        let odd_s = mul_rows(&self.odd, s).scale(Complex64::new(sign, 0.0));
        let even_signed = self.even.scale(Complex64::new(sign, 0.0));
        RadicalPair {
            even: even_w.add(&odd_s),
            odd: odd_w.add(&even_signed),
        }
    }

    fn add_scalar_row(&self, row: &UniPoly) -> RadicalPair {
        let mut even = self.even.clone();
        even = even.add(&BiPoly::new(vec![row.clone()]));
        RadicalPair {
            even,
            odd: self.odd.clone(),
        }
    }
}

fn mul_by_w(p: &BiPoly) -> BiPoly {
    if p.is_zero() {
        return BiPoly::zero();
    }
    let mut rows = Vec::with_capacity(p.w_rows.len() + 1);
    rows.push(UniPoly::zero());
    rows.extend(p.w_rows.iter().cloned());
    BiPoly::new(rows)
}

fn mul_rows(p: &BiPoly, s: &UniPoly) -> BiPoly {
    BiPoly::new(p.w_rows.iter().map(|r| r.mul(s)).collect())
}

/// Substitute w -> w + sign*A into the monic polynomial, by Horner over the
/// w-rows inside the quotient ring.
fn substitute(p: &BiPoly, sign: f64, s: &UniPoly) -> RadicalPair {
    let mut acc = RadicalPair::zero();
    for row in p.w_rows.iter().rev() {
        acc = acc.mul_w_plus_signed_radical(sign, s);
        acc = acc.add_scalar_row(row);
    }
    acc
}

/// The reduced product `ptilde(z, w - cA) * ptilde(z, w + cA)` with
/// `A^2 = R(z)` and `ptilde = p / lead(p)`.
///
/// Its roots in w at any z are `w_j(z) +/- c A(z)` over both square roots of
/// R(z); the doubled degree is exact and all odd powers of A cancel. A
/// residual odd coefficient above tolerance signals a bookkeeping bug and is
/// rejected.
pub fn shift_product(p: &BiPoly, c: f64, big_r: &UniPoly) -> Result<BiPoly> {
    if c < 0.0 {
        return Err(Error::Degenerate("shift constant must be nonnegative".into()));
    }
    let ptilde = p.monic_in_w()?;
    // S = c^2 R, the square of the full shift c*A.
    let s = big_r.scale(Complex64::new(c * c, 0.0));

    let minus = substitute(&ptilde, -1.0, &s);
    let plus = substitute(&ptilde, 1.0, &s);

    // (P1 + Q1 A)(P2 + Q2 A) = (P1 P2 + Q1 Q2 S) + (P1 Q2 + Q1 P2) A
    let even = minus.even.mul(&plus.even).add(&mul_rows(&minus.odd.mul(&plus.odd), &s));
    let odd = minus.even.mul(&plus.odd).add(&minus.odd.mul(&plus.even));

    let even_scale = even.max_coeff_norm();
    let odd_scale = odd.max_coeff_norm();
    if odd_scale > ODD_RESIDUE_TOL * even_scale {
        return Err(Error::NonPolynomialResidue {
            max_residue: odd_scale,
            tol: ODD_RESIDUE_TOL * even_scale,
        });
    }
    if !even_scale.is_finite() {
        return Err(Error::Degenerate(
            "shift product overflowed f64 range".into(),
        ));
    }

    let expected_deg = 2 * p.deg_w();
    if even.deg_w() != expected_deg {
        return Err(Error::Degenerate(format!(
            "shift product degree {} differs from expected {}",
            even.deg_w(),
            expected_deg
        )));
    }
    // The product of two monic substitutions is monic; renormalize the
    // rounding remnant away so downstream degree bookkeeping stays exact.
    even.monic_in_w()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// w^2 - (z - a1)
    fn stage1(a1: Complex64) -> BiPoly {
        BiPoly::new(vec![
            UniPoly::new(vec![a1, c64(-1.0, 0.0)]),
            UniPoly::zero(),
            UniPoly::one(),
        ])
    }

    /// R_1 = (z - a1)^2 (z - a2)
    fn r1(a1: Complex64, a2: Complex64) -> UniPoly {
        UniPoly::from_roots(&[(a1, 2), (a2, 1)])
    }

    #[test]
    fn binomial_expansion_of_stage_one() {
        // p = w^2 - (z-a1) -> (w^2 + c^2 R - (z-a1))^2 - 4 c^2 R w^2
        let a1 = c64(0.0, 0.0);
        let a2 = c64(1.0, 0.0);
        let r = r1(a1, a2);
        let c = 0.05;
        let out = shift_product(&stage1(a1), c, &r).unwrap();
        assert_eq!(out.deg_w(), 4);
        for (zr, zi, wr, wi) in [
            (0.3, 0.2, 0.7, -0.4),
            (-1.2, 0.5, 0.1, 0.9),
            (1.7, -0.8, -0.6, 0.2),
        ] {
            let z = c64(zr, zi);
            let w = c64(wr, wi);
            let rv = r.eval(z);
            let inner = w * w + rv * (c * c) - z;
            let expected = inner * inner - rv * w * w * (4.0 * c * c);
            let got = out.eval(z, w);
            assert!(
                (got - expected).norm() <= 1e-12 * (1.0 + expected.norm()),
                "mismatch at z={z} w={w}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn zero_shift_squares_the_input() {
        let a1 = c64(0.25, -0.5);
        let p = stage1(a1);
        let r = r1(a1, c64(1.0, 1.0));
        let out = shift_product(&p, 0.0, &r).unwrap();
        let sq = p.mul(&p);
        let (z, w) = (c64(0.4, 0.1), c64(-0.3, 0.8));
        assert!((out.eval(z, w) - sq.eval(z, w)).norm() < 1e-12);
    }

    #[test]
    fn roots_are_shifted_pairs() {
        // Roots of the product at z are w_j(z) +/- c sqrt(R(z)).
        let a1 = c64(0.0, 0.0);
        let a2 = c64(1.0, 0.0);
        let r = r1(a1, a2);
        let cshift = 0.04;
        let out = shift_product(&stage1(a1), cshift, &r).unwrap();
        let z = c64(0.8, 0.35);
        let base = z.sqrt();
        let shift = r.eval(z).sqrt() * cshift;
        let expected = [base + shift, base - shift, -base + shift, -base - shift];
        let rs = crate::algebra::roots::roots_in_w(&out, z).unwrap();
        let got = rs.expanded();
        assert_eq!(got.len(), 4);
        for e in expected {
            let best = got.iter().map(|g| (g - e).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-8, "expected root {e} missing (err {best:.2e})");
        }
    }
}
