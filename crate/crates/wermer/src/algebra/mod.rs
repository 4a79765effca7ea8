//! Exact bivariate polynomial arithmetic, radical-adjoined expansion,
//! discriminants, and robust simultaneous root finding.

pub mod bipoly;
pub mod radical;
pub mod resultant;
pub mod roots;
pub mod unipoly;

pub use bipoly::BiPoly;
pub use radical::shift_product;
pub use resultant::{
    analytic_roots, discriminant_in_w, interpolate_on_circle, resultant_degree_bound,
    sylvester_det_at,
};
pub use roots::{roots_in_w, roots_in_w_tol, uni_roots, RootSet, DEFAULT_CLUSTER_TOL};
pub use unipoly::{ldexp, Scaled, UniPoly};

use num_complex::Complex64;

/// Horner-style evaluation of a bivariate polynomial.
pub fn poly_eval(p: &BiPoly, z: Complex64, w: Complex64) -> Complex64 {
    p.eval(z, w)
}

/// Coefficient convolution. Naive below a size threshold (preserving the
/// relative accuracy of small coefficients), FFT above it where the stage-5
/// sizes would make the quadratic cost prohibitive.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let out_len = a.len() + b.len() - 1;
    if a.len().saturating_mul(b.len()) <= 1 << 22 {
        let mut out = vec![Complex64::new(0.0, 0.0); out_len];
        for (i, x) in a.iter().enumerate() {
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = vec![Complex64::new(0.0, 0.0); n];
    fa[..a.len()].copy_from_slice(a);
    fb[..b.len()].copy_from_slice(b);
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = 1.0 / n as f64;
    fa.truncate(out_len);
    fa.iter().map(|c| c * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_convolution_matches_naive() {
        let a: Vec<Complex64> = (0..700)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
            .collect();
        let b: Vec<Complex64> = (0..600)
            .map(|k| Complex64::new((k as f64 * 0.23).cos(), (k as f64 * 0.41).sin()))
            .collect();
        let naive = {
            let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let fast = convolve(&a, &b);
        let worst = naive
            .iter()
            .zip(&fast)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "conv mismatch {worst:.2e}");
    }
}
