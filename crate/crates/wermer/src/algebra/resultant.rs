//! Resultants and discriminants in w via Sylvester determinants evaluated on
//! circles, recovered by FFT interpolation.
//!
//! Stage polynomials carry collision zeros spread over several orders of
//! magnitude in |z|, so a single interpolation circle cannot resolve the
//! whole root set; `analytic_roots` sweeps a ladder of circle radii and
//! keeps residual-validated roots from the annulus each circle resolves.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::bipoly::BiPoly;
use super::roots::all_roots;
use super::unipoly::{Scaled, UniPoly};
use crate::error::{Error, Result};

/// Sylvester-matrix determinant of Res_w(p, q) at a fixed z, with row
/// scaling so magnitudes far outside f64 range survive.
pub fn sylvester_det_at(p: &BiPoly, q: &BiPoly, z: Complex64) -> Scaled {
    let pc = p.fiber_coeffs(z);
    let qc = q.fiber_coeffs(z);
    let m = pc.len() - 1;
    let n = qc.len() - 1;
    let size = m + n;
    if size == 0 {
        return Scaled::one();
    }
    // Row i < n: coefficients of w^(n-1-i) * p, descending powers.
    // Row n + i (i < m): likewise for q.
    let mut a = vec![Complex64::new(0.0, 0.0); size * size];
    for i in 0..n {
        for (k, coef) in pc.iter().rev().enumerate() {
            a[i * size + i + k] = *coef;
        }
    }
    for i in 0..m {
        for (k, coef) in qc.iter().rev().enumerate() {
            a[(n + i) * size + i + k] = *coef;
        }
    }

    // Normalize rows, remembering the removed scale.
    let mut det = Scaled::one();
    for i in 0..size {
        let row = &mut a[i * size..(i + 1) * size];
        let mx = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if mx == 0.0 {
            return Scaled::zero();
        }
        for v in row.iter_mut() {
            *v /= mx;
        }
        det = det.mul_value(Complex64::new(mx, 0.0));
    }

    // LU with partial pivoting.
    let mut sign = Complex64::new(1.0, 0.0);
    for col in 0..size {
        let mut pivot = col;
        let mut best = 0.0;
        for r in col..size {
            let v = a[r * size + col].norm_sqr();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == 0.0 {
            return Scaled::zero();
        }
        if pivot != col {
            for k in 0..size {
                a.swap(col * size + k, pivot * size + k);
            }
            sign = -sign;
        }
        let diag = a[col * size + col];
        det = det.mul_value(diag);
        for r in (col + 1)..size {
            let factor = a[r * size + col] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in col..size {
                let v = a[col * size + k];
                a[r * size + k] -= factor * v;
            }
        }
    }
    det.mul_value(sign)
}

/// Upper bound for the z-degree of Res_w(p, q).
pub fn resultant_degree_bound(p: &BiPoly, q: &BiPoly) -> usize {
    p.deg_z() * q.deg_w() + q.deg_z() * p.deg_w()
}

/// Interpolate an analytic function known to be a polynomial of degree at
/// most `deg` from samples on the circle of the given radius.
///
/// Returns the radius-normalized polynomial `g(x) = f(radius * x) / scale`
/// together with `ln(scale)`; the coefficients of g are O(1) where f's mass
/// lives on the sampling circle.
pub fn interpolate_on_circle<F>(f: F, radius: f64, deg: usize) -> (UniPoly, f64)
where
    F: Fn(Complex64) -> Scaled + Sync,
{
    let n = (deg + 1).next_power_of_two().max(8);
    let samples: Vec<Scaled> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            f(Complex64::from_polar(radius, theta))
        })
        .collect();
    let ln_max = samples
        .iter()
        .map(|s| s.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if ln_max == f64::NEG_INFINITY {
        return (UniPoly::zero(), 0.0);
    }
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|s| {
            if s.is_zero() {
                Complex64::new(0.0, 0.0)
            } else {
                let ln = s.ln_abs() - ln_max;
                if ln < -700.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let unit = s.mantissa / s.mantissa.norm();
                    unit * ln.exp()
                }
            }
        })
        .collect();
    // c_j r^j = (1/N) sum_k f(r w^k) e^{-2 pi i jk/N}: the forward DFT.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut buf);
    let scale = 1.0 / n as f64;
    let coeffs: Vec<Complex64> = buf.iter().take(deg + 1).map(|c| c * scale).collect();
    (UniPoly::new(coeffs), ln_max)
}

/// Discriminant of p with respect to w: Res_w(p, dp/dw) as a univariate
/// polynomial in z. Zero set = {z : p(z, .) has a repeated root}.
///
/// The dense return is interpolated on a single circle and is reliable for
/// the moderate stage degrees the contract exercises; collision-zero
/// extraction goes through `analytic_roots`, which resolves all scales.
pub fn discriminant_in_w(p: &BiPoly) -> Result<UniPoly> {
    if p.deg_w() < 2 {
        return Err(Error::Degenerate(
            "discriminant needs deg_w >= 2".into(),
        ));
    }
    let dw = p.derivative_w();
    let deg = resultant_degree_bound(p, &dw);
    let (g, ln_scale) = interpolate_on_circle(
        |z| sylvester_det_at(p, &dw, z),
        DISC_CONTRACT_RADIUS,
        deg,
    );
    // Undo the radius normalization: c_k = g_k * scale / r^k.
    let scale = ln_scale.exp();
    let mut coeffs = Vec::with_capacity(g.coeffs.len());
    let mut rk = 1.0;
    for c in &g.coeffs {
        coeffs.push(c * (scale / rk));
        rk *= DISC_CONTRACT_RADIUS;
    }
    Ok(UniPoly::new(coeffs))
}

const DISC_CONTRACT_RADIUS: f64 = 2.0;

/// Noise floor (relative to the largest interpolated coefficient) below
/// which circle coefficients are treated as rounding residue.
const COEFF_NOISE_FLOOR: f64 = 3e-13;

/// Window of |x| (root of the radius-normalized polynomial) a circle is
/// trusted to resolve.
const WINDOW_LO: f64 = 1.0 / 2.8;
const WINDOW_HI: f64 = 2.8;

/// Roots of an analytic function that is secretly a polynomial of degree at
/// most `deg`, found by sweeping interpolation circles over a radius ladder.
/// Roots are deduplicated across circles and validated against the original
/// function (the value at a claimed root must be far below the median value
/// on a small surrounding ring).
pub fn analytic_roots<F>(f: F, deg: usize, min_radius: f64, max_radius: f64) -> Vec<Complex64>
where
    F: Fn(Complex64) -> Scaled + Sync,
{
    let mut found: Vec<Complex64> = Vec::new();
    let mut radius = min_radius;
    let mut consecutive_empty = 0;
    while radius <= max_radius * 1.0001 {
        let (g, _) = interpolate_on_circle(&f, radius, deg);
        let candidates = circle_window_roots(&g);
        let mut new_on_circle = 0;
        for x in candidates {
            let z = x * radius;
            if found
                .iter()
                .any(|r| (r - z).norm() <= 1e-5 * (1.0 + z.norm()))
            {
                continue;
            }
            if validate_root(&f, z, radius) {
                found.push(z);
                new_on_circle += 1;
            }
        }
        // Scale gaps between collision clusters can span several octaves;
        // only stop after a long run of circles that resolve nothing new.
        if new_on_circle == 0 && !found.is_empty() {
            consecutive_empty += 1;
            if consecutive_empty >= 7 {
                break;
            }
        } else {
            consecutive_empty = 0;
        }
        radius *= 2.0;
    }
    found.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    found
}

fn circle_window_roots(g: &UniPoly) -> Vec<Complex64> {
    let mx = g.max_coeff_norm();
    if mx == 0.0 {
        return Vec::new();
    }
    // Trim trailing coefficients below the interpolation noise floor; the
    // roots they encode live outside this circle's window anyway.
    let mut coeffs = g.coeffs.clone();
    while coeffs.len() > 1
        && coeffs.last().map_or(false, |c| c.norm() < COEFF_NOISE_FLOOR * mx)
    {
        coeffs.pop();
    }
    if coeffs.len() <= 1 {
        return Vec::new();
    }
    match all_roots(&coeffs) {
        Ok(roots) => roots
            .into_iter()
            .filter(|x| {
                let a = x.norm();
                (WINDOW_LO..=WINDOW_HI).contains(&a)
            })
            .collect(),
        Err(_) => Vec::new(),
    }
}

fn validate_root<F>(f: &F, z: Complex64, radius: f64) -> bool
where
    F: Fn(Complex64) -> Scaled + Sync,
{
    let d = 1e-3 * radius;
    let mut ring: Vec<f64> = (0..8)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 8.0;
            f(z + Complex64::from_polar(d, theta)).ln_abs()
        })
        .collect();
    ring.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = 0.5 * (ring[3] + ring[4]);
    let at_root = f(z).ln_abs();
    at_root < median - 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::roots::{uni_roots, DEFAULT_CLUSTER_TOL};

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn stage1(a1: Complex64) -> BiPoly {
        BiPoly::new(vec![
            UniPoly::new(vec![a1, c64(-1.0, 0.0)]),
            UniPoly::zero(),
            UniPoly::one(),
        ])
    }

    #[test]
    fn quadratic_discriminant_is_linear() {
        // disc of w^2 - (z - a1) = nonzero constant * (z - a1).
        let a1 = c64(0.3, -0.4);
        let d = discriminant_in_w(&stage1(a1)).unwrap();
        assert_eq!(d.degree(), 1);
        assert!(d.eval(a1).norm() < 1e-9 * d.max_coeff_norm());
        let rs = uni_roots(&d, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert!((rs.roots[0] - a1).norm() < 1e-9);
    }

    #[test]
    fn generic_fiber_has_nonzero_discriminant() {
        let a1 = c64(0.0, 0.0);
        let d = discriminant_in_w(&stage1(a1)).unwrap();
        for z in [c64(1.0, 0.0), c64(0.5, 0.7), c64(-1.3, 0.2)] {
            assert!(d.eval(z).norm() > 1e-6 * d.max_coeff_norm());
        }
    }

    #[test]
    fn sylvester_of_known_resultant() {
        // Res_w(w^2 - z, 2w) = -4z (up to sign): vanishes exactly at z = 0.
        let p = stage1(c64(0.0, 0.0));
        let dw = p.derivative_w();
        let at_zero = sylvester_det_at(&p, &dw, c64(0.0, 0.0));
        assert!(at_zero.is_zero() || at_zero.ln_abs() < -25.0);
        let at_one = sylvester_det_at(&p, &dw, c64(1.0, 0.0));
        assert!((at_one.value().norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn analytic_roots_across_scales() {
        // Polynomial with roots at wildly different magnitudes.
        let roots = [c64(0.5, 0.0), c64(-3.0, 1.0), c64(40.0, -25.0), c64(250.0, 10.0)];
        let p = UniPoly::from_roots(&roots.iter().map(|&r| (r, 1)).collect::<Vec<_>>());
        let found = analytic_roots(|z| p.eval_scaled(z), p.degree(), 0.25, 4096.0);
        assert_eq!(found.len(), roots.len(), "found {found:?}");
        for r in roots {
            let best = found.iter().map(|g| (g - r).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-5 * (1.0 + r.norm()), "missed {r}, err {best:.2e}");
        }
    }

    #[test]
    fn analytic_roots_with_multiplicity() {
        let p = UniPoly::from_roots(&[(c64(1.5, 0.5), 2), (c64(-20.0, 0.0), 1)]);
        let found = analytic_roots(|z| p.eval_scaled(z), p.degree(), 0.25, 1024.0);
        // The double root appears once (locations only).
        assert!(found.iter().any(|r| (r - c64(1.5, 0.5)).norm() < 1e-4));
        assert!(found.iter().any(|r| (r - c64(-20.0, 0.0)).norm() < 1e-4));
    }
}
